//! `homoglyph` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.
//! Failures print a single `error: <kind>: <message>` line on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use homoglyph_core::glyphs::{self, filename_for_char, load_glyph_dir, save_pgm, DEFAULT_SIDE};
use homoglyph_core::knn::DEFAULT_K;
use homoglyph_core::linkage::{decisions_tsv, parse_decisions, parse_lines, parse_truth, truth_tsv};
use homoglyph_core::{
    build_table, edit_distance_str, evaluate, make_corpus, match_all, normalized_distance, toy, CorruptionConfig,
    Costs, Embeddings, Error, Homoglyphs, KeySet, MatchMethod, Matcher, StrokeTable, Unclamped,
};

#[derive(Debug, Parser)]
#[command(
    name = "homoglyph",
    version,
    about = "Homoglyph-aware string matching for record linkage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed a directory of U+XXXX.pgm glyph bitmaps as an embedding TSV.
    EmbedRaster {
        #[arg(long)]
        glyph_dir: PathBuf,
        /// Side of the square canvas glyphs are normalized to.
        #[arg(long, default_value_t = DEFAULT_SIDE)]
        side: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a k-nearest-neighbour homoglyph table from an embedding TSV.
    BuildTable {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the edit distance between two strings.
    Dist {
        a: String,
        b: String,
        /// Homoglyph table; without one the distance is classic Levenshtein.
        #[arg(long)]
        table: Option<PathBuf>,
        #[command(flatten)]
        costs: CostArgs,
        /// Divide by max(length) * max(cost).
        #[arg(long)]
        normalized: bool,
    },
    /// Match every query line to its best key line.
    Match(MatchArgs),
    /// Score a decisions file against a truth file.
    Eval {
        #[arg(long)]
        decisions: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        keys: PathBuf,
        /// Summary report TSV.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-query TSV: query, matched key, true key, score, correct.
        #[arg(long)]
        per_query: Option<PathBuf>,
    },
    /// Generate a synthetic query/key/truth corpus from clean strings.
    Synth(SynthArgs),
    /// Write the procedural toy glyph set, its stroke table and clean names.
    ToyFixture {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of clean names.
        #[arg(long, default_value_t = 1000)]
        names: usize,
        /// Size of the syllable inventory names are built from.
        #[arg(long, default_value_t = 12)]
        inventory: usize,
        #[arg(long, default_value_t = 4)]
        syllables: usize,
    },
}

#[derive(Debug, Args)]
struct CostArgs {
    /// Substitution cost scale.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    insert: f64,
    #[arg(long, default_value_t = 1.0)]
    delete: f64,
    /// Let negative similarities raise substitution cost above lambda.
    #[arg(long)]
    unclamped: bool,
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    keys: PathBuf,
    /// classic-lev, homoglyphic-lev, simstring-{cosine,dice,jaccard}, fuzzy-stroke, fuzzy-char.
    #[arg(long)]
    method: String,
    /// Homoglyph table (homoglyphic-lev).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Stroke table (fuzzy-stroke).
    #[arg(long)]
    strokes: Option<PathBuf>,
    /// n-gram size [default: 2 for simstring-*, 3 for fuzzy-*].
    #[arg(long)]
    n: Option<usize>,
    /// Boundary padding [default: true for simstring-*, false for fuzzy-*].
    #[arg(long)]
    pad: Option<bool>,
    #[command(flatten)]
    costs: CostArgs,
    /// Matcher threads; 0 uses all cores.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Decisions TSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Clean strings, one per line.
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    table: PathBuf,
    /// Writes <prefix>.queries.txt, <prefix>.keys.txt and <prefix>.truth.tsv.
    #[arg(long)]
    out_prefix: PathBuf,
    /// key = value file with seed, sub_rate, ins_rate, del_rate, homoglyph_bias, alphabet.
    #[arg(long, conflicts_with_all = ["seed", "sub_rate", "ins_rate", "del_rate", "bias", "alphabet"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.15)]
    sub_rate: f64,
    #[arg(long, default_value_t = 0.03)]
    ins_rate: f64,
    #[arg(long, default_value_t = 0.03)]
    del_rate: f64,
    /// Exponent on neighbour similarity when sampling substitutions.
    #[arg(long, default_value_t = 4.0)]
    bias: f64,
    /// Insertion/fallback characters [default: characters of the clean strings].
    #[arg(long)]
    alphabet: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string().replace('\n', " ");
        match e {
            Error::Config(_) => Failure::Usage(msg),
            _ => Failure::Data(msg),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::from(Error::from(e).in_file(path)))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::from(Error::from(e).in_file(path)))
}

fn check_input(path: &Path) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{}: no such input file", path.display())))
    }
}

fn check_output(path: &Path) -> CmdResult {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "{}: output directory does not exist",
            parent.display()
        )))
    }
}

fn load_homoglyphs(path: &Path) -> Result<Homoglyphs, Failure> {
    Homoglyphs::parse(&read(path)?).map_err(|e| e.in_file(path).into())
}

fn cost_model<'a>(
    args: &CostArgs,
    table: Option<&'a Homoglyphs>,
    unclamped: &'a Option<Unclamped<'a, f64>>,
) -> Result<Costs<'a>, Failure> {
    for (name, v) in [
        ("lambda", args.lambda),
        ("insert", args.insert),
        ("delete", args.delete),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Failure::Usage(format!("--{name} must be a non-negative number")));
        }
    }
    let base = match (table, unclamped) {
        (_, Some(u)) => Costs::homoglyphic(u),
        (Some(t), None) => Costs::homoglyphic(t),
        (None, None) => Costs::classic(),
    };
    Ok(base.with_costs(args.lambda, args.insert, args.delete))
}

fn embed_raster(glyph_dir: &Path, side: usize, out: &Path) -> CmdResult {
    if !glyph_dir.is_dir() {
        return Err(Failure::Usage(format!("{}: not a directory", glyph_dir.display())));
    }
    check_output(out)?;
    if side == 0 || side > glyphs::MAX_SIDE {
        return Err(Failure::Usage(format!("--side must be in 1..={}", glyphs::MAX_SIDE)));
    }
    let bitmaps = load_glyph_dir(glyph_dir)?;
    let mut table = Embeddings::new(side * side)?;
    for g in &bitmaps {
        let path = glyph_dir.join(filename_for_char(g.ch()));
        let v = glyphs::raster_embed(g, side).map_err(|e| e.in_file(&path))?;
        table.insert(g.ch(), v)?;
    }
    write(out, table.to_tsv())
}

fn build(embeddings: &Path, k: usize, out: &Path) -> CmdResult {
    check_input(embeddings)?;
    check_output(out)?;
    if k == 0 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    let table = Embeddings::parse(&read(embeddings)?).map_err(|e| e.in_file(embeddings))?;
    write(out, build_table(&table, k)?.to_tsv())
}

fn dist(a: &str, b: &str, table: Option<&Path>, costs: &CostArgs, normalized: bool) -> CmdResult {
    if let Some(t) = table {
        check_input(t)?;
    }
    let table = table.map(load_homoglyphs).transpose()?;
    let unclamped = match (&table, costs.unclamped) {
        (Some(t), true) => Some(Unclamped(t)),
        _ => None,
    };
    let model = cost_model(costs, table.as_ref(), &unclamped)?;
    let value = if normalized {
        let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        normalized_distance(&a, &b, &model)
    } else {
        edit_distance_str(a, b, &model)
    };
    println!("{value}");
    Ok(())
}

fn run_match(args: &MatchArgs) -> CmdResult {
    let method: MatchMethod = args.method.parse()?;
    check_input(&args.queries)?;
    check_input(&args.keys)?;
    for p in args.table.iter().chain(&args.strokes) {
        check_input(p)?;
    }
    check_output(&args.out)?;
    if method == MatchMethod::HomoglyphicLev && args.table.is_none() {
        return Err(Failure::Usage("homoglyphic-lev requires --table".into()));
    }
    if method == MatchMethod::FuzzyStroke && args.strokes.is_none() {
        return Err(Failure::Usage("fuzzy-stroke requires --strokes".into()));
    }

    let table = args.table.as_deref().map(load_homoglyphs).transpose()?;
    let strokes = match &args.strokes {
        Some(p) => Some(StrokeTable::parse(&read(p)?).map_err(|e| e.in_file(p))?),
        None => None,
    };
    let queries = parse_lines(&read(&args.queries)?);
    let keys = KeySet::new(parse_lines(&read(&args.keys)?)).map_err(|e| e.in_file(&args.keys))?;

    let mut cfg = Matcher::new(method).with_workers(args.workers);
    cfg.lambda = args.costs.lambda;
    cfg.insert_cost = args.costs.insert;
    cfg.delete_cost = args.costs.delete;
    cfg.unclamped = args.costs.unclamped;
    cfg.homoglyphs = table.as_ref();
    cfg.strokes = strokes.as_ref();
    cfg.n = args.n;
    cfg.pad = args.pad;
    let decisions = match_all(&queries, &keys, &cfg)?;
    write(&args.out, decisions_tsv(&decisions, &keys))
}

fn eval(decisions: &Path, truth: &Path, keys: &Path, out: &Path, per_query: Option<&Path>) -> CmdResult {
    for p in [decisions, truth, keys] {
        check_input(p)?;
    }
    check_output(out)?;
    if let Some(p) = per_query {
        check_output(p)?;
    }
    let keys_set = KeySet::new(parse_lines(&read(keys)?)).map_err(|e| e.in_file(keys))?;
    let decided = parse_decisions::<f64>(&read(decisions)?, &keys_set).map_err(|e| e.in_file(decisions))?;
    let truth_rows = parse_truth(&read(truth)?).map_err(|e| e.in_file(truth))?;
    let report = evaluate(&decided, &keys_set, &truth_rows)?;
    write(out, report.summary_tsv())?;
    if let Some(p) = per_query {
        write(p, report.per_query_tsv())?;
    }
    print!("{}", report.summary_tsv());
    Ok(())
}

fn synth(args: &SynthArgs) -> CmdResult {
    check_input(&args.clean)?;
    check_input(&args.table)?;
    if let Some(c) = &args.config {
        check_input(c)?;
    }
    let prefix = args.out_prefix.to_string_lossy().into_owned();
    let outputs = ["queries.txt", "keys.txt", "truth.tsv"].map(|s| PathBuf::from(format!("{prefix}.{s}")));
    for o in &outputs {
        check_output(o)?;
    }

    let clean = parse_lines(&read(&args.clean)?);
    let table = load_homoglyphs(&args.table)?;
    let mut cfg = match &args.config {
        Some(path) => CorruptionConfig::from_toml(&read(path)?).map_err(|e| e.in_file(path))?,
        None => CorruptionConfig {
            seed: args.seed,
            sub_rate: args.sub_rate,
            ins_rate: args.ins_rate,
            del_rate: args.del_rate,
            homoglyph_bias: args.bias,
            alphabet: args.alphabet.as_deref().unwrap_or_default().chars().collect(),
        },
    };
    cfg = if cfg.alphabet.is_empty() {
        cfg.with_alphabet(clean.iter().flat_map(|s| s.chars()))
    } else {
        let a = cfg.alphabet.clone();
        cfg.with_alphabet(a)
    };
    let corpus = make_corpus(&clean, &table, &cfg)?;
    write(
        &outputs[0],
        corpus.queries.iter().map(|q| format!("{q}\n")).collect::<String>(),
    )?;
    write(
        &outputs[1],
        corpus.keys.iter().map(|k| format!("{k}\n")).collect::<String>(),
    )?;
    write(&outputs[2], truth_tsv(&corpus.truth))?;
    println!(
        "entities\t{}\nkept\t{}\ndropped\t{}\nkeys\t{}",
        clean.len(),
        corpus.truth.len(),
        corpus.dropped,
        corpus.keys.len()
    );
    Ok(())
}

fn toy_fixture(out_dir: &Path, seed: u64, names: usize, inventory: usize, syllables: usize) -> CmdResult {
    if inventory == 0 || syllables == 0 || (inventory as f64).powi(syllables as i32) < names as f64 {
        return Err(Failure::Usage(format!(
            "{inventory} syllables of which {syllables} per name cannot give {names} distinct names"
        )));
    }
    let glyph_dir = out_dir.join("glyphs");
    fs::create_dir_all(&glyph_dir).map_err(|e| Failure::from(Error::from(e).in_file(&glyph_dir)))?;
    for g in toy::glyphs(seed) {
        write(&glyph_dir.join(filename_for_char(g.ch())), save_pgm(&g))?;
    }
    let strokes = toy::strokes(seed)?;
    let mut stroke_rows = String::new();
    for ch in toy::charset() {
        stroke_rows += &format!("{ch}\t{}\n", strokes.get(ch).expect("toy char").join(","));
    }
    write(&out_dir.join("strokes.tsv"), stroke_rows)?;
    let clean = toy::names(seed, names, &toy::charset(), inventory, syllables);
    write(
        &out_dir.join("clean.txt"),
        clean.iter().map(|n| format!("{n}\n")).collect::<String>(),
    )
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::EmbedRaster { glyph_dir, side, out } => embed_raster(&glyph_dir, side, &out),
        Command::BuildTable { embeddings, k, out } => build(&embeddings, k, &out),
        Command::Dist {
            a,
            b,
            table,
            costs,
            normalized,
        } => dist(&a, &b, table.as_deref(), &costs, normalized),
        Command::Match(args) => run_match(&args),
        Command::Eval {
            decisions,
            truth,
            keys,
            out,
            per_query,
        } => eval(&decisions, &truth, &keys, &out, per_query.as_deref()),
        Command::Synth(args) => synth(&args),
        Command::ToyFixture {
            out_dir,
            seed,
            names,
            inventory,
            syllables,
        } => toy_fixture(&out_dir, seed, names, inventory, syllables),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: usage: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: data: {msg}");
            ExitCode::from(2)
        }
    }
}
