//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! Expected values come from the oracles in this file, never from the code
//! under test.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use homoglyph_core::linkage::evaluate;
use homoglyph_core::{
    build_table, char_ngrams, edit_distance, make_corpus, match_all, raster_embed, set_similarity, toy,
    CorruptionConfig, CorruptionRng, Costs, Embeddings, Homoglyphs, KeySet, MatchMethod, Matcher, NGramProfile,
    Neighbor, SetMetric,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("classic-reduction", Duration::from_secs(5), classic_reduction),
        ("dp-vs-exhaustive", Duration::from_secs(60), dp_vs_exhaustive),
        ("knn-exactness", Duration::from_secs(10), knn_exactness),
        ("set-metric-identities", Duration::MAX, set_metric_identities),
        ("directional-linkage", Duration::from_secs(120), directional_linkage),
        ("monotone-dominance", Duration::MAX, monotone_dominance),
        ("end-to-end-determinism", Duration::MAX, end_to_end_determinism),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > budget => Err(format!("{detail}; over the {budget:?} budget")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name} ({took:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_word(rng: &mut CorruptionRng, alphabet: &[char], max_len: usize) -> Vec<char> {
    let len = rng.index(max_len + 1);
    (0..len).map(|_| alphabet[rng.index(alphabet.len())]).collect()
}

fn show(s: &[char]) -> String {
    s.iter().collect()
}

/// Textbook Levenshtein over the full matrix, unit costs.
fn textbook_levenshtein(a: &[char], b: &[char]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
        }
    }
    d[a.len()][b.len()]
}

fn classic_reduction() -> Outcome {
    let mut rng = CorruptionRng::new(0xC1A5);
    let alphabet: Vec<char> = ('a'..='z').chain(['0', '1', '2', '3']).collect();
    let empty = Homoglyphs::new(1).map_err(|e| e.to_string())?;
    let with_empty = Costs::homoglyphic(&empty);
    let none = Costs::classic();
    for _ in 0..1000 {
        let a = random_word(&mut rng, &alphabet, 20);
        let b = random_word(&mut rng, &alphabet, 20);
        let want = textbook_levenshtein(&a, &b) as f64;
        for (label, costs) in [("empty table", &with_empty), ("no table", &none)] {
            let got = edit_distance(&a, &b, costs);
            ensure(got == want, || {
                format!("{label}: {:?} vs {:?}: {got} != {want}", show(&a), show(&b))
            })?;
        }
    }
    Ok("1000 pairs equal textbook Levenshtein".into())
}

/// Random symmetric similarities in `[-0.3, 1)` over `alphabet`, stored as
/// complete neighbour lists so every lookup hits a stored value.
fn random_sims(rng: &mut CorruptionRng, alphabet: &[char]) -> HashMap<(char, char), f64> {
    let mut sims = HashMap::new();
    for (i, &a) in alphabet.iter().enumerate() {
        sims.insert((a, a), 1.0);
        for &b in &alphabet[i + 1..] {
            let s = rng.unit() * 1.3 - 0.3;
            sims.insert((a, b), s);
            sims.insert((b, a), s);
        }
    }
    sims
}

fn table_from(sims: &HashMap<(char, char), f64>, alphabet: &[char]) -> Result<Homoglyphs, String> {
    let mut table = Homoglyphs::new(alphabet.len()).map_err(|e| e.to_string())?;
    for &a in alphabet {
        let mut list: Vec<Neighbor<f64>> = alphabet
            .iter()
            .map(|&b| Neighbor {
                ch: b,
                sim: sims[&(a, b)],
            })
            .collect();
        list.sort_by(|x, y| y.sim.total_cmp(&x.sim).then(x.ch.cmp(&y.ch)));
        table.insert(a, list).map_err(|e| e.to_string())?;
    }
    Ok(table)
}

#[derive(Clone, Copy)]
enum Op {
    Keep,
    Delete,
    Insert(char),
    Replace(char),
}

struct Scripts<'a> {
    source: &'a [char],
    target: &'a [char],
    sims: &'a HashMap<(char, char), f64>,
    lambda: f64,
    ins: f64,
    del: f64,
    best: f64,
    count: usize,
}

impl Scripts<'_> {
    fn apply(&self, script: &[Op]) -> Vec<char> {
        let mut out = Vec::new();
        let mut src = self.source.iter();
        for op in script {
            match *op {
                Op::Keep => out.push(*src.next().expect("script overruns source")),
                Op::Delete => {
                    src.next().expect("script overruns source");
                }
                Op::Insert(c) => out.push(c),
                Op::Replace(c) => {
                    src.next().expect("script overruns source");
                    out.push(c);
                }
            }
        }
        assert!(src.next().is_none(), "script leaves source characters");
        out
    }

    fn cost(&self, script: &[Op]) -> f64 {
        let mut i = 0;
        let mut total = 0.0;
        for op in script {
            match *op {
                Op::Keep => i += 1,
                Op::Delete => {
                    total += self.del;
                    i += 1;
                }
                Op::Insert(_) => total += self.ins,
                Op::Replace(c) => {
                    let s = self.sims[&(self.source[i], c)].max(0.0);
                    total += self.lambda * (1.0 - s);
                    i += 1;
                }
            }
        }
        total
    }

    /// Every interleaving of keep/replace, delete and insert operations.
    fn walk(&mut self, i: usize, j: usize, script: &mut Vec<Op>) {
        if i == self.source.len() && j == self.target.len() {
            assert_eq!(self.apply(script), self.target, "script does not produce the target");
            self.count += 1;
            self.best = self.best.min(self.cost(script));
            return;
        }
        if i < self.source.len() {
            script.push(Op::Delete);
            self.walk(i + 1, j, script);
            script.pop();
        }
        if j < self.target.len() {
            script.push(Op::Insert(self.target[j]));
            self.walk(i, j + 1, script);
            script.pop();
        }
        if i < self.source.len() && j < self.target.len() {
            let op = if self.source[i] == self.target[j] {
                Op::Keep
            } else {
                Op::Replace(self.target[j])
            };
            script.push(op);
            self.walk(i + 1, j + 1, script);
            script.pop();
        }
    }
}

fn dp_vs_exhaustive() -> Outcome {
    let mut rng = CorruptionRng::new(0xE4A5);
    let alphabet: Vec<char> = "abcdeoq01".chars().collect();
    let mut scripts = 0;
    for case in 0..200 {
        let sims = random_sims(&mut rng, &alphabet);
        let table = table_from(&sims, &alphabet)?;
        let (lambda, ins, del) = if case % 2 == 0 {
            (1.0, 1.0, 1.0)
        } else {
            (
                0.25 + 1.75 * rng.unit(),
                0.25 + 1.75 * rng.unit(),
                0.25 + 1.75 * rng.unit(),
            )
        };
        let a = random_word(&mut rng, &alphabet, 6);
        let b = random_word(&mut rng, &alphabet, 6);
        let mut search = Scripts {
            source: &a,
            target: &b,
            sims: &sims,
            lambda,
            ins,
            del,
            best: f64::INFINITY,
            count: 0,
        };
        search.walk(0, 0, &mut Vec::new());
        scripts += search.count;
        let got = edit_distance(&a, &b, &Costs::homoglyphic(&table).with_costs(lambda, ins, del));
        ensure((got - search.best).abs() <= 1e-9, || {
            format!(
                "{:?} -> {:?}: dp {got} vs exhaustive {}",
                show(&a),
                show(&b),
                search.best
            )
        })?;
    }
    Ok(format!("200 pairs, {scripts} scripts enumerated"))
}

/// Reference k-NN: score every pair, sort the whole row.
fn knn_reference(table: &Embeddings, k: usize) -> Vec<(char, Vec<(char, f64)>)> {
    let rows: Vec<(char, Vec<f64>)> = table.iter().map(|(c, v)| (c, v.to_vec())).collect();
    let dot = |x: &[f64], y: &[f64]| {
        let mut acc = 0.0;
        for i in 0..x.len() {
            acc += x[i] * y[i];
        }
        acc.clamp(-1.0, 1.0)
    };
    rows.iter()
        .map(|(q, qv)| {
            let mut all: Vec<(char, f64)> = rows
                .iter()
                // Lower codepoint on the left keeps the product order fixed.
                .map(|(c, cv)| (*c, if q <= c { dot(qv, cv) } else { dot(cv, qv) }))
                .collect();
            all.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
            all.truncate(k);
            (*q, all)
        })
        .collect()
}

fn knn_exactness() -> Outcome {
    let mut rng = CorruptionRng::new(0x6E6E);
    let mut rows = 0;
    for _ in 0..50 {
        let n = 1 + rng.index(200);
        let dim = 1 + rng.index(16);
        let k = 1 + rng.index(n + 5);
        let mut table = Embeddings::new(dim).map_err(|e| e.to_string())?;
        let mut prototypes: Vec<Vec<f64>> = Vec::new();
        let mut code = 0x4E00u32;
        while table.len() < n {
            // Coarse components plus repeated vectors give plenty of exact ties.
            let v: Vec<f64> = if !prototypes.is_empty() && rng.unit() < 0.3 {
                prototypes[rng.index(prototypes.len())].clone()
            } else {
                (0..dim).map(|_| rng.index(5) as f64 - 2.0).collect()
            };
            code += 1 + rng.index(3) as u32;
            if v.iter().all(|&x| x == 0.0) {
                continue;
            }
            prototypes.push(v.clone());
            table
                .insert(char::from_u32(code).unwrap(), v)
                .map_err(|e| e.to_string())?;
        }
        let got = build_table(&table, k).map_err(|e| e.to_string())?;
        let want = knn_reference(&table, k);
        ensure(got.len() == want.len(), || {
            format!("{} rows, want {}", got.len(), want.len())
        })?;
        for (q, list) in want {
            let have: Vec<(char, f64)> = got
                .neighbors(q)
                .ok_or_else(|| format!("no row for {q:?}"))?
                .iter()
                .map(|nb| (nb.ch, nb.sim))
                .collect();
            ensure(have == list, || {
                format!("row {q:?} (n={n}, dim={dim}, k={k}): {have:?} != {list:?}")
            })?;
            rows += 1;
        }
    }
    Ok(format!("50 tables, {rows} rows identical to the full-sort scan"))
}

fn gram_set(p: &NGramProfile) -> BTreeSet<String> {
    p.iter().map(|(g, _)| g.to_owned()).collect()
}

fn set_metric_identities() -> Outcome {
    let (x, y): (Vec<char>, Vec<char>) = ("abcd".chars().collect(), "abce".chars().collect());
    let (px, py) = (char_ngrams(&x, 2, false), char_ngrams(&y, 2, false));
    for (metric, want) in [
        (SetMetric::Jaccard, 0.5),
        (SetMetric::Dice, 2.0 / 3.0),
        (SetMetric::Cosine, 2.0 / 3.0),
    ] {
        let got: f64 = set_similarity(&px, &py, metric).map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= 1e-12, || {
            format!("abcd/abce {}: {got} != {want}", metric.name())
        })?;
    }

    let mut rng = CorruptionRng::new(0x5E75);
    let alphabet: Vec<char> = "abcxyz".chars().collect();
    let metrics = [SetMetric::Jaccard, SetMetric::Dice, SetMetric::Cosine];
    let mut equal_pairs = 0;
    for _ in 0..10_000 {
        let n = 1 + rng.index(3);
        let pad = rng.unit() < 0.5;
        let a = random_word(&mut rng, &alphabet, 7);
        let b = if rng.unit() < 0.15 {
            a.clone()
        } else {
            random_word(&mut rng, &alphabet, 7)
        };
        let (pa, pb) = (char_ngrams(&a, n, pad), char_ngrams(&b, n, pad));
        let (sa, sb) = (gram_set(&pa), gram_set(&pb));
        let same = sa == sb;
        equal_pairs += usize::from(same);
        let mut vals = [0.0f64; 3];
        for (slot, &m) in vals.iter_mut().zip(&metrics) {
            let ab: f64 = set_similarity(&pa, &pb, m).map_err(|e| e.to_string())?;
            let ba: f64 = set_similarity(&pb, &pa, m).map_err(|e| e.to_string())?;
            let ctx = || format!("{:?}/{:?} n={n} pad={pad} {}", show(&a), show(&b), m.name());
            ensure(ab == ba, || format!("{}: asymmetric {ab} vs {ba}", ctx()))?;
            ensure((0.0..=1.0).contains(&ab), || format!("{}: {ab} out of [0,1]", ctx()))?;
            ensure((ab == 1.0) == same, || {
                format!("{}: value {ab}, sets equal = {same}", ctx())
            })?;
            *slot = ab;
        }
        ensure(vals[0] <= vals[1] && vals[1] <= vals[2], || {
            format!(
                "{:?}/{:?} n={n} pad={pad}: J {} D {} C {}",
                show(&a),
                show(&b),
                vals[0],
                vals[1],
                vals[2]
            )
        })?;
    }
    Ok(format!("hand cases and 10000 pairs ({equal_pairs} with equal sets)"))
}

fn directional_linkage() -> Outcome {
    let err = |e: homoglyph_core::Error| e.to_string();
    let mut embeddings = Embeddings::new(64 * 64).map_err(err)?;
    for g in toy::glyphs(0) {
        embeddings
            .insert(g.ch(), raster_embed(&g, 64).map_err(err)?)
            .map_err(err)?;
    }
    let table = build_table(&embeddings, 20).map_err(err)?;
    let clean = toy::names(0, 1000, &toy::charset(), 12, 4);
    let cfg = CorruptionConfig::default().with_alphabet(clean.iter().flat_map(|s| s.chars()));
    let corpus = make_corpus(&clean, &table, &cfg).map_err(err)?;
    let keys = KeySet::new(corpus.keys.iter()).map_err(err)?;
    let mut accuracy = HashMap::new();
    for method in [
        MatchMethod::HomoglyphicLev,
        MatchMethod::ClassicLev,
        MatchMethod::SimString(SetMetric::Dice),
    ] {
        let config = Matcher::new(method).with_homoglyphs(&table).with_workers(1);
        let decisions = match_all(&corpus.queries, &keys, &config).map_err(err)?;
        let report = evaluate(&decisions, &keys, &corpus.truth).map_err(err)?;
        accuracy.insert(method, report.accuracy);
    }
    let homo = accuracy[&MatchMethod::HomoglyphicLev];
    let classic = accuracy[&MatchMethod::ClassicLev];
    let dice = accuracy[&MatchMethod::SimString(SetMetric::Dice)];
    let detail = format!(
        "{} queries: homoglyphic-lev {homo:.4}, classic-lev {classic:.4}, simstring-dice {dice:.4}",
        corpus.queries.len()
    );
    ensure(homo > classic, || {
        format!("{detail}; homoglyphic does not beat classic")
    })?;
    ensure(classic >= dice, || format!("{detail}; classic below dice"))?;
    ensure(homo - classic >= 0.02, || format!("{detail}; gap under 2 points"))?;
    Ok(detail)
}

fn monotone_dominance() -> Outcome {
    let mut rng = CorruptionRng::new(0x3070);
    let alphabet: Vec<char> = "abcdeo01l".chars().collect();
    let mut strict = 0;
    for _ in 0..500 {
        let low = random_sims(&mut rng, &alphabet);
        let high: HashMap<(char, char), f64> = {
            let mut h = low.clone();
            for (i, &a) in alphabet.iter().enumerate() {
                for &b in &alphabet[i + 1..] {
                    if rng.unit() < 0.5 {
                        let s = (low[&(a, b)] + rng.unit() * 0.6).min(1.0);
                        h.insert((a, b), s);
                        h.insert((b, a), s);
                    }
                }
            }
            h
        };
        let (t_low, t_high) = (table_from(&low, &alphabet)?, table_from(&high, &alphabet)?);
        let a = random_word(&mut rng, &alphabet, 12);
        let b = random_word(&mut rng, &alphabet, 12);
        let lambda = 0.25 + 1.75 * rng.unit();
        let d_low = edit_distance(&a, &b, &Costs::homoglyphic(&t_low).with_costs(lambda, 1.0, 1.0));
        let d_high = edit_distance(&a, &b, &Costs::homoglyphic(&t_high).with_costs(lambda, 1.0, 1.0));
        ensure(d_high <= d_low, || {
            format!("{:?}/{:?}: raised sims {d_high} > {d_low}", show(&a), show(&b))
        })?;
        strict += usize::from(d_high < d_low);
    }
    Ok(format!("500 cases, {strict} strictly smaller"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_homoglyph"))
        .args(args)
        .output()
        .map_err(|e| format!("cannot run CLI: {e}"))?;
    ensure(out.status.success(), || {
        format!(
            "`homoglyph {}` failed: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )
    })
}

const PIPELINE_OUTPUTS: [&str; 13] = [
    "fixture/strokes.tsv",
    "fixture/clean.txt",
    "emb.tsv",
    "table.tsv",
    "corpus.queries.txt",
    "corpus.keys.txt",
    "corpus.truth.tsv",
    "homoglyphic-lev.decisions.tsv",
    "homoglyphic-lev.report.tsv",
    "homoglyphic-lev.per-query.tsv",
    "classic-lev.decisions.tsv",
    "classic-lev.report.tsv",
    "classic-lev.per-query.tsv",
];

fn pipeline(dir: &Path) -> Result<(), String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    run_cli(&[
        "toy-fixture",
        "--out-dir",
        &p("fixture"),
        "--seed",
        "0",
        "--names",
        "300",
    ])?;
    run_cli(&[
        "embed-raster",
        "--glyph-dir",
        &p("fixture/glyphs"),
        "--out",
        &p("emb.tsv"),
    ])?;
    run_cli(&[
        "build-table",
        "--embeddings",
        &p("emb.tsv"),
        "--k",
        "20",
        "--out",
        &p("table.tsv"),
    ])?;
    run_cli(&[
        "synth",
        "--clean",
        &p("fixture/clean.txt"),
        "--table",
        &p("table.tsv"),
        "--out-prefix",
        &p("corpus"),
        "--seed",
        "0",
    ])?;
    for method in ["homoglyphic-lev", "classic-lev"] {
        let decisions = p(&format!("{method}.decisions.tsv"));
        run_cli(&[
            "match",
            "--queries",
            &p("corpus.queries.txt"),
            "--keys",
            &p("corpus.keys.txt"),
            "--method",
            method,
            "--table",
            &p("table.tsv"),
            "--workers",
            "2",
            "--out",
            &decisions,
        ])?;
        run_cli(&[
            "eval",
            "--decisions",
            &decisions,
            "--truth",
            &p("corpus.truth.tsv"),
            "--keys",
            &p("corpus.keys.txt"),
            "--out",
            &p(&format!("{method}.report.tsv")),
            "--per-query",
            &p(&format!("{method}.per-query.tsv")),
        ])?;
    }
    Ok(())
}

fn end_to_end_determinism() -> Outcome {
    let runs: Vec<tempfile::TempDir> = (0..2)
        .map(|_| tempfile::tempdir().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    for run in &runs {
        pipeline(run.path())?;
    }
    for name in PIPELINE_OUTPUTS {
        let read = |d: &tempfile::TempDir| std::fs::read(d.path().join(name)).map_err(|e| format!("{name}: {e}"));
        let (a, b) = (read(&runs[0])?, read(&runs[1])?);
        ensure(!a.is_empty(), || format!("{name} is empty"))?;
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    let glyphs = |d: &tempfile::TempDir| -> Result<Vec<(String, Vec<u8>)>, String> {
        let mut out = Vec::new();
        for entry in std::fs::read_dir(d.path().join("fixture/glyphs")).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), bytes));
        }
        out.sort();
        Ok(out)
    };
    ensure(glyphs(&runs[0])? == glyphs(&runs[1])?, || {
        "glyph files differ between runs".into()
    })?;
    Ok(format!(
        "{} output files byte-identical across two runs",
        PIPELINE_OUTPUTS.len() + 60
    ))
}
