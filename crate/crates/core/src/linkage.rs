//! Top-1 record linkage: match every query to its best key with a chosen
//! method, then score the decisions against ground truth.
//!
//! All strings are NFC-normalized on the way in. Ties go to the lowest key id.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use unicode_normalization::UnicodeNormalization;

use crate::distance::{edit_distance, CharSimilarity, CostModel};
use crate::error::{Error, Result};
use crate::knn::{HomoglyphTable, Unclamped};
use crate::ngram::{
    char_ngrams, set_similarity, CharGrams, NGramProfile, SetMetric, StrokeGrams, StrokeTable, TfIdfIndex,
};
use crate::num::Scalar;

pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Ordered, duplicate-free list of match targets; a key's id is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySet {
    keys: Vec<String>,
    chars: Vec<Vec<char>>,
    ids: HashMap<String, usize>,
}

impl KeySet {
    /// Fails on an empty list or on keys that coincide after NFC.
    pub fn new<I, S>(keys: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::build(keys, false)
    }

    /// Like [`KeySet::new`] but keeps only the first of any duplicates.
    pub fn dedup<I, S>(keys: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::build(keys, true)
    }

    fn build<I, S>(keys: I, allow_dups: bool) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = Self {
            keys: Vec::new(),
            chars: Vec::new(),
            ids: HashMap::new(),
        };
        for key in keys {
            let key = nfc(key.as_ref());
            if set.ids.contains_key(&key) {
                if allow_dups {
                    continue;
                }
                return Err(Error::Data(format!("duplicate key {key:?}")));
            }
            set.ids.insert(key.clone(), set.keys.len());
            set.chars.push(key.chars().collect());
            set.keys.push(key);
        }
        if set.keys.is_empty() {
            return Err(Error::Data("key set is empty".into()));
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&str> {
        self.keys.get(id).map(String::as_str)
    }

    /// Id of a key, NFC-normalizing the probe first.
    pub fn id_of(&self, key: &str) -> Option<usize> {
        self.ids.get(&nfc(key)).copied()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.keys.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMethod {
    ClassicLev,
    HomoglyphicLev,
    SimString(SetMetric),
    /// TF-IDF over stroke n-grams.
    FuzzyStroke,
    /// TF-IDF over character n-grams.
    FuzzyChar,
}

impl MatchMethod {
    pub const ALL: [MatchMethod; 7] = [
        MatchMethod::ClassicLev,
        MatchMethod::HomoglyphicLev,
        MatchMethod::SimString(SetMetric::Cosine),
        MatchMethod::SimString(SetMetric::Dice),
        MatchMethod::SimString(SetMetric::Jaccard),
        MatchMethod::FuzzyStroke,
        MatchMethod::FuzzyChar,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            MatchMethod::ClassicLev => "classic-lev",
            MatchMethod::HomoglyphicLev => "homoglyphic-lev",
            MatchMethod::SimString(SetMetric::Cosine) => "simstring-cosine",
            MatchMethod::SimString(SetMetric::Dice) => "simstring-dice",
            MatchMethod::SimString(SetMetric::Jaccard) => "simstring-jaccard",
            MatchMethod::FuzzyStroke => "fuzzy-stroke",
            MatchMethod::FuzzyChar => "fuzzy-char",
        }
    }

    /// Edit methods minimize their score; the others maximize it.
    pub fn is_distance(self) -> bool {
        matches!(self, MatchMethod::ClassicLev | MatchMethod::HomoglyphicLev)
    }

    /// n-gram size used when none is configured.
    pub fn default_n(self) -> usize {
        match self {
            MatchMethod::SimString(_) => 2,
            _ => 3,
        }
    }

    /// Boundary padding used when none is configured.
    pub fn default_pad(self) -> bool {
        matches!(self, MatchMethod::SimString(_))
    }
}

impl fmt::Display for MatchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MatchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "tfidf-char" {
            return Ok(MatchMethod::FuzzyChar);
        }
        if s == "tfidf-stroke" {
            return Ok(MatchMethod::FuzzyStroke);
        }
        MatchMethod::ALL.into_iter().find(|m| m.tag() == s).ok_or_else(|| {
            let known: Vec<&str> = MatchMethod::ALL.iter().map(|m| m.tag()).collect();
            Error::Config(format!("unknown method {s:?} (expected one of {})", known.join(", ")))
        })
    }
}

/// Everything a matcher needs besides the queries and keys.
#[derive(Debug, Clone, Copy)]
pub struct MatcherConfig<'a, T> {
    pub method: MatchMethod,
    pub lambda: T,
    pub insert_cost: T,
    pub delete_cost: T,
    pub homoglyphs: Option<&'a HomoglyphTable<T>>,
    /// Use raw (possibly negative) similarities in substitution costs.
    pub unclamped: bool,
    pub strokes: Option<&'a StrokeTable>,
    pub n: Option<usize>,
    pub pad: Option<bool>,
    /// Worker threads; 0 uses the global rayon pool, 1 runs inline.
    pub workers: usize,
}

impl<'a, T: Scalar> MatcherConfig<'a, T> {
    pub fn new(method: MatchMethod) -> Self {
        Self {
            method,
            lambda: T::one(),
            insert_cost: T::one(),
            delete_cost: T::one(),
            homoglyphs: None,
            unclamped: false,
            strokes: None,
            n: None,
            pad: None,
            workers: 1,
        }
    }

    pub fn with_homoglyphs(mut self, table: &'a HomoglyphTable<T>) -> Self {
        self.homoglyphs = Some(table);
        self
    }

    pub fn with_strokes(mut self, table: &'a StrokeTable) -> Self {
        self.strokes = Some(table);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn n(&self) -> usize {
        self.n.unwrap_or(self.method.default_n())
    }

    fn pad(&self) -> bool {
        self.pad.unwrap_or(self.method.default_pad())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchDecision<T> {
    /// NFC form of the query.
    pub query: String,
    pub key_id: usize,
    /// Distance for edit methods, similarity otherwise.
    pub score: T,
    pub method: MatchMethod,
}

enum Prepared<'a, T> {
    Edit(CostModel<'a, T>),
    Set {
        metric: SetMetric,
        n: usize,
        pad: bool,
        keys: Vec<NGramProfile>,
    },
    TfIdfChar(TfIdfIndex<T, CharGrams>),
    TfIdfStroke(TfIdfIndex<T, StrokeGrams<'a>>),
}

fn check_costs<T: Scalar>(cfg: &MatcherConfig<'_, T>) -> Result<()> {
    for (name, v) in [
        ("lambda", cfg.lambda),
        ("insert cost", cfg.insert_cost),
        ("delete cost", cfg.delete_cost),
    ] {
        if !(v.is_finite() && v >= T::zero()) {
            return Err(Error::Config(format!("{name} must be a non-negative number, got {v}")));
        }
    }
    Ok(())
}

impl<'a, T: Scalar> Prepared<'a, T> {
    fn new(cfg: &MatcherConfig<'a, T>, keys: &KeySet, unclamped: &'a Option<Unclamped<'a, T>>) -> Result<Self> {
        let n = cfg.n();
        if n == 0 {
            return Err(Error::Config("n-gram size must be positive".into()));
        }
        Ok(match cfg.method {
            MatchMethod::ClassicLev => {
                check_costs(cfg)?;
                Prepared::Edit(CostModel::classic().with_costs(cfg.lambda, cfg.insert_cost, cfg.delete_cost))
            }
            MatchMethod::HomoglyphicLev => {
                check_costs(cfg)?;
                let table = cfg
                    .homoglyphs
                    .ok_or_else(|| Error::Config("homoglyphic-lev needs a homoglyph table".into()))?;
                let sims: &'a (dyn CharSimilarity<T> + Sync) = match unclamped {
                    Some(u) => u,
                    None => table,
                };
                Prepared::Edit(CostModel::homoglyphic(sims).with_costs(cfg.lambda, cfg.insert_cost, cfg.delete_cost))
            }
            MatchMethod::SimString(metric) => {
                let pad = cfg.pad();
                Prepared::Set {
                    metric,
                    n,
                    pad,
                    keys: keys.chars.iter().map(|k| char_ngrams(k, n, pad)).collect(),
                }
            }
            MatchMethod::FuzzyChar => {
                Prepared::TfIdfChar(TfIdfIndex::build(&keys.chars, CharGrams { n, pad: cfg.pad() })?)
            }
            MatchMethod::FuzzyStroke => {
                let table = cfg
                    .strokes
                    .ok_or_else(|| Error::Config("fuzzy-stroke needs a stroke table".into()))?;
                Prepared::TfIdfStroke(TfIdfIndex::build(&keys.chars, StrokeGrams { table, n })?)
            }
        })
    }

    fn best(&self, query: &[char], keys: &KeySet) -> (usize, T) {
        match self {
            Prepared::Edit(costs) => {
                let floor = if costs.insert_cost < costs.delete_cost {
                    costs.insert_cost
                } else {
                    costs.delete_cost
                };
                let mut best = (0, T::infinity());
                for (id, key) in keys.chars.iter().enumerate() {
                    // Length difference alone costs at least this much.
                    let bound = T::from_count(key.len().abs_diff(query.len())) * floor;
                    if bound > best.1 {
                        continue;
                    }
                    let d = edit_distance(query, key, costs);
                    if d < best.1 {
                        best = (id, d);
                    }
                }
                best
            }
            Prepared::Set {
                metric,
                n,
                pad,
                keys: profiles,
            } => {
                let q = char_ngrams(query, *n, *pad);
                let mut best = (0, -T::one());
                for (id, p) in profiles.iter().enumerate() {
                    let s = set_similarity(&q, p, *metric).expect("profiles share parameters");
                    if s > best.1 {
                        best = (id, s);
                    }
                }
                best
            }
            Prepared::TfIdfChar(index) => argmax(index.scores(query)),
            Prepared::TfIdfStroke(index) => argmax(index.scores(query)),
        }
    }
}

fn argmax<T: Scalar>(scores: Vec<T>) -> (usize, T) {
    scores
        .into_iter()
        .enumerate()
        .fold((0, -T::one()), |best, (id, s)| if s > best.1 { (id, s) } else { best })
}

/// Best key for every query, in query order.
pub fn match_all<T: Scalar>(
    queries: &[String],
    keys: &KeySet,
    config: &MatcherConfig<'_, T>,
) -> Result<Vec<MatchDecision<T>>> {
    let unclamped = match (config.method, config.unclamped, config.homoglyphs) {
        (MatchMethod::HomoglyphicLev, true, Some(t)) => Some(Unclamped(t)),
        _ => None,
    };
    let prepared = Prepared::new(config, keys, &unclamped)?;
    let method = config.method;
    let one = |q: &String| {
        let query = nfc(q);
        let chars: Vec<char> = query.chars().collect();
        let (key_id, score) = prepared.best(&chars, keys);
        MatchDecision {
            query,
            key_id,
            score,
            method,
        }
    };
    Ok(match config.workers {
        1 => queries.iter().map(one).collect(),
        0 => queries.par_iter().map(one).collect(),
        w => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?
            .install(|| queries.par_iter().map(one).collect()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedQuery<T> {
    pub query: String,
    pub matched: String,
    pub truth: String,
    pub score: T,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkageReport<T> {
    pub method: String,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub queries: Vec<EvaluatedQuery<T>>,
}

/// Score decisions against `(query, true key)` pairs.
///
/// A decision is correct when its matched key string equals the true key.
pub fn evaluate<T: Scalar>(
    decisions: &[MatchDecision<T>],
    keys: &KeySet,
    truth: &[(String, String)],
) -> Result<LinkageReport<T>> {
    if truth.is_empty() {
        return Err(Error::Data("truth list is empty".into()));
    }
    let mut by_query: HashMap<&str, &MatchDecision<T>> = HashMap::new();
    for d in decisions {
        if keys.get(d.key_id).is_none() {
            return Err(Error::Data(format!(
                "decision for {:?} points at key id {}",
                d.query, d.key_id
            )));
        }
        if let Some(prev) = by_query.insert(d.query.as_str(), d) {
            if prev.key_id != d.key_id {
                return Err(Error::Data(format!("conflicting decisions for query {:?}", d.query)));
            }
        }
    }
    let method = decisions
        .first()
        .map_or_else(|| "unknown".to_owned(), |d| d.method.tag().to_owned());
    let mut rows = Vec::with_capacity(truth.len());
    for (query, true_key) in truth {
        let query = nfc(query);
        let decision = by_query
            .get(query.as_str())
            .ok_or_else(|| Error::Data(format!("no decision for truth query {query:?}")))?;
        let true_id = keys
            .id_of(true_key)
            .ok_or_else(|| Error::Data(format!("true key {true_key:?} is not in the key set")))?;
        rows.push(EvaluatedQuery {
            matched: keys.get(decision.key_id).expect("validated").to_owned(),
            truth: keys.get(true_id).expect("valid id").to_owned(),
            correct: decision.key_id == true_id,
            score: decision.score,
            query,
        });
    }
    let correct = rows.iter().filter(|r| r.correct).count();
    Ok(LinkageReport {
        method,
        total: rows.len(),
        correct,
        accuracy: correct as f64 / rows.len() as f64,
        queries: rows,
    })
}

impl<T: Scalar> LinkageReport<T> {
    /// Header plus one summary row.
    pub fn summary_tsv(&self) -> String {
        format!(
            "method\ttotal\tcorrect\taccuracy\n{}\t{}\t{}\t{:.6}\n",
            self.method, self.total, self.correct, self.accuracy
        )
    }

    /// `<query>\t<matched>\t<true key>\t<score>\t<0|1>` per truth row.
    pub fn per_query_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.queries {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{}",
                r.query,
                r.matched,
                r.truth,
                r.score,
                u8::from(r.correct)
            )
            .expect("write to String");
        }
        out
    }
}

/// Non-empty lines of a one-string-per-line file.
pub fn parse_lines(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.is_empty()).map(str::to_owned).collect()
}

pub fn parse_truth(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let (q, k) = l
                .split_once('\t')
                .ok_or_else(|| Error::format("truth", i + 1, "expected <query><TAB><true key>"))?;
            if k.contains('\t') {
                return Err(Error::format("truth", i + 1, "too many columns"));
            }
            Ok((q.to_owned(), k.to_owned()))
        })
        .collect()
}

pub fn truth_tsv(truth: &[(String, String)]) -> String {
    truth.iter().map(|(q, k)| format!("{q}\t{k}\n")).collect()
}

/// `#method <tag>` then `<query>\t<matched key>\t<score>` per decision.
pub fn decisions_tsv<T: Scalar>(decisions: &[MatchDecision<T>], keys: &KeySet) -> String {
    let mut out = String::new();
    if let Some(d) = decisions.first() {
        writeln!(out, "#method {}", d.method).expect("write to String");
    }
    for d in decisions {
        let key = keys.get(d.key_id).expect("decision key id in range");
        writeln!(out, "{}\t{}\t{:.6}", d.query, key, d.score).expect("write to String");
    }
    out
}

pub fn parse_decisions<T: Scalar>(text: &str, keys: &KeySet) -> Result<Vec<MatchDecision<T>>> {
    const FORMAT: &str = "decisions";
    let mut method = None;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(tag) = line.strip_prefix("#method ") {
            method = Some(
                tag.trim()
                    .parse::<MatchMethod>()
                    .map_err(|e| Error::format(FORMAT, lineno, e.to_string()))?,
            );
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(q), Some(k), Some(s), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
            return Err(Error::format(
                FORMAT,
                lineno,
                "expected <query><TAB><matched key><TAB><score>",
            ));
        };
        let key_id = keys
            .id_of(k)
            .ok_or_else(|| Error::format(FORMAT, lineno, format!("matched key {k:?} not in key set")))?;
        let score = s
            .parse::<f64>()
            .map_err(|_| Error::format(FORMAT, lineno, format!("bad score {s:?}")))?;
        let method = method.ok_or_else(|| Error::format(FORMAT, lineno, "missing `#method <tag>` header"))?;
        out.push(MatchDecision {
            query: nfc(q),
            key_id,
            score: T::from_f64_lossy(score),
            method,
        });
    }
    Ok(out)
}
