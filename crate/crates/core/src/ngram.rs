//! N-gram baselines: set overlap over character n-grams and TF-IDF cosine
//! over character or stroke n-grams.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::num::{fmin, Scalar};

/// Frames padded strings before n-gram extraction.
pub const BOUNDARY_MARKER: char = '\u{2581}';

/// Separates consecutive characters in a stroke stream.
pub const STROKE_BOUNDARY: &str = "|";

/// Joins units of a stroke n-gram into one feature key.
const UNIT_SEP: char = '\u{1f}';

/// Bag of n-grams with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramProfile {
    n: usize,
    padded: bool,
    counts: BTreeMap<String, usize>,
}

impl NGramProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn padded(&self) -> bool {
        self.padded
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of distinct n-grams.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, gram: &str) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Distinct n-grams with their counts, in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.counts.iter().map(|(g, &c)| (g.as_str(), c))
    }

    fn from_windows<'a, I>(n: usize, padded: bool, windows: I) -> Self
    where
        I: Iterator<Item = String> + 'a,
    {
        let mut counts = BTreeMap::new();
        for w in windows {
            *counts.entry(w).or_insert(0) += 1;
        }
        Self { n, padded, counts }
    }
}

/// Character n-grams of `s`. With `pad`, `n - 1` boundary markers are added
/// on each side first.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn char_ngrams(s: &[char], n: usize, pad: bool) -> NGramProfile {
    assert!(n > 0, "n-gram size must be positive");
    let mut framed = Vec::with_capacity(s.len() + 2 * (n - 1));
    if pad {
        framed.extend(std::iter::repeat_n(BOUNDARY_MARKER, n - 1));
    }
    framed.extend_from_slice(s);
    if pad {
        framed.extend(std::iter::repeat_n(BOUNDARY_MARKER, n - 1));
    }
    NGramProfile::from_windows(n, pad, framed.windows(n).map(|w| w.iter().collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetMetric {
    Cosine,
    Dice,
    Jaccard,
}

impl SetMetric {
    pub fn name(self) -> &'static str {
        match self {
            SetMetric::Cosine => "cosine",
            SetMetric::Dice => "dice",
            SetMetric::Jaccard => "jaccard",
        }
    }
}

/// Overlap of the distinct n-gram sets of two profiles. Two empty sets score 1.
pub fn set_similarity<T: Scalar>(p: &NGramProfile, q: &NGramProfile, metric: SetMetric) -> Result<T> {
    if p.n != q.n || p.padded != q.padded {
        return Err(Error::Config(format!(
            "profiles differ: n={} pad={} vs n={} pad={}",
            p.n, p.padded, q.n, q.padded
        )));
    }
    let (x, y) = (p.distinct(), q.distinct());
    if x == 0 && y == 0 {
        return Ok(T::one());
    }
    let (small, large) = if x <= y { (p, q) } else { (q, p) };
    let common = small.counts.keys().filter(|g| large.counts.contains_key(*g)).count();
    let common = T::from_count(common);
    let (xs, ys) = (T::from_count(x), T::from_count(y));
    let value = match metric {
        SetMetric::Jaccard => common / (xs + ys - common),
        SetMetric::Dice => (common + common) / (xs + ys),
        SetMetric::Cosine => {
            if x == 0 || y == 0 {
                T::zero()
            } else {
                common / (xs * ys).sqrt()
            }
        }
    };
    Ok(fmin(value, T::one()))
}

/// Per-character stroke decompositions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrokeTable {
    strokes: HashMap<char, Vec<String>>,
}

impl StrokeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, ch: char, strokes: Vec<String>) -> Result<()> {
        if strokes.is_empty() || strokes.iter().any(String::is_empty) {
            return Err(Error::Data(format!("{ch:?}: empty stroke code")));
        }
        if self.strokes.insert(ch, strokes).is_some() {
            return Err(Error::Data(format!("duplicate character {ch:?}")));
        }
        Ok(())
    }

    pub fn get(&self, ch: char) -> Option<&[String]> {
        self.strokes.get(&ch).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.strokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    /// Rows of `<char><TAB><code>[,<code>...]`; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.is_empty() || (line.starts_with('#') && !line.starts_with("#\t")) {
                continue;
            }
            let mut chars = line.chars();
            let ch = chars.next().expect("non-empty line");
            let codes = chars
                .as_str()
                .strip_prefix('\t')
                .ok_or_else(|| Error::format("stroke table", lineno, "expected <char><TAB><codes>"))?;
            let codes: Vec<String> = codes.trim_end().split(',').map(str::to_owned).collect();
            table
                .insert(ch, codes)
                .map_err(|e| Error::format("stroke table", lineno, e.to_string()))?;
        }
        Ok(table)
    }
}

/// N-grams over the concatenated stroke codes of `s`, with a boundary token
/// between consecutive characters. A character missing from the table
/// contributes itself as a single unit.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn stroke_ngrams(s: &[char], strokes: &StrokeTable, n: usize) -> NGramProfile {
    assert!(n > 0, "n-gram size must be positive");
    let mut units: Vec<String> = Vec::new();
    for (i, &ch) in s.iter().enumerate() {
        if i > 0 {
            units.push(STROKE_BOUNDARY.to_owned());
        }
        match strokes.get(ch) {
            Some(codes) => units.extend(codes.iter().cloned()),
            None => units.push(ch.to_string()),
        }
    }
    let sep = UNIT_SEP.to_string();
    NGramProfile::from_windows(n, false, units.windows(n).map(|w| w.join(&sep)))
}

/// Turns a string into an n-gram profile for TF-IDF indexing.
pub trait Featurizer {
    fn profile(&self, s: &[char]) -> NGramProfile;
}

#[derive(Debug, Clone, Copy)]
pub struct CharGrams {
    pub n: usize,
    pub pad: bool,
}

impl Featurizer for CharGrams {
    fn profile(&self, s: &[char]) -> NGramProfile {
        char_ngrams(s, self.n, self.pad)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StrokeGrams<'a> {
    pub table: &'a StrokeTable,
    pub n: usize,
}

impl Featurizer for StrokeGrams<'_> {
    fn profile(&self, s: &[char]) -> NGramProfile {
        stroke_ngrams(s, self.table, self.n)
    }
}

/// TF-IDF vectors of a fixed key list.
///
/// Term frequency is the raw n-gram count, `idf = ln((1 + N) / (1 + df)) + 1`,
/// and every key vector is L2-normalized.
#[derive(Debug, Clone)]
pub struct TfIdfIndex<T, F> {
    featurizer: F,
    vocab: HashMap<String, usize>,
    idf: Vec<T>,
    // Sparse unit vectors sorted by term id.
    docs: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar, F: Featurizer> TfIdfIndex<T, F> {
    pub fn build(keys: &[Vec<char>], featurizer: F) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::Data("cannot build a TF-IDF index over no keys".into()));
        }
        let profiles: Vec<NGramProfile> = keys.iter().map(|k| featurizer.profile(k)).collect();
        let mut vocab: HashMap<String, usize> = HashMap::new();
        let mut df: Vec<usize> = Vec::new();
        for p in &profiles {
            for (gram, _) in p.iter() {
                let next = vocab.len();
                let id = *vocab.entry(gram.to_owned()).or_insert(next);
                if id == df.len() {
                    df.push(0);
                }
                df[id] += 1;
            }
        }
        let n_docs = T::from_count(keys.len());
        let idf: Vec<T> = df
            .iter()
            .map(|&d| ((T::one() + n_docs) / (T::one() + T::from_count(d))).ln() + T::one())
            .collect();
        let mut index = Self {
            featurizer,
            vocab,
            idf,
            docs: Vec::with_capacity(keys.len()),
        };
        for p in &profiles {
            let v = index.vectorize(p);
            index.docs.push(v);
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn idf(&self, gram: &str) -> Option<T> {
        self.vocab.get(gram).map(|&i| self.idf[i])
    }

    /// Unit TF-IDF vector of a profile; unknown grams are dropped.
    fn vectorize(&self, profile: &NGramProfile) -> Vec<(usize, T)> {
        let mut v: Vec<(usize, T)> = profile
            .iter()
            .filter_map(|(g, c)| self.vocab.get(g).map(|&id| (id, T::from_count(c) * self.idf[id])))
            .collect();
        v.sort_by_key(|&(id, _)| id);
        let norm = v.iter().map(|&(_, w)| w * w).sum::<T>().sqrt();
        if norm > T::zero() {
            v.iter_mut().for_each(|(_, w)| *w = *w / norm);
        }
        v
    }

    pub fn featurizer(&self) -> &F {
        &self.featurizer
    }

    /// Cosine score of the query against every key, in key order.
    pub fn scores(&self, query: &[char]) -> Vec<T> {
        let q = self.vectorize(&self.featurizer.profile(query));
        self.docs
            .iter()
            .map(|doc| fmin(sparse_dot(&q, doc), T::one()))
            .collect()
    }

    /// All keys ranked by descending score, ties by ascending key id.
    pub fn rank(&self, query: &[char]) -> Vec<(usize, T)> {
        let mut ranked: Vec<(usize, T)> = self.scores(query).into_iter().enumerate().collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        ranked
    }
}

fn sparse_dot<T: Scalar>(a: &[(usize, T)], b: &[(usize, T)]) -> T {
    let (mut i, mut j) = (0, 0);
    let mut acc = T::zero();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc = acc + a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Every key of `index` ranked against `query`; see [`TfIdfIndex::rank`].
pub fn tfidf_cosine<T: Scalar, F: Featurizer>(index: &TfIdfIndex<T, F>, query: &[char]) -> Vec<(usize, T)> {
    index.rank(query)
}
