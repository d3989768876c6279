//! Homoglyph tables: exact k-nearest-neighbour lists over an embedding table.
//!
//! Text form:
//!
//! ```text
//! #k 2
//! A	A	1.000000
//! A	B	0.600000
//! ```
//!
//! Rows are grouped by their first column and sorted by descending
//! similarity within a group.

#![allow(clippy::tabs_in_doc_comments)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::distance::CharSimilarity;
use crate::embeddings::{unit_cosine, EmbeddingTable};
use crate::error::{Error, Result};
use crate::num::{fmax, Scalar};

const FORMAT: &str = "homoglyph table";

/// Number of neighbours kept per character unless configured otherwise.
pub const DEFAULT_K: usize = 800;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub ch: char,
    pub sim: T,
}

/// Descending similarity, then ascending codepoint.
fn rank<T: Scalar>(a: &Neighbor<T>, b: &Neighbor<T>) -> Ordering {
    b.sim
        .partial_cmp(&a.sim)
        .unwrap_or(Ordering::Equal)
        .then(a.ch.cmp(&b.ch))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomoglyphTable<T> {
    k: usize,
    entries: BTreeMap<char, Vec<Neighbor<T>>>,
    // Per character, its neighbours sorted by codepoint for binary search.
    index: HashMap<char, Vec<(char, T)>>,
}

impl<T: Scalar> HomoglyphTable<T> {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(Self {
            k,
            entries: BTreeMap::new(),
            index: HashMap::new(),
        })
    }

    /// Add the neighbour list of `ch`.
    ///
    /// The list must be non-increasing in similarity, free of duplicates,
    /// no longer than `k`, and every similarity must lie in `[-1, 1]`.
    pub fn insert(&mut self, ch: char, neighbors: Vec<Neighbor<T>>) -> Result<()> {
        if self.entries.contains_key(&ch) {
            return Err(Error::Data(format!("neighbour list for {ch:?} given twice")));
        }
        if neighbors.is_empty() {
            return Err(Error::Data(format!("empty neighbour list for {ch:?}")));
        }
        if neighbors.len() > self.k {
            return Err(Error::Data(format!(
                "{ch:?} has {} neighbours, more than k = {}",
                neighbors.len(),
                self.k
            )));
        }
        for n in &neighbors {
            if !(n.sim.is_finite() && n.sim >= -T::one() && n.sim <= T::one()) {
                return Err(Error::Data(format!(
                    "similarity {} between {ch:?} and {:?} outside [-1, 1]",
                    n.sim, n.ch
                )));
            }
        }
        if let Some(w) = neighbors.windows(2).find(|w| w[1].sim > w[0].sim) {
            return Err(Error::Data(format!(
                "neighbours of {ch:?} not sorted: {:?} after {:?}",
                w[1].ch, w[0].ch
            )));
        }
        let mut by_char: Vec<(char, T)> = neighbors.iter().map(|n| (n.ch, n.sim)).collect();
        by_char.sort_by_key(|&(c, _)| c);
        if let Some(w) = by_char.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Data(format!("duplicate neighbour {:?} for {ch:?}", w[0].0)));
        }
        self.index.insert(ch, by_char);
        self.entries.insert(ch, neighbors);
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn neighbors(&self, ch: char) -> Option<&[Neighbor<T>]> {
        self.entries.get(&ch).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &[Neighbor<T>])> + '_ {
        self.entries.iter().map(|(&c, v)| (c, v.as_slice()))
    }

    /// Stored similarity of `b` in the list of `a`, if present.
    pub fn stored_sim(&self, a: char, b: char) -> Option<T> {
        let list = self.index.get(&a)?;
        list.binary_search_by_key(&b, |&(c, _)| c).ok().map(|i| list[i].1)
    }

    /// Stored similarity looked up in either direction, without clamping.
    pub fn raw_sim(&self, a: char, b: char) -> Option<T> {
        self.stored_sim(a, b).or_else(|| self.stored_sim(b, a))
    }

    /// Similarity used for substitution costs, in `[0, 1]`.
    ///
    /// Identical characters score 1. Otherwise the stored similarity of `b`
    /// among the neighbours of `a` is used, falling back to `a` among the
    /// neighbours of `b`; negative values clamp to 0 and unknown pairs are 0.
    pub fn lookup_sim(&self, a: char, b: char) -> T {
        if a == b {
            return T::one();
        }
        self.raw_sim(a, b).map_or(T::zero(), |s| fmax(s, T::zero()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format(FORMAT, 1, "empty input, expected `#k <k>`"))?;
        let k = header
            .strip_prefix("#k ")
            .and_then(|d| d.trim().parse::<usize>().ok())
            .filter(|&k| k > 0)
            .ok_or_else(|| Error::format(FORMAT, 1, "expected header `#k <positive integer>`"))?;
        let mut table = Self::new(k)?;
        let mut current: Option<(char, Vec<Neighbor<T>>, usize)> = None;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() || (line.starts_with('#') && !line.starts_with("#\t")) {
                continue;
            }
            let (ch, neighbor, sim) = parse_row::<T>(line)
                .ok_or_else(|| Error::format(FORMAT, lineno, "expected <char><TAB><neighbor><TAB><sim>"))?;
            match &mut current {
                Some((c, list, _)) if *c == ch => {
                    if list.len() == k {
                        return Err(Error::format(
                            FORMAT,
                            lineno,
                            format!("more than {k} neighbours for {ch:?}"),
                        ));
                    }
                    let prev = list.last().expect("group non-empty");
                    if sim > prev.sim {
                        return Err(Error::format(FORMAT, lineno, "similarities not in descending order"));
                    }
                    if list.iter().any(|n| n.ch == neighbor) {
                        return Err(Error::format(
                            FORMAT,
                            lineno,
                            format!("duplicate neighbour {neighbor:?}"),
                        ));
                    }
                    list.push(Neighbor { ch: neighbor, sim });
                }
                _ => {
                    if let Some((c, list, start)) = current.take() {
                        table
                            .insert(c, list)
                            .map_err(|e| Error::format(FORMAT, start, e.to_string()))?;
                    }
                    if table.entries.contains_key(&ch) {
                        return Err(Error::format(
                            FORMAT,
                            lineno,
                            format!("rows for {ch:?} are not contiguous"),
                        ));
                    }
                    current = Some((ch, vec![Neighbor { ch: neighbor, sim }], lineno));
                }
            }
        }
        if let Some((c, list, start)) = current {
            table
                .insert(c, list)
                .map_err(|e| Error::format(FORMAT, start, e.to_string()))?;
        }
        Ok(table)
    }

    /// Rows in codepoint order of the first column; similarities to 6 decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("#k {}\n", self.k);
        for (ch, list) in self.iter() {
            for n in list {
                writeln!(out, "{ch}\t{}\t{:.6}", n.ch, n.sim).expect("write to String");
            }
        }
        out
    }
}

fn parse_row<T: Scalar>(line: &str) -> Option<(char, char, T)> {
    let mut chars = line.chars();
    let ch = chars.next()?;
    let rest = chars.as_str().strip_prefix('\t')?;
    let mut chars = rest.chars();
    let neighbor = chars.next()?;
    let sim = chars.as_str().strip_prefix('\t')?.trim();
    let sim = sim.parse::<f64>().ok().filter(|s| s.is_finite())?;
    Some((ch, neighbor, T::from_f64_lossy(sim)))
}

impl<T: Scalar> CharSimilarity<T> for HomoglyphTable<T> {
    fn similarity(&self, a: char, b: char) -> T {
        self.lookup_sim(a, b)
    }
}

/// Substitution similarity without the clamp at zero: negative stored
/// cosines give substitution costs above `lambda`.
#[derive(Debug, Clone, Copy)]
pub struct Unclamped<'a, T>(pub &'a HomoglyphTable<T>);

impl<T: Scalar> CharSimilarity<T> for Unclamped<'_, T> {
    fn similarity(&self, a: char, b: char) -> T {
        if a == b {
            T::one()
        } else {
            self.0.raw_sim(a, b).unwrap_or(T::zero())
        }
    }
}

/// Exact top-`k` neighbours of every character by cosine similarity.
///
/// Each character is compared against every entry, itself included; `k` is
/// capped at the table size. Ties are ordered by ascending codepoint.
pub fn build_table<T: Scalar>(table: &EmbeddingTable<T>, k: usize) -> Result<HomoglyphTable<T>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if table.is_empty() {
        return Err(Error::Data(
            "cannot build a homoglyph table from an empty embedding table".into(),
        ));
    }
    let rows: Vec<(char, &[T])> = table.iter().collect();
    let keep = k.min(rows.len());
    let lists: Vec<(char, Vec<Neighbor<T>>)> = rows
        .par_iter()
        .map(|&(q, qv)| {
            let mut cands: Vec<Neighbor<T>> = rows
                .iter()
                .map(|&(c, cv)| Neighbor {
                    ch: c,
                    sim: if q <= c {
                        unit_cosine(qv, cv)
                    } else {
                        unit_cosine(cv, qv)
                    },
                })
                .collect();
            if keep < cands.len() {
                cands.select_nth_unstable_by(keep - 1, rank);
                cands.truncate(keep);
            }
            cands.sort_by(rank);
            (q, cands)
        })
        .collect();

    let mut out = HomoglyphTable::new(k)?;
    for (ch, list) in lists {
        out.insert(ch, list)?;
    }
    Ok(out)
}
