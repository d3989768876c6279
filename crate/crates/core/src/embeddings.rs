//! Character embedding tables and the TSV format they are exchanged in.
//!
//! ```text
//! #dim 2
//! A	0.6 0.8
//! B	1 0
//! ```
//!
//! The first line declares the dimension. Each row is the literal character,
//! a TAB, then `dim` space-separated floats. Other lines starting with `#`
//! are comments, except `#<TAB>...`, which is the row for `#` itself.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::num::{fmax, fmin, Scalar};

const FORMAT: &str = "embedding table";

/// Map from character to unit-length vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    entries: BTreeMap<char, Vec<T>>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Data("embedding dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            entries: BTreeMap::new(),
        })
    }

    /// Insert a vector, rescaling it to unit length.
    pub fn insert(&mut self, ch: char, mut vector: Vec<T>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Data(format!(
                "{ch:?}: vector has {} components, table dimension is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data(format!("{ch:?}: non-finite component")));
        }
        if self.entries.contains_key(&ch) {
            return Err(Error::Data(format!("duplicate character {ch:?}")));
        }
        let norm = vector.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::Data(format!("{ch:?}: zero vector")));
        }
        if !norm.is_finite() {
            // Squares overflowed; scale down by the largest magnitude first.
            let peak = vector.iter().fold(T::zero(), |m, &x| fmax(m, x.abs()));
            vector.iter_mut().for_each(|x| *x = *x / peak);
            return self.insert(ch, vector);
        }
        // Already-unit vectors are kept bit-for-bit so save/load is a fixed point.
        if (norm - T::one()).abs() > T::UNIT_SLACK {
            vector.iter_mut().for_each(|x| *x = *x / norm);
        }
        self.entries.insert(ch, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, ch: char) -> Option<&[T]> {
        self.entries.get(&ch).map(Vec::as_slice)
    }

    pub fn contains(&self, ch: char) -> bool {
        self.entries.contains_key(&ch)
    }

    /// Entries in ascending codepoint order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (char, &[T])> + '_ {
        self.entries.iter().map(|(&c, v)| (c, v.as_slice()))
    }

    pub fn chars(&self) -> impl ExactSizeIterator<Item = char> + '_ {
        self.entries.keys().copied()
    }

    /// Cosine similarity of two stored characters, clamped to `[-1, 1]`.
    ///
    /// Operands are ordered by codepoint before the dot product so the result
    /// is bit-identical for `(a, b)` and `(b, a)`.
    pub fn cosine(&self, a: char, b: char) -> Result<T> {
        let va = self.get(a).ok_or(Error::MissingChar(a))?;
        let vb = self.get(b).ok_or(Error::MissingChar(b))?;
        Ok(if a <= b {
            unit_cosine(va, vb)
        } else {
            unit_cosine(vb, va)
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format(FORMAT, 1, "empty input, expected `#dim <d>`"))?;
        let dim = header
            .strip_prefix("#dim ")
            .and_then(|d| d.trim().parse::<usize>().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::format(FORMAT, 1, "expected header `#dim <positive integer>`"))?;
        let mut table = Self::new(dim)?;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() || (line.starts_with('#') && !line.starts_with("#\t")) {
                continue;
            }
            let mut chars = line.chars();
            let ch = chars.next().expect("non-empty line");
            let rest = chars
                .as_str()
                .strip_prefix('\t')
                .ok_or_else(|| Error::format(FORMAT, lineno, "expected <char><TAB><values>"))?;
            let vector = rest
                .split_ascii_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map(T::from_f64_lossy)
                        .map_err(|_| Error::format(FORMAT, lineno, format!("bad number {tok:?}")))
                })
                .collect::<Result<Vec<T>>>()?;
            if vector.len() != dim {
                return Err(Error::format(
                    FORMAT,
                    lineno,
                    format!("{} values, expected {dim}", vector.len()),
                ));
            }
            if table.contains(ch) {
                return Err(Error::format(FORMAT, lineno, format!("duplicate character {ch:?}")));
            }
            table
                .insert(ch, vector)
                .map_err(|e| Error::format(FORMAT, lineno, e.to_string()))?;
        }
        Ok(table)
    }

    /// Canonical text form: rows sorted by codepoint, shortest round-trip floats.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("#dim {}\n", self.dim);
        for (ch, v) in self.iter() {
            out.push(ch);
            out.push('\t');
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "{x}").expect("write to String");
            }
            out.push('\n');
        }
        out
    }
}

/// Dot product of two unit vectors, clamped into `[-1, 1]`.
pub fn unit_cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let dot = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    fmin(fmax(dot, -T::one()), T::one())
}
