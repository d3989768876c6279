//! Levenshtein distance with similarity-scaled substitution costs.
//!
//! Substituting `a` by `b` costs `lambda * (1 - sim(a, b))`, where `sim` is
//! supplied by a [`CharSimilarity`] (usually a homoglyph table). Without a
//! similarity source every substitution costs `lambda`, which is the
//! classic Levenshtein distance when all three costs are 1.

use crate::num::{fmax, fmin, Scalar};

/// Visual similarity between two characters.
pub trait CharSimilarity<T> {
    /// Expected in `[0, 1]` with `similarity(a, a) == 1`.
    fn similarity(&self, a: char, b: char) -> T;
}

impl<T, F> CharSimilarity<T> for F
where
    F: Fn(char, char) -> T,
{
    fn similarity(&self, a: char, b: char) -> T {
        self(a, b)
    }
}

/// Edit costs. `lambda` scales substitutions; `sims = None` means classic.
#[derive(Clone, Copy)]
pub struct CostModel<'a, T> {
    pub lambda: T,
    pub insert_cost: T,
    pub delete_cost: T,
    pub sims: Option<&'a (dyn CharSimilarity<T> + Sync)>,
}

impl<T: Scalar> Default for CostModel<'_, T> {
    fn default() -> Self {
        Self::classic()
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for CostModel<'_, T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CostModel")
            .field("lambda", &self.lambda)
            .field("insert_cost", &self.insert_cost)
            .field("delete_cost", &self.delete_cost)
            .field("sims", &self.sims.map(|_| ".."))
            .finish()
    }
}

impl<'a, T: Scalar> CostModel<'a, T> {
    /// Unit costs, no similarity source.
    pub fn classic() -> Self {
        Self {
            lambda: T::one(),
            insert_cost: T::one(),
            delete_cost: T::one(),
            sims: None,
        }
    }

    /// Unit costs with substitutions scaled by `sims`.
    pub fn homoglyphic(sims: &'a (dyn CharSimilarity<T> + Sync)) -> Self {
        Self {
            sims: Some(sims),
            ..Self::classic()
        }
    }

    pub fn with_costs(mut self, lambda: T, insert_cost: T, delete_cost: T) -> Self {
        self.lambda = lambda;
        self.insert_cost = insert_cost;
        self.delete_cost = delete_cost;
        self
    }

    #[inline]
    pub fn substitution_cost(&self, a: char, b: char) -> T {
        if a == b {
            return T::zero();
        }
        match self.sims {
            None => self.lambda,
            Some(s) => self.lambda * (T::one() - s.similarity(a, b)),
        }
    }

    fn largest_cost(&self) -> T {
        fmax(self.lambda, fmax(self.insert_cost, self.delete_cost))
    }
}

/// Minimum cost of turning `source` into `target`.
///
/// Wagner-Fischer over the full `(m+1)×(n+1)` lattice in row-major order,
/// keeping one row of `min(m, n) + 1` cells.
pub fn edit_distance<T: Scalar>(source: &[char], target: &[char], costs: &CostModel<'_, T>) -> T {
    if target.len() <= source.len() {
        lattice(source, target, costs.delete_cost, costs.insert_cost, |a, b| {
            costs.substitution_cost(a, b)
        })
    } else {
        // Walk the transposed lattice: deletions become insertions and the
        // substitution operands swap roles.
        lattice(target, source, costs.insert_cost, costs.delete_cost, |a, b| {
            costs.substitution_cost(b, a)
        })
    }
}

/// `rows` indexes the outer loop, `cols` the kept row. `drop_row` is the cost
/// of consuming a `rows` character alone, `drop_col` of a `cols` character.
fn lattice<T: Scalar>(rows: &[char], cols: &[char], drop_row: T, drop_col: T, sub: impl Fn(char, char) -> T) -> T {
    let mut row: Vec<T> = Vec::with_capacity(cols.len() + 1);
    let mut acc = T::zero();
    row.push(acc);
    for _ in cols {
        acc = acc + drop_col;
        row.push(acc);
    }
    let mut first = T::zero();
    for &r in rows {
        first = first + drop_row;
        let mut diag = row[0];
        row[0] = first;
        for (j, &c) in cols.iter().enumerate() {
            let up = row[j + 1];
            let best = fmin(fmin(up + drop_row, row[j] + drop_col), diag + sub(r, c));
            diag = up;
            row[j + 1] = best;
        }
    }
    row[cols.len()]
}

/// [`edit_distance`] over `&str`, treating each Unicode scalar value as one
/// character.
pub fn edit_distance_str<T: Scalar>(source: &str, target: &str, costs: &CostModel<'_, T>) -> T {
    let s: Vec<char> = source.chars().collect();
    let t: Vec<char> = target.chars().collect();
    edit_distance(&s, &t, costs)
}

/// Distance divided by `max(m, n) * max(lambda, insert, delete)`; 0 when
/// that product is 0.
pub fn normalized_distance<T: Scalar>(source: &[char], target: &[char], costs: &CostModel<'_, T>) -> T {
    let longest = source.len().max(target.len());
    let scale = T::from_count(longest) * costs.largest_cost();
    if scale == T::zero() {
        return T::zero();
    }
    edit_distance(source, target, costs) / scale
}
