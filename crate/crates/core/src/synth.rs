//! Seeded corruption model producing two noisy views per clean string.
//!
//! # Random stream
//!
//! The generator is xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Every decision draws one `u64`
//! `x` and uses `u = (x >> 11) * 2^-53`, a uniform double in `[0, 1)`.
//! Uniform choices among `len` items take index `floor(u * len)`; weighted
//! choices take the first item whose running weight total exceeds
//! `u * total`. Nothing else consumes the stream, so corpora are
//! reproducible from this description alone.
//!
//! # Per-character process
//!
//! For each input character in order: draw `u`; if `u < del_rate` the
//! character is dropped, else if `u < del_rate + sub_rate` it is replaced by
//! a homoglyph neighbour (weight `max(sim, 1e-6)^homoglyph_bias`, self
//! excluded) or, when it has none, by a uniform alphabet character other
//! than itself. Then a second draw `v < ins_rate` appends a uniform
//! alphabet character.

use std::collections::HashSet;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::knn::HomoglyphTable;
use crate::num::{fmax, Scalar};

/// Floor applied to neighbour similarities before weighting.
pub const SIM_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorruptionConfig {
    pub seed: u64,
    pub sub_rate: f64,
    pub ins_rate: f64,
    pub del_rate: f64,
    pub homoglyph_bias: f64,
    /// Insertion and fallback-substitution characters.
    #[serde(deserialize_with = "de_alphabet")]
    pub alphabet: Vec<char>,
}

fn de_alphabet<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<char>, D::Error> {
    let s = String::deserialize(d)?;
    Ok(s.chars().collect())
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sub_rate: 0.15,
            ins_rate: 0.03,
            del_rate: 0.03,
            homoglyph_bias: 4.0,
            alphabet: Vec::new(),
        }
    }
}

impl CorruptionConfig {
    /// Parse a `key = value` file; unspecified keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("sub_rate", self.sub_rate),
            ("ins_rate", self.ins_rate),
            ("del_rate", self.del_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.sub_rate + self.del_rate > 1.0 {
            return Err(Error::Config("sub_rate + del_rate must not exceed 1".into()));
        }
        if !(self.homoglyph_bias.is_finite() && self.homoglyph_bias >= 0.0) {
            return Err(Error::Config("homoglyph_bias must be a non-negative number".into()));
        }
        if self.ins_rate > 0.0 && self.alphabet.is_empty() {
            return Err(Error::Config("ins_rate > 0 needs a non-empty alphabet".into()));
        }
        Ok(())
    }

    /// Sorted, deduplicated alphabet.
    pub fn with_alphabet(mut self, chars: impl IntoIterator<Item = char>) -> Self {
        let mut a: Vec<char> = chars.into_iter().collect();
        a.sort_unstable();
        a.dedup();
        self.alphabet = a;
        self
    }
}

/// The portable random stream described in the module docs.
#[derive(Debug, Clone)]
pub struct CorruptionRng(Xoshiro256PlusPlus);

impl CorruptionRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        ((self.unit() * len as f64) as usize).min(len - 1)
    }

    /// Index drawn proportionally to `weights` (all non-negative, sum > 0).
    pub fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let target = self.unit() * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        // Rounding left target at the very top; take the last positive weight.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
    }
}

fn substitute<T: Scalar>(ch: char, table: &HomoglyphTable<T>, cfg: &CorruptionConfig, rng: &mut CorruptionRng) -> char {
    let candidates: Vec<(char, f64)> = table
        .neighbors(ch)
        .unwrap_or(&[])
        .iter()
        .filter(|n| n.ch != ch)
        .map(|n| (n.ch, fmax(n.sim.to_f64_lossy(), SIM_FLOOR).powf(cfg.homoglyph_bias)))
        .collect();
    if !candidates.is_empty() {
        let weights: Vec<f64> = candidates.iter().map(|c| c.1).collect();
        return candidates[rng.weighted(&weights)].0;
    }
    let others: Vec<char> = cfg.alphabet.iter().copied().filter(|&c| c != ch).collect();
    if others.is_empty() {
        ch
    } else {
        others[rng.index(others.len())]
    }
}

/// One noisy view of `s`, consuming draws from `rng`.
pub fn corrupt<T: Scalar>(
    s: &str,
    table: &HomoglyphTable<T>,
    cfg: &CorruptionConfig,
    rng: &mut CorruptionRng,
) -> Result<String> {
    cfg.validate()?;
    Ok(corrupt_unchecked(s, table, cfg, rng))
}

fn corrupt_unchecked<T: Scalar>(
    s: &str,
    table: &HomoglyphTable<T>,
    cfg: &CorruptionConfig,
    rng: &mut CorruptionRng,
) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        let u = rng.unit();
        if u < cfg.del_rate {
            // dropped
        } else if u < cfg.del_rate + cfg.sub_rate {
            out.push(substitute(ch, table, cfg, rng));
        } else {
            out.push(ch);
        }
        if rng.unit() < cfg.ins_rate {
            out.push(cfg.alphabet[rng.index(cfg.alphabet.len())]);
        }
    }
    out
}

/// Queries, keys and truth for one synthetic linkage experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub queries: Vec<String>,
    /// Key views of the surviving entities, first occurrence kept.
    pub keys: Vec<String>,
    /// `(query, true key)` per surviving entity.
    pub truth: Vec<(String, String)>,
    /// Entities dropped because both views came out identical.
    pub dropped: usize,
}

/// Corrupt every clean string twice (query view, then key view) from a
/// single stream seeded with `cfg.seed`, and keep entities whose views differ.
pub fn make_corpus<T: Scalar>(clean: &[String], table: &HomoglyphTable<T>, cfg: &CorruptionConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut seen = HashSet::new();
    if let Some(dup) = clean.iter().find(|s| !seen.insert(s.as_str())) {
        return Err(Error::Data(format!("duplicate clean string {dup:?}")));
    }
    let mut rng = CorruptionRng::new(cfg.seed);
    let mut corpus = Corpus {
        queries: Vec::new(),
        keys: Vec::new(),
        truth: Vec::new(),
        dropped: 0,
    };
    let mut key_seen = HashSet::new();
    for s in clean {
        let query = corrupt_unchecked(s, table, cfg, &mut rng);
        let key = corrupt_unchecked(s, table, cfg, &mut rng);
        if query == key {
            corpus.dropped += 1;
            continue;
        }
        if key_seen.insert(key.clone()) {
            corpus.keys.push(key.clone());
        }
        corpus.queries.push(query.clone());
        corpus.truth.push((query, key));
    }
    if corpus.truth.len() < 2 {
        return Err(Error::Data(format!(
            "only {} of {} entities have differing views; need at least 2",
            corpus.truth.len(),
            clean.len()
        )));
    }
    Ok(corpus)
}
