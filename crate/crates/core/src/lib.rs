//! Homoglyph-aware string matching for record linkage.
//!
//! Character look-alike similarity comes from embedding tables (learned
//! encoders, or the built-in raster embedder over glyph bitmaps). A k-NN
//! homoglyph table over those embeddings scales the substitution cost of a
//! Levenshtein matcher: substituting `a` by `b` costs `lambda * (1 - cos)`.
//! Character n-gram set metrics and TF-IDF n-gram cosine are provided as
//! baselines, together with a seeded synthetic corpus generator and a
//! top-1 linkage harness.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

pub mod distance;
pub mod embeddings;
pub mod error;
pub mod glyphs;
pub mod knn;
pub mod linkage;
pub mod ngram;
pub mod num;
pub mod synth;
pub mod toy;

pub use distance::{edit_distance, edit_distance_str, normalized_distance, CharSimilarity, CostModel};
pub use embeddings::EmbeddingTable;
pub use error::{Error, Result};
pub use glyphs::{load_pgm, normalize, raster_embed, GlyphBitmap};
pub use knn::{build_table, HomoglyphTable, Neighbor, Unclamped};
pub use linkage::{evaluate, match_all, KeySet, LinkageReport, MatchDecision, MatchMethod, MatcherConfig};
pub use ngram::{char_ngrams, set_similarity, stroke_ngrams, NGramProfile, SetMetric, StrokeTable, TfIdfIndex};
pub use num::Scalar;
pub use synth::{corrupt, make_corpus, Corpus, CorruptionConfig, CorruptionRng};

pub type Embeddings = EmbeddingTable<f64>;
pub type Embeddings32 = EmbeddingTable<f32>;
pub type Homoglyphs = HomoglyphTable<f64>;
pub type Homoglyphs32 = HomoglyphTable<f32>;
pub type Costs<'a> = CostModel<'a, f64>;
pub type Costs32<'a> = CostModel<'a, f32>;
pub type Matcher<'a> = MatcherConfig<'a, f64>;
pub type Decision = MatchDecision<f64>;
pub type Report = LinkageReport<f64>;
pub type TfIdf<F> = TfIdfIndex<f64, F>;
