//! Procedural fixtures: a small glyph set with built-in look-alike families,
//! a matching stroke table, and entity names drawn from a syllable inventory.
//!
//! Each family shares a few thick base strokes; every member adds one small
//! square mark of its own, so members are near-duplicates of each other and
//! unrelated to other families. Everything is derived from a seed through
//! [`CorruptionRng`].

use crate::error::Result;
use crate::glyphs::GlyphBitmap;
use crate::ngram::StrokeTable;
use crate::synth::CorruptionRng;

pub const GLYPH_SIDE: usize = 24;
pub const FAMILY_SIZE: usize = 4;
const BASE_STROKES: usize = 3;
const MARK_SIDE: usize = 4;

/// The 60 characters of the toy script: `A-Z`, `a-z`, `0-7`.
pub fn charset() -> Vec<char> {
    ('A'..='Z').chain('a'..='z').chain('0'..='7').collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Stroke { x0: usize, y0: usize, x1: usize, y1: usize },
    Mark { x: usize, y: usize },
}

impl Part {
    fn code(self) -> String {
        match self {
            Part::Stroke { x0, y0, x1, y1 } => format!("s{x0}.{y0}.{x1}.{y1}"),
            Part::Mark { x, y } => format!("m{x}.{y}"),
        }
    }

    fn draw(self, g: &mut GlyphBitmap) {
        match self {
            Part::Stroke { x0, y0, x1, y1 } => {
                let steps = x0.abs_diff(x1).max(y0.abs_diff(y1)).max(1);
                for t in 0..=steps {
                    let x = (x0 * (steps - t) + x1 * t + steps / 2) / steps;
                    let y = (y0 * (steps - t) + y1 * t + steps / 2) / steps;
                    fill(g, x, y, 2);
                }
            }
            Part::Mark { x, y } => fill(g, x, y, MARK_SIDE),
        }
    }
}

fn fill(g: &mut GlyphBitmap, x: usize, y: usize, side: usize) {
    for dy in 0..side {
        for dx in 0..side {
            let (px, py) = (x + dx, y + dy);
            if px < g.width() && py < g.height() {
                g.set(px, py, 0);
            }
        }
    }
}

/// Glyph parts per character, in [`charset`] order.
fn layout(seed: u64) -> Vec<(char, Vec<Part>)> {
    let mut rng = CorruptionRng::new(seed);
    let span = GLYPH_SIDE - 2;
    let mut out = Vec::new();
    for family in charset().chunks(FAMILY_SIZE) {
        let base: Vec<Part> = (0..BASE_STROKES)
            .map(|_| Part::Stroke {
                x0: 1 + rng.index(span),
                y0: 1 + rng.index(span),
                x1: 1 + rng.index(span),
                y1: 1 + rng.index(span),
            })
            .collect();
        for &ch in family {
            let mut parts = base.clone();
            parts.push(Part::Mark {
                x: rng.index(GLYPH_SIDE - MARK_SIDE + 1),
                y: rng.index(GLYPH_SIDE - MARK_SIDE + 1),
            });
            out.push((ch, parts));
        }
    }
    out
}

/// One `GLYPH_SIDE`² bitmap per toy character.
pub fn glyphs(seed: u64) -> Vec<GlyphBitmap> {
    layout(seed)
        .into_iter()
        .map(|(ch, parts)| {
            let mut g = GlyphBitmap::blank(ch, GLYPH_SIDE, GLYPH_SIDE).expect("valid size");
            parts.iter().for_each(|p| p.draw(&mut g));
            g
        })
        .collect()
}

/// Stroke decompositions matching [`glyphs`] for the same seed.
pub fn strokes(seed: u64) -> Result<StrokeTable> {
    let mut table = StrokeTable::new();
    for (ch, parts) in layout(seed) {
        table.insert(ch, parts.into_iter().map(Part::code).collect())?;
    }
    Ok(table)
}

/// `count` distinct names, each `syllables_per_name` syllables drawn from an
/// inventory of `inventory` random two-character syllables over `chars`.
///
/// A small inventory makes names collide on most syllables, which is what
/// makes the matching task non-trivial.
pub fn names(seed: u64, count: usize, chars: &[char], inventory: usize, syllables_per_name: usize) -> Vec<String> {
    assert!(!chars.is_empty() && inventory > 0 && syllables_per_name > 0);
    let limit = (inventory as u128).saturating_pow(syllables_per_name as u32);
    assert!(limit >= count as u128, "inventory too small for {count} distinct names");
    let mut rng = CorruptionRng::new(seed);
    let syllables: Vec<String> = (0..inventory)
        .map(|_| (0..2).map(|_| chars[rng.index(chars.len())]).collect())
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let name: String = (0..syllables_per_name)
            .map(|_| syllables[rng.index(inventory)].as_str())
            .collect();
        if seen.insert(name.clone()) {
            out.push(name);
        }
    }
    out
}
