//! Character bitmaps: PGM decoding, square normalization and the raster
//! embedder used when no learned encoder is available.
//!
//! Pixels are grayscale with 0 = black ink and 255 = white background.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Largest accepted bitmap side.
pub const MAX_SIDE: usize = 4096;

/// Default side length used by [`raster_embed`] callers.
pub const DEFAULT_SIDE: usize = 64;

const WHITE: u8 = 255;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphBitmap {
    ch: char,
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GlyphBitmap {
    pub fn new(ch: char, width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Data(format!("glyph {ch:?} has a zero dimension")));
        }
        if width > MAX_SIDE || height > MAX_SIDE {
            return Err(Error::Data(format!(
                "glyph {ch:?} is {width}x{height}, larger than {MAX_SIDE}x{MAX_SIDE}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Data(format!(
                "glyph {ch:?}: {} pixels for a {width}x{height} bitmap",
                pixels.len()
            )));
        }
        Ok(Self {
            ch,
            width,
            height,
            pixels,
        })
    }

    /// All-white bitmap.
    pub fn blank(ch: char, width: usize, height: usize) -> Result<Self> {
        Self::new(ch, width, height, vec![WHITE; width * height])
    }

    pub fn ch(&self) -> char {
        self.ch
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major, top row first.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn with_char(mut self, ch: char) -> Self {
        self.ch = ch;
        self
    }

    pub fn is_blank(&self) -> bool {
        self.pixels.iter().all(|&p| p == WHITE)
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Returns the start offset of the number and its value.
    fn number(&mut self, what: &str) -> Result<(usize, usize)> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::pgm(start, format!("expected {what}")));
        }
        // At most 10 digits keeps the value far below usize overflow.
        if self.pos - start > 10 {
            return Err(Error::pgm(start, format!("{what} too large")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        Ok((start, text.parse().expect("ascii digits")))
    }
}

/// Decode a binary (P5) PGM. The character identity comes from the caller.
pub fn load_pgm(bytes: &[u8], ch: char) -> Result<GlyphBitmap> {
    if bytes.len() < 2 {
        return Err(Error::pgm(0, "missing magic"));
    }
    if &bytes[..2] != b"P5" {
        return Err(Error::pgm(0, "unsupported magic (expected P5)"));
    }
    let mut header = HeaderReader { bytes, pos: 2 };
    if !header
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(Error::pgm(2, "expected whitespace after magic"));
    }
    let (width_at, width) = header.number("width")?;
    let (height_at, height) = header.number("height")?;
    let (maxval_at, maxval) = header.number("maxval")?;
    if width == 0 || width > MAX_SIDE {
        return Err(Error::pgm(width_at, format!("width {width} out of range")));
    }
    if height == 0 || height > MAX_SIDE {
        return Err(Error::pgm(height_at, format!("height {height} out of range")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::pgm(
            maxval_at,
            format!("maxval {maxval} unsupported (must be 1..=255)"),
        ));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(Error::pgm(header.pos, "expected whitespace after maxval")),
    }
    let start = header.pos;
    let need = width * height;
    let payload = bytes.get(start..start + need).ok_or_else(|| {
        Error::pgm(
            bytes.len(),
            format!(
                "truncated payload: expected {need} bytes, found {}",
                bytes.len() - start
            ),
        )
    })?;
    let mut pixels = Vec::with_capacity(need);
    for (i, &v) in payload.iter().enumerate() {
        let v = v as usize;
        if v > maxval {
            return Err(Error::pgm(start + i, format!("sample {v} exceeds maxval {maxval}")));
        }
        pixels.push(((v * 255 + maxval / 2) / maxval) as u8);
    }
    GlyphBitmap::new(ch, width, height, pixels)
}

/// Encode as binary PGM with maxval 255.
pub fn save_pgm(bitmap: &GlyphBitmap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", bitmap.width, bitmap.height).into_bytes();
    out.extend_from_slice(&bitmap.pixels);
    out
}

/// Fit `bitmap` into a `side`×`side` white canvas.
///
/// The longer edge is scaled to `side` with nearest-neighbour sampling
/// (pixel-centre rule, integer arithmetic), the shorter edge keeps the
/// aspect ratio, and the result is centred (extra pixel goes right/bottom).
///
/// # Panics
///
/// Panics if `side == 0`.
pub fn normalize(bitmap: &GlyphBitmap, side: usize) -> GlyphBitmap {
    assert!(side > 0, "normalize: side must be positive");
    let (w, h) = (bitmap.width, bitmap.height);
    let longest = w.max(h);
    let scaled = |len: usize| ((2 * len * side + longest) / (2 * longest)).clamp(1, side);
    let (nw, nh) = (scaled(w), scaled(h));
    let (ox, oy) = ((side - nw) / 2, (side - nh) / 2);

    let mut pixels = vec![WHITE; side * side];
    for y in 0..nh {
        let sy = ((2 * y + 1) * h) / (2 * nh);
        for x in 0..nw {
            let sx = ((2 * x + 1) * w) / (2 * nw);
            pixels[(oy + y) * side + ox + x] = bitmap.pixels[sy * w + sx];
        }
    }
    GlyphBitmap {
        ch: bitmap.ch,
        width: side,
        height: side,
        pixels,
    }
}

/// Pixel-space embedding: normalize, map ink to 1 and background to 0, then
/// L2-normalize. The result has `side * side` components.
pub fn raster_embed<T: Scalar>(bitmap: &GlyphBitmap, side: usize) -> Result<Vec<T>> {
    let norm = normalize(bitmap, side);
    let inv = T::from_f64_lossy(1.0 / 255.0);
    let mut v: Vec<T> = norm
        .pixels
        .iter()
        .map(|&p| T::one() - T::from_f64_lossy(p as f64) * inv)
        .collect();
    let len = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if len == T::zero() {
        return Err(Error::BlankGlyph { ch: bitmap.ch });
    }
    v.iter_mut().for_each(|x| *x = *x / len);
    Ok(v)
}

/// Parse `U+XXXX.pgm` (uppercase hex, 4 to 6 digits) into its character.
pub fn char_from_filename(name: &str) -> Option<char> {
    let hex = name.strip_prefix("U+")?.strip_suffix(".pgm")?;
    if !(4..=6).contains(&hex.len()) || !hex.bytes().all(|b| matches!(b, b'0'..=b'9' | b'A'..=b'F')) {
        return None;
    }
    char::from_u32(u32::from_str_radix(hex, 16).ok()?)
}

pub fn filename_for_char(ch: char) -> String {
    format!("U+{:04X}.pgm", ch as u32)
}

/// Load every `U+XXXX.pgm` in `dir`, ordered by codepoint.
///
/// Any other entry in the directory is an error: the directory is the
/// manifest.
pub fn load_glyph_dir(dir: &Path) -> Result<Vec<GlyphBitmap>> {
    let mut glyphs = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))? {
        let entry = entry?;
        let path = entry.path();
        let name = entry.file_name();
        let ch = name
            .to_str()
            .and_then(char_from_filename)
            .ok_or_else(|| Error::Data("file name is not of the form U+XXXX.pgm".into()).in_file(&path))?;
        let bytes = fs::read(&path).map_err(|e| Error::from(e).in_file(&path))?;
        glyphs.push(load_pgm(&bytes, ch).map_err(|e| e.in_file(&path))?);
    }
    if glyphs.is_empty() {
        return Err(Error::Data("no glyph files found".into()).in_file(dir));
    }
    glyphs.sort_by_key(|g| g.ch);
    Ok(glyphs)
}
