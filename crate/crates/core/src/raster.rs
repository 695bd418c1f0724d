//! Grayscale and RGB rasters plus a self-contained PNM (PGM/PPM) codec.
//!
//! Luminance is carried as `f64` in `[0, 1]` end to end so correlation
//! arithmetic loses no precision mid-pipeline; quantization to integer
//! samples happens only at file boundaries.

use crate::error::{Error, Result};

/// Largest width or height the codec accepts.
const MAX_DIM: usize = 65535;

/// Row-major grayscale raster with luminance samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image, validating dimensions, buffer length and the
    /// `[0, 1]` pixel range.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimensions);
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(Error::BadBufferLength {
                len: pixels.len(),
                width,
                height,
                expected,
            });
        }
        if let Some(&bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::PixelOutOfRange(bad));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Construction for internal resampling paths whose arithmetic already
    /// guarantees the invariants (convex combinations of in-range values).
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        debug_assert!(width >= 1 && height >= 1);
        debug_assert_eq!(pixels.len(), width * height);
        debug_assert!(pixels.iter().all(|p| (0.0..=1.0).contains(p)));
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Luminance at (col, row). Panics if out of bounds.
    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        debug_assert!(col < self.width && row < self.height);
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, col: usize, row: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    /// True when every pixel has the same value (no luminance variation).
    pub fn is_constant(&self) -> bool {
        let first = self.pixels[0];
        self.pixels.iter().all(|&p| p == first)
    }
}

/// Row-major RGB raster, channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimensions);
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(Error::BadBufferLength {
                len: pixels.len(),
                width,
                height,
                expected,
            });
        }
        for px in &pixels {
            if let Some(&bad) = px.iter().find(|c| !(0.0..=1.0).contains(*c)) {
                return Err(Error::PixelOutOfRange(bad));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }
}

/// A pixel position in the internal top-left frame (row grows downward).
/// Translation reporting converts to the bottom-left frame at the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelCoord {
    pub col: usize,
    pub row: usize,
}

/// Result of decoding a PNM file: grayscale for P2/P5, color for P3/P6.
#[derive(Debug, Clone)]
pub enum PnmImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl PnmImage {
    /// Collapses to grayscale, converting color images with [`to_grayscale`].
    pub fn into_gray(self) -> GrayImage {
        match self {
            PnmImage::Gray(g) => g,
            PnmImage::Rgb(rgb) => to_grayscale(&rgb),
        }
    }
}

/// BT.601 luma conversion. Written in difference form so an image with
/// three equal channels converts to exactly that channel value.
pub fn to_grayscale(image: &RgbImage) -> GrayImage {
    let pixels = image
        .pixels()
        .iter()
        .map(|&[r, g, b]| (b + 0.299 * (r - b) + 0.587 * (g - b)).clamp(0.0, 1.0))
        .collect();
    GrayImage::from_raw(image.width(), image.height(), pixels)
}

fn is_pnm_whitespace(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c)
}

/// Whitespace/comment-aware token reader over the PNM header (and over the
/// whole file for the ASCII formats).
struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let b = self.data[self.pos];
            if is_pnm_whitespace(b) {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        if self.pos >= self.data.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.data.len()
            && !is_pnm_whitespace(self.data[self.pos])
            && self.data[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Some(&self.data[start..self.pos])
    }

    fn next_u32(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .next_token()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        let s = std::str::from_utf8(tok)
            .map_err(|_| Error::MalformedHeader(format!("non-ASCII {what}")))?;
        s.parse::<u32>()
            .map_err(|_| Error::MalformedHeader(format!("invalid {what} `{s}`")))
    }

    /// Consumes the single whitespace byte that separates the header from a
    /// binary raster.
    fn expect_raster_separator(&mut self) -> Result<()> {
        match self.data.get(self.pos) {
            Some(&b) if is_pnm_whitespace(b) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::MalformedHeader(
                "missing whitespace before binary raster".into(),
            )),
        }
    }

    fn rest(&self) -> &'a [u8] {
        &self.data[self.pos..]
    }
}

/// Decodes a PNM byte stream. P2/P5 yield [`PnmImage::Gray`], P3/P6 yield
/// [`PnmImage::Rgb`]; samples are scaled to `[0, 1]` by the header maxval.
pub fn load_pnm(bytes: &[u8]) -> Result<PnmImage> {
    let mut tokens = Tokens::new(bytes);
    let magic = tokens
        .next_token()
        .ok_or_else(|| Error::MalformedHeader("empty input".into()))?;
    let (color, ascii) = match magic {
        b"P2" => (false, true),
        b"P3" => (true, true),
        b"P5" => (false, false),
        b"P6" => (true, false),
        other => {
            return Err(Error::UnsupportedMagic(
                String::from_utf8_lossy(other).into_owned(),
            ))
        }
    };

    let width = tokens.next_u32("width")? as usize;
    let height = tokens.next_u32("height")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimensions);
    }
    if width > MAX_DIM || height > MAX_DIM {
        return Err(Error::DimensionsTooLarge { width, height });
    }
    let maxval = tokens.next_u32("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MaxvalOutOfRange(maxval));
    }

    let channels = if color { 3 } else { 1 };
    let n_samples = width * height * channels;
    let scale = 1.0 / maxval as f64;

    let mut samples = Vec::with_capacity(n_samples);
    if ascii {
        for i in 0..n_samples {
            let v = match tokens.next_token() {
                Some(tok) => std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| Error::MalformedHeader(format!("invalid sample #{i}")))?,
                None => {
                    return Err(Error::TruncatedData {
                        expected: n_samples,
                        found: i,
                    })
                }
            };
            samples.push((v.min(maxval) as f64 * scale).min(1.0));
        }
    } else {
        tokens.expect_raster_separator()?;
        let raster = tokens.rest();
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let needed = n_samples * bytes_per;
        if raster.len() < needed {
            return Err(Error::TruncatedData {
                expected: n_samples,
                found: raster.len() / bytes_per,
            });
        }
        if bytes_per == 1 {
            samples.extend(
                raster[..n_samples]
                    .iter()
                    .map(|&b| (b as u32).min(maxval) as f64 * scale),
            );
        } else {
            samples.extend(raster[..needed].chunks_exact(2).map(|c| {
                let v = u16::from_be_bytes([c[0], c[1]]) as u32;
                (v.min(maxval) as f64 * scale).min(1.0)
            }));
        }
    }

    if color {
        let pixels = samples
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Ok(PnmImage::Rgb(RgbImage {
            width,
            height,
            pixels,
        }))
    } else {
        Ok(PnmImage::Gray(GrayImage {
            width,
            height,
            pixels: samples,
        }))
    }
}

/// Encodes a grayscale image as binary PGM (P5). Samples are quantized to
/// `round(p * maxval)`; a load/save round trip stays within half a
/// quantization step per pixel.
pub fn save_pnm(image: &GrayImage, maxval: u32) -> Result<Vec<u8>> {
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MaxvalOutOfRange(maxval));
    }
    let header = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval);
    let mut out = header.into_bytes();
    let m = maxval as f64;
    if maxval < 256 {
        out.extend(
            image
                .pixels()
                .iter()
                .map(|&p| (p * m + 0.5).floor().clamp(0.0, m) as u8),
        );
    } else {
        for &p in image.pixels() {
            let q = (p * m + 0.5).floor().clamp(0.0, m) as u16;
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn expect_gray(img: PnmImage) -> GrayImage {
        match img {
            PnmImage::Gray(g) => g,
            PnmImage::Rgb(_) => panic!("expected grayscale"),
        }
    }

    #[test]
    fn load_raw_pgm() {
        let bytes = b"P5\n2 2\n255\n\x00\xff\x00\xff";
        let img = expect_gray(load_pnm(bytes).unwrap());
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn load_ascii_pgm() {
        let img = expect_gray(load_pnm(b"P2\n1 1\n255\n128\n").unwrap());
        assert_eq!(img.pixels(), &[128.0 / 255.0]);
    }

    #[test]
    fn load_rejects_zero_dimensions() {
        assert!(matches!(
            load_pnm(b"P5 0 0 255\n"),
            Err(Error::ZeroDimensions)
        ));
    }

    #[test]
    fn load_rejects_unknown_magic() {
        assert!(matches!(
            load_pnm(b"P7\n1 1\n255\n\x00"),
            Err(Error::UnsupportedMagic(m)) if m == "P7"
        ));
    }

    #[test]
    fn load_rejects_truncation() {
        assert!(matches!(
            load_pnm(b"P5\n2 2\n255\n\x00\x01"),
            Err(Error::TruncatedData { expected: 4, .. })
        ));
    }

    #[test]
    fn load_rejects_bad_maxval() {
        assert!(matches!(
            load_pnm(b"P5\n1 1\n0\n\x00"),
            Err(Error::MaxvalOutOfRange(0))
        ));
        assert!(matches!(
            load_pnm(b"P5\n1 1\n70000\n\x00"),
            Err(Error::MaxvalOutOfRange(70000))
        ));
    }

    #[test]
    fn header_comments_are_skipped() {
        let bytes = b"P5 # raw pgm\n# another comment\n2 1 # dims\n255\n\x10\x20";
        let img = expect_gray(load_pnm(bytes).unwrap());
        assert_eq!((img.width(), img.height()), (2, 1));
    }

    #[test]
    fn load_color_ppm() {
        let bytes = b"P6\n1 1\n255\n\xff\x00\x00";
        match load_pnm(bytes).unwrap() {
            PnmImage::Rgb(rgb) => assert_eq!(rgb.pixels(), &[[1.0, 0.0, 0.0]]),
            PnmImage::Gray(_) => panic!("expected color"),
        }
    }

    #[test]
    fn save_full_scale_pixel() {
        let img = GrayImage::new(1, 1, vec![1.0]).unwrap();
        assert_eq!(save_pnm(&img, 255).unwrap(), b"P5\n1 1\n255\n\xff");
        let zero = GrayImage::new(1, 1, vec![0.0]).unwrap();
        assert_eq!(*save_pnm(&zero, 255).unwrap().last().unwrap(), 0u8);
    }

    #[test]
    fn roundtrip_error_within_quantization_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pixels: Vec<f64> = (0..64 * 64).map(|_| rng.random::<f64>()).collect();
        let img = GrayImage::new(64, 64, pixels).unwrap();
        let back = expect_gray(load_pnm(&save_pnm(&img, 255).unwrap()).unwrap());
        let max_err = img
            .pixels()
            .iter()
            .zip(back.pixels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 1.0 / 510.0, "max_err = {max_err}");
    }

    #[test]
    fn sixteen_bit_roundtrip() {
        let img = GrayImage::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        let back = expect_gray(load_pnm(&save_pnm(&img, 65535).unwrap()).unwrap());
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            assert!((a - b).abs() <= 1.0 / (2.0 * 65535.0));
        }
    }

    #[test]
    fn grayscale_weights() {
        let red = RgbImage::new(1, 1, vec![[1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(to_grayscale(&red).pixels()[0], 0.299);
        let white = RgbImage::new(2, 1, vec![[1.0; 3]; 2]).unwrap();
        assert!(to_grayscale(&white).pixels().iter().all(|&p| p == 1.0));
        let black = RgbImage::new(1, 1, vec![[0.0; 3]]).unwrap();
        assert_eq!(to_grayscale(&black).pixels()[0], 0.0);
    }

    #[test]
    fn image_constructor_validates() {
        assert!(matches!(
            GrayImage::new(0, 3, vec![]),
            Err(Error::ZeroDimensions)
        ));
        assert!(matches!(
            GrayImage::new(2, 2, vec![0.0; 3]),
            Err(Error::BadBufferLength { .. })
        ));
        assert!(matches!(
            GrayImage::new(1, 1, vec![1.5]),
            Err(Error::PixelOutOfRange(_))
        ));
    }

    proptest! {
        // Equal-channel RGB converts to exactly that channel.
        #[test]
        fn equal_channels_convert_exactly(v in 0.0f64..=1.0) {
            let rgb = RgbImage::new(1, 1, vec![[v, v, v]]).unwrap();
            prop_assert_eq!(to_grayscale(&rgb).pixels()[0], v);
        }

        #[test]
        fn grayscale_stays_in_range(r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let rgb = RgbImage::new(1, 1, vec![[r, g, b]]).unwrap();
            let y = to_grayscale(&rgb).pixels()[0];
            prop_assert!((0.0..=1.0).contains(&y));
        }

        #[test]
        fn codec_roundtrip_bound(seed in 0u64..1000, w in 1usize..20, h in 1usize..20) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pixels: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>()).collect();
            let img = GrayImage::new(w, h, pixels).unwrap();
            let back = match load_pnm(&save_pnm(&img, 255).unwrap()).unwrap() {
                PnmImage::Gray(g) => g,
                _ => unreachable!(),
            };
            prop_assert_eq!((back.width(), back.height()), (w, h));
            for (a, b) in img.pixels().iter().zip(back.pixels()) {
                prop_assert!((a - b).abs() <= 1.0 / 510.0);
            }
        }
    }
}
