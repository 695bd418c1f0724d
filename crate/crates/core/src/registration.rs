//! Cross-correlation registration: the correlation kernel, rotation and
//! resize resampling, the two-stage rotation search, and the translation
//! and scaling detectors.
//!
//! The rotation search sweeps candidate angles, rotating the (cropped)
//! reference template by each candidate and correlating it with the test
//! image on a common canvas aligned by ink centroid, which makes the sweep
//! insensitive to where the content sits on either canvas. The candidate
//! maximizing the raw correlation is the amount by which the test image
//! appears rotated relative to the reference; downstream correction
//! rotates the test image by the negated result. A coarse sweep locates
//! the peak to one coarse step, then a fine sweep refines it within a
//! clamped window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{bounding_box, InkMask};
use crate::raster::GrayImage;

/// One evaluated candidate angle. `normalized` is the min-max rescaling of
/// `raw` over the whole sweep, absent when the sweep was degenerate
/// (all candidates equal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub angle_deg: f64,
    pub raw: f64,
    pub normalized: Option<f64>,
}

/// Ordered record of a rotation sweep — the search's audit trail.
///
/// Angles are strictly increasing. Min-max normalization is strictly
/// order-preserving, so the argmax over `raw` and over `normalized`
/// coincide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTrace {
    pub entries: Vec<TraceEntry>,
}

impl CorrelationTrace {
    fn from_sweep(angles: &[f64], raws: Vec<f64>) -> Self {
        debug_assert_eq!(angles.len(), raws.len());
        debug_assert!(angles.windows(2).all(|w| w[0] < w[1]));
        let normalized = crate::preprocess::minmax_normalize(&raws).ok();
        let entries = angles
            .iter()
            .zip(&raws)
            .enumerate()
            .map(|(i, (&angle_deg, &raw))| TraceEntry {
                angle_deg,
                raw,
                normalized: normalized.as_ref().map(|n| n[i]),
            })
            .collect();
        Self { entries }
    }

    /// All candidates produced the same correlation — no usable signal.
    pub fn is_degenerate(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| w[0].raw == w[1].raw)
    }

    /// Best entry under the sweep tie-break: highest raw correlation;
    /// among exact ties the smallest absolute angle wins, and among equal
    /// absolute values the negative one (least, then most conservative
    /// correction).
    pub fn best(&self) -> Option<&TraceEntry> {
        self.entries.iter().reduce(|best, e| {
            if e.raw > best.raw
                || (e.raw == best.raw
                    && (e.angle_deg.abs() < best.angle_deg.abs()
                        || (e.angle_deg.abs() == best.angle_deg.abs()
                            && e.angle_deg < best.angle_deg)))
            {
                e
            } else {
                best
            }
        })
    }
}

/// Parameters of the two-stage rotation search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSearchConfig {
    /// Lower end of the searched angle range, degrees.
    pub range_min_deg: f64,
    /// Upper end of the searched angle range, degrees.
    pub range_max_deg: f64,
    /// Step of the first (approximate) sweep, degrees.
    pub coarse_step_deg: f64,
    /// Half-width of the refinement window around the coarse peak, degrees.
    pub fine_halfwidth_deg: f64,
    /// Step of the refinement sweep, degrees.
    pub fine_step_deg: f64,
    /// Background luminance for canvas exposed by rotation/embedding.
    pub fill: f64,
}

impl Default for RotationSearchConfig {
    fn default() -> Self {
        Self {
            range_min_deg: -60.0,
            range_max_deg: 60.0,
            coarse_step_deg: 5.0,
            fine_halfwidth_deg: 3.0,
            fine_step_deg: 1.0,
            fill: 1.0,
        }
    }
}

impl RotationSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        let fields = [
            self.range_min_deg,
            self.range_max_deg,
            self.coarse_step_deg,
            self.fine_halfwidth_deg,
            self.fine_step_deg,
            self.fill,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return bad("rotation search parameters must be finite");
        }
        if self.range_min_deg >= self.range_max_deg {
            return bad("rotation range must satisfy range_min < range_max");
        }
        if self.coarse_step_deg <= 0.0 || self.fine_step_deg <= 0.0 {
            return bad("rotation search steps must be positive");
        }
        if self.fine_step_deg > self.coarse_step_deg {
            return bad("fine step must not exceed the coarse step");
        }
        if self.fine_halfwidth_deg < self.fine_step_deg {
            return bad("fine half-width must be at least one fine step");
        }
        if !(0.0..=1.0).contains(&self.fill) {
            return bad("fill luminance must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Detected translation in the bottom-left reporting frame: `dx` counts
/// blank columns from the left edge, `dy` blank rows from the bottom edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translation2D {
    pub dx: usize,
    pub dy: usize,
}

impl Translation2D {
    pub const ZERO: Self = Self { dx: 0, dy: 0 };
}

/// Result of the two-stage rotation search.
#[derive(Debug, Clone)]
pub struct RotationDetection {
    /// Angle by which the test image appears rotated relative to the
    /// reference; correct by rotating the test image by the negation.
    pub angle_deg: f64,
    pub coarse: CorrelationTrace,
    pub fine: CorrelationTrace,
}

/// Places both images centered on a shared canvas of the maximum
/// dimensions, padding exposed area with `fill`, so the correlation kernel
/// sees a common index grid.
pub fn embed_common(a: &GrayImage, b: &GrayImage, fill: f64) -> (GrayImage, GrayImage) {
    let width = a.width().max(b.width());
    let height = a.height().max(b.height());
    (
        place_centered(a, width, height, fill),
        place_centered(b, width, height, fill),
    )
}

fn place_at(img: &GrayImage, width: usize, height: usize, ox: usize, oy: usize, fill: f64) -> GrayImage {
    if img.width() == width && img.height() == height {
        return img.clone();
    }
    let mut pixels = vec![fill; width * height];
    for row in 0..img.height() {
        let src = row * img.width();
        let dst = (row + oy) * width + ox;
        pixels[dst..dst + img.width()].copy_from_slice(&img.pixels()[src..src + img.width()]);
    }
    GrayImage::from_raw(width, height, pixels)
}

fn place_centered(img: &GrayImage, width: usize, height: usize, fill: f64) -> GrayImage {
    let ox = (width - img.width()) / 2;
    let oy = (height - img.height()) / 2;
    place_at(img, width, height, ox, oy, fill)
}

/// Darkness-weighted mean position of the ink; the geometric center for an
/// all-white image.
fn ink_centroid(img: &GrayImage) -> (f64, f64) {
    let mut mass = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for row in 0..img.height() {
        for col in 0..img.width() {
            let w = 1.0 - img.get(col, row);
            mass += w;
            sx += w * col as f64;
            sy += w * row as f64;
        }
    }
    if mass <= f64::EPSILON {
        (
            (img.width() as f64 - 1.0) * 0.5,
            (img.height() as f64 - 1.0) * 0.5,
        )
    } else {
        (sx / mass, sy / mass)
    }
}

/// Places both images on a shared canvas with their ink centroids on the
/// same grid point (to the nearest pixel). The correlation seen by the
/// rotation sweep is thereby unaffected by where the content sits on
/// either source canvas.
pub(crate) fn embed_by_centroid(
    a: &GrayImage,
    b: &GrayImage,
    fill: f64,
) -> (GrayImage, GrayImage) {
    let (acx, acy) = ink_centroid(a);
    let (bcx, bcy) = ink_centroid(b);
    let left = acx.max(bcx).ceil();
    let top = acy.max(bcy).ceil();
    let right = (a.width() as f64 - 1.0 - acx).max(b.width() as f64 - 1.0 - bcx).ceil();
    let bottom = (a.height() as f64 - 1.0 - acy).max(b.height() as f64 - 1.0 - bcy).ceil();
    let width = (left + right) as usize + 1;
    let height = (top + bottom) as usize + 1;
    let place = |img: &GrayImage, cx: f64, cy: f64| -> GrayImage {
        let ox = ((left - cx).round() as usize).min(width - img.width());
        let oy = ((top - cy).round() as usize).min(height - img.height());
        place_at(img, width, height, ox, oy, fill)
    };
    (place(a, acx, acy), place(b, bcx, bcy))
}

/// Sum of products of mean-centered luminances of two same-size images.
///
/// Symmetric in its arguments, invariant to adding a constant to either
/// image, and exactly zero when either image is constant.
pub fn cross_correlation(x: &GrayImage, y: &GrayImage) -> Result<f64> {
    if x.width() != y.width() || x.height() != y.height() {
        return Err(Error::DimensionMismatch(
            x.width(),
            x.height(),
            y.width(),
            y.height(),
        ));
    }
    let n = (x.width() * x.height()) as f64;
    let mean_x = x.pixels().iter().sum::<f64>() / n;
    let mean_y = y.pixels().iter().sum::<f64>() / n;
    Ok(x.pixels()
        .iter()
        .zip(y.pixels())
        .map(|(&a, &b)| (a - mean_x) * (b - mean_y))
        .sum())
}

/// Kills the tiny trigonometric residue at axis-aligned angles so 90°
/// multiples map the grid exactly.
fn snap(t: f64) -> f64 {
    for v in [-1.0, 0.0, 1.0] {
        if (t - v).abs() < 1e-12 {
            return v;
        }
    }
    t
}

#[inline]
fn bilinear_or_fill(img: &GrayImage, x: f64, y: f64, fill: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let (w, h) = (img.width() as i64, img.height() as i64);
    let tap = |cx: i64, cy: i64| -> f64 {
        if cx >= 0 && cx < w && cy >= 0 && cy < h {
            img.get(cx as usize, cy as usize)
        } else {
            fill
        }
    };
    let top = tap(x0, y0) * (1.0 - fx) + tap(x0 + 1, y0) * fx;
    let bottom = tap(x0, y0 + 1) * (1.0 - fx) + tap(x0 + 1, y0 + 1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Rotates counterclockwise by `angle_deg` about the image center.
///
/// The output canvas is expanded to the rotated content's axis-aligned
/// extent, so nothing is clipped; resampling is inverse-mapped bilinear
/// with source lookups outside the original taking `fill`. Angle 0 returns
/// a pixel-identical copy.
pub fn rotate(image: &GrayImage, angle_deg: f64, fill: f64) -> GrayImage {
    if angle_deg == 0.0 {
        return image.clone();
    }
    let rad = angle_deg.to_radians();
    let s = snap(rad.sin());
    let c = snap(rad.cos());
    let (w, h) = (image.width() as f64, image.height() as f64);
    let out_w = ((w * c.abs() + h * s.abs()).ceil() as usize).max(1);
    let out_h = ((w * s.abs() + h * c.abs()).ceil() as usize).max(1);
    let icx = (w - 1.0) * 0.5;
    let icy = (h - 1.0) * 0.5;
    let ocx = (out_w as f64 - 1.0) * 0.5;
    let ocy = (out_h as f64 - 1.0) * 0.5;

    let mut pixels = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let v = y as f64 - ocy;
        for x in 0..out_w {
            let u = x as f64 - ocx;
            // Inverse map: rotate the destination offset by -angle.
            let sx = u * c - v * s + icx;
            let sy = u * s + v * c + icy;
            pixels.push(bilinear_or_fill(image, sx, sy, fill));
        }
    }
    GrayImage::from_raw(out_w, out_h, pixels)
}

/// Uniformly rescales both axes by `ratio` (round-half-up dimensions) with
/// bilinear resampling; taps are clamped to the source edges. Ratio 1
/// returns a pixel-identical copy.
pub fn resize(image: &GrayImage, ratio: f64) -> Result<GrayImage> {
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "resize ratio must be a positive finite number, got {ratio}"
        )));
    }
    if ratio == 1.0 {
        return Ok(image.clone());
    }
    let (w, h) = (image.width(), image.height());
    let out_w = (w as f64 * ratio + 0.5).floor() as usize;
    let out_h = (h as f64 * ratio + 0.5).floor() as usize;
    if out_w == 0 || out_h == 0 {
        return Err(Error::DegenerateSize);
    }
    let scale_x = w as f64 / out_w as f64;
    let scale_y = h as f64 / out_h as f64;
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let sy = ((y as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f64;
        for x in 0..out_w {
            let sx = ((x as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = sx - x0 as f64;
            let top = image.get(x0, y0) * (1.0 - fx) + image.get(x1, y0) * fx;
            let bottom = image.get(x0, y1) * (1.0 - fx) + image.get(x1, y1) * fx;
            pixels.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    Ok(GrayImage::from_raw(out_w, out_h, pixels))
}

/// Inclusive arithmetic angle grid `lo, lo+step, ..` up to `hi`.
pub(crate) fn angle_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    debug_assert!(step > 0.0 && lo <= hi);
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Evaluates one correlation per candidate angle: the reference is rotated
/// by the candidate, both images are embedded centroid-aligned on a common
/// canvas, and the correlation kernel scores the pair.
pub(crate) fn rotation_sweep(
    reference: &GrayImage,
    user: &GrayImage,
    angles: &[f64],
    fill: f64,
) -> Result<CorrelationTrace> {
    let mut raws = Vec::with_capacity(angles.len());
    for &angle in angles {
        let rotated = rotate(reference, angle, fill);
        let (a, b) = embed_by_centroid(&rotated, user, fill);
        raws.push(cross_correlation(&a, &b)?);
    }
    Ok(CorrelationTrace::from_sweep(angles, raws))
}

/// Two-stage rotation search: a coarse sweep over the full range followed
/// by a fine sweep within `fine_halfwidth` of the coarse peak (window
/// clamped to the configured range).
pub fn detect_rotation(
    reference: &GrayImage,
    user: &GrayImage,
    cfg: &RotationSearchConfig,
) -> Result<RotationDetection> {
    cfg.validate()?;
    if reference.is_constant() || user.is_constant() {
        return Err(Error::BlankImage);
    }

    let coarse_angles = angle_grid(cfg.range_min_deg, cfg.range_max_deg, cfg.coarse_step_deg);
    let coarse = rotation_sweep(reference, user, &coarse_angles, cfg.fill)?;
    if coarse.is_degenerate() {
        return Err(Error::NoSignal);
    }
    let approx = coarse.best().expect("non-empty sweep").angle_deg;

    let lo = (approx - cfg.fine_halfwidth_deg).max(cfg.range_min_deg);
    let hi = (approx + cfg.fine_halfwidth_deg).min(cfg.range_max_deg);
    let fine_angles = angle_grid(lo, hi, cfg.fine_step_deg);
    let fine = rotation_sweep(reference, user, &fine_angles, cfg.fill)?;
    if fine.is_degenerate() {
        return Err(Error::NoSignal);
    }
    let angle_deg = fine.best().expect("non-empty sweep").angle_deg;

    Ok(RotationDetection {
        angle_deg,
        coarse,
        fine,
    })
}

/// Counts the blank margins of the ink content: columns from the left and
/// rows from the bottom that contain no ink. These are the X and Y
/// translation in the bottom-left reporting frame.
pub fn detect_translation(mask: &InkMask) -> Result<Translation2D> {
    let bbox = bounding_box(mask).ok_or(Error::BlankImage)?;
    Ok(Translation2D {
        dx: bbox.left,
        dy: mask.height() - 1 - bbox.bottom,
    })
}

/// Height ratio of the two content crops: reference height over test
/// height. Both inputs must be `crop_to_content` outputs, because the size
/// ratio is meaningful only after background removal.
pub fn detect_scaling(reference_cropped: &GrayImage, user_cropped: &GrayImage) -> f64 {
    reference_cropped.height() as f64 / user_cropped.height() as f64
}
