//! Binarization, min-max normalization, ink bounding box, and content
//! cropping — the shared front end of every correction stage.

use crate::error::{Error, Result};
use crate::raster::{GrayImage, PixelCoord};

/// Boolean raster marking ink (signature) pixels. Ink is dark on a light
/// background: a bit is set where the source pixel is below the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InkMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl InkMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// True when no pixel is marked as ink.
    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Coordinates of every ink pixel, row-major order.
    pub fn ink_coords(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        self.bits.iter().enumerate().filter_map(move |(i, &b)| {
            b.then_some(PixelCoord {
                col: i % self.width,
                row: i / self.width,
            })
        })
    }
}

/// Tightest rectangle around the ink pixels; indices are inclusive, in the
/// internal top-left frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub left: usize,
    pub top: usize,
    pub right: usize,
    pub bottom: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }

    pub fn height(&self) -> usize {
        self.bottom - self.top + 1
    }
}

/// Thresholds a grayscale image into an ink mask: a bit is set exactly
/// where `pixel < threshold`.
pub fn binarize(image: &GrayImage, threshold: f64) -> InkMask {
    InkMask {
        width: image.width(),
        height: image.height(),
        bits: image.pixels().iter().map(|&p| p < threshold).collect(),
    }
}

/// Affinely rescales `values` onto `[0, 1]`: `(x - min) / (max - min)`.
///
/// Strictly order-preserving, so the argmax index is unchanged — the
/// property the rotation search relies on. A constant (or empty) sequence
/// has no spread and yields [`Error::DegenerateRange`].
pub fn minmax_normalize(values: &[f64]) -> Result<Vec<f64>> {
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if values.is_empty() || max <= min {
        return Err(Error::DegenerateRange);
    }
    let span = max - min;
    Ok(values.iter().map(|&v| (v - min) / span).collect())
}

/// Tightest box containing every ink pixel, or `None` for an empty mask.
pub fn bounding_box(mask: &InkMask) -> Option<BoundingBox> {
    let (mut left, mut top) = (usize::MAX, usize::MAX);
    let (mut right, mut bottom) = (0usize, 0usize);
    let mut any = false;
    for row in 0..mask.height() {
        for col in 0..mask.width() {
            if mask.get(col, row) {
                any = true;
                left = left.min(col);
                right = right.max(col);
                top = top.min(row);
                bottom = bottom.max(row);
            }
        }
    }
    any.then_some(BoundingBox {
        left,
        top,
        right,
        bottom,
    })
}

/// Extracts the sub-image covering `bbox`.
pub(crate) fn crop_box(image: &GrayImage, bbox: &BoundingBox) -> GrayImage {
    let (w, h) = (bbox.width(), bbox.height());
    let mut pixels = Vec::with_capacity(w * h);
    for row in bbox.top..=bbox.bottom {
        for col in bbox.left..=bbox.right {
            pixels.push(image.get(col, row));
        }
    }
    GrayImage::from_raw(w, h, pixels)
}

/// Crops the image to the mask's bounding box, removing the background
/// border. An empty mask means the input carries no signature content.
pub fn crop_to_content(image: &GrayImage, mask: &InkMask) -> Result<GrayImage> {
    if image.width() != mask.width() || image.height() != mask.height() {
        return Err(Error::DimensionMismatch(
            image.width(),
            image.height(),
            mask.width(),
            mask.height(),
        ));
    }
    let bbox = bounding_box(mask).ok_or(Error::BlankImage)?;
    Ok(crop_box(image, &bbox))
}
