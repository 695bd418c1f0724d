//! C ABI for the registration library.
//!
//! Images and reports are opaque handles created and destroyed through
//! the functions here; every fallible call returns an [`RstregStatus`]
//! and writes its result through out-pointers. The generated header lands
//! in `include/rstreg.h` at build time.
//!
//! Thread safety: handles are immutable after creation and may be shared
//! across threads; distinct calls never share mutable state.

use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rstreg::pipeline::{correct_rst, RegistrationReport};
use rstreg::raster::{load_pnm, save_pnm, GrayImage};
use rstreg::registration::RotationSearchConfig;
use rstreg::Error;

/// Status codes returned by every fallible function.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RstregStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Arguments or configuration were invalid.
    InvalidArgument = 2,
    /// Input bytes were not a decodable PNM image.
    CodecError = 3,
    /// An image had no ink at the configured threshold.
    BlankImage = 4,
    /// Every candidate angle produced the same correlation.
    NoSignal = 5,
    /// Transformed content exceeded its canvas.
    ContentOverflow = 6,
    /// A resize would have produced an empty image.
    DegenerateSize = 7,
    /// An unexpected internal failure (a bug, not bad input).
    InternalError = 8,
}

impl From<&Error> for RstregStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::UnsupportedMagic(_)
            | Error::MalformedHeader(_)
            | Error::TruncatedData { .. }
            | Error::ZeroDimensions
            | Error::DimensionsTooLarge { .. }
            | Error::MaxvalOutOfRange(_)
            | Error::BadBufferLength { .. }
            | Error::PixelOutOfRange(_) => Self::CodecError,
            Error::BlankImage => Self::BlankImage,
            Error::NoSignal => Self::NoSignal,
            Error::ContentOverflow { .. } => Self::ContentOverflow,
            Error::DegenerateSize => Self::DegenerateSize,
            Error::DimensionMismatch(..) | Error::DegenerateRange | Error::InvalidConfig(_) => {
                Self::InvalidArgument
            }
        }
    }
}

/// Opaque grayscale image handle.
pub struct RstregImage(GrayImage);

/// Opaque registration report handle.
pub struct RstregReport(RegistrationReport);

/// Run configuration, plain-old-data so bindings can fill it directly.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RstregConfig {
    /// Binarization threshold, strictly inside (0, 1).
    pub threshold: f64,
    /// Lower end of the rotation search range, degrees.
    pub range_min_deg: f64,
    /// Upper end of the rotation search range, degrees.
    pub range_max_deg: f64,
    /// Coarse sweep step, degrees.
    pub coarse_step_deg: f64,
    /// Fine sweep step, degrees.
    pub fine_step_deg: f64,
    /// Fine window half-width around the coarse peak, degrees.
    pub fine_halfwidth_deg: f64,
    /// Background luminance for exposed canvas, in [0, 1].
    pub fill: f64,
}

impl RstregConfig {
    fn split(&self) -> (RotationSearchConfig, f64) {
        (
            RotationSearchConfig {
                range_min_deg: self.range_min_deg,
                range_max_deg: self.range_max_deg,
                coarse_step_deg: self.coarse_step_deg,
                fine_halfwidth_deg: self.fine_halfwidth_deg,
                fine_step_deg: self.fine_step_deg,
                fill: self.fill,
            },
            self.threshold,
        )
    }
}

/// Default configuration (threshold 0.5, range -60..60, steps 5/1,
/// half-width 3, white fill).
#[no_mangle]
pub extern "C" fn rstreg_config_default() -> RstregConfig {
    let cfg = RotationSearchConfig::default();
    RstregConfig {
        threshold: 0.5,
        range_min_deg: cfg.range_min_deg,
        range_max_deg: cfg.range_max_deg,
        coarse_step_deg: cfg.coarse_step_deg,
        fine_step_deg: cfg.fine_step_deg,
        fine_halfwidth_deg: cfg.fine_halfwidth_deg,
        fill: cfg.fill,
    }
}

fn guarded(body: impl FnOnce() -> RstregStatus) -> RstregStatus {
    // Unwinding across the C boundary is undefined behaviour; any panic
    // becomes InternalError instead.
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => RstregStatus::InternalError,
    }
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> RstregStatus {
    if out.is_null() {
        return RstregStatus::NullPointer;
    }
    *out = Box::into_raw(Box::new(value));
    RstregStatus::Ok
}

/// Decodes a PNM (P2/P3/P5/P6) byte buffer into an image handle; color
/// input is converted to grayscale.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out_image` must be a valid
/// pointer. The handle must be released with [`rstreg_image_free`].
#[no_mangle]
pub unsafe extern "C" fn rstreg_image_load_pnm(
    data: *const u8,
    len: usize,
    out_image: *mut *mut RstregImage,
) -> RstregStatus {
    if data.is_null() || out_image.is_null() {
        return RstregStatus::NullPointer;
    }
    let bytes = std::slice::from_raw_parts(data, len);
    guarded(|| match load_pnm(bytes) {
        Ok(img) => unsafe { write_out(out_image, RstregImage(img.into_gray())) },
        Err(e) => (&e).into(),
    })
}

/// Builds an image handle from `width * height` row-major luminance
/// samples in [0, 1].
///
/// # Safety
/// `pixels` must point to `width * height` readable doubles; `out_image`
/// must be valid. The handle must be released with [`rstreg_image_free`].
#[no_mangle]
pub unsafe extern "C" fn rstreg_image_from_pixels(
    width: usize,
    height: usize,
    pixels: *const f64,
    out_image: *mut *mut RstregImage,
) -> RstregStatus {
    if pixels.is_null() || out_image.is_null() {
        return RstregStatus::NullPointer;
    }
    let Some(n) = width.checked_mul(height) else {
        return RstregStatus::InvalidArgument;
    };
    let data = std::slice::from_raw_parts(pixels, n).to_vec();
    guarded(|| match GrayImage::new(width, height, data) {
        Ok(img) => unsafe { write_out(out_image, RstregImage(img)) },
        Err(e) => (&e).into(),
    })
}

/// Width in pixels; 0 for a null handle.
///
/// # Safety
/// `image` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rstreg_image_width(image: *const RstregImage) -> usize {
    unsafe { image.as_ref() }.map_or(0, |i| i.0.width())
}

/// Height in pixels; 0 for a null handle.
///
/// # Safety
/// `image` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rstreg_image_height(image: *const RstregImage) -> usize {
    unsafe { image.as_ref() }.map_or(0, |i| i.0.height())
}

/// Copies the image's row-major luminance samples into `out_pixels`.
///
/// # Safety
/// `out_pixels` must have room for `rstreg_image_width() *
/// rstreg_image_height()` doubles.
#[no_mangle]
pub unsafe extern "C" fn rstreg_image_copy_pixels(
    image: *const RstregImage,
    out_pixels: *mut f64,
    capacity: usize,
) -> RstregStatus {
    let Some(img) = (unsafe { image.as_ref() }) else {
        return RstregStatus::NullPointer;
    };
    if out_pixels.is_null() {
        return RstregStatus::NullPointer;
    }
    let n = img.0.pixels().len();
    if capacity < n {
        return RstregStatus::InvalidArgument;
    }
    unsafe { ptr::copy_nonoverlapping(img.0.pixels().as_ptr(), out_pixels, n) };
    RstregStatus::Ok
}

/// Encodes the image as binary PGM. The buffer is allocated by the
/// library and must be released with [`rstreg_buffer_free`].
///
/// # Safety
/// `out_data` and `out_len` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rstreg_image_save_pgm(
    image: *const RstregImage,
    maxval: u32,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> RstregStatus {
    let Some(img) = (unsafe { image.as_ref() }) else {
        return RstregStatus::NullPointer;
    };
    if out_data.is_null() || out_len.is_null() {
        return RstregStatus::NullPointer;
    }
    guarded(|| match save_pnm(&img.0, maxval) {
        Ok(bytes) => {
            let boxed = bytes.into_boxed_slice();
            unsafe {
                *out_len = boxed.len();
                *out_data = Box::into_raw(boxed) as *mut u8;
            }
            RstregStatus::Ok
        }
        Err(e) => (&e).into(),
    })
}

/// Releases a buffer returned by [`rstreg_image_save_pgm`].
///
/// # Safety
/// `data`/`len` must come from a single prior save call, unreleased.
#[no_mangle]
pub unsafe extern "C" fn rstreg_buffer_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Releases an image handle.
///
/// # Safety
/// `image` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rstreg_image_free(image: *mut RstregImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

unsafe fn correct_impl(
    reference: *const RstregImage,
    user: *const RstregImage,
    config: *const RstregConfig,
    out_image: *mut *mut RstregImage,
    out_report: *mut *mut RstregReport,
) -> RstregStatus {
    let (Some(reference), Some(user)) = (reference.as_ref(), user.as_ref()) else {
        return RstregStatus::NullPointer;
    };
    let cfg = config
        .as_ref()
        .copied()
        .unwrap_or_else(|| rstreg_config_default());
    let (search, threshold) = cfg.split();
    guarded(|| match correct_rst(&reference.0, &user.0, &search, threshold) {
        Ok((corrected, report)) => {
            if !out_image.is_null() {
                let status = write_out(out_image, RstregImage(corrected));
                if status != RstregStatus::Ok {
                    return status;
                }
            }
            write_out(out_report, RstregReport(report))
        }
        Err(e) => (&e).into(),
    })
}

/// Detects the RST parameters of `user` against `reference`. A null
/// `config` means defaults.
///
/// # Safety
/// Handles must be valid; `out_report` must be a valid pointer. The
/// report must be released with [`rstreg_report_free`].
#[no_mangle]
pub unsafe extern "C" fn rstreg_detect(
    reference: *const RstregImage,
    user: *const RstregImage,
    config: *const RstregConfig,
    out_report: *mut *mut RstregReport,
) -> RstregStatus {
    if out_report.is_null() {
        return RstregStatus::NullPointer;
    }
    correct_impl(reference, user, config, ptr::null_mut(), out_report)
}

/// Corrects `user` against `reference`, producing the corrected image and
/// the report. A null `config` means defaults.
///
/// # Safety
/// Handles must be valid; `out_image` and `out_report` must be valid
/// pointers; release the results with [`rstreg_image_free`] and
/// [`rstreg_report_free`].
#[no_mangle]
pub unsafe extern "C" fn rstreg_correct(
    reference: *const RstregImage,
    user: *const RstregImage,
    config: *const RstregConfig,
    out_image: *mut *mut RstregImage,
    out_report: *mut *mut RstregReport,
) -> RstregStatus {
    if out_image.is_null() || out_report.is_null() {
        return RstregStatus::NullPointer;
    }
    correct_impl(reference, user, config, out_image, out_report)
}

/// Detected rotation in degrees; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rstreg_report_rotation_deg(report: *const RstregReport) -> f64 {
    unsafe { report.as_ref() }.map_or(f64::NAN, |r| r.0.detected.rotation_deg)
}

/// Detected scale ratio (reference size over test size); NaN for a null
/// handle.
///
/// # Safety
/// `report` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rstreg_report_scale(report: *const RstregReport) -> f64 {
    unsafe { report.as_ref() }.map_or(f64::NAN, |r| r.0.detected.scale)
}

/// Detected translation margins in the bottom-left frame.
///
/// # Safety
/// `out_dx` and `out_dy` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rstreg_report_translation(
    report: *const RstregReport,
    out_dx: *mut usize,
    out_dy: *mut usize,
) -> RstregStatus {
    let Some(r) = (unsafe { report.as_ref() }) else {
        return RstregStatus::NullPointer;
    };
    if out_dx.is_null() || out_dy.is_null() {
        return RstregStatus::NullPointer;
    }
    unsafe {
        *out_dx = r.0.detected.translation.dx;
        *out_dy = r.0.detected.translation.dy;
    }
    RstregStatus::Ok
}

/// Full report as a JSON string (traces, crop sizes, timings). Release
/// with [`rstreg_string_free`]. Null on a null handle.
///
/// # Safety
/// `report` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rstreg_report_json(report: *const RstregReport) -> *mut c_char {
    let Some(r) = (unsafe { report.as_ref() }) else {
        return ptr::null_mut();
    };
    CString::new(r.0.to_json()).map_or(ptr::null_mut(), CString::into_raw)
}

/// Releases a string returned by [`rstreg_report_json`].
///
/// # Safety
/// `s` must come from [`rstreg_report_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rstreg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Releases a report handle.
///
/// # Safety
/// `report` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rstreg_report_free(report: *mut RstregReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
