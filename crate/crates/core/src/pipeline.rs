//! End-to-end correction in the fixed order rotation → translation →
//! scaling, producing a corrected image and a full report.
//!
//! Rotation must come first: the bottom-left origin that translation
//! counting assumes is itself rotated, and the content bounding box of a
//! rotated image gives a wrong height for the scale ratio. After
//! de-rotation the content is cropped (removing translation completely)
//! and the remaining problem is pure scaling.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{binarize, crop_to_content};
use crate::raster::GrayImage;
use crate::registration::{
    detect_rotation, detect_scaling, detect_translation, resize, rotate, CorrelationTrace,
    RotationSearchConfig, Translation2D,
};

/// A rotation/scale/translation triple — ground truth for the forward
/// model and output of detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RstParams {
    /// Degrees, counterclockwise positive.
    pub rotation_deg: f64,
    /// Reference size over test size; > 1 means the test image is smaller.
    pub scale: f64,
    /// Blank margins in the bottom-left frame.
    pub translation: Translation2D,
}

impl RstParams {
    pub const IDENTITY: Self = Self {
        rotation_deg: 0.0,
        scale: 1.0,
        translation: Translation2D::ZERO,
    };

    pub fn new(rotation_deg: f64, scale: f64, dx: usize, dy: usize) -> Self {
        Self {
            rotation_deg,
            scale,
            translation: Translation2D { dx, dy },
        }
    }
}

/// Per-parameter errors against known ground truth. Rotation error is
/// absolute degrees; scale error is percent relative to the actual value;
/// translation is compared for exact equality.
#[derive(Debug, Clone, Serialize)]
pub struct GroundTruthErrors {
    pub actual: RstParams,
    pub rotation_err_deg: f64,
    pub scale_err_pct: f64,
    pub translation_exact: bool,
}

/// Wall-clock cost of each stage, milliseconds.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageMillis {
    pub rotation: f64,
    pub translation: f64,
    pub scaling: f64,
}

/// Echo of the configuration a report was produced under.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReportConfig {
    pub threshold: f64,
    pub rotation_search: RotationSearchConfig,
}

/// Detected parameters, diagnostics, traces and timings for one
/// registration run.
#[derive(Debug, Clone, Serialize)]
pub struct RegistrationReport {
    pub detected: RstParams,
    /// Width ratio of the crops; reported for diagnostics, never applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_x: Option<f64>,
    pub reference_crop: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_crop: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_trace: Option<CorrelationTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fine_trace: Option<CorrelationTrace>,
    pub config: ReportConfig,
    pub stage_millis: StageMillis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruthErrors>,
}

impl RegistrationReport {
    /// Attaches ground truth and computes per-parameter errors. A zero
    /// actual rotation reports the absolute deviation in the same field.
    pub fn with_ground_truth(mut self, actual: RstParams) -> Self {
        let scale_err_pct = (self.detected.scale - actual.scale).abs() / actual.scale.abs() * 100.0;
        self.ground_truth = Some(GroundTruthErrors {
            actual,
            rotation_err_deg: (self.detected.rotation_deg - actual.rotation_deg).abs(),
            scale_err_pct,
            translation_exact: self.detected.translation == actual.translation,
        });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Which single detector a pure run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PureMode {
    Rotation,
    Scaling,
    Translation,
}

fn validate_threshold(threshold: f64) -> Result<()> {
    if !threshold.is_finite() || threshold <= 0.0 || threshold >= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "binarization threshold must lie strictly inside (0, 1), got {threshold}"
        )));
    }
    Ok(())
}

fn millis(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Full RST correction.
///
/// 1. Crop the reference to its ink content; it is the template for all
///    further computations.
/// 2. Detect the rotation of the test image against the template and
///    rotate the test image by the negated angle.
/// 3. Measure the blank margins of the de-rotated image (the translation),
///    then crop to content, which removes translation completely.
/// 4. Detect the scale as the height ratio of the crops and resize.
///
/// The corrected image is returned in cropped content coordinates.
pub fn correct_rst(
    reference: &GrayImage,
    user: &GrayImage,
    cfg: &RotationSearchConfig,
    threshold: f64,
) -> Result<(GrayImage, RegistrationReport)> {
    validate_threshold(threshold)?;
    cfg.validate()?;

    let ref_crop = crop_to_content(reference, &binarize(reference, threshold))?;
    if binarize(user, threshold).is_empty() {
        return Err(Error::BlankImage);
    }

    let t_rot = Instant::now();
    let rotation = detect_rotation(&ref_crop, user, cfg)?;
    let rotation_ms = millis(t_rot);

    let t_trans = Instant::now();
    let derotated = rotate(user, -rotation.angle_deg, cfg.fill);
    let derot_mask = binarize(&derotated, threshold);
    let translation = detect_translation(&derot_mask)?;
    let user_crop = crop_to_content(&derotated, &derot_mask)?;
    let translation_ms = millis(t_trans);

    let t_scale = Instant::now();
    let scale = detect_scaling(&ref_crop, &user_crop);
    let scale_x = ref_crop.width() as f64 / user_crop.width() as f64;
    let corrected = resize(&user_crop, scale)?;
    let scaling_ms = millis(t_scale);

    let report = RegistrationReport {
        detected: RstParams {
            rotation_deg: rotation.angle_deg,
            scale,
            translation,
        },
        scale_x: Some(scale_x),
        reference_crop: (ref_crop.width(), ref_crop.height()),
        user_crop: Some((user_crop.width(), user_crop.height())),
        coarse_trace: Some(rotation.coarse),
        fine_trace: Some(rotation.fine),
        config: ReportConfig {
            threshold,
            rotation_search: *cfg,
        },
        stage_millis: StageMillis {
            rotation: rotation_ms,
            translation: translation_ms,
            scaling: scaling_ms,
        },
        ground_truth: None,
    };
    Ok((corrected, report))
}

/// Runs a single detector (with the cropping prerequisites that detector
/// requires) and reports the detected value; the other parameters keep
/// their identity values.
pub fn correct_pure(
    reference: &GrayImage,
    user: &GrayImage,
    mode: PureMode,
    cfg: &RotationSearchConfig,
    threshold: f64,
) -> Result<RegistrationReport> {
    validate_threshold(threshold)?;
    cfg.validate()?;

    let ref_crop = crop_to_content(reference, &binarize(reference, threshold))?;
    let user_mask = binarize(user, threshold);
    if user_mask.is_empty() {
        return Err(Error::BlankImage);
    }

    let mut detected = RstParams::IDENTITY;
    let mut stage_millis = StageMillis::default();
    let mut traces = (None, None);
    let mut user_crop_dims = None;
    let mut scale_x = None;

    match mode {
        PureMode::Rotation => {
            let t = Instant::now();
            let rotation = detect_rotation(&ref_crop, user, cfg)?;
            stage_millis.rotation = millis(t);
            detected.rotation_deg = rotation.angle_deg;
            traces = (Some(rotation.coarse), Some(rotation.fine));
        }
        PureMode::Scaling => {
            let t = Instant::now();
            let user_crop = crop_to_content(user, &user_mask)?;
            detected.scale = detect_scaling(&ref_crop, &user_crop);
            scale_x = Some(ref_crop.width() as f64 / user_crop.width() as f64);
            user_crop_dims = Some((user_crop.width(), user_crop.height()));
            stage_millis.scaling = millis(t);
        }
        PureMode::Translation => {
            let t = Instant::now();
            detected.translation = detect_translation(&user_mask)?;
            stage_millis.translation = millis(t);
        }
    }

    Ok(RegistrationReport {
        detected,
        scale_x,
        reference_crop: (ref_crop.width(), ref_crop.height()),
        user_crop: user_crop_dims,
        coarse_trace: traces.0,
        fine_trace: traces.1,
        config: ReportConfig {
            threshold,
            rotation_search: *cfg,
        },
        stage_millis,
        ground_truth: None,
    })
}
