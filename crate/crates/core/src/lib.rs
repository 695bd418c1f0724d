//! Rotation–scaling–translation (RST) registration between a reference
//! image and a test image.
//!
//! The pipeline estimates the rotation angle by maximizing cross-correlation
//! over a coarse-to-fine angle sweep, recovers translation from the blank
//! margins around the ink content, and recovers the scale factor from the
//! height ratio of the content crops. Corrections are applied in the fixed
//! order rotation → translation → scaling; see [`pipeline::correct_rst`].
//!
//! [`synth`] provides a deterministic forward model (seeded glyph images
//! plus known RST perturbations) used to benchmark the detectors against
//! ground truth.

pub mod error;
pub mod pipeline;
pub mod preprocess;
pub mod raster;
pub mod registration;
pub mod synth;

pub use error::{Error, Result};
pub use pipeline::{correct_pure, correct_rst, PureMode, RegistrationReport, RstParams};
pub use raster::{load_pnm, save_pnm, to_grayscale, GrayImage, PnmImage, RgbImage};
pub use registration::{RotationSearchConfig, Translation2D};
