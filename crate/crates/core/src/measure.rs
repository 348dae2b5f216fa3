//! Pixel-to-area conversion and sensor error evaluation.
//!
//! Calibration divides a reference object's pixel footprint by its known
//! real-world area to get a base ratio in px/cm^2. Converting a measurement
//! back to cm^2 applies the squared distance ratio, since apparent width and
//! height both scale linearly with camera distance:
//!
//! ```text
//! area_cm2 = pixel_count / base_ratio * (current_distance / reference_distance)^2
//! ```
//!
//! Under pinhole scaling (pixel count ~ 1/distance^2) the result is invariant
//! to where the camera sits.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::segment::{self, GreenBand};

/// Calibration constants derived from a reference object of known area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationProfile {
    /// Pixels per cm^2 at the reference distance.
    pub base_ratio_px_per_cm2: f64,
    /// Camera distance at which the reference was photographed, in cm.
    pub reference_distance_cm: f64,
}

impl CalibrationProfile {
    pub fn new(base_ratio_px_per_cm2: f64, reference_distance_cm: f64) -> Result<Self> {
        ensure_positive("base_ratio", base_ratio_px_per_cm2)?;
        ensure_positive("reference_distance", reference_distance_cm)?;
        Ok(CalibrationProfile {
            base_ratio_px_per_cm2,
            reference_distance_cm,
        })
    }

    /// Key-value text form persisted by the CLI.
    pub fn to_text(&self) -> String {
        format!(
            "base_ratio = {:?}\nreference_distance = {:?}\n",
            self.base_ratio_px_per_cm2, self.reference_distance_cm
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut base_ratio = None;
        let mut reference_distance = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::Format {
                what: "calibration",
                line: idx + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("bad number {:?}", value.trim())))?;
            match key.trim() {
                "base_ratio" => base_ratio = Some(value),
                "reference_distance" => reference_distance = Some(value),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let base_ratio = base_ratio.ok_or(Error::Format {
            what: "calibration",
            line: 0,
            reason: "missing base_ratio".into(),
        })?;
        let reference_distance = reference_distance.ok_or(Error::Format {
            what: "calibration",
            line: 0,
            reason: "missing reference_distance".into(),
        })?;
        CalibrationProfile::new(base_ratio, reference_distance)
    }
}

/// Result of measuring one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaMeasurement {
    pub pixel_count: u64,
    pub current_distance_cm: f64,
    pub area_cm2: f64,
}

/// Which value sits in the percentage-error denominator.
///
/// `Measured` reproduces the published sensor-comparison tables;
/// `Actual` is the standard reporting convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorConvention {
    Actual,
    Measured,
}

/// One (actual, measured) sensor comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrial {
    pub label: String,
    pub actual: f64,
    pub measured: f64,
}

impl SensorTrial {
    pub fn new(label: impl Into<String>, actual: f64, measured: f64) -> Result<Self> {
        ensure_positive("actual", actual)?;
        ensure_positive("measured", measured)?;
        Ok(SensorTrial {
            label: label.into(),
            actual,
            measured,
        })
    }
}

/// Per-trial percentage errors plus their unweighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorEvaluation {
    pub per_trial: Vec<f64>,
    pub mean: f64,
}

fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

/// Builds a calibration profile from a reference object's pixel footprint.
pub fn calibrate(
    reference_pixel_area: f64,
    reference_real_area_cm2: f64,
    reference_distance_cm: f64,
) -> Result<CalibrationProfile> {
    ensure_positive("reference_pixel_area", reference_pixel_area)?;
    ensure_positive("reference_real_area", reference_real_area_cm2)?;
    ensure_positive("reference_distance", reference_distance_cm)?;
    CalibrationProfile::new(
        reference_pixel_area / reference_real_area_cm2,
        reference_distance_cm,
    )
}

/// Converts a pixel count to cm^2 with the squared distance adjustment.
pub fn area_from_pixels(
    pixel_count: f64,
    calib: &CalibrationProfile,
    current_distance_cm: f64,
) -> Result<f64> {
    if pixel_count < 0.0 || !pixel_count.is_finite() {
        return Err(Error::NonPositive {
            name: "pixel_count",
            value: pixel_count,
        });
    }
    ensure_positive("current_distance", current_distance_cm)?;
    let ratio = current_distance_cm / calib.reference_distance_cm;
    Ok(pixel_count / calib.base_ratio_px_per_cm2 * ratio * ratio)
}

/// 100 * |actual - measured| / denominator, denominator chosen by convention.
pub fn percent_error(actual: f64, measured: f64, convention: ErrorConvention) -> Result<f64> {
    let denominator = match convention {
        ErrorConvention::Actual => actual,
        ErrorConvention::Measured => measured,
    };
    ensure_positive("denominator", denominator)?;
    Ok(100.0 * (actual - measured).abs() / denominator)
}

/// Applies [`percent_error`] to each trial; the mean is taken over the
/// unrounded per-trial errors.
pub fn evaluate_sensor(
    trials: &[SensorTrial],
    convention: ErrorConvention,
) -> Result<SensorEvaluation> {
    if trials.is_empty() {
        return Err(Error::TooFewItems {
            what: "sensor trials",
            need: 1,
            got: 0,
        });
    }
    let per_trial: Vec<f64> = trials
        .iter()
        .map(|t| percent_error(t.actual, t.measured, convention))
        .collect::<Result<_>>()?;
    let mean = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
    Ok(SensorEvaluation { per_trial, mean })
}

/// End-to-end leaf-area measurement: threshold, count, convert.
pub fn measure_leaf_area(
    image: &Image,
    band: &GreenBand,
    calib: &CalibrationProfile,
    current_distance_cm: f64,
) -> Result<AreaMeasurement> {
    band.validate()?;
    #[cfg(feature = "parallel")]
    let mask = segment::threshold_green_par(image, band);
    #[cfg(not(feature = "parallel"))]
    let mask = segment::threshold_green(image, band);
    let pixel_count = segment::count_pixels(&mask);
    let area_cm2 = area_from_pixels(pixel_count as f64, calib, current_distance_cm)?;
    Ok(AreaMeasurement {
        pixel_count,
        current_distance_cm,
        area_cm2,
    })
}
