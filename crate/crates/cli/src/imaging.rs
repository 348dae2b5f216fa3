//! `calibrate` and `measure`: images in, areas out.
//!
//! Wherever a subcommand takes `--image`, the file may be either a binary
//! PPM (detected by the `P6` magic) or a plain-text scene config, which is
//! rendered on the fly. Synthetic scenes thereby flow through exactly the
//! same code path as camera dumps.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use leafscale::image::{load_ppm, Image};
use leafscale::measure::{self, CalibrationProfile};
use leafscale::scene::{render_scene, SceneSpec};
use leafscale::segment::{count_pixels, threshold_green, GreenBand};
use leafscale::telemetry::store::{append_plant_record, tare_adjust, PlantRecord};

pub fn load_image_or_scene(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"P6") {
        Ok(load_ppm(&bytes)?)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| anyhow!("{}: neither a P6 ppm nor utf-8 scene text", path.display()))?;
        Ok(render_scene(&SceneSpec::parse(&text)?)?)
    }
}

pub fn load_calibration(path: &Path) -> Result<CalibrationProfile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading calibration {}", path.display()))?;
    Ok(CalibrationProfile::from_text(&text)?)
}

pub struct CalibrateRequest<'a> {
    pub image: &'a Path,
    pub real_area_cm2: f64,
    pub distance_cm: f64,
    pub out: &'a Path,
    pub band: GreenBand,
}

/// Thresholds the reference image, counts the region, writes the profile,
/// and prints the base ratio on stdout.
pub fn cmd_calibrate(req: &CalibrateRequest) -> Result<()> {
    let image = load_image_or_scene(req.image)?;
    let mask = threshold_green(&image, &req.band);
    let pixels = count_pixels(&mask);
    if pixels == 0 {
        bail!(
            "no reference region found: zero green pixels in {}",
            req.image.display()
        );
    }
    let calib = measure::calibrate(pixels as f64, req.real_area_cm2, req.distance_cm)?;
    std::fs::write(req.out, calib.to_text())
        .with_context(|| format!("writing {}", req.out.display()))?;
    eprintln!(
        "reference region: {pixels} px over {} cm^2",
        req.real_area_cm2
    );
    println!("{:?}", calib.base_ratio_px_per_cm2);
    Ok(())
}

pub struct MeasureRequest<'a> {
    pub image: &'a Path,
    pub calib: &'a Path,
    pub distance_cm: f64,
    pub band: GreenBand,
    pub record: Option<RecordRequest<'a>>,
}

pub struct RecordRequest<'a> {
    pub plants: &'a Path,
    pub plant_id: &'a str,
    pub date: &'a str,
    pub measured_weight_g: f64,
    pub tare_g: f64,
}

/// Measures one image and prints `pixel_count,area_cm2` on stdout. With the
/// plant flags, also appends a record to the plants CSV.
pub fn cmd_measure(req: &MeasureRequest) -> Result<()> {
    let image = load_image_or_scene(req.image)?;
    let calib = load_calibration(req.calib)?;
    let m = measure::measure_leaf_area(&image, &req.band, &calib, req.distance_cm)?;

    if let Some(rec) = &req.record {
        let actual = tare_adjust(rec.measured_weight_g, rec.tare_g)?;
        let record = PlantRecord::new(
            rec.plant_id,
            rec.date.parse()?,
            req.distance_cm,
            m.area_cm2,
            rec.measured_weight_g,
            actual,
        )?;
        append_plant_record(rec.plants, &record)?;
        eprintln!(
            "appended {} {} to {}",
            rec.plant_id,
            rec.date,
            rec.plants.display()
        );
    }

    println!("{},{:?}", m.pixel_count, m.area_cm2);
    Ok(())
}
