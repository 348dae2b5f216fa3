//! Green-region segmentation: HSV thresholding, binary masks, pixel counting.
//!
//! Thresholding runs per pixel with no morphological post-processing; a pixel
//! is foliage iff its HSV triple lies inside the configured [`GreenBand`].

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Inclusive HSV acceptance band for foliage pixels.
///
/// The default band (hue 60-180 deg, sat >= 0.25, val >= 0.20) captures
/// foliage greens while excluding white sponge and reddish stems. Wraparound
/// hue bands are not supported: `hue_min < hue_max` is required.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenBand {
    pub hue_min_deg: f64,
    pub hue_max_deg: f64,
    pub sat_min: f64,
    pub val_min: f64,
}

impl GreenBand {
    pub fn new(hue_min_deg: f64, hue_max_deg: f64, sat_min: f64, val_min: f64) -> Result<Self> {
        let band = GreenBand {
            hue_min_deg,
            hue_max_deg,
            sat_min,
            val_min,
        };
        band.validate()?;
        Ok(band)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..360.0).contains(&self.hue_min_deg) || !(0.0..360.0).contains(&self.hue_max_deg) {
            return Err(Error::InvalidBand(format!(
                "hue bounds must lie in [0, 360), got [{}, {}]",
                self.hue_min_deg, self.hue_max_deg
            )));
        }
        if self.hue_min_deg >= self.hue_max_deg {
            return Err(Error::InvalidBand(format!(
                "hue_min must be below hue_max, got [{}, {}]",
                self.hue_min_deg, self.hue_max_deg
            )));
        }
        for (name, v) in [("sat_min", self.sat_min), ("val_min", self.val_min)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidBand(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    fn contains(&self, h: f64, s: f64, v: f64) -> bool {
        h >= self.hue_min_deg && h <= self.hue_max_deg && s >= self.sat_min && v >= self.val_min
    }
}

impl Default for GreenBand {
    fn default() -> Self {
        GreenBand {
            hue_min_deg: 60.0,
            hue_max_deg: 180.0,
            sat_min: 0.25,
            val_min: 0.20,
        }
    }
}

/// One boolean per pixel, row-major, same dimensions as the source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn full(width: u32, height: u32) -> Self {
        Mask {
            width,
            height,
            bits: vec![true; width as usize * height as usize],
        }
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bit(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }
}

/// Hexcone RGB -> HSV. Hue in [0, 360) degrees (0 when saturation is 0),
/// saturation and value in [0, 1].
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let r = f64::from(r) / 255.0;
    let g = f64::from(g) / 255.0;
    let b = f64::from(b) / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * (((g - b) / delta).rem_euclid(6.0))
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    (h, s, max)
}

fn pixel_in_band(px: Rgb, band: &GreenBand) -> bool {
    let (h, s, v) = rgb_to_hsv(px[0], px[1], px[2]);
    band.contains(h, s, v)
}

/// Marks every pixel whose HSV value lies inside the band.
pub fn threshold_green(image: &Image, band: &GreenBand) -> Mask {
    let bits = image
        .pixels()
        .iter()
        .map(|&px| pixel_in_band(px, band))
        .collect();
    Mask {
        width: image.width(),
        height: image.height(),
        bits,
    }
}

/// Parallel [`threshold_green`], split by rows; bit-identical output.
#[cfg(feature = "parallel")]
pub fn threshold_green_par(image: &Image, band: &GreenBand) -> Mask {
    let width = image.width() as usize;
    let mut bits = vec![false; image.pixels().len()];
    bits.par_chunks_mut(width)
        .zip(image.pixels().par_chunks(width))
        .for_each(|(mask_row, pixel_row)| {
            for (bit, &px) in mask_row.iter_mut().zip(pixel_row) {
                *bit = pixel_in_band(px, band);
            }
        });
    Mask {
        width: image.width(),
        height: image.height(),
        bits,
    }
}

/// Keeps masked-in pixels, zeroes everything else to black.
pub fn apply_mask(image: &Image, mask: &Mask) -> Result<Image> {
    if image.width() != mask.width || image.height() != mask.height {
        return Err(Error::DimensionMismatch {
            image_width: image.width(),
            image_height: image.height(),
            mask_width: mask.width,
            mask_height: mask.height,
        });
    }
    let mut out = image.clone();
    for (px, &keep) in out.pixels_mut().iter_mut().zip(&mask.bits) {
        if !keep {
            *px = [0, 0, 0];
        }
    }
    Ok(out)
}

/// Number of set bits in the mask.
pub fn count_pixels(mask: &Mask) -> u64 {
    mask.count()
}
