//! Optional plain-text config file plus flag/config/default resolution.
//!
//! The file holds `key = value` lines (`#` comments allowed). Flags always
//! win over the file; the file wins over built-in defaults. Recognized keys:
//! `hue_min`, `hue_max`, `sat_min`, `val_min`, `train_fraction`,
//! `val_fraction`, `test_fraction`, `seed`, `lambda`, `noise_variance`,
//! `bind`, `addr`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use leafscale::segment::GreenBand;

const KNOWN_KEYS: [&str; 12] = [
    "hue_min",
    "hue_max",
    "sat_min",
    "val_min",
    "train_fraction",
    "val_fraction",
    "test_fraction",
    "seed",
    "lambda",
    "noise_variance",
    "bind",
    "addr",
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), idx + 1))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(anyhow!(
                    "{}:{}: unknown config key {key:?}",
                    path.display(),
                    idx + 1
                ));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.values
            .get(key)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| anyhow!("config key {key}: bad number {s:?}"))
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.values
            .get(key)
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| anyhow!("config key {key}: bad integer {s:?}"))
            })
            .transpose()
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Green-band override flags shared by the imaging subcommands.
#[derive(Debug, Clone, Copy, clap::Args)]
pub struct BandFlags {
    /// Lower hue bound in degrees
    #[arg(long)]
    pub hue_min: Option<f64>,
    /// Upper hue bound in degrees
    #[arg(long)]
    pub hue_max: Option<f64>,
    /// Minimum saturation in [0, 1]
    #[arg(long)]
    pub sat_min: Option<f64>,
    /// Minimum value (brightness) in [0, 1]
    #[arg(long)]
    pub val_min: Option<f64>,
}

impl BandFlags {
    pub fn resolve(&self, config: &FileConfig) -> Result<GreenBand> {
        let defaults = GreenBand::default();
        Ok(GreenBand::new(
            pick(
                self.hue_min,
                config.get_f64("hue_min")?,
                defaults.hue_min_deg,
            ),
            pick(
                self.hue_max,
                config.get_f64("hue_max")?,
                defaults.hue_max_deg,
            ),
            pick(self.sat_min, config.get_f64("sat_min")?, defaults.sat_min),
            pick(self.val_min, config.get_f64("val_min")?, defaults.val_min),
        )?)
    }
}

pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
