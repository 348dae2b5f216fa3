//! Joining hourly readings with daily plant records.
//!
//! Environmental data arrives hourly; leaf area and weights are recorded once
//! a day. `join_daily` averages each day's env (and, when present, spectral)
//! readings and attaches that day's leaf area, producing one feature row per
//! (plant, date) with the actual weight as the target.

use std::collections::BTreeMap;

use crate::date::Date;
use crate::error::{Error, Result};
use crate::regress::FeatureMatrix;
use crate::telemetry::store::PlantRecord;
use crate::telemetry::wire::{Payload, SensorReading, SPECTRAL_CHANNELS};

#[derive(Default, Clone)]
struct EnvAccumulator {
    temperature_sum: f64,
    humidity_sum: f64,
    count: u64,
}

#[derive(Clone)]
struct SpectralAccumulator {
    channel_sums: [f64; SPECTRAL_CHANNELS],
    count: u64,
}

const SPECTRAL_FEATURES: [&str; SPECTRAL_CHANNELS] = [
    "spectral_f1",
    "spectral_f2",
    "spectral_f3",
    "spectral_f4",
    "spectral_f5",
    "spectral_f6",
    "spectral_f7",
    "spectral_f8",
    "spectral_clear",
    "spectral_nir",
];

/// Builds the regression dataset: rows keyed by (plant_id, date) in sorted
/// order, features `[temperature_c, humidity_pct, <spectral means...>,
/// leaf_area_cm2]`, target `actual_weight_g`.
///
/// Spectral columns appear only when the readings contain at least one
/// spectral message; in that case every record date must have spectral
/// coverage, mirroring the env requirement.
pub fn join_daily(readings: &[SensorReading], records: &[PlantRecord]) -> Result<FeatureMatrix> {
    if records.is_empty() {
        return Err(Error::TooFewItems {
            what: "plant records",
            need: 1,
            got: 0,
        });
    }

    let mut env_by_date: BTreeMap<Date, EnvAccumulator> = BTreeMap::new();
    let mut spectral_by_date: BTreeMap<Date, SpectralAccumulator> = BTreeMap::new();
    for reading in readings {
        let date = Date::from_unix_seconds(reading.timestamp);
        match &reading.payload {
            Payload::Env {
                temperature_c,
                humidity_pct,
            } => {
                let acc = env_by_date.entry(date).or_default();
                acc.temperature_sum += temperature_c;
                acc.humidity_sum += humidity_pct;
                acc.count += 1;
            }
            Payload::Spectral { channels } => {
                let acc = spectral_by_date.entry(date).or_insert(SpectralAccumulator {
                    channel_sums: [0.0; SPECTRAL_CHANNELS],
                    count: 0,
                });
                for (sum, &c) in acc.channel_sums.iter_mut().zip(channels) {
                    *sum += c;
                }
                acc.count += 1;
            }
            Payload::Distance { .. } => {}
        }
    }
    let include_spectral = !spectral_by_date.is_empty();

    let mut ordered: BTreeMap<(&str, Date), &PlantRecord> = BTreeMap::new();
    for record in records {
        if ordered
            .insert((record.plant_id.as_str(), record.date), record)
            .is_some()
        {
            return Err(Error::DuplicatePlantDate {
                plant_id: record.plant_id.clone(),
                date: record.date.to_string(),
            });
        }
    }

    let mut missing: Vec<String> = Vec::new();
    for &(_, date) in ordered.keys() {
        if !env_by_date.contains_key(&date) {
            missing.push(format!("{date} (env)"));
        }
        if include_spectral && !spectral_by_date.contains_key(&date) {
            missing.push(format!("{date} (spectral)"));
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::MissingReadings { dates: missing });
    }

    let mut feature_names = vec!["temperature_c".to_string(), "humidity_pct".to_string()];
    if include_spectral {
        feature_names.extend(SPECTRAL_FEATURES.iter().map(|s| s.to_string()));
    }
    feature_names.push("leaf_area_cm2".to_string());

    let mut rows = Vec::with_capacity(ordered.len());
    let mut targets = Vec::with_capacity(ordered.len());
    for (&(_, date), record) in &ordered {
        let env = &env_by_date[&date];
        let n = env.count as f64;
        let mut row = vec![env.temperature_sum / n, env.humidity_sum / n];
        if include_spectral {
            let spec = &spectral_by_date[&date];
            let m = spec.count as f64;
            row.extend(spec.channel_sums.iter().map(|s| s / m));
        }
        row.push(record.leaf_area_cm2);
        rows.push(row);
        targets.push(record.actual_weight_g);
    }

    FeatureMatrix::new(feature_names, rows, targets)
}
