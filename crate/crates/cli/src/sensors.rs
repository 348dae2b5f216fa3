//! `eval-sensors`: percentage-error tables from a trials CSV.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use leafscale::measure::{evaluate_sensor, ErrorConvention, SensorTrial};

/// Accepts `label,actual,measured` or `actual,measured` (header required).
pub fn load_trials(path: &Path) -> Result<Vec<SensorTrial>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading trials {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| anyhow!("{}: empty file", path.display()))?;
    let labelled = match header.trim() {
        "label,actual,measured" => true,
        "actual,measured" => false,
        other => bail!("{}: unexpected header {other:?}", path.display()),
    };

    let mut trials = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = if labelled { 3 } else { 2 };
        if fields.len() != expected {
            bail!("{}:{}: expected {expected} fields", path.display(), idx + 1);
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| anyhow!("{}:{}: bad number {s:?}", path.display(), idx + 1))
        };
        let (label, actual, measured) = if labelled {
            (fields[0].to_string(), parse(fields[1])?, parse(fields[2])?)
        } else {
            (
                format!("row{}", trials.len() + 1),
                parse(fields[0])?,
                parse(fields[1])?,
            )
        };
        trials.push(SensorTrial::new(label, actual, measured)?);
    }
    if trials.is_empty() {
        bail!("{}: no trial rows", path.display());
    }
    Ok(trials)
}

pub fn parse_convention(s: &str) -> Result<ErrorConvention> {
    match s {
        "measured" => Ok(ErrorConvention::Measured),
        "actual" => Ok(ErrorConvention::Actual),
        other => bail!("unknown convention {other:?} (expected `measured` or `actual`)"),
    }
}

/// Prints a per-trial error table plus the average, two decimals throughout.
pub fn cmd_eval_sensors(trials_path: &Path, convention: ErrorConvention) -> Result<()> {
    let trials = load_trials(trials_path)?;
    let eval = evaluate_sensor(&trials, convention)?;
    println!("label,actual,measured,error_pct");
    for (trial, err) in trials.iter().zip(&eval.per_trial) {
        println!(
            "{},{:.2},{:.2},{err:.2}",
            trial.label, trial.actual, trial.measured
        );
    }
    println!("average,,,{:.2}", eval.mean);
    Ok(())
}
