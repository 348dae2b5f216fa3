//! `train` and `predict`: from stores to model files and back.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use leafscale::regress::{
    compute_metrics, fit_bayes, fit_ols, metrics_csv, parse_model, residual_variance, write_model,
    FeatureMatrix, Model, SplitSpec,
};
use leafscale::telemetry::dataset::join_daily;
use leafscale::telemetry::store::{load_plant_records, load_readings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ols,
    Bayes,
}

pub fn parse_model_kind(s: &str) -> Result<ModelKind> {
    match s {
        "ols" => Ok(ModelKind::Ols),
        "bayes" => Ok(ModelKind::Bayes),
        other => bail!("unknown model kind {other:?} (expected `ols` or `bayes`)"),
    }
}

pub struct TrainRequest<'a> {
    pub readings: &'a Path,
    pub plants: &'a Path,
    pub kind: ModelKind,
    pub split: SplitSpec,
    pub lambda: f64,
    pub noise_variance: Option<f64>,
    pub model_out: &'a Path,
    pub metrics_out: &'a Path,
    pub predictions_out: Option<&'a Path>,
}

/// join -> split -> fit on train -> metrics on validation and test.
///
/// For the Bayesian model the noise variance defaults to the OLS residual
/// variance on the training split when not supplied.
pub fn cmd_train(req: &TrainRequest) -> Result<()> {
    let readings = load_readings(req.readings)?;
    let plants = load_plant_records(req.plants)?;
    let features = join_daily(&readings.readings, &plants.records)?;
    let (train, val, test) = features.split(&req.split)?;

    let model = match req.kind {
        ModelKind::Ols => Model::Linear(fit_ols(&train)?),
        ModelKind::Bayes => {
            let noise = match req.noise_variance {
                Some(v) => v,
                None => {
                    let ols = fit_ols(&train)?;
                    residual_variance(&train, &ols)?
                }
            };
            Model::Bayes(fit_bayes(&train, req.lambda, noise)?)
        }
    };

    let eval = |split: &FeatureMatrix| -> Result<_> {
        let predicted: Vec<f64> = split
            .rows()
            .iter()
            .map(|row| model.predict(row).map(|p| p.mean))
            .collect::<leafscale::Result<_>>()?;
        Ok((compute_metrics(&predicted, split.targets())?, predicted))
    };
    let (val_metrics, _) = eval(&val)?;
    let (test_metrics, test_predicted) = eval(&test)?;

    std::fs::write(
        req.model_out,
        write_model(&model, features.feature_names())?,
    )
    .with_context(|| format!("writing {}", req.model_out.display()))?;
    std::fs::write(
        req.metrics_out,
        metrics_csv(&[("validation", val_metrics), ("test", test_metrics)]),
    )
    .with_context(|| format!("writing {}", req.metrics_out.display()))?;

    if let Some(path) = req.predictions_out {
        let mut csv = String::from("actual,predicted\n");
        for (&actual, &predicted) in test.targets().iter().zip(&test_predicted) {
            csv.push_str(&format!("{actual:?},{predicted:?}\n"));
        }
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }

    println!(
        "validation mse={:.6} r2={:.6}",
        val_metrics.mse, val_metrics.r_squared
    );
    println!(
        "test mse={:.6} r2={:.6}",
        test_metrics.mse, test_metrics.r_squared
    );
    Ok(())
}

/// Prints `mean` (OLS) or `mean,variance` (Bayes) for one feature row.
pub fn cmd_predict(model_path: &Path, features_csv: &str) -> Result<()> {
    let text = std::fs::read_to_string(model_path)
        .with_context(|| format!("reading model {}", model_path.display()))?;
    let (model, names) = parse_model(&text)?;
    let row: Vec<f64> = features_csv
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad feature value {s:?}"))
        })
        .collect::<Result<_>>()?;
    if row.len() != names.len() {
        bail!(
            "model expects {} features ({}), got {}",
            names.len(),
            names.join(","),
            row.len()
        );
    }
    let prediction = model.predict(&row)?;
    match model {
        Model::Linear(_) => println!("{:?}", prediction.mean),
        Model::Bayes(_) => println!("{:?},{:?}", prediction.mean, prediction.variance),
    }
    Ok(())
}

/// Loads an `actual,predicted` CSV (as written by `train --predictions-out`).
pub fn load_predictions(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading predictions {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "actual,predicted" => {}
        Some((_, header)) => bail!("{}: unexpected header {header:?}", path.display()),
        None => bail!("{}: empty file", path.display()),
    }
    let mut points = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (a, p) = line
            .split_once(',')
            .ok_or_else(|| anyhow!("{}:{}: expected two fields", path.display(), idx + 1))?;
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| anyhow!("{}:{}: bad number {s:?}", path.display(), idx + 1))
        };
        points.push((parse(a)?, parse(p)?));
    }
    Ok(points)
}
