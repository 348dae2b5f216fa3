//! Biomass regression: OLS, conjugate Bayesian linear regression, dataset
//! splitting, and MSE/R^2 metrics.
//!
//! Both model kinds regress raw feature rows onto the target weight. The
//! Bayesian variant is the conjugate Gaussian model with a fixed noise
//! variance and an isotropic zero-mean prior on the non-intercept
//! coefficients (ridge form): with penalty matrix `L = lambda * I` (zero in
//! the intercept slot),
//!
//! ```text
//! posterior_mean       = (X^T X + L)^-1 X^T y
//! posterior_covariance = sigma^2 (X^T X + L)^-1
//! ```
//!
//! Normal equations are never formed explicitly: fits go through a
//! Householder QR of the (penalty-augmented) design matrix.

// Index loops match the matrix notation.
#![allow(clippy::needless_range_loop)]

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{inverse_gram_from_r, least_squares_qr, Mat};
use crate::rng::SplitMix64;

/// Named feature rows with one target value per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::TooFewItems {
                what: "features",
                need: 1,
                got: 0,
            });
        }
        if rows.is_empty() {
            return Err(Error::TooFewItems {
                what: "rows",
                need: 1,
                got: 0,
            });
        }
        if rows.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: targets.len(),
            });
        }
        for name in &feature_names {
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::Degenerate(format!("invalid feature name {name:?}")));
            }
        }
        for row in &rows {
            if row.len() != feature_names.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: feature_names.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Degenerate("non-finite feature value".into()));
            }
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite target value".into()));
        }
        Ok(FeatureMatrix {
            feature_names,
            rows,
            targets,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Seeded shuffle + contiguous cuts; partitions are disjoint and cover
    /// the input.
    pub fn split(&self, spec: &SplitSpec) -> Result<(FeatureMatrix, FeatureMatrix, FeatureMatrix)> {
        let (train, val, test) = split_indices(self.n_rows(), spec)?;
        Ok((self.subset(&train), self.subset(&val), self.subset(&test)))
    }

    fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    /// Design matrix with a prepended intercept column.
    fn design(&self) -> Mat {
        let p = self.n_features() + 1;
        let mut a = Mat::zeros(self.n_rows(), p);
        for (i, row) in self.rows.iter().enumerate() {
            *a.at_mut(i, 0) = 1.0;
            for (j, &v) in row.iter().enumerate() {
                *a.at_mut(i, j + 1) = v;
            }
        }
        a
    }

    fn column_name(&self, k: usize) -> String {
        if k == 0 {
            "intercept".to_string()
        } else {
            self.feature_names[k - 1].clone()
        }
    }
}

/// Train/validation/test fractions plus a shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(
        train_fraction: f64,
        val_fraction: f64,
        test_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        let spec = SplitSpec {
            train_fraction,
            val_fraction,
            test_fraction,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("train_fraction", self.train_fraction),
            ("val_fraction", self.val_fraction),
            ("test_fraction", self.test_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidSplit(format!(
                    "{name} must lie in (0, 1), got {f}"
                )));
            }
        }
        let sum = self.train_fraction + self.val_fraction + self.test_fraction;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSplit(format!(
                "fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Shuffled index partitions cut at `floor(n*train)` and `floor(n*(train+val))`.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if n < 5 {
        return Err(Error::TooFewItems {
            what: "rows to split",
            need: 5,
            got: n,
        });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    SplitMix64::new(spec.seed).shuffle(&mut indices);
    let train_end = (n as f64 * spec.train_fraction).floor() as usize;
    let val_end = (n as f64 * (spec.train_fraction + spec.val_fraction)).floor() as usize;
    let test = indices.split_off(val_end);
    let val = indices.split_off(train_end);
    Ok((indices, val, test))
}

/// Splits any row collection with the same shuffle/cut rule as [`split_indices`].
pub fn split_dataset<T: Clone>(rows: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let (train, val, test) = split_indices(rows.len(), spec)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| rows[i].clone()).collect();
    Ok((pick(&train), pick(&val), pick(&test)))
}

/// Point-estimate linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

/// Conjugate Gaussian posterior over intercept + coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesModel {
    /// Index 0 is the intercept; indices 1..=d are coefficients.
    pub posterior_mean: Vec<f64>,
    /// (d+1) x (d+1), symmetric positive semi-definite.
    pub posterior_covariance: Vec<Vec<f64>>,
    pub noise_variance: f64,
    pub prior_precision: f64,
}

/// Prediction with predictive variance (zero for the point-estimate model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl LinearModel {
    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.coefficients.len() {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: self.coefficients.len(),
            });
        }
        let mean = self.intercept + dot(&self.coefficients, row);
        Ok(Prediction {
            mean,
            variance: 0.0,
        })
    }
}

impl BayesModel {
    pub fn n_features(&self) -> usize {
        self.posterior_mean.len() - 1
    }

    /// Predictive mean and variance `sigma^2 + x^T Sigma x` with `x` the
    /// intercept-augmented row.
    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.n_features() {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: self.n_features(),
            });
        }
        let mut x = Vec::with_capacity(row.len() + 1);
        x.push(1.0);
        x.extend_from_slice(row);
        let mean = dot(&self.posterior_mean, &x);
        let mut quad = 0.0;
        for (i, xi) in x.iter().enumerate() {
            quad += xi * dot(&self.posterior_covariance[i], &x);
        }
        Ok(Prediction {
            mean,
            variance: self.noise_variance + quad,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ordinary least squares through a Householder QR of the design matrix.
pub fn fit_ols(features: &FeatureMatrix) -> Result<LinearModel> {
    let p = features.n_features() + 1;
    if features.n_rows() <= p {
        return Err(Error::TooFewItems {
            what: "regression rows",
            need: p + 1,
            got: features.n_rows(),
        });
    }
    let a = features.design();
    let ls = least_squares_qr(&a, features.targets()).map_err(|k| Error::RankDeficient {
        column: features.column_name(k),
    })?;
    let mut solution = ls.solution;
    let intercept = solution.remove(0);
    Ok(LinearModel {
        intercept,
        coefficients: solution,
    })
}

/// Conjugate Bayesian fit with ridge penalty `prior_precision` on the
/// non-intercept coefficients and fixed `noise_variance`.
pub fn fit_bayes(
    features: &FeatureMatrix,
    prior_precision: f64,
    noise_variance: f64,
) -> Result<BayesModel> {
    if !(prior_precision >= 0.0 && prior_precision.is_finite()) {
        return Err(Error::NonPositive {
            name: "prior_precision",
            value: prior_precision,
        });
    }
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(Error::NonPositive {
            name: "noise_variance",
            value: noise_variance,
        });
    }
    let p = features.n_features() + 1;
    if features.n_rows() <= p {
        return Err(Error::TooFewItems {
            what: "regression rows",
            need: p + 1,
            got: features.n_rows(),
        });
    }

    // Stack sqrt(lambda) rows under the design so that the QR of the stacked
    // system factors X^T X + L without forming it.
    let n = features.n_rows();
    let extra = if prior_precision > 0.0 { p - 1 } else { 0 };
    let mut a = Mat::zeros(n + extra, p);
    let mut rhs = vec![0.0; n + extra];
    {
        let design = features.design();
        for i in 0..n {
            for j in 0..p {
                *a.at_mut(i, j) = design.at(i, j);
            }
            rhs[i] = features.targets()[i];
        }
    }
    if extra > 0 {
        let sqrt_lambda = prior_precision.sqrt();
        for j in 1..p {
            *a.at_mut(n + j - 1, j) = sqrt_lambda;
        }
    }

    let ls = least_squares_qr(&a, &rhs).map_err(|k| Error::RankDeficient {
        column: features.column_name(k),
    })?;
    let inv_gram = inverse_gram_from_r(&ls.r);
    let posterior_covariance: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| noise_variance * inv_gram.at(i, j)).collect())
        .collect();

    Ok(BayesModel {
        posterior_mean: ls.solution,
        posterior_covariance,
        noise_variance,
        prior_precision,
    })
}

/// Unbiased residual variance of an OLS fit, `SS_res / (n - d - 1)`.
pub fn residual_variance(features: &FeatureMatrix, model: &LinearModel) -> Result<f64> {
    let n = features.n_rows();
    let p = features.n_features() + 1;
    if n <= p {
        return Err(Error::TooFewItems {
            what: "regression rows",
            need: p + 1,
            got: n,
        });
    }
    let mut ss_res = 0.0;
    for (row, &y) in features.rows().iter().zip(features.targets()) {
        let r = y - model.predict(row)?.mean;
        ss_res += r * r;
    }
    Ok(ss_res / (n - p) as f64)
}

/// MSE and R^2 of a prediction vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mse: f64,
    pub r_squared: f64,
}

/// `mse = mean((p - a)^2)`; `r^2 = 1 - SS_res / SS_tot` about the mean of
/// `actual`. Constant `actual` leaves R^2 undefined and is an error.
pub fn compute_metrics(predicted: &[f64], actual: &[f64]) -> Result<Metrics> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::TooFewItems {
            what: "predictions",
            need: 1,
            got: 0,
        });
    }
    let n = actual.len() as f64;
    let mean_actual = actual.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&p, &a) in predicted.iter().zip(actual) {
        ss_res += (p - a) * (p - a);
        ss_tot += (a - mean_actual) * (a - mean_actual);
    }
    if ss_tot == 0.0 {
        return Err(Error::Degenerate(
            "actual values are constant; R^2 is undefined".into(),
        ));
    }
    Ok(Metrics {
        mse: ss_res / n,
        r_squared: 1.0 - ss_res / ss_tot,
    })
}

/// A trained model of either kind, as written to model files.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Bayes(BayesModel),
}

impl Model {
    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        match self {
            Model::Linear(m) => m.predict(row),
            Model::Bayes(m) => m.predict(row),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.coefficients.len(),
            Model::Bayes(m) => m.n_features(),
        }
    }
}

const MODEL_MAGIC: &str = "leafscale-model 1";

/// Versioned plain-text model file. Floats are written in shortest
/// round-trip form, so parse(write(m)) == m.
pub fn write_model(model: &Model, feature_names: &[String]) -> Result<String> {
    if feature_names.len() != model.n_features() {
        return Err(Error::LengthMismatch {
            left: feature_names.len(),
            right: model.n_features(),
        });
    }
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "features {}", feature_names.join(" "));
    match model {
        Model::Linear(m) => {
            let _ = writeln!(out, "kind ols");
            let _ = writeln!(out, "intercept {:?}", m.intercept);
            for (j, c) in m.coefficients.iter().enumerate() {
                let _ = writeln!(out, "coef {j} {c:?}");
            }
        }
        Model::Bayes(m) => {
            let _ = writeln!(out, "kind bayes");
            let _ = writeln!(out, "noise_variance {:?}", m.noise_variance);
            let _ = writeln!(out, "prior_precision {:?}", m.prior_precision);
            let _ = writeln!(out, "intercept {:?}", m.posterior_mean[0]);
            for (j, c) in m.posterior_mean[1..].iter().enumerate() {
                let _ = writeln!(out, "coef {j} {c:?}");
            }
            for (i, row) in m.posterior_covariance.iter().enumerate() {
                let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(out, "cov {i} {}", vals.join(" "));
            }
        }
    }
    Ok(out)
}

/// Parses a model file written by [`write_model`].
pub fn parse_model(text: &str) -> Result<(Model, Vec<String>)> {
    let err = |line: usize, reason: String| Error::Format {
        what: "model",
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines
        .next()
        .ok_or_else(|| err(0, "empty model file".into()))?;
    if magic.trim() != MODEL_MAGIC {
        return Err(err(
            1,
            format!("unsupported model header {:?}", magic.trim()),
        ));
    }

    let mut feature_names: Option<Vec<String>> = None;
    let mut kind: Option<String> = None;
    let mut intercept: Option<f64> = None;
    let mut coefs: Vec<(usize, f64)> = Vec::new();
    let mut cov_rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut noise_variance: Option<f64> = None;
    let mut prior_precision: Option<f64> = None;

    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let parsef = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| err(lineno, format!("bad number {s:?}")))
        };
        match key {
            "features" => {
                feature_names = Some(rest.split_whitespace().map(str::to_string).collect());
            }
            "kind" => kind = Some(rest.trim().to_string()),
            "intercept" => intercept = Some(parsef(rest.trim())?),
            "noise_variance" => noise_variance = Some(parsef(rest.trim())?),
            "prior_precision" => prior_precision = Some(parsef(rest.trim())?),
            "coef" => {
                let (j, v) = rest
                    .trim()
                    .split_once(' ')
                    .ok_or_else(|| err(lineno, "coef expects `coef <index> <value>`".into()))?;
                let j: usize = j
                    .parse()
                    .map_err(|_| err(lineno, format!("bad index {j:?}")))?;
                coefs.push((j, parsef(v.trim())?));
            }
            "cov" => {
                let mut fields = rest.split_whitespace();
                let i: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(lineno, "cov expects `cov <row> <values...>`".into()))?;
                let row: Vec<f64> = fields.map(parsef).collect::<Result<_>>()?;
                cov_rows.push((i, row));
            }
            other => return Err(err(lineno, format!("unknown key {other:?}"))),
        }
    }

    let feature_names = feature_names.ok_or_else(|| err(0, "missing features line".into()))?;
    let d = feature_names.len();
    let kind = kind.ok_or_else(|| err(0, "missing kind line".into()))?;
    let intercept = intercept.ok_or_else(|| err(0, "missing intercept".into()))?;

    coefs.sort_by_key(|&(j, _)| j);
    if coefs.len() != d || coefs.iter().enumerate().any(|(want, &(j, _))| want != j) {
        return Err(err(0, format!("expected coefficients 0..{d}")));
    }
    let coefficients: Vec<f64> = coefs.into_iter().map(|(_, v)| v).collect();

    let model = match kind.as_str() {
        "ols" => Model::Linear(LinearModel {
            intercept,
            coefficients,
        }),
        "bayes" => {
            let noise_variance =
                noise_variance.ok_or_else(|| err(0, "missing noise_variance".into()))?;
            let prior_precision =
                prior_precision.ok_or_else(|| err(0, "missing prior_precision".into()))?;
            cov_rows.sort_by_key(|&(i, _)| i);
            if cov_rows.len() != d + 1
                || cov_rows
                    .iter()
                    .enumerate()
                    .any(|(want, (i, row))| *i != want || row.len() != d + 1)
            {
                return Err(err(
                    0,
                    format!("expected {} covariance rows of width {}", d + 1, d + 1),
                ));
            }
            let mut posterior_mean = vec![intercept];
            posterior_mean.extend(coefficients);
            Model::Bayes(BayesModel {
                posterior_mean,
                posterior_covariance: cov_rows.into_iter().map(|(_, r)| r).collect(),
                noise_variance,
                prior_precision,
            })
        }
        other => return Err(err(0, format!("unknown model kind {other:?}"))),
    };
    Ok((model, feature_names))
}

/// `dataset,mse,r2` CSV rows for the given labelled metrics.
pub fn metrics_csv(rows: &[(&str, Metrics)]) -> String {
    let mut out = String::from("dataset,mse,r2\n");
    for (name, m) in rows {
        let _ = writeln!(out, "{name},{:.6},{:.6}", m.mse, m.r_squared);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> FeatureMatrix {
        let names = (0..rows[0].len()).map(|j| format!("x{j}")).collect();
        FeatureMatrix::new(names, rows, targets).unwrap()
    }

    #[test]
    fn ols_recovers_exact_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let targets: Vec<f64> = (0..10).map(|i| 3.0 * i as f64 + 1.0).collect();
        let m = fit_ols(&matrix_from(rows, targets)).unwrap();
        assert!((m.intercept - 1.0).abs() < 1e-10);
        assert!((m.coefficients[0] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn ols_constant_target() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let m = fit_ols(&matrix_from(rows, vec![4.5; 8])).unwrap();
        assert!((m.intercept - 4.5).abs() < 1e-10);
        assert!(m.coefficients[0].abs() < 1e-10);
    }

    /// Explicit normal-equations pseudo-inverse oracle (Gauss-Jordan),
    /// independent of the QR path under test.
    fn pinv_oracle(features: &FeatureMatrix) -> Vec<f64> {
        let d = features.n_features();
        let p = d + 1;
        let rows = features.rows();
        let y = features.targets();
        let augmented_row = |r: &[f64], j: usize| if j == 0 { 1.0 } else { r[j - 1] };

        let mut ata = vec![vec![0.0; p]; p];
        let mut aty = vec![0.0; p];
        for (r, &yv) in rows.iter().zip(y) {
            for i in 0..p {
                aty[i] += augmented_row(r, i) * yv;
                for j in 0..p {
                    ata[i][j] += augmented_row(r, i) * augmented_row(r, j);
                }
            }
        }
        // Gauss-Jordan solve.
        let mut m: Vec<Vec<f64>> = ata
            .iter()
            .zip(&aty)
            .map(|(row, &b)| {
                let mut r = row.clone();
                r.push(b);
                r
            })
            .collect();
        for col in 0..p {
            let pivot = (col..p)
                .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
                .unwrap();
            m.swap(col, pivot);
            let pv = m[col][col];
            for v in &mut m[col] {
                *v /= pv;
            }
            for r in 0..p {
                if r != col {
                    let factor = m[r][col];
                    for c in 0..=p {
                        m[r][c] -= factor * m[col][c];
                    }
                }
            }
        }
        m.iter().map(|r| r[p]).collect()
    }

    #[test]
    fn ols_matches_pseudo_inverse_oracle() {
        let mut rng = crate::rng::SplitMix64::new(99);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| rng.next_f64() * 10.0).collect())
            .collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|r| 2.0 + 1.5 * r[0] - 0.7 * r[1] + 0.2 * r[2] + 0.05 * rng.next_gaussian())
            .collect();
        let fm = matrix_from(rows, targets);
        let m = fit_ols(&fm).unwrap();
        let oracle = pinv_oracle(&fm);
        assert!((m.intercept - oracle[0]).abs() <= 1e-9 * oracle[0].abs().max(1.0));
        for j in 0..3 {
            assert!(
                (m.coefficients[j] - oracle[j + 1]).abs() <= 1e-9 * oracle[j + 1].abs().max(1.0),
                "coef {j}: {} vs {}",
                m.coefficients[j],
                oracle[j + 1]
            );
        }
    }

    #[test]
    fn ols_residuals_orthogonal_to_design() {
        let mut rng = crate::rng::SplitMix64::new(3);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.next_f64() * 4.0, rng.next_f64() * 9.0])
            .collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|r| 1.0 + r[0] - 2.0 * r[1] + rng.next_gaussian())
            .collect();
        let fm = matrix_from(rows.clone(), targets.clone());
        let m = fit_ols(&fm).unwrap();

        let residuals: Vec<f64> = rows
            .iter()
            .zip(&targets)
            .map(|(r, &y)| y - m.predict(r).unwrap().mean)
            .collect();
        let sum: f64 = residuals.iter().sum();
        assert!(sum.abs() < 1e-8 * rows.len() as f64, "{sum}");
        for j in 0..2 {
            let dot: f64 = rows.iter().zip(&residuals).map(|(r, &e)| r[j] * e).sum();
            assert!(dot.abs() < 1e-7, "column {j}: {dot}");
        }
    }

    #[test]
    fn ols_rejects_rank_deficiency_naming_column() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let err = fit_ols(&matrix_from(rows, vec![1.0; 10])).unwrap_err();
        match err {
            Error::RankDeficient { column } => assert_eq!(column, "x1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ols_needs_more_rows_than_columns() {
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| vec![i as f64, i as f64 * i as f64])
            .collect();
        assert!(matches!(
            fit_ols(&matrix_from(rows, vec![1.0, 2.0, 3.0])),
            Err(Error::TooFewItems { .. })
        ));
    }

    #[test]
    fn bayes_flat_prior_matches_ols() {
        let mut rng = crate::rng::SplitMix64::new(11);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.next_f64(), rng.next_f64() * 3.0])
            .collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|r| 0.5 + 2.0 * r[0] - r[1] + 0.01 * rng.next_gaussian())
            .collect();
        let fm = matrix_from(rows, targets);
        let ols = fit_ols(&fm).unwrap();
        let bayes = fit_bayes(&fm, 0.0, 1.0).unwrap();
        assert!((bayes.posterior_mean[0] - ols.intercept).abs() < 1e-8);
        for j in 0..2 {
            assert!((bayes.posterior_mean[j + 1] - ols.coefficients[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn bayes_infinite_shrinkage_zeroes_coefficients() {
        let mut rng = crate::rng::SplitMix64::new(17);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.next_f64() * 5.0]).collect();
        let targets: Vec<f64> = rows.iter().map(|r| 3.0 + r[0]).collect();
        let fm = matrix_from(rows, targets.clone());
        let bayes = fit_bayes(&fm, 1e9, 1.0).unwrap();
        assert!(
            bayes.posterior_mean[1].abs() < 1e-4,
            "{}",
            bayes.posterior_mean[1]
        );
        let mean_y = targets.iter().sum::<f64>() / targets.len() as f64;
        assert!((bayes.posterior_mean[0] - mean_y).abs() < 1e-3);
    }

    #[test]
    fn bayes_toy_matches_explicit_matrix_inversion() {
        // Two features, lambda = 1, sigma^2 = 1. Oracle inverts the 3x3
        // penalized normal matrix directly (adjugate formula).
        let rows = vec![
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![3.0, 4.0],
            vec![4.0, 3.0],
            vec![5.0, 6.0],
        ];
        let targets = vec![3.1, 4.2, 7.0, 8.1, 11.2];
        let fm = matrix_from(rows.clone(), targets.clone());
        let bayes = fit_bayes(&fm, 1.0, 1.0).unwrap();

        // Build A^T A + diag(0, 1, 1) and A^T y by hand.
        let mut g = [[0.0f64; 3]; 3];
        let mut aty = [0.0f64; 3];
        for (r, &y) in rows.iter().zip(&targets) {
            let x = [1.0, r[0], r[1]];
            for i in 0..3 {
                aty[i] += x[i] * y;
                for j in 0..3 {
                    g[i][j] += x[i] * x[j];
                }
            }
        }
        g[1][1] += 1.0;
        g[2][2] += 1.0;

        let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        let mut inv = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (a, b, c, d) = (
                    g[(j + 1) % 3][(i + 1) % 3],
                    g[(j + 1) % 3][(i + 2) % 3],
                    g[(j + 2) % 3][(i + 1) % 3],
                    g[(j + 2) % 3][(i + 2) % 3],
                );
                inv[i][j] = (a * d - b * c) / det;
            }
        }
        let mean_oracle: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| inv[i][j] * aty[j]).sum())
            .collect();

        for i in 0..3 {
            assert!(
                (bayes.posterior_mean[i] - mean_oracle[i]).abs() < 1e-9,
                "mean {i}: {} vs {}",
                bayes.posterior_mean[i],
                mean_oracle[i]
            );
            for j in 0..3 {
                assert!(
                    (bayes.posterior_covariance[i][j] - inv[i][j]).abs() < 1e-9,
                    "cov ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn bayes_covariance_symmetric_with_nonnegative_diagonal() {
        let mut rng = crate::rng::SplitMix64::new(23);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| vec![rng.next_f64(), rng.next_f64(), rng.next_f64()])
            .collect();
        let targets: Vec<f64> = rows.iter().map(|r| r[0] + r[1] + r[2]).collect();
        let fm = matrix_from(rows, targets);
        let m = fit_bayes(&fm, 0.5, 2.0).unwrap();
        for i in 0..4 {
            assert!(m.posterior_covariance[i][i] >= 0.0);
            for j in 0..4 {
                assert!(
                    (m.posterior_covariance[i][j] - m.posterior_covariance[j][i]).abs() < 1e-10
                );
            }
        }
    }

    #[test]
    fn bayes_rejects_invalid_hyperparameters() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let fm = matrix_from(rows, (0..10).map(f64::from).collect());
        assert!(fit_bayes(&fm, -1.0, 1.0).is_err());
        assert!(fit_bayes(&fm, f64::NAN, 1.0).is_err());
        assert!(fit_bayes(&fm, 1.0, 0.0).is_err());
        assert!(fit_bayes(&fm, 1.0, -2.0).is_err());
    }

    #[test]
    fn bayes_zero_lambda_rank_deficient_errors() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let fm = matrix_from(rows, vec![1.0; 10]);
        assert!(matches!(
            fit_bayes(&fm, 0.0, 1.0),
            Err(Error::RankDeficient { .. })
        ));
        // With a proper prior the same design fits fine.
        assert!(fit_bayes(&fm, 1.0, 1.0).is_ok());
    }

    #[test]
    fn bayes_predictive_variance_at_least_noise() {
        let mut rng = crate::rng::SplitMix64::new(31);
        let rows: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.next_f64() * 2.0]).collect();
        let targets: Vec<f64> = rows.iter().map(|r| 1.0 + r[0]).collect();
        let m = fit_bayes(&matrix_from(rows, targets), 1.0, 0.7).unwrap();
        for _ in 0..200 {
            let row = vec![rng.next_f64() * 20.0 - 10.0];
            let p = m.predict(&row).unwrap();
            assert!(p.variance >= 0.7, "{}", p.variance);
        }
    }

    #[test]
    fn predict_linear_example() {
        let m = LinearModel {
            intercept: 1.0,
            coefficients: vec![3.0],
        };
        let p = m.predict(&[2.0]).unwrap();
        assert_eq!((p.mean, p.variance), (7.0, 0.0));
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn metrics_trivials() {
        let m = compute_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((m.mse, m.r_squared), (0.0, 1.0));

        let actual = [1.0, 2.0, 3.0, 6.0];
        let mean = actual.iter().sum::<f64>() / 4.0;
        let m = compute_metrics(&[mean; 4], &actual).unwrap();
        assert_eq!(m.r_squared, 0.0);
    }

    #[test]
    fn metrics_constant_actual_is_error() {
        assert!(matches!(
            compute_metrics(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(compute_metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert!(compute_metrics(&[], &[]).is_err());
    }

    #[test]
    fn training_r2_equals_squared_pearson() {
        let mut rng = crate::rng::SplitMix64::new(47);
        let rows: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.next_f64() * 8.0]).collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|r| 2.0 + 0.9 * r[0] + 0.3 * rng.next_gaussian())
            .collect();
        let fm = matrix_from(rows.clone(), targets.clone());
        let m = fit_ols(&fm).unwrap();
        let predicted: Vec<f64> = rows.iter().map(|r| m.predict(r).unwrap().mean).collect();
        let metrics = compute_metrics(&predicted, &targets).unwrap();

        let n = targets.len() as f64;
        let mp = predicted.iter().sum::<f64>() / n;
        let ma = targets.iter().sum::<f64>() / n;
        let (mut cov, mut vp, mut va) = (0.0, 0.0, 0.0);
        for (&p, &a) in predicted.iter().zip(&targets) {
            cov += (p - mp) * (a - ma);
            vp += (p - mp) * (p - mp);
            va += (a - ma) * (a - ma);
        }
        let pearson2 = (cov / (vp.sqrt() * va.sqrt())).powi(2);
        assert!((metrics.r_squared - pearson2).abs() < 1e-9);
    }

    #[test]
    fn split_sizes_follow_floor_arithmetic() {
        let spec = SplitSpec::new(0.6, 0.2, 0.2, 42).unwrap();
        let (train, val, test) = split_indices(10, &spec).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (6, 2, 2));
        let (train, val, test) = split_indices(5, &spec).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (3, 1, 1));
    }

    #[test]
    fn split_deterministic_and_partitioning() {
        let spec = SplitSpec::new(0.6, 0.2, 0.2, 7).unwrap();
        let a = split_indices(50, &spec).unwrap();
        let b = split_indices(50, &spec).unwrap();
        assert_eq!(a, b);

        let mut all: Vec<usize> = a.0.iter().chain(&a.1).chain(&a.2).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());

        let other = split_indices(50, &SplitSpec::new(0.6, 0.2, 0.2, 8).unwrap()).unwrap();
        assert_eq!(other.0.len(), a.0.len());
        assert_ne!(other.0, a.0);
    }

    #[test]
    fn split_rejects_bad_specs() {
        assert!(SplitSpec::new(0.5, 0.2, 0.2, 0).is_err());
        assert!(SplitSpec::new(1.0, 0.0, 0.0, 0).is_err());
        let spec = SplitSpec::new(0.6, 0.2, 0.2, 0).unwrap();
        assert!(matches!(
            split_indices(4, &spec),
            Err(Error::TooFewItems { .. })
        ));
    }

    #[test]
    fn split_dataset_clones_rows() {
        let rows: Vec<&str> = vec!["a", "b", "c", "d", "e", "f"];
        let spec = SplitSpec::new(0.6, 0.2, 0.2, 1).unwrap();
        let (train, val, test) = split_dataset(&rows, &spec).unwrap();
        let mut all: Vec<&str> = train.iter().chain(&val).chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec!["a", "b", "c", "d", "e", "f"]);
    }

    #[test]
    fn model_file_roundtrip_ols() {
        let model = Model::Linear(LinearModel {
            intercept: 1.25,
            coefficients: vec![0.5, -3.75e-2],
        });
        let names = vec!["temperature_c".to_string(), "leaf_area_cm2".to_string()];
        let text = write_model(&model, &names).unwrap();
        let (parsed, parsed_names) = parse_model(&text).unwrap();
        assert_eq!(parsed, model);
        assert_eq!(parsed_names, names);
    }

    #[test]
    fn model_file_roundtrip_bayes() {
        let model = Model::Bayes(BayesModel {
            posterior_mean: vec![0.1, 2.0],
            posterior_covariance: vec![vec![0.5, 0.01], vec![0.01, 0.25]],
            noise_variance: 1.5,
            prior_precision: 2.0,
        });
        let names = vec!["x".to_string()];
        let text = write_model(&model, &names).unwrap();
        let (parsed, _) = parse_model(&text).unwrap();
        assert_eq!(parsed, model);
    }

    #[test]
    fn model_file_rejects_garbage() {
        assert!(parse_model("").is_err());
        assert!(parse_model("not a model\n").is_err());
        assert!(parse_model("leafscale-model 1\nfeatures x\nkind ols\n").is_err());
        assert!(
            parse_model("leafscale-model 1\nfeatures x\nkind ols\nintercept 1\ncoef 1 2\n")
                .is_err()
        );
    }

    #[test]
    fn metrics_csv_format() {
        let rows = [
            (
                "validation",
                Metrics {
                    mse: 171.37,
                    r_squared: 0.91,
                },
            ),
            (
                "test",
                Metrics {
                    mse: 156.12,
                    r_squared: 0.93,
                },
            ),
        ];
        let csv = metrics_csv(&rows);
        assert_eq!(
            csv,
            "dataset,mse,r2\nvalidation,171.370000,0.910000\ntest,156.120000,0.930000\n"
        );
    }
}
