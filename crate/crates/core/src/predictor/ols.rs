//! Ordinary least squares on the intercept-augmented design, solved by
//! normal equations. Feature counts here are tiny (a handful of columns),
//! so a dense symmetric solve is exact enough and dependency-free.

use super::features::{FeatureRow, FeatureSpec, TrainingSample};
use super::model::{timestamp_now, LinearPredictor, Standardization, TrainingMeta};
use super::PredictorError;
use crate::textmetrics::MetricId;

/// Relative pivot / eigenvalue cutoff below which a direction is treated
/// as rank-deficient.
const RANK_TOL: f64 = 1e-12;

fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    let max_diag = (0..n).map(|i| a[i][i]).fold(0.0_f64, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let tol = RANK_TOL * max_diag;
    // In-place lower-triangular factorization.
    for j in 0..n {
        for k in 0..j {
            let f = a[j][k];
            for i in j..n {
                a[i][j] -= a[i][k] * f;
            }
        }
        if a[j][j] <= tol {
            return None;
        }
        let d = a[j][j].sqrt();
        for i in j..n {
            a[i][j] /= d;
        }
    }
    // Forward then back substitution.
    for i in 0..n {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Some(b)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvector columns).
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let stop = (frob * 1e-15).max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= stop / (n * n) as f64 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (app, aqq) = (a[p][p], a[q][q]);
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[p][k] = a[k][p];
                        a[k][q] = s * akp + c * akq;
                        a[q][k] = a[k][q];
                    }
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    (values, v)
}

/// Minimum-norm solution of a symmetric (possibly singular) system via the
/// eigen-pseudo-inverse.
fn pinv_solve(a: Vec<Vec<f64>>, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let (values, vectors) = jacobi_eigen(a);
    let max_abs = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut x = vec![0.0; n];
    if max_abs == 0.0 {
        return x;
    }
    let tol = RANK_TOL * max_abs;
    for j in 0..n {
        if values[j].abs() <= tol {
            continue;
        }
        let proj: f64 = (0..n).map(|i| vectors[i][j] * b[i]).sum();
        let scale = proj / values[j];
        for i in 0..n {
            x[i] += vectors[i][j] * scale;
        }
    }
    x
}

fn check_rows(rows: &[Vec<f64>], width: usize, what: &str) -> Result<(), PredictorError> {
    for row in rows {
        if row.len() != width {
            return Err(PredictorError::FeatureWidth { expected: width, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(PredictorError::NonFinite(what.to_string()));
        }
    }
    Ok(())
}

/// Fit weights and intercept minimizing the residual sum of squares.
/// Rank-deficient designs resolve to the minimum-norm solution. With
/// `standardize`, features are z-scored first and the scaling is stored in
/// the model so prediction applies it transparently.
pub fn fit_ols(
    samples: &[TrainingSample],
    spec: &FeatureSpec,
    target_metric: MetricId,
    standardize: bool,
) -> Result<LinearPredictor, PredictorError> {
    if samples.is_empty() {
        return Err(PredictorError::NoSamples);
    }
    let d = spec.len();
    let k = samples.len();
    let mut rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    check_rows(&rows, d, "features")?;
    let targets: Vec<f64> = samples.iter().map(|s| s.target).collect();
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(PredictorError::NonFinite("targets".to_string()));
    }

    let standardization = if standardize {
        let mut means = vec![0.0; d];
        let mut stds = vec![0.0; d];
        for j in 0..d {
            means[j] = rows.iter().map(|r| r[j]).sum::<f64>() / k as f64;
            let var = rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / k as f64;
            // A constant column carries no signal; unit scale keeps it
            // harmlessly zero after centering.
            stds[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        for row in rows.iter_mut() {
            for j in 0..d {
                row[j] = (row[j] - means[j]) / stds[j];
            }
        }
        Some(Standardization { means, stds })
    } else {
        None
    };

    // Normal equations on [1 | X]: A = DᵀD, b = Dᵀy.
    let n = d + 1;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    a[0][0] = k as f64;
    for row in &rows {
        for (j, x) in row.iter().enumerate() {
            a[0][j + 1] += x;
        }
    }
    for j in 0..d {
        a[j + 1][0] = a[0][j + 1];
    }
    for row in &rows {
        for i in 0..d {
            for j in i..d {
                a[i + 1][j + 1] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            a[j + 1][i + 1] = a[i + 1][j + 1];
        }
    }
    for (row, y) in rows.iter().zip(&targets) {
        b[0] += y;
        for (j, x) in row.iter().enumerate() {
            b[j + 1] += x * y;
        }
    }

    let solution = match cholesky_solve(a.clone(), b.clone()) {
        Some(x) => x,
        None => pinv_solve(a, &b),
    };

    let mut pairs: Vec<String> =
        samples.iter().map(|s| format!("{}-{}", s.pair.0, s.pair.1)).collect();
    pairs.sort();
    pairs.dedup();

    Ok(LinearPredictor {
        target_metric,
        spec: spec.clone(),
        weights: solution[1..].to_vec(),
        intercept: solution[0],
        standardization,
        training: TrainingMeta {
            n_samples: k,
            language_pairs: pairs,
            created_at: timestamp_now(),
        },
    })
}

/// Apply the affine model to one feature row. `clamp` pins the output to
/// the [0, 100] score range; off by default so error measurement stays
/// faithful to the fitted model.
pub fn predict(
    model: &LinearPredictor,
    features: &[f64],
    clamp: bool,
) -> Result<f64, PredictorError> {
    if features.len() != model.weights.len() {
        return Err(PredictorError::FeatureWidth {
            expected: model.weights.len(),
            got: features.len(),
        });
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(PredictorError::NonFinite("features".to_string()));
    }
    let mut y = model.intercept;
    match &model.standardization {
        Some(std) => {
            for (j, x) in features.iter().enumerate() {
                y += model.weights[j] * ((x - std.means[j]) / std.stds[j]);
            }
        }
        None => {
            for (j, x) in features.iter().enumerate() {
                y += model.weights[j] * x;
            }
        }
    }
    Ok(if clamp { y.clamp(0.0, 100.0) } else { y })
}

pub fn predict_rows(
    model: &LinearPredictor,
    rows: &[FeatureRow],
    clamp: bool,
) -> Result<Vec<f64>, PredictorError> {
    rows.iter().map(|r| predict(model, &r.features, clamp)).collect()
}

/// RSS of an arbitrary affine model over raw (unstandardized) rows.
pub fn residual_sum_of_squares(
    weights: &[f64],
    intercept: f64,
    rows: &[Vec<f64>],
    targets: &[f64],
) -> f64 {
    rows.iter()
        .zip(targets)
        .map(|(row, t)| {
            let pred = intercept + row.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>();
            (t - pred).powi(2)
        })
        .sum()
}
