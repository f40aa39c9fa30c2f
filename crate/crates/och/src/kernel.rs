//! Spline-kernel ridge regression with leave-one-out penalty selection.
//!
//! Every conditional expectation in this crate is fit with the same
//! machinery: covariates are min/max scaled into the unit cube, a
//! first-order infinite-knot spline kernel supplies the Gram matrix, and the
//! ridge penalty is chosen from a grid by closed-form leave-one-out
//! cross-validation.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

/// Penalty grid 1e-8, 1e-7, ..., 1e-1.
pub const DEFAULT_LAMBDA_GRID: [f64; 8] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// Per-dimension min/max scaling into `[0, 1]^p`.
///
/// Dimensions with zero range map to the constant 0.5; prediction-time
/// inputs are clamped into `[0, 1]` after scaling, which bounds the kernel's
/// extrapolation behavior.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::InvalidInput(
                "cannot fit a scaler on an empty matrix".into(),
            ));
        }
        let p = x.cols();
        let mut min = vec![f64::INFINITY; p];
        let mut max = vec![f64::NEG_INFINITY; p];
        for row in x.iter_rows() {
            for j in 0..p {
                if !row[j].is_finite() {
                    return Err(Error::InvalidInput("non-finite covariate".into()));
                }
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Scale one row into `[0, 1]^p`, clamping values outside the training
    /// range.
    pub fn scale_row(&self, row: &[f64], out: &mut [f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "scaler expects {} features, got {}",
                self.dim(),
                row.len()
            )));
        }
        for j in 0..row.len() {
            let range = self.max[j] - self.min[j];
            out[j] = if range > 0.0 {
                ((row[j] - self.min[j]) / range).clamp(0.0, 1.0)
            } else {
                0.5
            };
        }
        Ok(())
    }

    pub fn scale_matrix(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            let row = x.row(i).to_vec();
            self.scale_row(&row, out.row_mut(i))?;
        }
        Ok(out)
    }
}

/// One dimension of the first-order infinite-knot spline kernel.
#[inline]
fn spline_1d(a: f64, b: f64) -> f64 {
    let m = a.min(b);
    1.0 + a * b + a * b * m - 0.5 * (a + b) * m * m + m * m * m / 3.0
}

/// Product spline kernel over `[0, 1]^p`.
pub fn spline_kernel(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel arguments have lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    for &c in u.iter().chain(v.iter()) {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidInput(format!(
                "kernel input {c} outside [0, 1]; scale covariates first"
            )));
        }
    }
    Ok(spline_kernel_unchecked(u, v))
}

#[inline]
pub(crate) fn spline_kernel_unchecked(u: &[f64], v: &[f64]) -> f64 {
    let mut k = 1.0;
    for (a, b) in u.iter().zip(v) {
        k *= spline_1d(*a, *b);
    }
    k
}

/// A fitted kernel ridge regressor.
///
/// Immutable after construction; prediction is `sum_i w_i k(x, x_i)` over
/// the scaled training inputs.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    scaler: FeatureScaler,
    train: Matrix,
    weights: Vec<f64>,
    lambda: f64,
}

impl RegressionModel {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        let mut scaled = vec![0.0; self.scaler.dim()];
        self.scaler.scale_row(row, &mut scaled)?;
        let mut acc = 0.0;
        for (w, train_row) in self.weights.iter().zip(self.train.iter_rows()) {
            acc += w * spline_kernel_unchecked(&scaled, train_row);
        }
        Ok(acc)
    }

    /// Predict at every row of `x`. An empty matrix yields an empty vector.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.rows() > 0 && x.cols() != self.scaler.dim() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, got {}",
                self.scaler.dim(),
                x.cols()
            )));
        }
        let mut out = Vec::with_capacity(x.rows());
        for i in 0..x.rows() {
            out.push(self.predict_row(x.row(i))?);
        }
        Ok(out)
    }
}

/// Gram matrix of the spline kernel over scaled inputs.
pub(crate) fn gram_matrix(scaled: &Matrix) -> Vec<f64> {
    let n = scaled.rows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = spline_kernel_unchecked(scaled.row(i), scaled.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Shared per-dataset state for ridge fits: scaled inputs plus the Gram
/// matrix, so several targets (or a penalty search) reuse one kernel pass.
pub(crate) struct RidgeWorkspace {
    pub scaler: FeatureScaler,
    pub scaled: Matrix,
    pub gram: Vec<f64>,
    pub n: usize,
}

impl RidgeWorkspace {
    pub fn build(x: &Matrix) -> Result<Self> {
        let scaler = FeatureScaler::fit(x)?;
        let scaled = scaler.scale_matrix(x)?;
        let gram = gram_matrix(&scaled);
        Ok(Self {
            scaler,
            scaled,
            gram,
            n: x.rows(),
        })
    }

    /// Factor `K + lambda n I`.
    pub fn factor(&self, lambda: f64) -> Option<Cholesky> {
        let n = self.n;
        let mut a = self.gram.clone();
        let shift = lambda * n as f64;
        for i in 0..n {
            a[i * n + i] += shift;
        }
        Cholesky::factor(&a, n)
    }
}

/// Leave-one-out squared-error sum for one target under a given factorized
/// penalty.
///
/// With `A = K + lambda n I` and dual weights `w = A^{-1} y`, the training
/// residual is `lambda n w_i` and one minus the leverage is
/// `lambda n (A^{-1})_ii`, so the LOO residual is `w_i / (A^{-1})_ii`.
pub(crate) fn loo_sse(weights: &[f64], inv_diag: &[f64]) -> f64 {
    weights
        .iter()
        .zip(inv_diag)
        .map(|(w, d)| {
            let r = w / d;
            r * r
        })
        .sum()
}

/// Fit a spline-kernel ridge regression, selecting the penalty from
/// `lambda_grid` by leave-one-out cross-validation.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambda_grid: &[f64]) -> Result<RegressionModel> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "ridge fit needs at least 2 rows, got {n}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "covariates have {n} rows but outcomes have {}",
            y.len()
        )));
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    if lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidInput("lambda grid entries must be > 0".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite outcome".into()));
    }

    let ws = RidgeWorkspace::build(x)?;
    let mut best: Option<(f64, f64, Vec<f64>)> = None; // (loo, lambda, weights)
    for &lambda in lambda_grid {
        let Some(chol) = ws.factor(lambda) else {
            continue;
        };
        let weights = chol.solve(y);
        let inv_diag = chol.inverse_diag();
        let loo = loo_sse(&weights, &inv_diag);
        if !loo.is_finite() {
            continue;
        }
        match &best {
            Some((b, _, _)) if *b <= loo => {}
            _ => best = Some((loo, lambda, weights)),
        }
    }
    let (_, lambda, weights) = best.ok_or_else(|| {
        Error::Degenerate("Gram system unsolvable at every penalty in the grid".into())
    })?;
    Ok(RegressionModel {
        scaler: ws.scaler,
        train: ws.scaled,
        weights,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix_1d(values: &[f64]) -> Matrix {
        Matrix::column(values)
    }

    /// Direct translation of the per-dimension formula, kept separate from
    /// the production code path as an oracle.
    fn spline_kernel_naive(u: &[f64], v: &[f64]) -> f64 {
        let mut prod = 1.0;
        for j in 0..u.len() {
            let (a, b) = (u[j], v[j]);
            let m = if a < b { a } else { b };
            prod *= 1.0 + a * b + a * b * m - ((a + b) / 2.0) * m.powi(2) + m.powi(3) / 3.0;
        }
        prod
    }

    #[test]
    fn spline_kernel_fixed_points() {
        assert!((spline_kernel(&[0.0], &[0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spline_kernel(&[1.0], &[1.0]).unwrap() - 7.0 / 3.0).abs() < 1e-15);
        // Two-dimensional diagonal point: per-dimension closed form squared.
        let per_dim = 1.0 + 0.25 + 0.125 - 0.125 + 1.0 / 24.0;
        let expected = per_dim * per_dim; // = 1.668403... by direct evaluation
        let got = spline_kernel(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - spline_kernel_naive(&[0.5, 0.5], &[0.5, 0.5])).abs() < 1e-15);
        assert!((expected - 1.6684027777777777).abs() < 1e-12);
    }

    #[test]
    fn spline_kernel_matches_naive_and_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = rng.random_range(1..4);
            let u: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
            let v: Vec<f64> = (0..p).map(|_| rng.random::<f64>()).collect();
            let kuv = spline_kernel(&u, &v).unwrap();
            let kvu = spline_kernel(&v, &u).unwrap();
            assert_eq!(kuv, kvu);
            assert!((kuv - spline_kernel_naive(&u, &v)).abs() < 1e-14);
        }
    }

    #[test]
    fn spline_kernel_rejects_bad_input() {
        assert!(spline_kernel(&[0.2], &[0.2, 0.3]).is_err());
        assert!(spline_kernel(&[1.2], &[0.3]).is_err());
        assert!(spline_kernel(&[-0.1], &[0.3]).is_err());
    }

    #[test]
    fn gram_is_psd_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..15)
            .map(|_| (0..2).map(|_| rng.random::<f64>()).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let gram = gram_matrix(&x);
        let (vals, _) = crate::linalg::symmetric_eigen(&gram, 15);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8, "smallest Gram eigenvalue {min}");
    }

    #[test]
    fn zero_targets_give_zero_model() {
        let x = matrix_1d(&[0.0, 1.0]);
        let model = fit_ridge(&x, &[0.0, 0.0], &DEFAULT_LAMBDA_GRID).unwrap();
        let preds = model.predict(&matrix_1d(&[0.3, -2.0, 5.0])).unwrap();
        for p in preds {
            assert!(p.abs() < 1e-12);
        }
    }

    #[test]
    fn linear_data_recovered() {
        // Oracle: a direct least-squares line fit on the same data.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0 * 2.0 - 1.0).collect();
        let noise: Vec<f64> = (0..20).map(|_| 0.01 * box_muller(&mut rng)).collect();
        let y: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| 3.0 * x + e).collect();
        let design =
            Matrix::from_rows(&xs.iter().map(|&x| vec![x, 1.0]).collect::<Vec<_>>()).unwrap();
        let line = crate::linalg::lstsq(&design, &y).unwrap().coefficients;
        let x = matrix_1d(&xs);
        let model = fit_ridge(&x, &y, &DEFAULT_LAMBDA_GRID).unwrap();
        let preds = model.predict(&x).unwrap();
        for (p, x) in preds.iter().zip(&xs) {
            assert!((p - 3.0 * x).abs() < 0.05, "pred {p} at {x}");
            assert!(
                (p - (line[0] * x + line[1])).abs() < 0.05,
                "pred {p} vs least-squares line at {x}"
            );
        }
    }

    fn box_muller(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn conflicting_duplicates_steer_to_larger_lambda() {
        // Same input, contradictory targets: interpolation is impossible and
        // tiny penalties produce wild LOO errors.
        let xs = vec![0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0];
        let y = vec![1.0, -1.0, 0.8, -0.8, 1.2, -1.2, 0.5, -0.5, 0.9, -0.9];
        let model = fit_ridge(&matrix_1d(&xs), &y, &DEFAULT_LAMBDA_GRID).unwrap();
        assert!(model.lambda() > 1e-8, "selected lambda {}", model.lambda());
    }

    #[test]
    fn interpolation_limit_on_noiseless_data() {
        // y = x^2 on 10 distinct points with the smallest penalty forced.
        let xs: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let y: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let model = fit_ridge(&matrix_1d(&xs), &y, &[1e-8]).unwrap();
        let preds = model.predict(&matrix_1d(&xs)).unwrap();
        let max_resid = preds
            .iter()
            .zip(&y)
            .map(|(p, t)| (p - t).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_resid < 1e-3, "max training residual {max_resid}");
    }

    #[test]
    fn dual_weights_solve_the_penalized_system() {
        // Model invariant: (K + lambda n I) w = y within 1e-8 relative.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 40;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let model = fit_ridge(&x, &y, &DEFAULT_LAMBDA_GRID).unwrap();
        let ws = RidgeWorkspace::build(&x).unwrap();
        let shift = model.lambda() * n as f64;
        let w = model.weights();
        let mut residual = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..n {
            let mut lhs = shift * w[i];
            for j in 0..n {
                lhs += ws.gram[i * n + j] * w[j];
            }
            residual += (lhs - y[i]) * (lhs - y[i]);
            scale += y[i] * y[i];
        }
        let rel = (residual / scale).sqrt();
        assert!(rel < 1e-8, "relative system residual {rel}");
    }

    #[test]
    fn empty_test_matrix_gives_empty_predictions() {
        let x = matrix_1d(&[0.0, 1.0]);
        let model = fit_ridge(&x, &[1.0, 2.0], &DEFAULT_LAMBDA_GRID).unwrap();
        let preds = model.predict(&Matrix::zeros(0, 1)).unwrap();
        assert!(preds.is_empty());
    }

    #[test]
    fn loo_identity_matches_explicit_refit() {
        // Explicit oracle: drop row i, solve the reduced system with the
        // same total penalty lambda * n, and predict at the held-out point.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 12;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let ws = RidgeWorkspace::build(&x).unwrap();
        for &lambda in &[1e-4, 1e-2] {
            let chol = ws.factor(lambda).unwrap();
            let w = chol.solve(&y);
            let inv_diag = chol.inverse_diag();
            let shift = lambda * n as f64;
            for i in 0..n {
                let closed_form = w[i] / inv_diag[i];
                // Reduced system.
                let m = n - 1;
                let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                let mut a = vec![0.0; m * m];
                for (r, &jr) in keep.iter().enumerate() {
                    for (c, &jc) in keep.iter().enumerate() {
                        a[r * m + c] = ws.gram[jr * n + jc];
                    }
                    a[r * m + r] += shift;
                }
                let sub = Cholesky::factor(&a, m).unwrap();
                let yr: Vec<f64> = keep.iter().map(|&j| y[j]).collect();
                let wr = sub.solve(&yr);
                let mut pred = 0.0;
                for (r, &jr) in keep.iter().enumerate() {
                    pred += wr[r] * ws.gram[i * n + jr];
                }
                let explicit = y[i] - pred;
                let rel = (closed_form - explicit).abs() / explicit.abs().max(1e-12);
                assert!(rel < 1e-6, "row {i}: {closed_form} vs {explicit}");
            }
        }
    }

    #[test]
    fn constant_feature_maps_to_half() {
        let x = Matrix::from_rows(&[vec![2.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let scaler = FeatureScaler::fit(&x).unwrap();
        let mut out = [0.0, 0.0];
        scaler.scale_row(&[2.0, 2.0], &mut out).unwrap();
        assert_eq!(out[0], 0.5);
        assert_eq!(out[1], 0.5);
    }
}
