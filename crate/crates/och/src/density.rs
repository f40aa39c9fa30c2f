//! Nonparametric conditional density estimation on a fixed outcome grid.
//!
//! Continuous outcomes are handled by regressing Gaussian-smoothed target
//! curves on the covariates (one ridge fit per grid point, sharing a single
//! Gram matrix and penalty); discrete outcomes regress per-class indicator
//! targets the same way. Raw evaluations are clipped at zero and
//! renormalized so every returned density is valid.

use crate::error::{Error, Result};
use crate::kernel::{spline_kernel_unchecked, RidgeWorkspace, DEFAULT_LAMBDA_GRID};
use crate::linalg::Matrix;
use crate::special::normal_pdf;

/// Whether grid values are masses at discrete outcomes or samples of a
/// continuous density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OutcomeKind {
    Continuous,
    Discrete,
}

/// Strictly increasing, uniformly spaced outcome grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeGrid {
    points: Vec<f64>,
    step: f64,
}

impl OutcomeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 points".into()));
        }
        let step = points[1] - points[0];
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        for w in points.windows(2) {
            let d = w[1] - w[0];
            if (d - step).abs() > 1e-12 * step.abs().max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "non-uniform grid spacing: {d} vs {step}"
                )));
            }
        }
        Ok(Self { points, step })
    }

    pub fn linspace(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if len < 2 || !(hi > lo) {
            return Err(Error::InvalidInput(format!(
                "bad grid request [{lo}, {hi}] with {len} points"
            )));
        }
        let step = (hi - lo) / (len - 1) as f64;
        let points = (0..len).map(|i| lo + step * i as f64).collect();
        Ok(Self { points, step })
    }

    /// Default grid policy for observed outcomes: the sample range padded by
    /// three Silverman bandwidths on each side.
    pub fn from_outcomes(y: &[f64], len: usize) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidInput("no outcomes for grid".into()));
        }
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let h = silverman_bandwidth(y).max(1e-3 * (hi - lo).max(1.0));
        Self::linspace(lo - 3.0 * h, hi + 3.0 * h, len)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Trapezoid integral of samples over the grid.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        let interior: f64 = f[1..f.len() - 1].iter().sum();
        self.step * (0.5 * (f[0] + f[f.len() - 1]) + interior)
    }

    /// Linear interpolation of grid samples at `y`; zero outside the grid.
    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let lo = self.points[0];
        let hi = self.points[self.len() - 1];
        if y < lo || y > hi {
            return 0.0;
        }
        let pos = (y - lo) / self.step;
        let idx = (pos.floor() as usize).min(self.len() - 2);
        let frac = pos - idx as f64;
        values[idx] * (1.0 - frac) + values[idx + 1] * frac
    }

    /// Index of the grid point equal to `y`, if any.
    fn exact_index(&self, y: f64) -> Option<usize> {
        let pos = (y - self.points[0]) / self.step;
        let idx = pos.round();
        if idx < 0.0 || idx >= self.len() as f64 {
            return None;
        }
        let i = idx as usize;
        let tol = 1e-9 * self.points[i].abs().max(1.0);
        ((self.points[i] - y).abs() <= tol).then_some(i)
    }
}

/// Inner product of two grid-sampled functions: trapezoid quadrature for
/// continuous outcomes, a plain sum of mass products for discrete ones.
pub fn inner_product(a: &[f64], b: &[f64], grid: &OutcomeGrid, kind: OutcomeKind) -> Result<f64> {
    if a.len() != b.len() || a.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "inner product lengths: a={}, b={}, grid={}",
            a.len(),
            b.len(),
            grid.len()
        )));
    }
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    Ok(match kind {
        OutcomeKind::Continuous => grid.trapezoid(&prod),
        OutcomeKind::Discrete => prod.iter().sum(),
    })
}

/// Silverman's rule of thumb, `1.06 sigma n^{-1/5}`.
pub fn silverman_bandwidth(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    1.06 * var.sqrt() * n.powf(-0.2)
}

/// A fitted conditional density estimator over a fixed outcome grid.
#[derive(Debug, Clone)]
pub struct ConditionalDensityModel {
    scaler: crate::kernel::FeatureScaler,
    train: Matrix,
    grid: OutcomeGrid,
    kind: OutcomeKind,
    /// One dual-weight vector per grid point (G x n).
    weights: Vec<Vec<f64>>,
    lambda: f64,
}

impl ConditionalDensityModel {
    pub fn grid(&self) -> &OutcomeGrid {
        &self.grid
    }

    pub fn kind(&self) -> OutcomeKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Post-processed density (or mass) values on the grid at covariate `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scaled = vec![0.0; self.scaler.dim()];
        self.scaler.scale_row(x, &mut scaled)?;
        let kvec: Vec<f64> = self
            .train
            .iter_rows()
            .map(|row| spline_kernel_unchecked(&scaled, row))
            .collect();
        let mut raw: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w.iter().zip(&kvec).map(|(wi, ki)| wi * ki).sum::<f64>())
            .collect();
        for v in &mut raw {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let mass = match self.kind {
            OutcomeKind::Continuous => self.grid.trapezoid(&raw),
            OutcomeKind::Discrete => raw.iter().sum(),
        };
        if mass > 1e-300 {
            for v in &mut raw {
                *v /= mass;
            }
        } else {
            // Nothing survived clipping; fall back to the uniform density.
            let g = self.grid.len() as f64;
            let fill = match self.kind {
                OutcomeKind::Continuous => 1.0 / (self.grid.step() * (g - 1.0)),
                OutcomeKind::Discrete => 1.0 / g,
            };
            raw.fill(fill);
        }
        Ok(raw)
    }

    /// Evaluate at every row of `x`.
    pub fn eval_many(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        if x.rows() > 0 && x.cols() != self.scaler.dim() {
            return Err(Error::DimensionMismatch(format!(
                "density model expects {} features, got {}",
                self.scaler.dim(),
                x.cols()
            )));
        }
        (0..x.rows()).map(|i| self.eval(x.row(i))).collect()
    }
}

/// Fit a conditional density model.
///
/// Continuous mode: for each grid point `y_g` the regression target at row
/// `i` is the Gaussian smoothing kernel `N(y_g; y_i, h^2)` with Silverman
/// bandwidth `h`. Discrete mode: the target is the indicator `1{y_i = y_g}`
/// and every outcome must sit on the grid. One penalty is selected for all
/// targets by pooled leave-one-out error.
pub fn fit_conditional_density(
    x: &Matrix,
    y: &[f64],
    grid: &OutcomeGrid,
    kind: OutcomeKind,
) -> Result<ConditionalDensityModel> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "density fit needs at least 2 rows, got {n}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "covariates have {n} rows but outcomes have {}",
            y.len()
        )));
    }

    // Build the G x n target table.
    let g = grid.len();
    let mut targets = vec![vec![0.0; n]; g];
    match kind {
        OutcomeKind::Continuous => {
            let mut h = silverman_bandwidth(y);
            if !(h > 0.0) || !h.is_finite() {
                h = grid.step();
            }
            let h2 = h * h;
            for (gi, &yg) in grid.points().iter().enumerate() {
                for (i, &yi) in y.iter().enumerate() {
                    targets[gi][i] = normal_pdf(yg, yi, h2);
                }
            }
        }
        OutcomeKind::Discrete => {
            for (i, &yi) in y.iter().enumerate() {
                let Some(idx) = grid.exact_index(yi) else {
                    return Err(Error::InvalidInput(format!(
                        "discrete outcome {yi} at row {i} is not a grid point"
                    )));
                };
                targets[idx][i] = 1.0;
            }
        }
    }

    let ws = RidgeWorkspace::build(x)?;
    let mut best: Option<(f64, f64, Vec<Vec<f64>>)> = None;
    for &lambda in DEFAULT_LAMBDA_GRID.iter() {
        let Some(chol) = ws.factor(lambda) else {
            continue;
        };
        let inv_diag = chol.inverse_diag();
        let mut pooled = 0.0;
        let mut weights = Vec::with_capacity(g);
        for target in &targets {
            let w = chol.solve(target);
            pooled += crate::kernel::loo_sse(&w, &inv_diag);
            weights.push(w);
        }
        if !pooled.is_finite() {
            continue;
        }
        match &best {
            Some((b, _, _)) if *b <= pooled => {}
            _ => best = Some((pooled, lambda, weights)),
        }
    }
    let (_, lambda, weights) = best.ok_or_else(|| {
        Error::Degenerate("Gram system unsolvable at every penalty in the grid".into())
    })?;
    Ok(ConditionalDensityModel {
        scaler: ws.scaler,
        train: ws.scaled,
        grid: grid.clone(),
        kind,
        weights,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_pdf;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal_draw(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn grid_validation() {
        assert!(OutcomeGrid::new(vec![0.0]).is_err());
        assert!(OutcomeGrid::new(vec![0.0, 0.5, 0.9]).is_err());
        assert!(OutcomeGrid::new(vec![1.0, 0.0]).is_err());
        let g = OutcomeGrid::linspace(-1.0, 1.0, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert!((g.step() - 0.01).abs() < 1e-14);
    }

    #[test]
    fn uniform_density_self_product_is_one() {
        let grid = OutcomeGrid::linspace(0.0, 1.0, 101).unwrap();
        let a = vec![1.0; 101];
        let ip = inner_product(&a, &a, &grid, OutcomeKind::Continuous).unwrap();
        assert!((ip - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_product_integrals_match_closed_form() {
        // For N(m1, s2) and N(m2, s2):
        // integral = N(m1 - m2; 0, 2 s2) = exp(-(m1-m2)^2/(4 s2)) / sqrt(4 pi s2)
        let grid = OutcomeGrid::linspace(-4.0, 4.0, 801).unwrap();
        let s2 = 0.1;
        let a: Vec<f64> = grid.points().iter().map(|&y| normal_pdf(y, 0.0, s2)).collect();
        let b: Vec<f64> = grid.points().iter().map(|&y| normal_pdf(y, 1.0, s2)).collect();
        let same = inner_product(&a, &a, &grid, OutcomeKind::Continuous).unwrap();
        let cross = inner_product(&a, &b, &grid, OutcomeKind::Continuous).unwrap();
        let same_expected = 1.0 / (2.0 * s2.sqrt() * std::f64::consts::PI.sqrt());
        let cross_expected = (-2.5_f64).exp() / (4.0 * std::f64::consts::PI * s2).sqrt();
        assert!((same - same_expected).abs() < 1e-3, "{same} vs {same_expected}");
        assert!((cross - cross_expected).abs() < 1e-3, "{cross} vs {cross_expected}");
        // Frozen oracle values.
        assert!((same_expected - 0.8920620580763855).abs() < 1e-12);
        assert!((cross_expected - 0.07322491280963243).abs() < 1e-12);
    }

    #[test]
    fn quadrature_error_halves_as_grid_doubles() {
        let s2 = 0.1_f64;
        let expected = 1.0 / (2.0 * s2.sqrt() * std::f64::consts::PI.sqrt());
        let mut last = f64::INFINITY;
        for g in [101usize, 201, 401, 801] {
            let grid = OutcomeGrid::linspace(-4.0, 4.0, g).unwrap();
            let a: Vec<f64> = grid.points().iter().map(|&y| normal_pdf(y, 0.0, s2)).collect();
            let ip = inner_product(&a, &a, &grid, OutcomeKind::Continuous).unwrap();
            let err = (ip - expected).abs();
            assert!(err <= last / 2.0 + 1e-15, "error {err} vs previous {last}");
            last = err;
        }
    }

    #[test]
    fn point_mass_discrete_fit() {
        let x = Matrix::column(&[0.0, 0.5, 1.0, 0.25]);
        let y = vec![0.0; 4];
        let grid = OutcomeGrid::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let model = fit_conditional_density(&x, &y, &grid, OutcomeKind::Discrete).unwrap();
        for &xv in &[0.0, 0.3, 0.9] {
            let d = model.eval(&[xv]).unwrap();
            assert!((d[1] - 1.0).abs() < 1e-9, "mass at zero: {d:?}");
            assert!(d[0].abs() < 1e-9 && d[2].abs() < 1e-9);
        }
    }

    #[test]
    fn discrete_outcome_off_grid_errors() {
        let x = Matrix::column(&[0.0, 1.0]);
        let grid = OutcomeGrid::new(vec![0.0, 1.0]).unwrap();
        let err = fit_conditional_density(&x, &[0.0, 0.4], &grid, OutcomeKind::Discrete);
        assert!(err.is_err());
    }

    #[test]
    fn unconditional_gaussian_recovered() {
        // y independent of x: evaluated density should match the marginal.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 500;
        let s2 = 0.1_f64;
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let y: Vec<f64> = (0..n).map(|_| s2.sqrt() * normal_draw(&mut rng)).collect();
        let grid = OutcomeGrid::linspace(-2.0, 2.0, 201).unwrap();
        let model =
            fit_conditional_density(&Matrix::column(&xs), &y, &grid, OutcomeKind::Continuous)
                .unwrap();
        for &xv in &[-0.5, 0.0, 0.5] {
            let d = model.eval(&[xv]).unwrap();
            let diff: Vec<f64> = grid
                .points()
                .iter()
                .zip(&d)
                .map(|(&yv, &dv)| dv - normal_pdf(yv, 0.0, s2))
                .collect();
            let ise = grid.trapezoid(&diff.iter().map(|v| v * v).collect::<Vec<_>>());
            assert!(ise < 0.05, "integrated squared error {ise} at x={xv}");
        }
    }

    #[test]
    fn density_mode_tracks_conditional_mean() {
        // y ~ N(x, 0.1) with x in two clusters.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 400;
        let s2 = 0.1_f64;
        let xs: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 0.0 } else { 1.0 })
            .collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|&x| x + s2.sqrt() * normal_draw(&mut rng))
            .collect();
        let grid = OutcomeGrid::linspace(-2.0, 3.0, 251).unwrap();
        let model =
            fit_conditional_density(&Matrix::column(&xs), &y, &grid, OutcomeKind::Continuous)
                .unwrap();
        let argmax = |d: &[f64]| {
            let mut best = 0;
            for i in 0..d.len() {
                if d[i] > d[best] {
                    best = i;
                }
            }
            grid.points()[best]
        };
        let d0 = model.eval(&[0.0]).unwrap();
        let d1 = model.eval(&[1.0]).unwrap();
        assert!((argmax(&d0) - 0.0).abs() <= grid.step() + 0.05);
        assert!((argmax(&d1) - 1.0).abs() <= grid.step() + 0.05);
        assert!((argmax(&d1) - argmax(&d0) - 1.0).abs() < 0.15);
    }

    #[test]
    fn eval_is_normalized_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 60;
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..n).map(|_| normal_draw(&mut rng)).collect();
        let grid = OutcomeGrid::linspace(-4.0, 4.0, 101).unwrap();
        let model =
            fit_conditional_density(&Matrix::column(&xs), &y, &grid, OutcomeKind::Continuous)
                .unwrap();
        for &xv in &[0.1, 0.4, 2.0, -1.0] {
            let d = model.eval(&[xv]).unwrap();
            assert!(d.iter().all(|&v| v >= 0.0));
            assert!((grid.trapezoid(&d) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn discrete_fit_agrees_with_narrow_continuous_fit() {
        // Three integer classes whose argmax should agree across modes.
        let xs: Vec<f64> = (0..90).map(|i| (i % 3) as f64).collect();
        let y: Vec<f64> = xs.clone();
        let grid = OutcomeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let discrete =
            fit_conditional_density(&Matrix::column(&xs), &y, &grid, OutcomeKind::Discrete)
                .unwrap();
        let continuous =
            fit_conditional_density(&Matrix::column(&xs), &y, &grid, OutcomeKind::Continuous)
                .unwrap();
        for &xv in &[0.0, 1.0, 2.0] {
            let argmax = |d: &[f64]| (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
            let dd = discrete.eval(&[xv]).unwrap();
            let dc = continuous.eval(&[xv]).unwrap();
            assert_eq!(argmax(&dd), argmax(&dc), "at x={xv}");
            assert_eq!(argmax(&dd), xv as usize);
        }
    }

    #[test]
    fn interpolation_on_and_off_grid() {
        let grid = OutcomeGrid::linspace(0.0, 1.0, 11).unwrap();
        let vals: Vec<f64> = grid.points().iter().map(|&p| 2.0 * p).collect();
        assert!((grid.interpolate(&vals, 0.55) - 1.1).abs() < 1e-12);
        assert!((grid.interpolate(&vals, 1.0) - 2.0).abs() < 1e-12);
        assert_eq!(grid.interpolate(&vals, 1.5), 0.0);
        assert_eq!(grid.interpolate(&vals, -0.1), 0.0);
    }
}
