//! The conditional-average-treatment-effect estimator roster.
//!
//! Hull estimators learn three conditional expectations from the
//! observational data and the mixing weights from the trial; the baselines
//! cover trial-only and observational-only regression, the two linear
//! trial-adjustment methods, the synthesized four-term contrast, and the
//! conditional difference-in-differences contrast.

use std::collections::HashMap;
use std::sync::Arc;

use crate::data::{ObservationalDataset, TrialDataset};
use crate::error::{Error, Result};
use crate::kernel::{fit_ridge, RegressionModel};
use crate::linalg::{lstsq, Matrix};
use crate::qp::{solve_box_ls_2d, MixCoefficients};

/// Estimator identifiers, matching the ids accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CateEstimator {
    /// Hull weights over both time steps, constrained to the box.
    Och2,
    /// Hull weights with the pre-treatment baseline pinned at zero.
    Och1,
    /// Unconstrained ablation of `Och2`.
    Unc2,
    /// Unconstrained ablation of `Och1`.
    Unc1,
    /// Per-arm trial regressions differenced.
    RctOnly,
    /// Post-treatment observational contrast.
    ObsOnly,
    /// Observational contrast adjusted by an outer linear transform.
    Olt,
    /// Observational contrast plus a linear-in-covariates correction.
    TwoStep,
    /// Synthesized difference-in-differences with free coefficients.
    Sdd,
    /// Conditional difference-in-differences contrast.
    Cdd,
    /// Test double that always panics; used to exercise failure isolation.
    #[doc(hidden)]
    FailForTesting,
}

impl CateEstimator {
    pub const ALL: [CateEstimator; 10] = [
        CateEstimator::Och2,
        CateEstimator::Och1,
        CateEstimator::Unc2,
        CateEstimator::Unc1,
        CateEstimator::RctOnly,
        CateEstimator::ObsOnly,
        CateEstimator::Olt,
        CateEstimator::TwoStep,
        CateEstimator::Sdd,
        CateEstimator::Cdd,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CateEstimator::Och2 => "och2",
            CateEstimator::Och1 => "och1",
            CateEstimator::Unc2 => "unc2",
            CateEstimator::Unc1 => "unc1",
            CateEstimator::RctOnly => "rct-only",
            CateEstimator::ObsOnly => "obs-only",
            CateEstimator::Olt => "olt",
            CateEstimator::TwoStep => "2step",
            CateEstimator::Sdd => "sdd",
            CateEstimator::Cdd => "cdd",
            CateEstimator::FailForTesting => "fail-for-testing",
        }
    }

    /// Hull estimators and their unconstrained ablations.
    pub fn is_hull_variant(self) -> bool {
        matches!(
            self,
            CateEstimator::Och2 | CateEstimator::Och1 | CateEstimator::Unc2 | CateEstimator::Unc1
        )
    }

    pub fn is_constrained_hull(self) -> bool {
        matches!(self, CateEstimator::Och2 | CateEstimator::Och1)
    }
}

impl std::fmt::Display for CateEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for CateEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CateEstimator::ALL
            .into_iter()
            .chain([CateEstimator::FailForTesting])
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown CATE estimator '{s}'")))
    }
}

impl serde::Serialize for CateEstimator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> serde::Deserialize<'de> for CateEstimator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Whether the hull uses the fitted pre-treatment baseline or pins it at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeVariant {
    TwoStep,
    OneStep,
}

/// Hull-parameterized treatment-effect surrogate:
/// `[e11 mu1 + e0 (1 - mu1)] - [e10 mu0 + e0 (1 - mu0)]`.
pub fn psi(mix: &MixCoefficients, e11: f64, e10: f64, e0: f64) -> f64 {
    mix.mu1 * (e11 - e0) - mix.mu0 * (e10 - e0)
}

/// Pooled pre-treatment regression: fits `y` on `X` over every `m = 0` row
/// regardless of arm, so arms are weighted by their conditional prevalence.
pub fn estimate_e0(obs: &ObservationalDataset, lambda_grid: &[f64]) -> Result<RegressionModel> {
    let (x, y) = obs.pre_treatment();
    if x.rows() < 2 {
        return Err(Error::MissingCell(
            "observational data has fewer than 2 pre-treatment (m=0) rows".into(),
        ));
    }
    fit_ridge(&x, &y, lambda_grid)
}

/// A fitted CATE model: the component regressions its kind needs plus the
/// learned mixing weights or linear coefficients.
#[derive(Debug, Clone)]
pub struct CateModel {
    kind: CateEstimator,
    e11: Option<Arc<RegressionModel>>,
    e10: Option<Arc<RegressionModel>>,
    e0: Option<Arc<RegressionModel>>,
    e01: Option<Arc<RegressionModel>>,
    e00: Option<Arc<RegressionModel>>,
    trial1: Option<Arc<RegressionModel>>,
    trial0: Option<Arc<RegressionModel>>,
    mix: Option<MixCoefficients>,
    coefficients: Vec<f64>,
    /// The mix solve hit a zero design (hull estimators only).
    pub degenerate_mix: bool,
    /// A linear sub-fit fell back to the minimum-norm solution.
    pub singular_ols: bool,
}

/// Memoizes component-regression evaluations per test matrix, keyed by model
/// identity. Build one cache per matrix of covariates.
#[derive(Default)]
pub struct PredictionCache {
    evals: HashMap<usize, Arc<Vec<f64>>>,
}

impl PredictionCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn eval(&mut self, model: &Arc<RegressionModel>, x: &Matrix) -> Result<Arc<Vec<f64>>> {
        let key = Arc::as_ptr(model) as usize;
        if let Some(hit) = self.evals.get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(model.predict(x)?);
        self.evals.insert(key, fresh.clone());
        Ok(fresh)
    }
}

impl CateModel {
    pub fn kind(&self) -> CateEstimator {
        self.kind
    }

    /// Fitted hull weights, for hull-variant models.
    pub fn mix(&self) -> Option<MixCoefficients> {
        self.mix
    }

    /// Linear coefficients of the OLT / 2Step / SDD sub-fits.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.predict_cached(x, &mut PredictionCache::new())
    }

    /// Predict with a shared evaluation cache; the cache must only ever see
    /// this one test matrix.
    pub fn predict_cached(&self, x: &Matrix, cache: &mut PredictionCache) -> Result<Vec<f64>> {
        let m = x.rows();
        let eval = |cache: &mut PredictionCache, slot: &Option<Arc<RegressionModel>>| {
            cache.eval(slot.as_ref().expect("component fitted for kind"), x)
        };
        match self.kind {
            CateEstimator::Och2
            | CateEstimator::Och1
            | CateEstimator::Unc2
            | CateEstimator::Unc1 => {
                let e11 = eval(cache, &self.e11)?;
                let e10 = eval(cache, &self.e10)?;
                let mix = self.mix.expect("hull model carries mix");
                let out = match &self.e0 {
                    Some(model) => {
                        let e0 = cache.eval(model, x)?;
                        (0..m).map(|i| psi(&mix, e11[i], e10[i], e0[i])).collect()
                    }
                    None => (0..m).map(|i| psi(&mix, e11[i], e10[i], 0.0)).collect(),
                };
                Ok(out)
            }
            CateEstimator::RctOnly => {
                let t1 = eval(cache, &self.trial1)?;
                let t0 = eval(cache, &self.trial0)?;
                Ok((0..m).map(|i| t1[i] - t0[i]).collect())
            }
            CateEstimator::ObsOnly => {
                let e11 = eval(cache, &self.e11)?;
                let e10 = eval(cache, &self.e10)?;
                Ok((0..m).map(|i| e11[i] - e10[i]).collect())
            }
            CateEstimator::Olt => {
                let e11 = eval(cache, &self.e11)?;
                let e10 = eval(cache, &self.e10)?;
                let (alpha, beta) = (self.coefficients[0], self.coefficients[1]);
                Ok((0..m).map(|i| alpha * (e11[i] - e10[i]) + beta).collect())
            }
            CateEstimator::TwoStep => {
                let e11 = eval(cache, &self.e11)?;
                let e10 = eval(cache, &self.e10)?;
                let p = x.cols();
                let (delta, beta) = self.coefficients.split_at(p);
                let beta = beta[0];
                Ok((0..m)
                    .map(|i| {
                        let lin: f64 =
                            x.row(i).iter().zip(delta).map(|(xi, di)| xi * di).sum();
                        e11[i] - e10[i] + lin + beta
                    })
                    .collect())
            }
            CateEstimator::Sdd => {
                let e11 = eval(cache, &self.e11)?;
                let e10 = eval(cache, &self.e10)?;
                let e01 = eval(cache, &self.e01)?;
                let e00 = eval(cache, &self.e00)?;
                let (a1, a2, a3) = (
                    self.coefficients[0],
                    self.coefficients[1],
                    self.coefficients[2],
                );
                Ok((0..m)
                    .map(|i| e11[i] - a1 * e01[i] - a2 * e10[i] + a3 * e00[i])
                    .collect())
            }
            CateEstimator::Cdd => {
                let e11 = eval(cache, &self.e11)?;
                let e10 = eval(cache, &self.e10)?;
                let e01 = eval(cache, &self.e01)?;
                let e00 = eval(cache, &self.e00)?;
                Ok((0..m)
                    .map(|i| (e11[i] - e01[i]) - (e10[i] - e00[i]))
                    .collect())
            }
            CateEstimator::FailForTesting => panic!("injected prediction failure"),
        }
    }
}

/// Per-(obs, rct) fitting workspace: every component regression and its
/// evaluation at the trial covariates is computed once and shared across the
/// estimators that need it.
pub struct CateWorkspace<'a> {
    obs: &'a ObservationalDataset,
    rct: &'a TrialDataset,
    lambda_grid: &'a [f64],
    sdd_ridge: bool,
    e11: Option<Arc<RegressionModel>>,
    e10: Option<Arc<RegressionModel>>,
    e0: Option<Arc<RegressionModel>>,
    e01: Option<Arc<RegressionModel>>,
    e00: Option<Arc<RegressionModel>>,
    trial: Option<(Arc<RegressionModel>, Arc<RegressionModel>)>,
    g_hat: Option<Arc<Vec<f64>>>,
    at_rct: HashMap<usize, Arc<Vec<f64>>>,
}

impl<'a> CateWorkspace<'a> {
    pub fn new(
        obs: &'a ObservationalDataset,
        rct: &'a TrialDataset,
        lambda_grid: &'a [f64],
    ) -> Self {
        Self {
            obs,
            rct,
            lambda_grid,
            sdd_ridge: false,
            e11: None,
            e10: None,
            e0: None,
            e01: None,
            e00: None,
            trial: None,
            g_hat: None,
            at_rct: HashMap::new(),
        }
    }

    /// Regularize the four-term-contrast coefficients with a ridge penalty
    /// picked from the same grid (off by default).
    pub fn with_sdd_ridge(mut self, enabled: bool) -> Self {
        self.sdd_ridge = enabled;
        self
    }

    fn cell_fit(&self, m: u8, t: u8) -> Result<Arc<RegressionModel>> {
        self.obs.require_cell(m, t)?;
        let (x, y) = self.obs.cell(m, t);
        Ok(Arc::new(fit_ridge(&x, &y, self.lambda_grid)?))
    }

    fn e11(&mut self) -> Result<Arc<RegressionModel>> {
        if self.e11.is_none() {
            self.e11 = Some(self.cell_fit(1, 1)?);
        }
        Ok(self.e11.clone().unwrap())
    }

    fn e10(&mut self) -> Result<Arc<RegressionModel>> {
        if self.e10.is_none() {
            self.e10 = Some(self.cell_fit(1, 0)?);
        }
        Ok(self.e10.clone().unwrap())
    }

    fn e01(&mut self) -> Result<Arc<RegressionModel>> {
        if self.e01.is_none() {
            self.e01 = Some(self.cell_fit(0, 1)?);
        }
        Ok(self.e01.clone().unwrap())
    }

    fn e00(&mut self) -> Result<Arc<RegressionModel>> {
        if self.e00.is_none() {
            self.e00 = Some(self.cell_fit(0, 0)?);
        }
        Ok(self.e00.clone().unwrap())
    }

    fn e0(&mut self) -> Result<Arc<RegressionModel>> {
        if self.e0.is_none() {
            self.e0 = Some(Arc::new(estimate_e0(self.obs, self.lambda_grid)?));
        }
        Ok(self.e0.clone().unwrap())
    }

    fn trial_fits(&mut self) -> Result<(Arc<RegressionModel>, Arc<RegressionModel>)> {
        if self.trial.is_none() {
            self.rct.require_arm(0)?;
            self.rct.require_arm(1)?;
            let (x1, y1) = self.rct.arm(1);
            let (x0, y0) = self.rct.arm(0);
            let t1 = Arc::new(fit_ridge(&x1, &y1, self.lambda_grid)?);
            let t0 = Arc::new(fit_ridge(&x0, &y0, self.lambda_grid)?);
            self.trial = Some((t1, t0));
        }
        Ok(self.trial.clone().unwrap())
    }

    /// Trial-fitted treatment effect evaluated at every trial covariate row.
    fn g_hat(&mut self) -> Result<Arc<Vec<f64>>> {
        if self.g_hat.is_none() {
            let (t1, t0) = self.trial_fits()?;
            let p1 = self.at_rct(&t1)?;
            let p0 = self.at_rct(&t0)?;
            let g = p1.iter().zip(p0.iter()).map(|(a, b)| a - b).collect();
            self.g_hat = Some(Arc::new(g));
        }
        Ok(self.g_hat.clone().unwrap())
    }

    fn at_rct(&mut self, model: &Arc<RegressionModel>) -> Result<Arc<Vec<f64>>> {
        let key = Arc::as_ptr(model) as usize;
        if let Some(hit) = self.at_rct.get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(model.predict(self.rct.covariates())?);
        self.at_rct.insert(key, fresh.clone());
        Ok(fresh)
    }

    pub fn fit(&mut self, kind: CateEstimator) -> Result<CateModel> {
        fit_with(kind, self)
    }
}

fn empty_model(kind: CateEstimator) -> CateModel {
    CateModel {
        kind,
        e11: None,
        e10: None,
        e0: None,
        e01: None,
        e00: None,
        trial1: None,
        trial0: None,
        mix: None,
        coefficients: Vec::new(),
        degenerate_mix: false,
        singular_ols: false,
    }
}

fn fit_hull(ws: &mut CateWorkspace, variant: TimeVariant, constrained: bool) -> Result<CateModel> {
    let g = ws.g_hat()?;
    let e11 = ws.e11()?;
    let e10 = ws.e10()?;
    let e11_r = ws.at_rct(&e11)?;
    let e10_r = ws.at_rct(&e10)?;
    let (e0, a, b): (Option<Arc<RegressionModel>>, Vec<f64>, Vec<f64>) = match variant {
        TimeVariant::TwoStep => {
            let e0 = ws.e0()?;
            let e0_r = ws.at_rct(&e0)?;
            let a = e11_r.iter().zip(e0_r.iter()).map(|(x, z)| x - z).collect();
            let b = e10_r.iter().zip(e0_r.iter()).map(|(x, z)| x - z).collect();
            (Some(e0), a, b)
        }
        TimeVariant::OneStep => (None, e11_r.to_vec(), e10_r.to_vec()),
    };
    let sol = solve_box_ls_2d(&a, &b, &g, constrained)?;
    let kind = match (variant, constrained) {
        (TimeVariant::TwoStep, true) => CateEstimator::Och2,
        (TimeVariant::OneStep, true) => CateEstimator::Och1,
        (TimeVariant::TwoStep, false) => CateEstimator::Unc2,
        (TimeVariant::OneStep, false) => CateEstimator::Unc1,
    };
    Ok(CateModel {
        e11: Some(e11),
        e10: Some(e10),
        e0,
        mix: Some(sol.mix),
        degenerate_mix: sol.degenerate,
        ..empty_model(kind)
    })
}

/// Ordinary least squares of `g` on `(f, 1)`.
pub(crate) fn olt_coefficients(g: &[f64], f: &[f64]) -> Result<(Vec<f64>, bool)> {
    let design = Matrix::from_rows(
        &f.iter().map(|&fi| vec![fi, 1.0]).collect::<Vec<_>>(),
    )?;
    let sol = lstsq(&design, g)?;
    Ok((sol.coefficients, sol.singular))
}

/// Ordinary least squares of the residual `g - f` on `(x, 1)`.
pub(crate) fn two_step_coefficients(
    g: &[f64],
    f: &[f64],
    x: &Matrix,
) -> Result<(Vec<f64>, bool)> {
    let resid: Vec<f64> = g.iter().zip(f).map(|(gi, fi)| gi - fi).collect();
    let rows: Vec<Vec<f64>> = (0..x.rows())
        .map(|i| {
            let mut r = x.row(i).to_vec();
            r.push(1.0);
            r
        })
        .collect();
    let sol = lstsq(&Matrix::from_rows(&rows)?, &resid)?;
    Ok((sol.coefficients, sol.singular))
}

/// Ordinary least squares of `g - e11` on `(-e01, -e10, +e00)`.
pub(crate) fn sdd_coefficients(
    g: &[f64],
    e11: &[f64],
    e01: &[f64],
    e10: &[f64],
    e00: &[f64],
) -> Result<(Vec<f64>, bool)> {
    let target: Vec<f64> = g.iter().zip(e11).map(|(gi, ei)| gi - ei).collect();
    let rows: Vec<Vec<f64>> = (0..g.len())
        .map(|i| vec![-e01[i], -e10[i], e00[i]])
        .collect();
    let sol = lstsq(&Matrix::from_rows(&rows)?, &target)?;
    Ok((sol.coefficients, sol.singular))
}

/// Opt-in ridge variant of the four-term contrast fit: the coefficient
/// penalty is picked from `lambda_grid` by closed-form leave-one-out error,
/// with the same `lambda * n` scaling the kernel fits use.
pub(crate) fn sdd_ridge_coefficients(
    g: &[f64],
    e11: &[f64],
    e01: &[f64],
    e10: &[f64],
    e00: &[f64],
    lambda_grid: &[f64],
) -> Result<(Vec<f64>, bool)> {
    let n = g.len();
    let target: Vec<f64> = g.iter().zip(e11).map(|(gi, ei)| gi - ei).collect();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![-e01[i], -e10[i], e00[i]]).collect();
    let design = Matrix::from_rows(&rows)?;
    let k = design.cols();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for i in 0..n {
        let row = design.row(i);
        for a in 0..k {
            rhs[a] += row[a] * target[i];
            for b in 0..k {
                gram[a * k + b] += row[a] * row[b];
            }
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for &lambda in lambda_grid {
        let mut a = gram.clone();
        let shift = lambda * n as f64;
        for i in 0..k {
            a[i * k + i] += shift;
        }
        let Some(chol) = crate::linalg::Cholesky::factor(&a, k) else {
            continue;
        };
        let coefficients = chol.solve(&rhs);
        // LOO residual r_i / (1 - h_ii) with leverage from the k x k system.
        let mut loo = 0.0;
        for i in 0..n {
            let row = design.row(i);
            let solved = chol.solve(row);
            let leverage: f64 = row.iter().zip(&solved).map(|(x, s)| x * s).sum();
            let fit: f64 = row.iter().zip(&coefficients).map(|(x, c)| x * c).sum();
            let denom = (1.0 - leverage).max(1e-12);
            let r = (target[i] - fit) / denom;
            loo += r * r;
        }
        if !loo.is_finite() {
            continue;
        }
        match &best {
            Some((b, _)) if *b <= loo => {}
            _ => best = Some((loo, coefficients)),
        }
    }
    match best {
        Some((_, coefficients)) => Ok((coefficients, false)),
        None => sdd_coefficients(g, e11, e01, e10, e00),
    }
}

fn fit_with(kind: CateEstimator, ws: &mut CateWorkspace) -> Result<CateModel> {
    match kind {
        CateEstimator::Och2 => fit_hull(ws, TimeVariant::TwoStep, true),
        CateEstimator::Och1 => fit_hull(ws, TimeVariant::OneStep, true),
        CateEstimator::Unc2 => fit_hull(ws, TimeVariant::TwoStep, false),
        CateEstimator::Unc1 => fit_hull(ws, TimeVariant::OneStep, false),
        CateEstimator::RctOnly => {
            let (t1, t0) = ws.trial_fits()?;
            Ok(CateModel {
                trial1: Some(t1),
                trial0: Some(t0),
                ..empty_model(kind)
            })
        }
        CateEstimator::ObsOnly => {
            let e11 = ws.e11()?;
            let e10 = ws.e10()?;
            Ok(CateModel {
                e11: Some(e11),
                e10: Some(e10),
                ..empty_model(kind)
            })
        }
        CateEstimator::Olt => {
            let g = ws.g_hat()?;
            let e11 = ws.e11()?;
            let e10 = ws.e10()?;
            let e11_r = ws.at_rct(&e11)?;
            let e10_r = ws.at_rct(&e10)?;
            let f: Vec<f64> = e11_r.iter().zip(e10_r.iter()).map(|(a, b)| a - b).collect();
            let (coefficients, singular) = olt_coefficients(&g, &f)?;
            Ok(CateModel {
                e11: Some(e11),
                e10: Some(e10),
                coefficients,
                singular_ols: singular,
                ..empty_model(kind)
            })
        }
        CateEstimator::TwoStep => {
            let g = ws.g_hat()?;
            let e11 = ws.e11()?;
            let e10 = ws.e10()?;
            let e11_r = ws.at_rct(&e11)?;
            let e10_r = ws.at_rct(&e10)?;
            let f: Vec<f64> = e11_r.iter().zip(e10_r.iter()).map(|(a, b)| a - b).collect();
            let (coefficients, singular) = two_step_coefficients(&g, &f, ws.rct.covariates())?;
            Ok(CateModel {
                e11: Some(e11),
                e10: Some(e10),
                coefficients,
                singular_ols: singular,
                ..empty_model(kind)
            })
        }
        CateEstimator::Sdd => {
            let g = ws.g_hat()?;
            let e11 = ws.e11()?;
            let e10 = ws.e10()?;
            let e01 = ws.e01()?;
            let e00 = ws.e00()?;
            let e11_r = ws.at_rct(&e11)?;
            let e10_r = ws.at_rct(&e10)?;
            let e01_r = ws.at_rct(&e01)?;
            let e00_r = ws.at_rct(&e00)?;
            let (coefficients, singular) = if ws.sdd_ridge {
                sdd_ridge_coefficients(&g, &e11_r, &e01_r, &e10_r, &e00_r, ws.lambda_grid)?
            } else {
                sdd_coefficients(&g, &e11_r, &e01_r, &e10_r, &e00_r)?
            };
            Ok(CateModel {
                e11: Some(e11),
                e10: Some(e10),
                e01: Some(e01),
                e00: Some(e00),
                coefficients,
                singular_ols: singular,
                ..empty_model(kind)
            })
        }
        CateEstimator::Cdd => {
            let e11 = ws.e11()?;
            let e10 = ws.e10()?;
            let e01 = ws.e01()?;
            let e00 = ws.e00()?;
            Ok(CateModel {
                e11: Some(e11),
                e10: Some(e10),
                e01: Some(e01),
                e00: Some(e00),
                ..empty_model(kind)
            })
        }
        CateEstimator::FailForTesting => panic!("injected fit failure"),
    }
}

/// Fit the hull estimator for the chosen time variant and constraint flag.
pub fn fit_och_cate(
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    variant: TimeVariant,
    constrained: bool,
    lambda_grid: &[f64],
) -> Result<CateModel> {
    let mut ws = CateWorkspace::new(obs, rct, lambda_grid);
    fit_hull(&mut ws, variant, constrained)
}

/// Fit one of the non-hull baselines.
pub fn fit_baseline(
    kind: CateEstimator,
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    lambda_grid: &[f64],
) -> Result<CateModel> {
    if kind.is_hull_variant() {
        return Err(Error::Config(format!(
            "'{kind}' is a hull estimator, not a baseline"
        )));
    }
    let mut ws = CateWorkspace::new(obs, rct, lambda_grid);
    fit_with(kind, &mut ws)
}

/// Fit any CATE estimator by id.
pub fn fit_cate(
    kind: CateEstimator,
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    lambda_grid: &[f64],
) -> Result<CateModel> {
    let mut ws = CateWorkspace::new(obs, rct, lambda_grid);
    fit_with(kind, &mut ws)
}

/// Fit a whole roster against one dataset pair, sharing component fits.
pub fn fit_cate_roster(
    kinds: &[CateEstimator],
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    lambda_grid: &[f64],
) -> Vec<(CateEstimator, Result<CateModel>)> {
    let mut ws = CateWorkspace::new(obs, rct, lambda_grid);
    kinds
        .iter()
        .map(|&kind| (kind, fit_with(kind, &mut ws)))
        .collect()
}
