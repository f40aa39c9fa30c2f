//! Conditional-density treatment-effect estimators.
//!
//! The hull-of-densities estimator fits the pre-treatment outcome density
//! and the per-arm post-treatment densities from the observational data,
//! then learns one mixing weight per arm from the trial by solving a
//! one-dimensional quadratic program whose coefficients are quadrature
//! integrals of the fitted densities.

use std::collections::HashMap;
use std::sync::Arc;

use crate::data::{ObservationalDataset, TrialDataset};
use crate::density::{fit_conditional_density, inner_product, ConditionalDensityModel, OutcomeGrid, OutcomeKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qp::solve_qp_1d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CdteEstimator {
    /// Hull of densities with the weight constrained to `[0, 1]`.
    OchD,
    /// Unconstrained ablation of `OchD`.
    UncD,
    /// Per-arm densities fit on the trial rows only.
    RctOnly,
    /// Per-arm post-treatment densities fit on the observational rows only.
    ObsOnly,
    /// Test double that always panics; used to exercise failure isolation.
    #[doc(hidden)]
    FailForTesting,
}

impl CdteEstimator {
    pub const ALL: [CdteEstimator; 4] = [
        CdteEstimator::OchD,
        CdteEstimator::UncD,
        CdteEstimator::RctOnly,
        CdteEstimator::ObsOnly,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CdteEstimator::OchD => "ochd",
            CdteEstimator::UncD => "uncd",
            CdteEstimator::RctOnly => "rct-only",
            CdteEstimator::ObsOnly => "obs-only",
            CdteEstimator::FailForTesting => "fail-for-testing",
        }
    }
}

impl std::fmt::Display for CdteEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for CdteEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CdteEstimator::ALL
            .into_iter()
            .chain([CdteEstimator::FailForTesting])
            .find(|e| e.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown CDTE estimator '{s}'")))
    }
}

impl serde::Serialize for CdteEstimator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> serde::Deserialize<'de> for CdteEstimator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-test-point density rows for each arm: `out[t][point][grid]`.
pub type ArmDensities = [Vec<Vec<f64>>; 2];

/// A fitted conditional-density treatment-effect model.
#[derive(Debug, Clone)]
pub struct CdteModel {
    kind: CdteEstimator,
    post: [Arc<ConditionalDensityModel>; 2],
    baseline: Option<Arc<ConditionalDensityModel>>,
    mu: [f64; 2],
    grid: OutcomeGrid,
    outcome_kind: OutcomeKind,
    /// Per-arm flag: the quadratic program had vanishing curvature.
    pub degenerate: [bool; 2],
}

/// Memoizes density-model evaluations per test matrix, keyed by model
/// identity.
#[derive(Default)]
pub struct DensityPredictionCache {
    evals: HashMap<usize, Arc<Vec<Vec<f64>>>>,
}

impl DensityPredictionCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn eval(
        &mut self,
        model: &Arc<ConditionalDensityModel>,
        x: &Matrix,
    ) -> Result<Arc<Vec<Vec<f64>>>> {
        let key = Arc::as_ptr(model) as usize;
        if let Some(hit) = self.evals.get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(model.eval_many(x)?);
        self.evals.insert(key, fresh.clone());
        Ok(fresh)
    }
}

impl CdteModel {
    pub fn kind(&self) -> CdteEstimator {
        self.kind
    }

    pub fn mu(&self) -> [f64; 2] {
        self.mu
    }

    pub fn grid(&self) -> &OutcomeGrid {
        &self.grid
    }

    pub fn predict(&self, x: &Matrix) -> Result<ArmDensities> {
        self.predict_cached(x, &mut DensityPredictionCache::new())
    }

    /// Per-arm mixture densities at every row of `x`, sharing component
    /// evaluations through `cache` (one cache per test matrix).
    pub fn predict_cached(
        &self,
        x: &Matrix,
        cache: &mut DensityPredictionCache,
    ) -> Result<ArmDensities> {
        let mut out: ArmDensities = [Vec::new(), Vec::new()];
        for t in 0..2 {
            let post = cache.eval(&self.post[t], x)?;
            let rows = match &self.baseline {
                None => post.as_ref().clone(),
                Some(base) => {
                    let base = cache.eval(base, x)?;
                    let mu = self.mu[t];
                    post.iter()
                        .zip(base.iter())
                        .map(|(p1, p0)| {
                            let mut row: Vec<f64> = p1
                                .iter()
                                .zip(p0)
                                .map(|(a, b)| mu * a + (1.0 - mu) * b)
                                .collect();
                            // A convex combination of unit-mass densities is
                            // already valid; renormalize only if arithmetic
                            // drifted. Unconstrained weights outside [0, 1]
                            // are left as the raw affine mix.
                            if (0.0..=1.0).contains(&mu) {
                                let mass = match self.outcome_kind {
                                    OutcomeKind::Continuous => self.grid.trapezoid(&row),
                                    OutcomeKind::Discrete => row.iter().sum(),
                                };
                                if (mass - 1.0).abs() > 1e-6 && mass > 1e-300 {
                                    for v in &mut row {
                                        *v /= mass;
                                    }
                                }
                            }
                            row
                        })
                        .collect()
                }
            };
            out[t] = rows;
        }
        Ok(out)
    }
}

/// Quadratic-program coefficients `(curvature, linear)` for one arm.
///
/// `post_at_rct` and `base_at_rct` hold the two candidate densities
/// evaluated on the grid at every trial row; `arm_rows` indexes the rows of
/// the arm under consideration; `outcomes` are all trial outcomes. Density
/// values at observed outcomes are linearly interpolated on the grid.
pub fn cdte_mix_stats(
    post_at_rct: &[Vec<f64>],
    base_at_rct: &[Vec<f64>],
    arm_rows: &[usize],
    outcomes: &[f64],
    grid: &OutcomeGrid,
    kind: OutcomeKind,
) -> Result<(f64, f64)> {
    let n_all = post_at_rct.len();
    if base_at_rct.len() != n_all || outcomes.len() != n_all {
        return Err(Error::DimensionMismatch(format!(
            "trial evaluations disagree: post={n_all}, base={}, outcomes={}",
            base_at_rct.len(),
            outcomes.len()
        )));
    }
    if n_all == 0 || arm_rows.is_empty() {
        return Err(Error::MissingCell("empty trial arm".into()));
    }
    let mut curvature = 0.0;
    let mut cross_term = 0.0;
    for i in 0..n_all {
        let p1 = &post_at_rct[i];
        let p0 = &base_at_rct[i];
        let diff: Vec<f64> = p1.iter().zip(p0).map(|(a, b)| a - b).collect();
        curvature += inner_product(&diff, &diff, grid, kind)?;
        cross_term +=
            inner_product(p1, p0, grid, kind)? - inner_product(p0, p0, grid, kind)?;
    }
    curvature /= n_all as f64;
    cross_term /= n_all as f64;
    let mut observed = 0.0;
    for &i in arm_rows {
        let y = outcomes[i];
        observed += grid.interpolate(&post_at_rct[i], y) - grid.interpolate(&base_at_rct[i], y);
    }
    observed /= arm_rows.len() as f64;
    Ok((curvature, observed - cross_term))
}

fn require_nonempty_arms(rct: &TrialDataset) -> Result<()> {
    for t in [0u8, 1u8] {
        if rct.arm_count(t) == 0 {
            return Err(Error::MissingCell(format!("trial arm t={t} is empty")));
        }
    }
    Ok(())
}

/// Shared fitting state for the CDTE roster: the three observational density
/// fits and the per-arm trial fits, each computed at most once.
pub struct CdteWorkspace<'a> {
    obs: &'a ObservationalDataset,
    rct: &'a TrialDataset,
    grid: &'a OutcomeGrid,
    kind: OutcomeKind,
    baseline: Option<Arc<ConditionalDensityModel>>,
    obs_post: [Option<Arc<ConditionalDensityModel>>; 2],
    trial_post: [Option<Arc<ConditionalDensityModel>>; 2],
    at_rct: HashMap<usize, Arc<Vec<Vec<f64>>>>,
}

impl<'a> CdteWorkspace<'a> {
    pub fn new(
        obs: &'a ObservationalDataset,
        rct: &'a TrialDataset,
        grid: &'a OutcomeGrid,
        kind: OutcomeKind,
    ) -> Self {
        Self {
            obs,
            rct,
            grid,
            kind,
            baseline: None,
            obs_post: [None, None],
            trial_post: [None, None],
            at_rct: HashMap::new(),
        }
    }

    fn baseline(&mut self) -> Result<Arc<ConditionalDensityModel>> {
        if self.baseline.is_none() {
            let (x, y) = self.obs.pre_treatment();
            if x.rows() < 2 {
                return Err(Error::MissingCell(
                    "observational data has fewer than 2 pre-treatment (m=0) rows".into(),
                ));
            }
            self.baseline = Some(Arc::new(fit_conditional_density(
                &x, &y, self.grid, self.kind,
            )?));
        }
        Ok(self.baseline.clone().unwrap())
    }

    fn obs_post(&mut self, t: u8) -> Result<Arc<ConditionalDensityModel>> {
        let slot = t as usize;
        if self.obs_post[slot].is_none() {
            self.obs.require_cell(1, t)?;
            let (x, y) = self.obs.cell(1, t);
            self.obs_post[slot] = Some(Arc::new(fit_conditional_density(
                &x, &y, self.grid, self.kind,
            )?));
        }
        Ok(self.obs_post[slot].clone().unwrap())
    }

    fn trial_post(&mut self, t: u8) -> Result<Arc<ConditionalDensityModel>> {
        let slot = t as usize;
        if self.trial_post[slot].is_none() {
            self.rct.require_arm(t)?;
            let (x, y) = self.rct.arm(t);
            self.trial_post[slot] = Some(Arc::new(fit_conditional_density(
                &x, &y, self.grid, self.kind,
            )?));
        }
        Ok(self.trial_post[slot].clone().unwrap())
    }

    fn at_rct(&mut self, model: &Arc<ConditionalDensityModel>) -> Result<Arc<Vec<Vec<f64>>>> {
        let key = Arc::as_ptr(model) as usize;
        if let Some(hit) = self.at_rct.get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(model.eval_many(self.rct.covariates())?);
        self.at_rct.insert(key, fresh.clone());
        Ok(fresh)
    }

    fn fit_hull(&mut self, constrained: bool) -> Result<CdteModel> {
        require_nonempty_arms(self.rct)?;
        let baseline = self.baseline()?;
        let base_rows = self.at_rct(&baseline)?;
        let mut post = Vec::with_capacity(2);
        let mut mu = [0.0; 2];
        let mut degenerate = [false; 2];
        for t in [0u8, 1u8] {
            let model = self.obs_post(t)?;
            let post_rows = self.at_rct(&model)?;
            let arm_rows: Vec<usize> = self
                .rct
                .treatments()
                .iter()
                .enumerate()
                .filter(|(_, &ti)| ti == t)
                .map(|(i, _)| i)
                .collect();
            let (h, d) = cdte_mix_stats(
                &post_rows,
                &base_rows,
                &arm_rows,
                self.rct.outcomes(),
                self.grid,
                self.kind,
            )?;
            if constrained {
                let sol = solve_qp_1d(h, d)?;
                mu[t as usize] = sol.mu;
                degenerate[t as usize] = sol.degenerate;
            } else if h < -1e-9 {
                return Err(Error::InvalidInput(format!(
                    "negative curvature {h} signals broken quadrature upstream"
                )));
            } else if h <= 1e-12 {
                mu[t as usize] = 0.5;
                degenerate[t as usize] = true;
            } else {
                mu[t as usize] = d / h;
            }
            post.push(model);
        }
        let kind = if constrained {
            CdteEstimator::OchD
        } else {
            CdteEstimator::UncD
        };
        Ok(CdteModel {
            kind,
            post: [post[0].clone(), post[1].clone()],
            baseline: Some(baseline),
            mu,
            grid: self.grid.clone(),
            outcome_kind: self.kind,
            degenerate,
        })
    }

    pub fn fit(&mut self, kind: CdteEstimator) -> Result<CdteModel> {
        match kind {
            CdteEstimator::OchD => self.fit_hull(true),
            CdteEstimator::UncD => self.fit_hull(false),
            CdteEstimator::RctOnly => {
                let post = [self.trial_post(0)?, self.trial_post(1)?];
                Ok(CdteModel {
                    kind,
                    post,
                    baseline: None,
                    mu: [1.0, 1.0],
                    grid: self.grid.clone(),
                    outcome_kind: self.kind,
                    degenerate: [false, false],
                })
            }
            CdteEstimator::ObsOnly => {
                let post = [self.obs_post(0)?, self.obs_post(1)?];
                Ok(CdteModel {
                    kind,
                    post,
                    baseline: None,
                    mu: [1.0, 1.0],
                    grid: self.grid.clone(),
                    outcome_kind: self.kind,
                    degenerate: [false, false],
                })
            }
            CdteEstimator::FailForTesting => panic!("injected fit failure"),
        }
    }
}

/// Fit the hull-of-densities estimator.
pub fn fit_och_cdte(
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    grid: &OutcomeGrid,
    constrained: bool,
    kind: OutcomeKind,
) -> Result<CdteModel> {
    CdteWorkspace::new(obs, rct, grid, kind).fit_hull(constrained)
}

/// Fit any CDTE estimator by id.
pub fn fit_cdte(
    estimator: CdteEstimator,
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    grid: &OutcomeGrid,
    kind: OutcomeKind,
) -> Result<CdteModel> {
    CdteWorkspace::new(obs, rct, grid, kind).fit(estimator)
}

/// Fit a whole CDTE roster against one dataset pair, sharing density fits.
pub fn fit_cdte_roster(
    kinds: &[CdteEstimator],
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    grid: &OutcomeGrid,
    kind: OutcomeKind,
) -> Vec<(CdteEstimator, Result<CdteModel>)> {
    let mut ws = CdteWorkspace::new(obs, rct, grid, kind);
    kinds.iter().map(|&k| (k, ws.fit(k))).collect()
}
