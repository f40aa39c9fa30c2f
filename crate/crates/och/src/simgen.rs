//! Synthetic benchmark generator with analytic ground truth.
//!
//! Outcomes follow `y ~ N(f_mt(Z), noise)` with `Z = sum_j x_j` and the four
//! cell functions drawn uniformly from a fixed library. Trial outcomes are a
//! two-component mixture whose weight is the scenario's hull coefficient, so
//! the generative truth satisfies the hull assumptions by construction in
//! the `Holds` regime and deliberately breaks them in `Violated`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{ObservationalDataset, TrialDataset};
use crate::density::OutcomeGrid;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::special::{normal_cdf, normal_pdf};

/// The function library for cell means, indexed by what each curve does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeanFn {
    /// `z`
    Identity,
    /// `z * Phi(z)` with the standard normal CDF, a smooth one-sided ramp.
    CdfRamp,
    /// `exp(-z^2)`
    GaussianBump,
    /// `tanh(z)`
    Tanh,
}

impl MeanFn {
    pub const ALL: [MeanFn; 4] = [
        MeanFn::Identity,
        MeanFn::CdfRamp,
        MeanFn::GaussianBump,
        MeanFn::Tanh,
    ];

    pub fn eval(self, z: f64) -> f64 {
        match self {
            MeanFn::Identity => z,
            MeanFn::CdfRamp => z * normal_cdf(z),
            MeanFn::GaussianBump => (-z * z).exp(),
            MeanFn::Tanh => z.tanh(),
        }
    }
}

/// Whether the generated trial respects the hull assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Holds,
    Violated,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Holds => write!(f, "holds"),
            Regime::Violated => write!(f, "violated"),
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holds" => Ok(Regime::Holds),
            "violated" => Ok(Regime::Violated),
            other => Err(Error::Config(format!("unknown regime '{other}'"))),
        }
    }
}

/// Generator configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Covariate count.
    pub p: usize,
    /// Total observational rows, split evenly over the four (m, t) cells.
    pub n_obs: usize,
    /// Total trial rows, split evenly over the two arms.
    pub n_rct: usize,
    /// Percent of the first covariate's support excluded from recruitment.
    pub exclusion_rate: f64,
    pub regime: Regime,
    /// Outcome noise, read as a variance unless `noise_is_std` is set.
    pub noise: f64,
    pub noise_is_std: bool,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            p: 2,
            n_obs: 1000,
            n_rct: 100,
            exclusion_rate: 0.0,
            regime: Regime::Holds,
            noise: 0.1,
            noise_is_std: false,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if self.n_obs == 0 || self.n_obs % 4 != 0 {
            return Err(Error::Config(format!(
                "n_obs must be a positive multiple of 4, got {}",
                self.n_obs
            )));
        }
        if self.n_rct == 0 || self.n_rct % 2 != 0 {
            return Err(Error::Config(format!(
                "n_rct must be a positive multiple of 2, got {}",
                self.n_rct
            )));
        }
        if !(0.0..100.0).contains(&self.exclusion_rate) {
            return Err(Error::Config(format!(
                "exclusion rate must lie in [0, 100), got {}",
                self.exclusion_rate
            )));
        }
        if !(self.noise > 0.0) {
            return Err(Error::Config("noise must be positive".into()));
        }
        Ok(())
    }

    /// Outcome variance under the configured reading of `noise`.
    pub fn noise_variance(&self) -> f64 {
        if self.noise_is_std {
            self.noise * self.noise
        } else {
            self.noise
        }
    }
}

/// One sampled data-generating scenario: the four cell mean functions (by
/// `(m, t)`), the per-arm hull weights, the regime, and the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub f00: MeanFn,
    pub f01: MeanFn,
    pub f10: MeanFn,
    pub f11: MeanFn,
    pub mu0: f64,
    pub mu1: f64,
    pub regime: Regime,
    pub noise_variance: f64,
}

impl Scenario {
    pub fn cell_fn(&self, m: u8, t: u8) -> MeanFn {
        match (m, t) {
            (0, 0) => self.f00,
            (0, 1) => self.f01,
            (1, 0) => self.f10,
            (1, 1) => self.f11,
            _ => unreachable!("labels are binary"),
        }
    }

    pub fn mu(&self, t: u8) -> f64 {
        if t == 0 {
            self.mu0
        } else {
            self.mu1
        }
    }

    /// Pre-treatment baseline mean: the equal mixture of the two arms'
    /// pre-treatment curves.
    pub fn baseline_mean(&self, z: f64) -> f64 {
        0.5 * (self.f01.eval(z) + self.f00.eval(z))
    }

    /// Post-minus-baseline drift used by the violated regime.
    pub fn drift(&self, t: u8, z: f64) -> f64 {
        self.cell_fn(1, t).eval(z) - self.baseline_mean(z)
    }
}

/// Draw the four cell functions and both hull weights.
///
/// Stream order: f00, f01, f10, f11 (one uniform index each), then mu0, mu1.
pub fn gen_scenario<R: Rng>(cfg: &SimConfig, rng: &mut R) -> Scenario {
    let draw_fn = |rng: &mut R| MeanFn::ALL[rng.random_range(0..4)];
    let f00 = draw_fn(rng);
    let f01 = draw_fn(rng);
    let f10 = draw_fn(rng);
    let f11 = draw_fn(rng);
    let mu0 = rng.random::<f64>();
    let mu1 = rng.random::<f64>();
    Scenario {
        f00,
        f01,
        f10,
        f11,
        mu0,
        mu1,
        regime: cfg.regime,
        noise_variance: cfg.noise_variance(),
    }
}

/// Box-Muller standard normal: consumes exactly two uniforms per draw.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn normal_draw<R: Rng>(rng: &mut R, mean: f64, variance: f64) -> f64 {
    mean + variance.sqrt() * standard_normal(rng)
}

/// Draw from the equal mixture of the two pre-treatment outcome laws.
fn baseline_draw<R: Rng>(rng: &mut R, sc: &Scenario, z: f64, shift: f64) -> f64 {
    let f = if rng.random::<f64>() < 0.5 {
        sc.f01
    } else {
        sc.f00
    };
    normal_draw(rng, f.eval(z) + shift, sc.noise_variance)
}

/// Generate the observational dataset: `n_obs / 4` rows per `(m, t)` cell,
/// covariates i.i.d. uniform on `(-1, 1)`.
///
/// Stream order per row: the `p` covariates, then the outcome (two uniforms).
/// Cells are emitted in order (m, t) = (0,0), (0,1), (1,0), (1,1).
pub fn gen_observational<R: Rng>(
    cfg: &SimConfig,
    sc: &Scenario,
    rng: &mut R,
) -> Result<ObservationalDataset> {
    cfg.validate()?;
    let per_cell = cfg.n_obs / 4;
    let mut x = Vec::with_capacity(cfg.n_obs * cfg.p);
    let mut t = Vec::with_capacity(cfg.n_obs);
    let mut m = Vec::with_capacity(cfg.n_obs);
    let mut y = Vec::with_capacity(cfg.n_obs);
    for (mi, ti) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let f = sc.cell_fn(mi, ti);
        for _ in 0..per_cell {
            let mut z = 0.0;
            for _ in 0..cfg.p {
                let xi = rng.random_range(-1.0..1.0);
                x.push(xi);
                z += xi;
            }
            m.push(mi as f64);
            t.push(ti as f64);
            y.push(normal_draw(rng, f.eval(z), sc.noise_variance));
        }
    }
    ObservationalDataset::new(Matrix::new(cfg.n_obs, cfg.p, x)?, t, m, y)
}

/// Generate the trial dataset: `n_rct / 2` rows per arm, with the first
/// covariate drawn from `U(-1 + 0.02 r, 1)` to model exclusion.
///
/// Stream order per row: covariates (x1 first), then the outcome draws.
/// Arms are emitted in order t = 0, 1.
pub fn gen_trial<R: Rng>(cfg: &SimConfig, sc: &Scenario, rng: &mut R) -> Result<TrialDataset> {
    cfg.validate()?;
    let per_arm = cfg.n_rct / 2;
    let lo = -1.0 + 0.02 * cfg.exclusion_rate;
    let mut x = Vec::with_capacity(cfg.n_rct * cfg.p);
    let mut t = Vec::with_capacity(cfg.n_rct);
    let mut y = Vec::with_capacity(cfg.n_rct);
    for ti in [0u8, 1u8] {
        let mu = sc.mu(ti);
        for _ in 0..per_arm {
            let mut z = 0.0;
            for j in 0..cfg.p {
                let xi = if j == 0 {
                    rng.random_range(lo..1.0)
                } else {
                    rng.random_range(-1.0..1.0)
                };
                x.push(xi);
                z += xi;
            }
            let f1t = sc.cell_fn(1, ti).eval(z);
            let outcome = match sc.regime {
                Regime::Holds => {
                    if rng.random::<f64>() < mu {
                        normal_draw(rng, f1t, sc.noise_variance)
                    } else {
                        baseline_draw(rng, sc, z, 0.0)
                    }
                }
                Regime::Violated => {
                    let drift = sc.drift(ti, z);
                    if rng.random::<f64>() < 0.5 {
                        // Post-treatment hull endpoint pushed outward.
                        if rng.random::<f64>() < mu {
                            normal_draw(rng, f1t + drift, sc.noise_variance)
                        } else {
                            normal_draw(rng, f1t, sc.noise_variance)
                        }
                    } else {
                        // Baseline hull endpoint pushed outward.
                        if rng.random::<f64>() < mu {
                            baseline_draw(rng, sc, z, 0.0)
                        } else {
                            baseline_draw(rng, sc, z, -drift)
                        }
                    }
                }
            };
            t.push(ti as f64);
            y.push(outcome);
        }
    }
    TrialDataset::new(Matrix::new(cfg.n_rct, cfg.p, x)?, t, y)
}

/// Fresh i.i.d. test covariates from the full observational support.
pub fn gen_test_points<R: Rng>(p: usize, count: usize, rng: &mut R) -> Matrix {
    let mut data = Vec::with_capacity(count * p);
    for _ in 0..count * p {
        data.push(rng.random_range(-1.0..1.0));
    }
    Matrix::new(count, p, data).expect("sized correctly")
}

/// Expected trial outcome for one arm at covariate sum `z`.
fn arm_mean(sc: &Scenario, t: u8, z: f64) -> f64 {
    let mu = sc.mu(t);
    let f1t = sc.cell_fn(1, t).eval(z);
    let base = sc.baseline_mean(z);
    match sc.regime {
        Regime::Holds => mu * f1t + (1.0 - mu) * base,
        Regime::Violated => {
            let drift = sc.drift(t, z);
            0.5 * (mu * (f1t + drift) + (1.0 - mu) * f1t)
                + 0.5 * (mu * base + (1.0 - mu) * (base - drift))
        }
    }
}

/// Ground-truth conditional average treatment effect at `x`.
pub fn true_cate(sc: &Scenario, x: &[f64]) -> f64 {
    let z: f64 = x.iter().sum();
    arm_mean(sc, 1, z) - arm_mean(sc, 0, z)
}

/// Ground-truth per-arm outcome densities on a grid at `x`.
pub fn true_cdte(sc: &Scenario, x: &[f64], grid: &OutcomeGrid) -> [Vec<f64>; 2] {
    let z: f64 = x.iter().sum();
    let v = sc.noise_variance;
    let mut out = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for t in [0u8, 1u8] {
        let mu = sc.mu(t);
        let f1t = sc.cell_fn(1, t).eval(z);
        let (m01, m00) = (sc.f01.eval(z), sc.f00.eval(z));
        // (weight, mean) mixture components.
        let components: Vec<(f64, f64)> = match sc.regime {
            Regime::Holds => vec![
                (mu, f1t),
                (0.5 * (1.0 - mu), m01),
                (0.5 * (1.0 - mu), m00),
            ],
            Regime::Violated => {
                let drift = sc.drift(t, z);
                vec![
                    (0.5 * mu, f1t + drift),
                    (0.5 * (1.0 - mu), f1t),
                    (0.25 * mu, m01),
                    (0.25 * mu, m00),
                    (0.25 * (1.0 - mu), m01 - drift),
                    (0.25 * (1.0 - mu), m00 - drift),
                ]
            }
        };
        for (gi, &yv) in grid.points().iter().enumerate() {
            out[t as usize][gi] = components
                .iter()
                .map(|&(w, mean)| w * normal_pdf(yv, mean, v))
                .sum();
        }
    }
    out
}
