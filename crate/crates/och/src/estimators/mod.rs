//! The estimator roster: hull estimators for conditional average treatment
//! effects and conditional outcome densities, their unconstrained ablations,
//! and the baseline methods they are compared against.

mod cate;
mod cdte;

pub use cate::{
    estimate_e0, fit_baseline, fit_cate, fit_cate_roster, fit_och_cate, psi, CateEstimator,
    CateModel, CateWorkspace, PredictionCache, TimeVariant,
};
pub use cdte::{
    cdte_mix_stats, fit_cdte, fit_cdte_roster, fit_och_cdte, ArmDensities, CdteEstimator,
    CdteModel, CdteWorkspace, DensityPredictionCache,
};
