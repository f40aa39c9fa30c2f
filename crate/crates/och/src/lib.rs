//! Cross-design synthesis estimators for conditional treatment effects.
//!
//! Combines a confounded observational dataset (two time steps, two arms)
//! with an exclusive randomized trial to recover conditional average
//! treatment effects and conditional outcome densities over the full
//! population. The hull estimators learn the component regressions or
//! densities from the observational data and the convex mixing weights from
//! the trial; the crate also ships the baseline roster, a synthetic
//! benchmark with analytic ground truth, and the evaluation statistics.

pub mod bench;
pub mod csv_io;
pub mod data;
pub mod density;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod kernel;
pub mod linalg;
pub mod qp;
pub mod simgen;
pub mod special;

pub use bench::{
    emit_table, replication_seed, run_benchmark, BenchmarkConfig, CellReport, MetricTarget,
    MoodsEntry, RunReport, TableKind, Targets,
};
pub use csv_io::{fit_datasets, fit_from_csv, FitOptions, FitOutput};
pub use data::{ObservationalDataset, TrialDataset};
pub use density::{
    fit_conditional_density, inner_product, ConditionalDensityModel, OutcomeGrid, OutcomeKind,
};
pub use error::{Error, Result};
pub use estimators::{
    estimate_e0, fit_baseline, fit_cate, fit_cate_roster, fit_cdte, fit_cdte_roster, fit_och_cate,
    fit_och_cdte, psi, ArmDensities, CateEstimator, CateModel, CdteEstimator, CdteModel,
    TimeVariant,
};
pub use evaluation::{median, median_with_ci, mise, moods_median_test, mse, skewness, MoodsTest};
pub use kernel::{fit_ridge, spline_kernel, FeatureScaler, RegressionModel, DEFAULT_LAMBDA_GRID};
pub use linalg::Matrix;
pub use qp::{solve_box_ls_2d, solve_qp_1d, BoxLsSolution, MixCoefficients, Qp1dSolution};
pub use simgen::{
    gen_observational, gen_scenario, gen_test_points, gen_trial, true_cate, true_cdte, MeanFn,
    Regime, Scenario, SimConfig,
};
