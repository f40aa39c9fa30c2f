//! CSV schemas and the fit-on-files workflow.
//!
//! Three file layouts, all numeric, comma-separated, dot-decimal UTF-8:
//!
//! - observational: header `m,t,x1,...,xp,y`
//! - trial:         header `t,x1,...,xp,y`
//! - test points:   header `x1,...,xp`
//!
//! Values are serialized with 17 significant digits so a write/read cycle
//! reproduces every `f64` bit-exactly. Parsers report the offending row and
//! column by name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{ObservationalDataset, TrialDataset};
use crate::density::{OutcomeGrid, OutcomeKind};
use crate::error::{Error, Result};
use crate::estimators::{fit_cdte, CateEstimator, CateWorkspace, CdteEstimator};
use crate::kernel::DEFAULT_LAMBDA_GRID;
use crate::linalg::Matrix;

/// 17 significant digits: enough to round-trip any finite `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_field(row: usize, column: &str, field: &str) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::CsvSchema {
        row,
        column: column.to_string(),
        message: format!("'{field}' is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::CsvSchema {
            row,
            column: column.to_string(),
            message: "value must be finite".into(),
        });
    }
    Ok(value)
}

fn parse_label(row: usize, column: &str, field: &str) -> Result<f64> {
    let value = parse_field(row, column, field)?;
    if value != 0.0 && value != 1.0 {
        return Err(Error::CsvSchema {
            row,
            column: column.to_string(),
            message: format!("label must be 0 or 1, got {field}"),
        });
    }
    Ok(value)
}

struct Header {
    /// Number of covariate columns.
    p: usize,
}

/// Validate a header of the form `<prefix...>,x1,...,xp[,y]`.
fn parse_header(line: &str, prefix: &[&str], trailing_y: bool) -> Result<Header> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let tail = usize::from(trailing_y);
    if fields.len() < prefix.len() + 1 + tail {
        return Err(Error::CsvSchema {
            row: 0,
            column: "header".into(),
            message: format!(
                "expected at least {} columns, got {}",
                prefix.len() + 1 + tail,
                fields.len()
            ),
        });
    }
    for (i, want) in prefix.iter().enumerate() {
        if fields[i] != *want {
            return Err(Error::CsvSchema {
                row: 0,
                column: format!("header field {}", i + 1),
                message: format!("expected '{want}', got '{}'", fields[i]),
            });
        }
    }
    let p = fields.len() - prefix.len() - tail;
    for j in 0..p {
        let want = format!("x{}", j + 1);
        let got = fields[prefix.len() + j];
        if got != want {
            return Err(Error::CsvSchema {
                row: 0,
                column: format!("header field {}", prefix.len() + j + 1),
                message: format!("expected '{want}', got '{got}'"),
            });
        }
    }
    if trailing_y && fields[fields.len() - 1] != "y" {
        return Err(Error::CsvSchema {
            row: 0,
            column: "header last field".into(),
            message: format!("expected 'y', got '{}'", fields[fields.len() - 1]),
        });
    }
    Ok(Header { p })
}

fn split_row<'l>(row: usize, line: &'l str, expected: usize) -> Result<Vec<&'l str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(Error::CsvSchema {
            row,
            column: "row".into(),
            message: format!("expected {expected} fields, got {}", fields.len()),
        });
    }
    Ok(fields)
}

/// Parse observational CSV text (`m,t,x1,...,xp,y`).
pub fn parse_observational_csv(text: &str) -> Result<ObservationalDataset> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(Error::CsvSchema {
        row: 0,
        column: "header".into(),
        message: "empty file".into(),
    })?;
    let header = parse_header(header_line, &["m", "t"], true)?;
    let mut x = Vec::new();
    let mut t = Vec::new();
    let mut m = Vec::new();
    let mut y = Vec::new();
    let mut rows = 0usize;
    for (idx, line) in lines {
        let row = idx + 1; // 1-based, header is row 1
        let fields = split_row(row, line, header.p + 3)?;
        m.push(parse_label(row, "m", fields[0])?);
        t.push(parse_label(row, "t", fields[1])?);
        for j in 0..header.p {
            x.push(parse_field(row, &format!("x{}", j + 1), fields[2 + j])?);
        }
        y.push(parse_field(row, "y", fields[header.p + 2])?);
        rows += 1;
    }
    ObservationalDataset::new(Matrix::new(rows, header.p, x)?, t, m, y)
}

/// Parse trial CSV text (`t,x1,...,xp,y`).
pub fn parse_trial_csv(text: &str) -> Result<TrialDataset> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(Error::CsvSchema {
        row: 0,
        column: "header".into(),
        message: "empty file".into(),
    })?;
    let header = parse_header(header_line, &["t"], true)?;
    let mut x = Vec::new();
    let mut t = Vec::new();
    let mut y = Vec::new();
    let mut rows = 0usize;
    for (idx, line) in lines {
        let row = idx + 1;
        let fields = split_row(row, line, header.p + 2)?;
        t.push(parse_label(row, "t", fields[0])?);
        for j in 0..header.p {
            x.push(parse_field(row, &format!("x{}", j + 1), fields[1 + j])?);
        }
        y.push(parse_field(row, "y", fields[header.p + 1])?);
        rows += 1;
    }
    TrialDataset::new(Matrix::new(rows, header.p, x)?, t, y)
}

/// Parse test-point CSV text (`x1,...,xp`).
pub fn parse_test_csv(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines.next().ok_or(Error::CsvSchema {
        row: 0,
        column: "header".into(),
        message: "empty file".into(),
    })?;
    let header = parse_header(header_line, &[], false)?;
    let mut x = Vec::new();
    let mut rows = 0usize;
    for (idx, line) in lines {
        let row = idx + 1;
        let fields = split_row(row, line, header.p)?;
        for j in 0..header.p {
            x.push(parse_field(row, &format!("x{}", j + 1), fields[j])?);
        }
        rows += 1;
    }
    Matrix::new(rows, header.p, x)
}

pub fn write_observational_csv(obs: &ObservationalDataset) -> String {
    let p = obs.dim();
    let mut out = String::from("m,t");
    for j in 1..=p {
        out.push_str(&format!(",x{j}"));
    }
    out.push_str(",y\n");
    for i in 0..obs.len() {
        out.push_str(&format!("{},{}", obs.time_steps()[i], obs.treatments()[i]));
        for &v in obs.covariates().row(i) {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push(',');
        out.push_str(&fmt_f64(obs.outcomes()[i]));
        out.push('\n');
    }
    out
}

pub fn write_trial_csv(rct: &TrialDataset) -> String {
    let p = rct.dim();
    let mut out = String::from("t");
    for j in 1..=p {
        out.push_str(&format!(",x{j}"));
    }
    out.push_str(",y\n");
    for i in 0..rct.len() {
        out.push_str(&format!("{}", rct.treatments()[i]));
        for &v in rct.covariates().row(i) {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push(',');
        out.push_str(&fmt_f64(rct.outcomes()[i]));
        out.push('\n');
    }
    out
}

pub fn write_test_csv(x: &Matrix) -> String {
    let mut out = String::new();
    for j in 1..=x.cols() {
        if j > 1 {
            out.push(',');
        }
        out.push_str(&format!("x{j}"));
    }
    out.push('\n');
    for i in 0..x.rows() {
        for (j, &v) in x.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

pub fn read_observational_file(path: &Path) -> Result<ObservationalDataset> {
    parse_observational_csv(&std::fs::read_to_string(path)?)
}

pub fn read_trial_file(path: &Path) -> Result<TrialDataset> {
    parse_trial_csv(&std::fs::read_to_string(path)?)
}

pub fn read_test_file(path: &Path) -> Result<Matrix> {
    parse_test_csv(&std::fs::read_to_string(path)?)
}

/// Options for the fit-on-files workflow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    /// Also produce per-grid densities (CDTE estimators only).
    pub densities: bool,
    pub grid_size: usize,
    pub discrete_outcomes: bool,
    pub lambda_grid: Vec<f64>,
    /// Ridge-regularize the four-term-contrast coefficients.
    pub sdd_ridge: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            densities: false,
            grid_size: 201,
            discrete_outcomes: false,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            sdd_ridge: false,
        }
    }
}

/// Output of a fit-on-files run: per-test-point predictions plus the fitted
/// mixing weights and degeneracy flags. Serialized as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOutput {
    pub estimator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cate: Option<CateFitOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cdte: Option<CdteFitOutput>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CateFitOutput {
    pub predictions: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    pub coefficients: Vec<f64>,
    pub degenerate_mix: bool,
    pub singular_ols: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdteFitOutput {
    pub grid: Vec<f64>,
    pub mu: [f64; 2],
    pub degenerate: [bool; 2],
    /// `densities[t][point][grid]`.
    pub densities: [Vec<Vec<f64>>; 2],
}

/// Fit one estimator on CSV inputs and evaluate it at the test points.
pub fn fit_from_csv(
    obs_path: &Path,
    rct_path: &Path,
    test_path: &Path,
    estimator: &str,
    options: &FitOptions,
) -> Result<FitOutput> {
    let obs = read_observational_file(obs_path)?;
    let rct = read_trial_file(rct_path)?;
    let test = read_test_file(test_path)?;
    fit_datasets(&obs, &rct, &test, estimator, options)
}

/// Library-level core of [`fit_from_csv`], usable on in-memory datasets.
pub fn fit_datasets(
    obs: &ObservationalDataset,
    rct: &TrialDataset,
    test: &Matrix,
    estimator: &str,
    options: &FitOptions,
) -> Result<FitOutput> {
    if options.densities {
        let kind: CdteEstimator = estimator.parse()?;
        let outcome_kind = if options.discrete_outcomes {
            OutcomeKind::Discrete
        } else {
            OutcomeKind::Continuous
        };
        let grid = OutcomeGrid::from_outcomes(obs.outcomes(), options.grid_size)?;
        let model = fit_cdte(kind, obs, rct, &grid, outcome_kind)?;
        let densities = model.predict(test)?;
        Ok(FitOutput {
            estimator: estimator.to_string(),
            cate: None,
            cdte: Some(CdteFitOutput {
                grid: grid.points().to_vec(),
                mu: model.mu(),
                degenerate: model.degenerate,
                densities,
            }),
        })
    } else {
        let kind: CateEstimator = estimator.parse()?;
        let model = CateWorkspace::new(obs, rct, &options.lambda_grid)
            .with_sdd_ridge(options.sdd_ridge)
            .fit(kind)?;
        let predictions = model.predict(test)?;
        Ok(FitOutput {
            estimator: estimator.to_string(),
            cate: Some(CateFitOutput {
                predictions,
                mu0: model.mix().map(|m| m.mu0),
                mu1: model.mix().map(|m| m.mu1),
                coefficients: model.coefficients().to_vec(),
                degenerate_mix: model.degenerate_mix,
                singular_ols: model.singular_ols,
            }),
            cdte: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_cate;
    use crate::simgen::{gen_observational, gen_scenario, gen_trial, SimConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sim_pair(seed: u64) -> (ObservationalDataset, TrialDataset) {
        let cfg = SimConfig {
            p: 2,
            n_obs: 80,
            n_rct: 20,
            seed,
            ..SimConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sc = gen_scenario(&cfg, &mut rng);
        (
            gen_observational(&cfg, &sc, &mut rng).unwrap(),
            gen_trial(&cfg, &sc, &mut rng).unwrap(),
        )
    }

    #[test]
    fn observational_round_trip_is_exact() {
        let (obs, _) = sim_pair(1);
        let text = write_observational_csv(&obs);
        let back = parse_observational_csv(&text).unwrap();
        assert_eq!(obs, back);
    }

    #[test]
    fn trial_round_trip_is_exact() {
        let (_, rct) = sim_pair(2);
        let text = write_trial_csv(&rct);
        let back = parse_trial_csv(&text).unwrap();
        assert_eq!(rct, back);
    }

    #[test]
    fn test_matrix_round_trip_is_exact() {
        let (obs, _) = sim_pair(3);
        let text = write_test_csv(obs.covariates());
        let back = parse_test_csv(&text).unwrap();
        assert_eq!(*obs.covariates(), back);
    }

    #[test]
    fn bad_treatment_label_names_the_row() {
        let text = "t,x1,y\n0,0.5,1.0\n2,0.25,0.5\n";
        match parse_trial_csv(text) {
            Err(Error::CsvSchema { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "t");
            }
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_column_count_names_the_row() {
        let text = "x1,x2\n0.5,0.25\n0.5\n";
        match parse_test_csv(text) {
            Err(Error::CsvSchema { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(parse_trial_csv("treat,x1,y\n0,0.1,0.2\n").is_err());
        assert!(parse_observational_csv("m,t,z1,y\n0,0,0.1,0.2\n").is_err());
        assert!(parse_test_csv("x1,x3\n0.1,0.2\n").is_err());
    }

    #[test]
    fn non_finite_values_are_rejected() {
        assert!(parse_test_csv("x1\nNaN\n").is_err());
        assert!(parse_test_csv("x1\ninf\n").is_err());
    }

    #[test]
    fn fit_output_round_trips_and_matches_library_fit() {
        let (obs, rct) = sim_pair(4);
        let test = obs.covariates().clone();
        let out = fit_datasets(&obs, &rct, &test, "och2", &FitOptions::default()).unwrap();
        let cate = out.cate.as_ref().unwrap();
        let direct = fit_cate(CateEstimator::Och2, &obs, &rct, &DEFAULT_LAMBDA_GRID)
            .unwrap()
            .predict(&test)
            .unwrap();
        assert_eq!(cate.predictions, direct);
        let json = serde_json::to_string(&out).unwrap();
        let back: FitOutput = serde_json::from_str(&json).unwrap();
        assert_eq!(back.cate.unwrap().predictions, cate.predictions);
    }
}
