//! Dataset containers: a two-time-step observational study and an exclusive
//! randomized trial.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

fn check_binary(label: f64, what: &str, row: usize) -> Result<u8> {
    if label == 0.0 {
        Ok(0)
    } else if label == 1.0 {
        Ok(1)
    } else {
        Err(Error::InvalidInput(format!(
            "{what} label at row {row} must be 0 or 1, got {label}"
        )))
    }
}

/// Confounded observational data with rows observed before (`m = 0`) and
/// after (`m = 1`) treatment assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationalDataset {
    x: Matrix,
    t: Vec<u8>,
    m: Vec<u8>,
    y: Vec<f64>,
}

impl ObservationalDataset {
    pub fn new(x: Matrix, t: Vec<f64>, m: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.rows();
        if t.len() != n || m.len() != n || y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "row counts differ: x={n}, t={}, m={}, y={}",
                t.len(),
                m.len(),
                y.len()
            )));
        }
        if n > 0 && x.cols() == 0 {
            return Err(Error::InvalidInput("need at least one covariate".into()));
        }
        if x.data().iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in dataset".into()));
        }
        let t = t
            .iter()
            .enumerate()
            .map(|(i, &v)| check_binary(v, "treatment", i))
            .collect::<Result<Vec<_>>>()?;
        let m = m
            .iter()
            .enumerate()
            .map(|(i, &v)| check_binary(v, "time-step", i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { x, t, m, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn covariates(&self) -> &Matrix {
        &self.x
    }

    pub fn treatments(&self) -> &[u8] {
        &self.t
    }

    pub fn time_steps(&self) -> &[u8] {
        &self.m
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.y
    }

    /// Covariates and outcomes of one `(m, t)` cell.
    pub fn cell(&self, m: u8, t: u8) -> (Matrix, Vec<f64>) {
        let mask: Vec<bool> = self
            .m
            .iter()
            .zip(&self.t)
            .map(|(&mi, &ti)| mi == m && ti == t)
            .collect();
        let x = self.x.select_rows(&mask);
        let y = mask
            .iter()
            .zip(&self.y)
            .filter(|(keep, _)| **keep)
            .map(|(_, &v)| v)
            .collect();
        (x, y)
    }

    /// All pre-treatment rows pooled across arms.
    pub fn pre_treatment(&self) -> (Matrix, Vec<f64>) {
        let mask: Vec<bool> = self.m.iter().map(|&mi| mi == 0).collect();
        let x = self.x.select_rows(&mask);
        let y = mask
            .iter()
            .zip(&self.y)
            .filter(|(keep, _)| **keep)
            .map(|(_, &v)| v)
            .collect();
        (x, y)
    }

    pub fn cell_count(&self, m: u8, t: u8) -> usize {
        self.m
            .iter()
            .zip(&self.t)
            .filter(|(&mi, &ti)| mi == m && ti == t)
            .count()
    }

    /// Error unless the named cell has at least two rows (the minimum any
    /// regression here accepts).
    pub fn require_cell(&self, m: u8, t: u8) -> Result<()> {
        if self.cell_count(m, t) < 2 {
            return Err(Error::MissingCell(format!(
                "observational cell (m={m}, t={t}) needs at least 2 rows"
            )));
        }
        Ok(())
    }
}

/// Randomized trial data, all observed at the post-treatment time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDataset {
    x: Matrix,
    t: Vec<u8>,
    y: Vec<f64>,
}

impl TrialDataset {
    pub fn new(x: Matrix, t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.rows();
        if t.len() != n || y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "row counts differ: x={n}, t={}, y={}",
                t.len(),
                y.len()
            )));
        }
        if n > 0 && x.cols() == 0 {
            return Err(Error::InvalidInput("need at least one covariate".into()));
        }
        if x.data().iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in dataset".into()));
        }
        let t = t
            .iter()
            .enumerate()
            .map(|(i, &v)| check_binary(v, "treatment", i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { x, t, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn covariates(&self) -> &Matrix {
        &self.x
    }

    pub fn treatments(&self) -> &[u8] {
        &self.t
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.y
    }

    pub fn arm(&self, t: u8) -> (Matrix, Vec<f64>) {
        let mask: Vec<bool> = self.t.iter().map(|&ti| ti == t).collect();
        let x = self.x.select_rows(&mask);
        let y = mask
            .iter()
            .zip(&self.y)
            .filter(|(keep, _)| **keep)
            .map(|(_, &v)| v)
            .collect();
        (x, y)
    }

    pub fn arm_count(&self, t: u8) -> usize {
        self.t.iter().filter(|&&ti| ti == t).count()
    }

    pub fn require_arm(&self, t: u8) -> Result<()> {
        if self.arm_count(t) < 2 {
            return Err(Error::MissingCell(format!(
                "trial arm t={t} needs at least 2 rows"
            )));
        }
        Ok(())
    }
}
