//! Minimal dense linear algebra: row-major matrices, Cholesky factorization
//! with a jitter fallback, Jacobi eigendecomposition for small symmetric
//! systems, and minimum-norm least squares.
//!
//! The systems in this crate are small (a few hundred rows); keeping the
//! solvers in-tree pins their behavior bit-for-bit at fixed arithmetic.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { data, rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has length {}, expected {ncols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(nrows, ncols, data)
    }

    /// Single-column matrix from a slice.
    pub fn column(values: &[f64]) -> Self {
        Self {
            data: values.to_vec(),
            rows: values.len(),
            cols: 1,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    /// Select the rows flagged `true`.
    pub fn select_rows(&self, mask: &[bool]) -> Matrix {
        let mut data = Vec::new();
        let mut count = 0;
        for (i, keep) in mask.iter().enumerate() {
            if *keep {
                data.extend_from_slice(self.row(i));
                count += 1;
            }
        }
        Matrix {
            data,
            rows: count,
            cols: self.cols,
        }
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    l: Vec<f64>,
    n: usize,
}

impl Cholesky {
    /// Factor the symmetric matrix `a` (row-major, n x n).
    ///
    /// On failure, retries once with `1e-10 * trace / n` added to the
    /// diagonal; returns `None` if that also fails.
    pub fn factor(a: &[f64], n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        if let Some(c) = Self::try_factor(a, n, 0.0) {
            return Some(c);
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let jitter = 1e-10 * trace / n as f64;
        Self::try_factor(a, n, jitter)
    }

    fn try_factor(a: &[f64], n: usize, jitter: f64) -> Option<Self> {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                if i == j {
                    sum += jitter;
                }
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(Self { l, n })
    }

    /// Solve `A x = b` via forward/back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        // L z = b
        for i in 0..n {
            let mut sum = x[i];
            for k in 0..i {
                sum -= self.l[i * n + k] * x[k];
            }
            x[i] = sum / self.l[i * n + i];
        }
        // L^T x = z
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in i + 1..n {
                sum -= self.l[k * n + i] * x[k];
            }
            x[i] = sum / self.l[i * n + i];
        }
        x
    }

    /// Diagonal of `A^{-1}`, computed column-by-column from `L^{-1}`.
    pub fn inverse_diag(&self) -> Vec<f64> {
        let n = self.n;
        let mut diag = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            // Solve L col = e_j; entries before j are zero.
            col[j] = 1.0 / self.l[j * n + j];
            for i in j + 1..n {
                let mut sum = 0.0;
                for k in j..i {
                    sum -= self.l[i * n + k] * col[k];
                }
                col[i] = sum / self.l[i * n + i];
            }
            // A^{-1} = L^{-T} L^{-1}, so (A^{-1})_jj = sum_{i>=j} (L^{-1})_{ij}^2.
            let mut s = 0.0;
            for &v in &col[j..n] {
                s += v * v;
            }
            diag[j] = s;
        }
        diag
    }
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotation.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors stored as columns
/// of a row-major n x n matrix. Intended for n up to a few dozen.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + frobenius(&m, n)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigvals: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    (eigvals, v)
}

fn frobenius(a: &[f64], n: usize) -> f64 {
    a.iter().take(n * n).map(|x| x * x).sum::<f64>().sqrt()
}

/// Ordinary least squares `min ||X c - y||^2` for a small design matrix.
///
/// Solves the normal equations by Cholesky; on a singular design, falls back
/// to the minimum-norm solution through the eigendecomposition of `X^T X`
/// and reports `singular = true`.
pub struct LstsqSolution {
    pub coefficients: Vec<f64>,
    pub singular: bool,
}

pub fn lstsq(design: &Matrix, y: &[f64]) -> Result<LstsqSolution> {
    let n = design.rows();
    let k = design.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows but y has {}",
            y.len()
        )));
    }
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("empty least-squares system".into()));
    }
    // Normal equations G = X^T X, rhs = X^T y.
    let mut g = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for row_i in 0..n {
        let row = design.row(row_i);
        for a in 0..k {
            rhs[a] += row[a] * y[row_i];
            for b in a..k {
                g[a * k + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            g[a * k + b] = g[b * k + a];
        }
    }
    if let Some(chol) = Cholesky::try_factor(&g, k, 0.0) {
        return Ok(LstsqSolution {
            coefficients: chol.solve(&rhs),
            singular: false,
        });
    }
    // Minimum-norm pseudoinverse solution.
    let (vals, vecs) = symmetric_eigen(&g, k);
    let vmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let tol = vmax * 1e-12 + 1e-300;
    let mut coef = vec![0.0; k];
    for j in 0..k {
        if vals[j] > tol {
            let mut proj = 0.0;
            for i in 0..k {
                proj += vecs[i * k + j] * rhs[i];
            }
            let scale = proj / vals[j];
            for i in 0..k {
                coef[i] += scale * vecs[i * k + j];
            }
        }
    }
    Ok(LstsqSolution {
        coefficients: coef,
        singular: true,
    })
}
