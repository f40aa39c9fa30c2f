//! Exact solvers for the two small constrained problems behind the hull
//! estimators: a 2-variable box-constrained least squares and a 1-variable
//! quadratic program on `[0, 1]`.

use crate::error::{Error, Result};

/// Convex-hull mixing weights, one per treatment arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixCoefficients {
    pub mu0: f64,
    pub mu1: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BoxLsSolution {
    pub mix: MixCoefficients,
    pub objective: f64,
    /// Set when the design carries no information (both columns zero) or
    /// when the unconstrained normal equations were singular.
    pub degenerate: bool,
}

/// Sufficient statistics of `sum_i (g_i - mu1 a_i + mu0 b_i)^2`.
struct Quadratic {
    saa: f64,
    sbb: f64,
    sab: f64,
    sga: f64,
    sgb: f64,
    sgg: f64,
}

impl Quadratic {
    fn new(a: &[f64], b: &[f64], g: &[f64]) -> Self {
        let mut q = Quadratic {
            saa: 0.0,
            sbb: 0.0,
            sab: 0.0,
            sga: 0.0,
            sgb: 0.0,
            sgg: 0.0,
        };
        for i in 0..a.len() {
            q.saa += a[i] * a[i];
            q.sbb += b[i] * b[i];
            q.sab += a[i] * b[i];
            q.sga += g[i] * a[i];
            q.sgb += g[i] * b[i];
            q.sgg += g[i] * g[i];
        }
        q
    }

    fn objective(&self, mu0: f64, mu1: f64) -> f64 {
        self.sgg + mu1 * mu1 * self.saa + mu0 * mu0 * self.sbb - 2.0 * mu1 * self.sga
            + 2.0 * mu0 * self.sgb
            - 2.0 * mu0 * mu1 * self.sab
    }

    /// Gradient of the objective at `(mu0, mu1)`.
    #[cfg(test)]
    fn gradient(&self, mu0: f64, mu1: f64) -> (f64, f64) {
        (
            2.0 * (mu0 * self.sbb + self.sgb - mu1 * self.sab),
            2.0 * (mu1 * self.saa - self.sga - mu0 * self.sab),
        )
    }

    /// Unconstrained stationary point of the 2x2 normal equations, or `None`
    /// when the system is singular.
    fn interior(&self) -> Option<(f64, f64)> {
        let det = self.sbb * self.saa - self.sab * self.sab;
        let scale = self.sbb.abs().max(self.saa.abs()).max(self.sab.abs());
        if det.abs() <= 1e-12 * scale * scale || scale == 0.0 {
            return None;
        }
        // [ sbb  -sab ] [mu0]   [-sgb]
        // [-sab   saa ] [mu1] = [ sga]
        let mu0 = (-self.sgb * self.saa + self.sab * self.sga) / det;
        let mu1 = (self.sbb * self.sga - self.sab * self.sgb) / det;
        Some((mu0, mu1))
    }

    /// Minimum-norm solution of the singular normal equations via the
    /// closed-form eigendecomposition of the symmetric 2x2 system.
    fn min_norm(&self) -> (f64, f64) {
        let (m11, m12, m22) = (self.sbb, -self.sab, self.saa);
        let (r1, r2) = (-self.sgb, self.sga);
        let tr = m11 + m22;
        let det = m11 * m22 - m12 * m12;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let eigs = [tr / 2.0 + disc, tr / 2.0 - disc];
        let tol = 1e-12 * eigs[0].abs().max(1e-300);
        let mut x = (0.0, 0.0);
        for &lam in &eigs {
            if lam <= tol {
                continue;
            }
            // Eigenvector for lam.
            let (v1, v2) = if m12.abs() > 1e-300 {
                (lam - m22, m12)
            } else if (m11 - lam).abs() <= (m22 - lam).abs() {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            };
            let norm = (v1 * v1 + v2 * v2).sqrt();
            if norm == 0.0 {
                continue;
            }
            let (v1, v2) = (v1 / norm, v2 / norm);
            let proj = (v1 * r1 + v2 * r2) / lam;
            x.0 += proj * v1;
            x.1 += proj * v2;
        }
        x
    }
}

/// Minimize `sum_i (g_i - mu1 a_i + mu0 b_i)^2` over the mixing weights.
///
/// Constrained mode enumerates the nine active-set candidates of the box
/// `[0, 1]^2` (interior stationary point, four edge stationary points, four
/// corners) and returns the feasible candidate with the least objective,
/// breaking exact ties toward the lexicographically smallest `(mu0, mu1)`.
/// Unconstrained mode solves the normal equations, falling back to the
/// minimum-norm solution when the 2x2 system is singular.
pub fn solve_box_ls_2d(a: &[f64], b: &[f64], g: &[f64], constrained: bool) -> Result<BoxLsSolution> {
    if a.len() != b.len() || a.len() != g.len() {
        return Err(Error::DimensionMismatch(format!(
            "column lengths differ: a={}, b={}, g={}",
            a.len(),
            b.len(),
            g.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty design".into()));
    }
    let q = Quadratic::new(a, b, g);
    let zero_design = q.saa == 0.0 && q.sbb == 0.0;

    if !constrained {
        let (mu0, mu1, singular) = match q.interior() {
            Some((m0, m1)) => (m0, m1, false),
            None => {
                let (m0, m1) = q.min_norm();
                (m0, m1, true)
            }
        };
        return Ok(BoxLsSolution {
            mix: MixCoefficients { mu0, mu1 },
            objective: q.objective(mu0, mu1),
            degenerate: singular || zero_design,
        });
    }

    let mut candidates: Vec<(f64, f64)> = Vec::with_capacity(9);
    if let Some((m0, m1)) = q.interior() {
        candidates.push((m0, m1));
    }
    // Edge stationary points: fix one coordinate, minimize over the other.
    for edge in [0.0, 1.0] {
        if q.saa > 0.0 {
            // mu0 fixed at `edge`.
            candidates.push((edge, (q.sga + edge * q.sab) / q.saa));
        }
        if q.sbb > 0.0 {
            // mu1 fixed at `edge`.
            candidates.push(((edge * q.sab - q.sgb) / q.sbb, edge));
        }
    }
    candidates.extend_from_slice(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]);

    let mut best: Option<(f64, f64, f64)> = None; // (objective, mu0, mu1)
    for (mu0, mu1) in candidates {
        if !mu0.is_finite() || !mu1.is_finite() {
            continue;
        }
        if !(0.0..=1.0).contains(&mu0) || !(0.0..=1.0).contains(&mu1) {
            continue;
        }
        let obj = q.objective(mu0, mu1);
        let better = match best {
            None => true,
            Some((bo, b0, b1)) => obj < bo || (obj == bo && (mu0, mu1) < (b0, b1)),
        };
        if better {
            best = Some((obj, mu0, mu1));
        }
    }
    let (objective, mu0, mu1) = best.expect("corners are always feasible");
    Ok(BoxLsSolution {
        mix: MixCoefficients { mu0, mu1 },
        objective,
        degenerate: zero_design,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Qp1dSolution {
    pub mu: f64,
    pub degenerate: bool,
}

/// Minimize `h/2 mu^2 - d mu` over `[0, 1]`.
///
/// `h` comes from an averaged squared-difference integral and must be
/// nonnegative up to quadrature noise; a vanishing `h` means any weight
/// yields the same mixture, reported as the symmetric choice 0.5.
pub fn solve_qp_1d(h: f64, d: f64) -> Result<Qp1dSolution> {
    if h < -1e-9 {
        return Err(Error::InvalidInput(format!(
            "negative curvature {h} signals broken quadrature upstream"
        )));
    }
    if h <= 1e-12 {
        return Ok(Qp1dSolution {
            mu: 0.5,
            degenerate: true,
        });
    }
    Ok(Qp1dSolution {
        mu: (d / h).clamp(0.0, 1.0),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force grid oracle over [0,1]^2.
    pub(crate) fn grid_search(a: &[f64], b: &[f64], g: &[f64], step: f64) -> (f64, f64, f64) {
        let q = Quadratic::new(a, b, g);
        let n = (1.0 / step).round() as usize;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=n {
            let mu0 = i as f64 * step;
            for j in 0..=n {
                let mu1 = j as f64 * step;
                let obj = q.objective(mu0, mu1);
                if obj < best.0 {
                    best = (obj, mu0, mu1);
                }
            }
        }
        best
    }

    fn random_instance(rng: &mut ChaCha8Rng, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let norm = |r: &mut ChaCha8Rng| {
            let u1: f64 = r.random::<f64>().max(1e-12);
            let u2: f64 = r.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let a: Vec<f64> = (0..m).map(|_| norm(rng)).collect();
        let b: Vec<f64> = (0..m).map(|_| norm(rng)).collect();
        let g: Vec<f64> = (0..m).map(|_| norm(rng)).collect();
        (a, b, g)
    }

    #[test]
    fn exact_recovery_inside_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b, _) = random_instance(&mut rng, 40);
        let g: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(ai, bi)| 0.7 * ai - 0.3 * bi)
            .collect();
        let sol = solve_box_ls_2d(&a, &b, &g, true).unwrap();
        assert!((sol.mix.mu0 - 0.3).abs() < 1e-9);
        assert!((sol.mix.mu1 - 0.7).abs() < 1e-9);
        let oracle = grid_search(&a, &b, &g, 1e-3);
        assert!(sol.objective <= oracle.0 + 1e-12);
    }

    #[test]
    fn clamps_to_boundary_when_optimum_outside() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (a, b, _) = random_instance(&mut rng, 40);
        let g: Vec<f64> = a.iter().map(|ai| 2.0 * ai).collect();
        let sol = solve_box_ls_2d(&a, &b, &g, true).unwrap();
        assert_eq!(sol.mix.mu1, 1.0);
        let oracle = grid_search(&a, &b, &g, 1e-3);
        assert!(sol.objective <= oracle.0 + 1e-12);
        assert!((sol.mix.mu0 - oracle.1).abs() <= 2e-3);
    }

    #[test]
    fn zero_target_returns_origin() {
        let a = vec![1.0, -0.5, 0.25];
        let b = vec![0.5, 1.0, -0.75];
        let g = vec![0.0, 0.0, 0.0];
        let sol = solve_box_ls_2d(&a, &b, &g, true).unwrap();
        assert_eq!(sol.mix.mu0, 0.0);
        assert_eq!(sol.mix.mu1, 0.0);
        assert!(!sol.degenerate);
    }

    #[test]
    fn zero_design_is_degenerate() {
        let z = vec![0.0; 4];
        let g = vec![1.0, 2.0, 3.0, 4.0];
        let sol = solve_box_ls_2d(&z, &z, &g, true).unwrap();
        assert_eq!(sol.mix.mu0, 0.0);
        assert_eq!(sol.mix.mu1, 0.0);
        assert!(sol.degenerate);
    }

    #[test]
    fn length_mismatch_errors() {
        assert!(solve_box_ls_2d(&[1.0], &[1.0, 2.0], &[1.0], true).is_err());
    }

    #[test]
    fn oracle_equivalence_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let (a, b, g) = random_instance(&mut rng, 50);
            let sol = solve_box_ls_2d(&a, &b, &g, true).unwrap();
            let oracle = grid_search(&a, &b, &g, 1e-3);
            assert!(sol.objective <= oracle.0 + 1e-12);
            let dist = (sol.mix.mu0 - oracle.1)
                .abs()
                .max((sol.mix.mu1 - oracle.2).abs());
            assert!(dist <= 2e-3, "argmin drifted {dist}");
        }
    }

    #[test]
    fn kkt_conditions_hold_at_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let (a, b, g) = random_instance(&mut rng, 50);
            let q = Quadratic::new(&a, &b, &g);
            let sol = solve_box_ls_2d(&a, &b, &g, true).unwrap();
            let (g0, g1) = q.gradient(sol.mix.mu0, sol.mix.mu1);
            let scale = q.saa.max(q.sbb).max(q.sgg).max(1.0);
            for (mu, grad) in [(sol.mix.mu0, g0), (sol.mix.mu1, g1)] {
                if mu == 0.0 {
                    assert!(grad >= -1e-8 * scale, "lower bound KKT: grad {grad}");
                } else if mu == 1.0 {
                    assert!(grad <= 1e-8 * scale, "upper bound KKT: grad {grad}");
                } else {
                    assert!(grad.abs() <= 1e-8 * scale, "interior KKT: grad {grad}");
                }
            }
        }
    }

    #[test]
    fn unconstrained_never_worse_than_constrained() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let (a, b, g) = random_instance(&mut rng, 30);
            let unc = solve_box_ls_2d(&a, &b, &g, false).unwrap();
            let con = solve_box_ls_2d(&a, &b, &g, true).unwrap();
            assert!(unc.objective <= con.objective + 1e-9 * con.objective.abs().max(1.0));
            let inside = (0.0..=1.0).contains(&unc.mix.mu0) && (0.0..=1.0).contains(&unc.mix.mu1);
            if inside {
                let rel = (con.objective - unc.objective).abs() / unc.objective.max(1e-12);
                assert!(rel < 1e-9);
            }
        }
    }

    #[test]
    fn qp_1d_cases() {
        let s = solve_qp_1d(2.0, 1.0).unwrap();
        assert_eq!(s.mu, 0.5);
        assert!(!s.degenerate);
        assert_eq!(solve_qp_1d(1.0, 5.0).unwrap().mu, 1.0);
        assert_eq!(solve_qp_1d(1.0, -3.0).unwrap().mu, 0.0);
        let d = solve_qp_1d(0.0, 1.0).unwrap();
        assert_eq!(d.mu, 0.5);
        assert!(d.degenerate);
        assert!(solve_qp_1d(-1e-6, 0.0).is_err());
    }
}
