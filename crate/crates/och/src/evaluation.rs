//! Accuracy and stability statistics: mean squared error, mean integrated
//! squared error, Mood's median test, sample skewness, and bootstrap
//! confidence intervals for medians.

use rand::Rng;

use crate::density::OutcomeGrid;
use crate::error::{Error, Result};
use crate::estimators::ArmDensities;
use crate::special::chi_square_1df_sf;

/// Mean squared error between a prediction and the ground truth.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "mse lengths: pred={}, truth={}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidInput("mse over no points".into()));
    }
    let sum: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Mean integrated squared error between per-arm density predictions and the
/// ground truth: the trapezoid-rule distance, averaged over arms and test
/// points.
pub fn mise(pred: &ArmDensities, truth: &ArmDensities, grid: &OutcomeGrid) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for t in 0..2 {
        if pred[t].len() != truth[t].len() {
            return Err(Error::DimensionMismatch(format!(
                "mise arm {t}: pred has {} rows, truth has {}",
                pred[t].len(),
                truth[t].len()
            )));
        }
        for (p, q) in pred[t].iter().zip(&truth[t]) {
            if p.len() != grid.len() || q.len() != grid.len() {
                return Err(Error::DimensionMismatch(
                    "mise row length does not match grid".into(),
                ));
            }
            let sq: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).collect();
            total += grid.trapezoid(&sq);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidInput("mise over no points".into()));
    }
    Ok(total / count as f64)
}

/// Result of Mood's two-sample median test.
#[derive(Debug, Clone, Copy)]
pub struct MoodsTest {
    pub chi_square: f64,
    pub p_value: f64,
    /// The pooled sample could not be split by its median (e.g. every value
    /// identical); the test is uninformative and `p_value` is 1.
    pub degenerate: bool,
}

/// Mood's median test: pool the samples, classify each value as above the
/// grand median or not (ties count as not-above), and refer the Pearson
/// chi-square of the 2x2 table to its one-degree-of-freedom upper tail.
pub fn moods_median_test(a: &[f64], b: &[f64]) -> Result<MoodsTest> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("empty sample in median test".into()));
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len();
    let grand_median = if n % 2 == 1 {
        pooled[n / 2]
    } else {
        0.5 * (pooled[n / 2 - 1] + pooled[n / 2])
    };
    let above = |sample: &[f64]| sample.iter().filter(|&&v| v > grand_median).count() as f64;
    let a_above = above(a);
    let b_above = above(b);
    let a_not = a.len() as f64 - a_above;
    let b_not = b.len() as f64 - b_above;
    let col_above = a_above + b_above;
    let col_not = a_not + b_not;
    if col_above == 0.0 || col_not == 0.0 {
        return Ok(MoodsTest {
            chi_square: 0.0,
            p_value: 1.0,
            degenerate: true,
        });
    }
    let total = n as f64;
    let det = a_above * b_not - b_above * a_not;
    let chi_square =
        total * det * det / ((a.len() as f64) * (b.len() as f64) * col_above * col_not);
    Ok(MoodsTest {
        chi_square,
        p_value: chi_square_1df_sf(chi_square),
        degenerate: false,
    })
}

/// Sample skewness `m3 / m2^{3/2}` with central moments.
pub fn skewness(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "skewness needs at least 3 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let m2 = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m3 = samples.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;
    if m2 <= 0.0 {
        return Err(Error::Degenerate("skewness of a constant sample".into()));
    }
    Ok(m3 / m2.powf(1.5))
}

/// Sample median (average of the middle two values at even length).
pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("median of an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Sample median with a percentile-bootstrap 95% confidence interval.
pub fn median_with_ci<R: Rng>(
    samples: &[f64],
    bootstrap_draws: usize,
    rng: &mut R,
) -> Result<(f64, f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "bootstrap interval needs at least 2 samples, got {n}"
        )));
    }
    let point = median(samples)?;
    let mut medians = Vec::with_capacity(bootstrap_draws);
    let mut resample = vec![0.0; n];
    for _ in 0..bootstrap_draws {
        for slot in resample.iter_mut() {
            *slot = samples[rng.random_range(0..n)];
        }
        medians.push(median(&resample)?);
    }
    medians.sort_by(f64::total_cmp);
    let b = medians.len();
    let lo_idx = ((b as f64) * 0.025).floor() as usize;
    let hi_idx = (((b as f64) * 0.975).ceil() as usize).saturating_sub(1).min(b - 1);
    Ok((point, medians[lo_idx], medians[hi_idx]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mse_cases() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[2.0, 3.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(mse(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mise_cases() {
        let grid = OutcomeGrid::linspace(0.0, 2.0, 1001).unwrap();
        let uniform_on = |lo: f64, hi: f64| -> Vec<f64> {
            grid.points()
                .iter()
                .map(|&y| if y >= lo && y <= hi { 1.0 } else { 0.0 })
                .collect()
        };
        let a: ArmDensities = [vec![uniform_on(0.0, 1.0)], vec![uniform_on(0.0, 1.0)]];
        assert_eq!(mise(&a, &a, &grid).unwrap(), 0.0);
        // Disjoint-overlap uniforms: tails contribute 0.5 each.
        let b: ArmDensities = [vec![uniform_on(0.5, 1.5)], vec![uniform_on(0.5, 1.5)]];
        let v = mise(&a, &b, &grid).unwrap();
        assert!((v - 1.0).abs() < 1e-2, "mise {v}");
        // All-zero prediction reduces to the truth's self inner product.
        let zeros: ArmDensities = [vec![vec![0.0; grid.len()]], vec![vec![0.0; grid.len()]]];
        let self_ip = crate::density::inner_product(
            &a[0][0],
            &a[0][0],
            &grid,
            crate::density::OutcomeKind::Continuous,
        )
        .unwrap();
        assert!((mise(&zeros, &a, &grid).unwrap() - self_ip).abs() < 1e-12);
    }

    #[test]
    fn moods_test_hand_computed_instance() {
        let t = moods_median_test(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]).unwrap();
        assert!((t.chi_square - 8.0).abs() < 1e-9, "chi {}", t.chi_square);
        assert!((t.p_value - 0.00468).abs() < 1e-5, "p {}", t.p_value);
        assert!(!t.degenerate);
    }

    #[test]
    fn moods_test_identical_samples_degenerate() {
        let s = [2.0, 2.0, 2.0];
        let t = moods_median_test(&s, &s).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.p_value, 1.0);
    }

    #[test]
    fn moods_test_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..21).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..17).map(|_| rng.random::<f64>() + 0.2).collect();
        let ab = moods_median_test(&a, &b).unwrap();
        let ba = moods_median_test(&b, &a).unwrap();
        assert_eq!(ab.chi_square, ba.chi_square);
        assert_eq!(ab.p_value, ba.p_value);
    }

    #[test]
    fn moods_test_null_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rejections = 0;
        let trials = 1000;
        for _ in 0..trials {
            let a: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
            let t = moods_median_test(&a, &b).unwrap();
            if t.p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / trials as f64;
        assert!((0.02..=0.09).contains(&rate), "null rejection rate {rate}");
    }

    #[test]
    fn skewness_cases() {
        assert!(skewness(&[-1.0, 0.0, 1.0]).unwrap().abs() < 1e-12);
        assert!(skewness(&[0.0, 0.0, 0.0, 10.0]).unwrap() > 0.0);
        assert!(skewness(&[1.0, 1.0, 1.0]).is_err());
        assert!(skewness(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn skewness_of_exponential_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sample: Vec<f64> = (0..100_000)
            .map(|_| -rng.random::<f64>().max(1e-12).ln())
            .collect();
        let s = skewness(&sample).unwrap();
        assert!((1.9..=2.1).contains(&s), "skewness {s}");
    }

    #[test]
    fn median_permutation_invariance() {
        let base = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let m = median(&base).unwrap();
        let mut rev = base.to_vec();
        rev.reverse();
        assert_eq!(median(&rev).unwrap(), m);
        assert_eq!(m, 3.5);
    }

    #[test]
    fn median_ci_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let constant = [2.5; 10];
        let (m, lo, hi) = median_with_ci(&constant, 200, &mut rng).unwrap();
        assert_eq!((m, lo, hi), (2.5, 2.5, 2.5));
        let seq: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let (m, lo, hi) = median_with_ci(&seq, 2000, &mut rng).unwrap();
        assert_eq!(m, 50.5);
        assert!(lo <= 50.5 && hi >= 50.5);
    }

    #[test]
    fn median_ci_coverage() {
        // True median of a standard normal is 0; coverage of the 95%
        // interval over repeated samples should sit near 0.95.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normal = |rng: &mut ChaCha8Rng| {
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let mut covered = 0;
        let trials = 500;
        for _ in 0..trials {
            let sample: Vec<f64> = (0..50).map(|_| normal(&mut rng)).collect();
            let (_, lo, hi) = median_with_ci(&sample, 400, &mut rng).unwrap();
            if lo <= 0.0 && hi >= 0.0 {
                covered += 1;
            }
        }
        let rate = covered as f64 / trials as f64;
        assert!((0.91..=0.99).contains(&rate), "coverage {rate}");
    }
}
