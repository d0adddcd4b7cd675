//! Empirical pairwise correlations and Hoeffding radii.

use alloc::format;
use alloc::vec;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::sampling::SampleMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub alpha_hat: CorrelationVector,
    pub m: usize,
    pub delta: f64,
    /// With probability at least `1 - delta` every estimate is within `eta`.
    pub eta: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("delta = {delta} must lie in (0, 1)")))
    }
}

/// `sqrt(2 ln(n²/δ) / m)`.
pub fn hoeffding_radius(n: usize, delta: f64, m: usize) -> Result<f64> {
    check_delta(delta)?;
    if m == 0 {
        return Err(Error::EmptySample);
    }
    let nn = (n * n).max(1) as f64;
    Ok(libm::sqrt(2.0 * libm::log(nn / delta) / m as f64))
}

/// Smallest `m` whose Hoeffding radius is at most `eta`.
pub fn samples_for_radius(n: usize, delta: f64, eta: f64) -> Result<usize> {
    check_delta(delta)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::BadParameter(format!("eta = {eta} must be positive")));
    }
    let nn = (n * n).max(1) as f64;
    let exact = 2.0 * libm::log(nn / delta) / (eta * eta);
    if exact > 1e18 {
        return Err(Error::BadParameter(format!("eta = {eta} needs over 1e18 samples")));
    }
    // The closed form can land one off after rounding; settle on the boundary.
    let mut m = (libm::ceil(exact) as usize).max(1);
    while m > 1 && hoeffding_radius(n, delta, m - 1)? <= eta {
        m -= 1;
    }
    while hoeffding_radius(n, delta, m)? > eta {
        m += 1;
    }
    Ok(m)
}

/// Mean of `x_i x_j` over rows for every pair, with its Hoeffding radius.
pub fn empirical_correlations(samples: &SampleMatrix, delta: f64) -> Result<EstimationReport> {
    let m = samples.m();
    if m == 0 {
        return Err(Error::EmptySample);
    }
    let n = samples.n();
    let eta = hoeffding_radius(n, delta, m)?;
    let mut sums = vec![0i64; n * n];
    for row in samples.rows() {
        for i in 0..n {
            let xi = row[i];
            let base = i * n;
            for j in i + 1..n {
                sums[base + j] += (xi * row[j]) as i64;
            }
        }
    }
    let alpha_hat = CorrelationVector::from_fn(n, |i, j| sums[(i - 1) * n + (j - 1)] as f64 / m as f64);
    Ok(EstimationReport { alpha_hat, m, delta, eta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_tree, rng};
    use crate::sampling::sample;

    #[test]
    fn two_row_examples() {
        let s = SampleMatrix::from_rows(2, &[vec![1, 1], vec![1, -1]]).unwrap();
        assert_eq!(empirical_correlations(&s, 0.1).unwrap().alpha_hat.get(1, 2), 0.0);
        let s = SampleMatrix::from_rows(2, &[vec![1, 1], vec![-1, -1]]).unwrap();
        assert_eq!(empirical_correlations(&s, 0.1).unwrap().alpha_hat.get(1, 2), 1.0);
    }

    #[test]
    fn radius_at_reference_size() {
        let eta = hoeffding_radius(10, 0.01, 18421).unwrap();
        assert!((eta - 0.03163).abs() < 5e-5, "{eta}");
    }

    #[test]
    fn samples_for_radius_is_tight() {
        let m = samples_for_radius(10, 0.01, 0.03163).unwrap();
        assert_eq!(m, 18413);
        assert!(hoeffding_radius(10, 0.01, m).unwrap() <= 0.03163);
        assert!(hoeffding_radius(10, 0.01, m - 1).unwrap() > 0.03163);
        // 2 ln 8 = 4.16
        assert_eq!(samples_for_radius(2, 0.5, 1.0).unwrap(), 5);
        assert!(matches!(samples_for_radius(2, 0.5, 0.0), Err(Error::BadParameter(_))));
    }

    #[test]
    fn empty_and_bad_inputs() {
        let s = SampleMatrix::new(3, vec![]).unwrap();
        assert_eq!(empirical_correlations(&s, 0.1), Err(Error::EmptySample));
        assert!(matches!(hoeffding_radius(3, 1.5, 10), Err(Error::BadParameter(_))));
    }

    #[test]
    fn coverage_over_seeded_trials() {
        let t = random_tree(8, -0.9, 0.9, &mut rng(77)).unwrap();
        let truth = t.correlations();
        let delta = 0.05;
        let mut misses = 0;
        for trial in 0..200 {
            let rep = empirical_correlations(&sample(&t, 2000, 1000 + trial).unwrap(), delta).unwrap();
            if rep.alpha_hat.max_abs_diff(&truth).unwrap() > rep.eta {
                misses += 1;
            }
        }
        assert!(misses as f64 / 200.0 <= delta + 0.02, "{misses} misses");
    }
}
