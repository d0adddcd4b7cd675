//! Identity testing of a sample source against a reference forest model by
//! the largest pairwise correlation deviation.

use alloc::format;

use crate::error::{Error, Result};
use crate::estimation::empirical_correlations;
use crate::forest::WeightedForest;
use crate::sampling::SampleMatrix;

/// Constant in the threshold `η + ε/(C·n⁵·D)`.
pub const DEFAULT_TV_CONSTANT: f64 = 42.0;

/// Sample counts above this are flagged as impractical.
pub const PRACTICAL_SAMPLES: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestVerdict {
    /// `Reject` exactly when `statistic > threshold`.
    pub decision: Decision,
    /// `max |α̂_ij − α^Q_ij|`.
    pub statistic: f64,
    pub threshold: f64,
    pub eta: f64,
    /// Pair attaining the statistic.
    pub worst_pair: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRequirement {
    /// Saturates at `u64::MAX`.
    pub samples: u64,
    pub impractical: bool,
}

/// `⌈c·n¹⁰·D²·ln(n/δ)/ε²⌉` with `c = 1`.
pub fn required_samples(n: usize, diameter: usize, eps: f64, delta: f64) -> Result<SampleRequirement> {
    required_samples_with(n, diameter, eps, delta, 1.0)
}

pub fn required_samples_with(n: usize, diameter: usize, eps: f64, delta: f64, c: f64) -> Result<SampleRequirement> {
    if n == 0 || diameter == 0 {
        return Err(Error::BadParameter(format!("n = {n} and D = {diameter} must be positive")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::BadParameter(format!("eps = {eps} must lie in (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadParameter(format!("delta = {delta} must lie in (0, 1)")));
    }
    if !(c > 0.0) {
        return Err(Error::BadParameter(format!("c = {c} must be positive")));
    }
    let (nf, d) = (n as f64, diameter as f64);
    let raw = libm::ceil(c * libm::pow(nf, 10.0) * d * d * libm::log(nf / delta) / (eps * eps)).max(1.0);
    let samples = if raw >= u64::MAX as f64 { u64::MAX } else { raw as u64 };
    Ok(SampleRequirement { samples, impractical: raw > PRACTICAL_SAMPLES })
}

pub fn test_identity(samples: &SampleMatrix, reference: &WeightedForest, eps: f64, delta: f64) -> Result<TestVerdict> {
    test_identity_with(samples, reference, eps, delta, DEFAULT_TV_CONSTANT)
}

pub fn test_identity_with(
    samples: &SampleMatrix,
    reference: &WeightedForest,
    eps: f64,
    delta: f64,
    tv_constant: f64,
) -> Result<TestVerdict> {
    if samples.n() != reference.n() {
        return Err(Error::DimensionMismatch { expected: reference.n(), found: samples.n() });
    }
    if !(eps > 0.0) || !(tv_constant > 0.0) {
        return Err(Error::BadParameter(format!("eps = {eps} and C = {tv_constant} must be positive")));
    }
    if samples.m() == 0 {
        return Err(Error::EmptySample);
    }
    let est = empirical_correlations(samples, delta)?;
    let q = reference.correlations();
    let (mut statistic, mut worst_pair) = (0.0, (1, 1));
    for (i, j, a) in est.alpha_hat.pairs() {
        let d = libm::fabs(a - q.get(i, j));
        if d > statistic {
            statistic = d;
            worst_pair = (i, j);
        }
    }
    let n = reference.n() as f64;
    let threshold = est.eta + eps / (tv_constant * libm::pow(n, 5.0) * reference.diameter() as f64);
    let decision = if statistic > threshold { Decision::Reject } else { Decision::Accept };
    Ok(TestVerdict { decision, statistic, threshold, eta: est.eta, worst_pair })
}
