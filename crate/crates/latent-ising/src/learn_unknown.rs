//! Learning with unknown topology: reconstruct a forest from estimated
//! correlations, then fit each component's weights with its bands widened
//! to `η' = C₂·n·ξ + η`.

use alloc::format;
use alloc::vec::Vec;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::estimation::empirical_correlations;
use crate::forest::WeightedForest;
use crate::learn_known::{fit_known, KnownTopologyFit};
use crate::reconstruct::{reconstruct_forest_with, ReconstructConfig, ReconstructedForest};
use crate::sampling::SampleMatrix;

/// `δ` is clamped to at most this when the formulas leave the unit interval.
pub const MAX_SPLIT_DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnknownLearnConfig {
    pub eta: f64,
    pub xi: f64,
    pub delta_split: f64,
    pub eta_prime: f64,
    /// Set when `η > 1/n` or `δ` had to be clamped; the guarantees behind
    /// the parameter choice do not apply then.
    pub outside_regime: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamConstants {
    /// Scales `ξ`; `δ` is scaled by its inverse so that `ξ·δ = η`.
    pub c1: f64,
    pub c2: f64,
}

impl Default for ParamConstants {
    fn default() -> Self {
        ParamConstants { c1: 1.0, c2: 4.0 }
    }
}

/// `δ = η^{2/3} n^{2/3}`, `ξ = η^{1/3} n^{−2/3}` (so `ξ·δ = η`) and
/// `η' = C₂·n·ξ + η`.
pub fn choose_params(eta: f64, n: usize) -> Result<UnknownLearnConfig> {
    choose_params_with(eta, n, ParamConstants::default())
}

pub fn choose_params_with(eta: f64, n: usize, k: ParamConstants) -> Result<UnknownLearnConfig> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::BadParameter(format!("eta = {eta} must be positive")));
    }
    if n == 0 {
        return Err(Error::TooFewLeaves(0));
    }
    if !(k.c1 > 0.0 && k.c2 >= 0.0) {
        return Err(Error::BadParameter("constants must be positive".into()));
    }
    let nf = n as f64;
    let mut xi = k.c1 * libm::cbrt(eta) / libm::cbrt(nf * nf);
    let mut delta = eta / xi;
    let mut outside_regime = eta * nf > 1.0;
    if delta > MAX_SPLIT_DELTA {
        delta = MAX_SPLIT_DELTA;
        xi = eta / delta;
        outside_regime = true;
    }
    Ok(UnknownLearnConfig { eta, xi, delta_split: delta, eta_prime: k.c2 * nf * xi + eta, outside_regime })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownLearnReport {
    pub forest: WeightedForest,
    pub config: UnknownLearnConfig,
    pub reconstruction: ReconstructedForest,
    /// One per component, in the order of `forest.components()`.
    pub fits: Vec<KnownTopologyFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnknownLearnOptions {
    pub constants: ParamConstants,
    pub reconstruct: ReconstructConfig,
}

pub fn learn_unknown(samples: &SampleMatrix, delta_conf: f64) -> Result<WeightedForest> {
    Ok(learn_unknown_with(samples, delta_conf, &UnknownLearnOptions::default())?.forest)
}

pub fn learn_unknown_with(samples: &SampleMatrix, delta_conf: f64, options: &UnknownLearnOptions) -> Result<UnknownLearnReport> {
    if samples.m() == 0 {
        return Err(Error::EmptySample);
    }
    let est = empirical_correlations(samples, delta_conf)?;
    learn_from_correlations(&est.alpha_hat, est.eta, options)
}

/// The learner on given correlations, trusted to within `eta` per pair.
pub fn learn_from_correlations(
    alpha_hat: &CorrelationVector,
    eta: f64,
    options: &UnknownLearnOptions,
) -> Result<UnknownLearnReport> {
    let n = alpha_hat.n();
    let config = choose_params_with(eta, n, options.constants)?;
    let rec = reconstruct_forest_with(alpha_hat, config.xi, config.delta_split, eta, &options.reconstruct)?;
    let mut fits = Vec::with_capacity(rec.components.len());
    for comp in &rec.components {
        fits.push(fit_known(&comp.normalize(), alpha_hat, config.eta_prime)?);
    }
    let forest = WeightedForest::new(fits.iter().map(|f| f.tree.clone()).collect())?;
    Ok(UnknownLearnReport { forest, config, reconstruction: rec, fits })
}
