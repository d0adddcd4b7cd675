//! Fitting edge weights to a known topology from estimated correlations.
//!
//! Magnitudes come from an LP over log-weights `w_e = ln|θ_e| ≤ 0`, asking
//! every path sum to land in `[ln(|α̂|−η), ln(|α̂|+η)]` (`−∞` below when
//! `|α̂| ≤ η`). Signs come from a GF(2) system with one equation per pair
//! whose estimate clears `η`.

use alloc::format;
use alloc::vec::Vec;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::estimation::empirical_correlations;
use crate::sampling::SampleMatrix;
use crate::solvers::{gf2_solve, lp_feasible, Gf2Outcome, Gf2System, IntervalPathLP, LpOutcome};
use crate::tree::{TreeTopology, WeightedTree};

/// Weights below this magnitude are reported as exactly zero.
pub const ZERO_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct KnownTopologyFit {
    pub tree: WeightedTree,
    pub eta_used: f64,
    pub sign_equations_used: usize,
    /// Smallest fraction `s` of `eta_used` for which the LP stayed feasible;
    /// the returned magnitudes satisfy the bands at `s·η`.
    pub band_scale: f64,
    /// `max |α_fit − α̂|` over leaf pairs of the topology.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Shrink the bands by bisection to the tightest feasible scale. With
    /// this off, any vertex of the η-band LP is returned.
    pub tighten: bool,
    pub bisection_steps: usize,
    pub min_scale: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tighten: true, bisection_steps: 40, min_scale: 1e-9 }
    }
}

struct PairPaths {
    pairs: Vec<(usize, usize, Vec<usize>)>,
}

impl PairPaths {
    fn new(t: &TreeTopology) -> Result<Self> {
        let l = t.leaves();
        let mut pairs = Vec::new();
        for (x, &i) in l.iter().enumerate() {
            for &j in &l[x + 1..] {
                pairs.push((i, j, t.path_edge_indices(i, j)?));
            }
        }
        Ok(PairPaths { pairs })
    }
}

fn band_lp(t: &TreeTopology, paths: &PairPaths, alpha_hat: &CorrelationVector, half_width: f64) -> IntervalPathLP {
    let mut lp = IntervalPathLP::new(t.edges().len());
    for (i, j, edges) in &paths.pairs {
        let a = libm::fabs(alpha_hat.get(*i, *j));
        let lo = if a - half_width > 0.0 { libm::log(a - half_width) } else { f64::NEG_INFINITY };
        let hi = libm::log(a + half_width);
        lp.push(edges.clone(), lo, hi).expect("bands are ordered");
    }
    lp
}

pub fn fit_known(topology: &TreeTopology, alpha_hat: &CorrelationVector, eta: f64) -> Result<KnownTopologyFit> {
    fit_known_with(topology, alpha_hat, eta, FitOptions::default())
}

pub fn fit_known_with(
    topology: &TreeTopology,
    alpha_hat: &CorrelationVector,
    eta: f64,
    options: FitOptions,
) -> Result<KnownTopologyFit> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::BadParameter(format!("eta = {eta} must be positive")));
    }
    if let Some(&l) = topology.leaves().iter().find(|&&l| l > alpha_hat.n()) {
        return Err(Error::UnknownLeaf(l));
    }
    if !topology.is_binary() {
        return Err(Error::MalformedTree("topology must be normalized".into()));
    }
    let paths = PairPaths::new(topology)?;

    let mut scale = 1.0;
    let mut w = match lp_feasible(&band_lp(topology, &paths, alpha_hat, eta)) {
        LpOutcome::Feasible(w) => w,
        LpOutcome::Infeasible(wit) => {
            let (i, j, _) = wit.violated.first().map(|&k| &paths.pairs[k]).unwrap_or(&paths.pairs[0]);
            return Err(Error::NoConsistentModel(format!(
                "magnitude LP infeasible (residual {:.3e}, e.g. pair ({i}, {j}))",
                wit.residual
            )));
        }
    };
    if options.tighten && !paths.pairs.is_empty() {
        let (mut lo, mut hi) = (libm::log(options.min_scale), 0.0);
        let floor = band_lp(topology, &paths, alpha_hat, eta * options.min_scale);
        if let LpOutcome::Feasible(x) = lp_feasible(&floor) {
            w = x;
            scale = options.min_scale;
        } else {
            for _ in 0..options.bisection_steps {
                let mid = 0.5 * (lo + hi);
                let s = libm::exp(mid);
                match lp_feasible(&band_lp(topology, &paths, alpha_hat, eta * s)) {
                    LpOutcome::Feasible(x) => {
                        w = x;
                        scale = s;
                        hi = mid;
                    }
                    LpOutcome::Infeasible(_) => lo = mid,
                }
            }
        }
    }

    let mut signs = Gf2System::new(topology.edges().len());
    for (i, j, edges) in &paths.pairs {
        let a = alpha_hat.get(*i, *j);
        if libm::fabs(a) > eta {
            signs.push(edges.clone(), a < 0.0)?;
        }
    }
    let s = match gf2_solve(&signs) {
        Gf2Outcome::Solution(s) => s,
        Gf2Outcome::Inconsistent => {
            return Err(Error::NoConsistentModel("sign system inconsistent".into()));
        }
    };

    let theta: Vec<f64> = w
        .iter()
        .zip(&s)
        .map(|(&we, &neg)| {
            let m = libm::exp(we).min(1.0);
            let m = if m < ZERO_WEIGHT { 0.0 } else { m };
            if neg { -m } else { m }
        })
        .collect();
    let tree = WeightedTree::new(topology.clone(), theta)?;
    let fit = tree.correlations();
    let max_deviation = paths
        .pairs
        .iter()
        .map(|(i, j, _)| libm::fabs(fit.get(*i, *j) - alpha_hat.get(*i, *j)))
        .fold(0.0, f64::max);
    Ok(KnownTopologyFit {
        tree,
        eta_used: eta,
        sign_equations_used: signs.equations().len(),
        band_scale: scale,
        max_deviation,
    })
}

/// Estimates correlations and their Hoeffding radius, then fits.
pub fn learn_from_samples_known(topology: &TreeTopology, samples: &SampleMatrix, delta: f64) -> Result<KnownTopologyFit> {
    if samples.m() == 0 {
        return Err(Error::EmptySample);
    }
    if topology.leaf_count() != samples.n() || !topology.has_standard_leaves() {
        return Err(Error::DimensionMismatch { expected: topology.leaf_count(), found: samples.n() });
    }
    let report = empirical_correlations(samples, delta)?;
    fit_known(topology, &report.alpha_hat, report.eta)
}
