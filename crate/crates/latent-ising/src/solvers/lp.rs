//! Feasibility of interval constraints on sums of non-positive variables.
//!
//! Each constraint bounds `Σ_{e∈P} w_e` from below (possibly `−∞`) and
//! above, and every `w_e ≤ 0`. Substituting `y = −w ≥ 0` gives a standard
//! form solved by a dense two-phase simplex with Bland's anti-cycling rule.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Constraint satisfaction is checked to this absolute tolerance.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PathConstraint {
    pub edges: Vec<usize>,
    /// May be `f64::NEG_INFINITY`.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalPathLP {
    variables: usize,
    constraints: Vec<PathConstraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityWitness {
    /// Phase-one optimum: total violation the simplex could not remove.
    pub residual: f64,
    /// Indices of constraints still violated at the phase-one optimum.
    pub violated: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Feasible(Vec<f64>),
    Infeasible(InfeasibilityWitness),
}

impl IntervalPathLP {
    pub fn new(variables: usize) -> Self {
        IntervalPathLP { variables, constraints: Vec::new() }
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn constraints(&self) -> &[PathConstraint] {
        &self.constraints
    }

    pub fn push(&mut self, edges: Vec<usize>, lower: f64, upper: f64) -> Result<()> {
        if let Some(&e) = edges.iter().find(|&&e| e >= self.variables) {
            return Err(Error::BadParameter(format!("variable {e} out of range")));
        }
        if lower.is_nan() || upper.is_nan() || upper == f64::NEG_INFINITY || lower == f64::INFINITY {
            return Err(Error::BadParameter(format!("bounds [{lower}, {upper}]")));
        }
        if lower.is_finite() && upper.is_finite() && upper < lower {
            return Err(Error::BadParameter(format!("upper {upper} below lower {lower}")));
        }
        self.constraints.push(PathConstraint { edges, lower, upper });
        Ok(())
    }

    /// Largest amount by which `w` breaks any bound.
    pub fn violation(&self, w: &[f64]) -> f64 {
        let mut worst = w.iter().fold(0.0f64, |m, &x| m.max(x));
        for c in &self.constraints {
            let s: f64 = c.edges.iter().map(|&e| w[e]).sum();
            worst = worst.max(c.lower - s).max(s - c.upper);
        }
        worst
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Le,
    Ge,
}

struct Row {
    coef: Vec<f64>,
    sense: Sense,
    rhs: f64,
    source: usize,
}

/// Returns an assignment meeting every constraint within
/// [`FEASIBILITY_TOLERANCE`], or a phase-one witness of infeasibility.
pub fn lp_feasible(lp: &IntervalPathLP) -> LpOutcome {
    let nv = lp.variables;
    let mut rows = Vec::new();
    for (k, c) in lp.constraints.iter().enumerate() {
        let mut coef = vec![0.0; nv];
        for &e in &c.edges {
            coef[e] += 1.0;
        }
        // Σy ≤ −lower, dropped when lower is −∞
        if c.lower.is_finite() {
            rows.push(Row { coef: coef.clone(), sense: Sense::Le, rhs: -c.lower, source: k });
        }
        // Σy ≥ −upper, vacuous when upper ≥ 0
        if c.upper < 0.0 {
            rows.push(Row { coef, sense: Sense::Ge, rhs: -c.upper, source: k });
        }
    }
    for r in &mut rows {
        if r.rhs < 0.0 {
            r.coef.iter_mut().for_each(|x| *x = -*x);
            r.rhs = -r.rhs;
            r.sense = if r.sense == Sense::Le { Sense::Ge } else { Sense::Le };
        }
    }
    let solved = Tableau::build(nv, &rows).phase_one();
    match solved {
        Ok(y) => {
            let w: Vec<f64> = y.iter().map(|v| if *v == 0.0 { 0.0 } else { -v }).collect();
            if lp.violation(&w) <= FEASIBILITY_TOLERANCE {
                LpOutcome::Feasible(w)
            } else {
                let violated = violated_constraints(lp, &w);
                LpOutcome::Infeasible(InfeasibilityWitness { residual: lp.violation(&w), violated })
            }
        }
        Err((residual, stuck)) => {
            let mut violated: Vec<usize> = stuck.into_iter().map(|r| rows[r].source).collect();
            violated.sort_unstable();
            violated.dedup();
            LpOutcome::Infeasible(InfeasibilityWitness { residual, violated })
        }
    }
}

fn violated_constraints(lp: &IntervalPathLP, w: &[f64]) -> Vec<usize> {
    lp.constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let s: f64 = c.edges.iter().map(|&e| w[e]).sum();
            c.lower - s > FEASIBILITY_TOLERANCE || s - c.upper > FEASIBILITY_TOLERANCE
        })
        .map(|(k, _)| k)
        .collect()
}

/// Dense tableau. Columns: structural, then one slack or surplus per row,
/// then one artificial per `≥` row. The last column is the right-hand side.
struct Tableau {
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    structural: usize,
    first_artificial: usize,
    width: usize,
    // row index owning each artificial column
    artificial_row: Vec<usize>,
}

impl Tableau {
    fn build(nv: usize, rows: &[Row]) -> Self {
        let m = rows.len();
        let n_art = rows.iter().filter(|r| r.sense == Sense::Ge).count();
        let first_artificial = nv + m;
        let width = first_artificial + n_art;
        let mut a = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut artificial_row = Vec::with_capacity(n_art);
        let mut next_art = first_artificial;
        for (i, r) in rows.iter().enumerate() {
            let mut line = vec![0.0; width + 1];
            line[..nv].copy_from_slice(&r.coef);
            line[width] = r.rhs;
            match r.sense {
                Sense::Le => {
                    line[nv + i] = 1.0;
                    basis.push(nv + i);
                }
                Sense::Ge => {
                    line[nv + i] = -1.0;
                    line[next_art] = 1.0;
                    basis.push(next_art);
                    artificial_row.push(i);
                    next_art += 1;
                }
            }
            a.push(line);
        }
        Tableau { a, basis, structural: nv, first_artificial, width, artificial_row }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        self.a[row].iter_mut().for_each(|x| *x /= p);
        let pivot_row = self.a[row].clone();
        for (i, line) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (x, y) in line.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes the sum of artificials. `Ok(y)` when it reaches zero,
    /// otherwise the residual and rows whose artificial stays positive.
    fn phase_one(mut self) -> core::result::Result<Vec<f64>, (f64, Vec<usize>)> {
        let w = self.width;
        // reduced costs of the phase-one objective, expressed in the basis
        let mut cost = vec![0.0; w + 1];
        for i in 0..self.a.len() {
            if self.basis[i] >= self.first_artificial {
                for (c, x) in cost.iter_mut().zip(&self.a[i]) {
                    *c -= x;
                }
            }
        }
        for c in &mut cost[self.first_artificial..w] {
            *c = 0.0;
        }
        loop {
            // Bland: lowest-index column with negative reduced cost
            let Some(col) = (0..self.first_artificial).find(|&j| cost[j] < -PIVOT_EPS) else {
                break;
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, line) in self.a.iter().enumerate() {
                if line[col] > PIVOT_EPS {
                    let ratio = line[w] / line[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_EPS || (ratio <= br + PIVOT_EPS && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = best else {
                // unbounded direction cannot lower a sum of non-negatives below zero
                break;
            };
            self.pivot(row, col);
            let f = cost[col];
            let pr = self.a[row].clone();
            for (c, x) in cost.iter_mut().zip(&pr) {
                *c -= f * x;
            }
        }
        let residual = -cost[w];
        let scale = 1.0 + self.a.iter().map(|l| l[w].abs()).fold(0.0, f64::max);
        if residual > 1e-10 * scale {
            let stuck = (0..self.a.len())
                .filter(|&i| self.basis[i] >= self.first_artificial && self.a[i][w] > PIVOT_EPS)
                .map(|i| self.artificial_row[self.basis[i] - self.first_artificial])
                .collect();
            return Err((residual, stuck));
        }
        let mut y = vec![0.0; self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                y[b] = self.a[i][w].max(0.0);
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::CorrelationVector;

    fn star_lp(alpha: [f64; 3], eta: f64) -> IntervalPathLP {
        // edges 0,1,2 lead to leaves 1,2,3
        let a = CorrelationVector::from_values(3, alpha.to_vec()).unwrap();
        let mut lp = IntervalPathLP::new(3);
        for (i, j, v) in a.pairs() {
            let lo = if v.abs() - eta > 0.0 { libm::log(v.abs() - eta) } else { f64::NEG_INFINITY };
            lp.push(vec![i - 1, j - 1], lo, libm::log(v.abs() + eta)).unwrap();
        }
        lp
    }

    #[test]
    fn exact_star_is_feasible() {
        let lp = star_lp([0.25, 0.5, 0.5], 0.01);
        let LpOutcome::Feasible(w) = lp_feasible(&lp) else { panic!("infeasible") };
        assert!(lp.violation(&w) <= FEASIBILITY_TOLERANCE);
        let sums = [w[0] + w[1], w[0] + w[2], w[1] + w[2]];
        for (s, a) in sums.iter().zip([0.25f64, 0.5, 0.5]) {
            assert!(*s >= libm::log(a - 0.01) - 1e-9 && *s <= libm::log(a + 0.01) + 1e-9);
        }
    }

    #[test]
    fn star_needing_weight_above_one_is_infeasible() {
        // edge to leaf 1 would need θ = sqrt(0.9·0.9/0.1) ≈ 2.85
        let LpOutcome::Infeasible(wit) = lp_feasible(&star_lp([0.9, 0.9, 0.1], 0.001)) else {
            panic!("expected infeasible")
        };
        assert!(wit.residual > 0.0);
        assert!(!wit.violated.is_empty());
    }

    #[test]
    fn upper_bounds_only() {
        let lp = star_lp([0.001, 0.002, 0.0], 0.01);
        assert!(lp.constraints().iter().all(|c| c.lower == f64::NEG_INFINITY));
        let LpOutcome::Feasible(w) = lp_feasible(&lp) else { panic!("infeasible") };
        assert!(lp.violation(&w) <= FEASIBILITY_TOLERANCE);
        assert!(w.iter().all(|&x| x < 0.0));
    }

    #[test]
    fn deterministic() {
        let lp = star_lp([0.3, 0.4, 0.5], 0.05);
        assert_eq!(lp_feasible(&lp), lp_feasible(&lp));
    }

    #[test]
    fn positive_lower_bound_cannot_be_met() {
        let mut lp = IntervalPathLP::new(2);
        lp.push(vec![0, 1], 0.5, 1.0).unwrap();
        assert!(matches!(lp_feasible(&lp), LpOutcome::Infeasible(_)));
        assert!(lp.push(vec![2], -1.0, 0.0).is_err());
        assert!(lp.push(vec![0], -1.0, -2.0).is_err());
    }
}
