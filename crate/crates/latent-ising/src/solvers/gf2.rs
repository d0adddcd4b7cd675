//! Linear systems over GF(2) by Gaussian elimination on bitset rows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Gf2System {
    variables: usize,
    // (variables with coefficient one, right-hand bit)
    equations: Vec<(Vec<usize>, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gf2Outcome {
    Solution(Vec<bool>),
    Inconsistent,
}

impl Gf2System {
    pub fn new(variables: usize) -> Self {
        Gf2System { variables, equations: Vec::new() }
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn equations(&self) -> &[(Vec<usize>, bool)] {
        &self.equations
    }

    /// Adds `Σ_{v∈vars} s_v = rhs`. Repeated variables cancel in pairs.
    pub fn push(&mut self, vars: Vec<usize>, rhs: bool) -> Result<()> {
        if let Some(&v) = vars.iter().find(|&&v| v >= self.variables) {
            return Err(Error::BadParameter(format!("variable {v} out of range")));
        }
        self.equations.push((vars, rhs));
        Ok(())
    }

    pub fn is_satisfied_by(&self, s: &[bool]) -> bool {
        self.equations.iter().all(|(vars, rhs)| vars.iter().fold(false, |acc, &v| acc ^ s[v]) == *rhs)
    }
}

/// Any solution, with free variables set to zero.
pub fn gf2_solve(system: &Gf2System) -> Gf2Outcome {
    let nv = system.variables;
    let words = nv / 64 + 1;
    // the right-hand side lives in bit `nv`
    let mut rows: Vec<Vec<u64>> = system
        .equations
        .iter()
        .map(|(vars, rhs)| {
            let mut r = vec![0u64; words];
            for &v in vars {
                r[v / 64] ^= 1 << (v % 64);
            }
            if *rhs {
                r[nv / 64] |= 1 << (nv % 64);
            }
            r
        })
        .collect();
    let bit = |r: &[u64], v: usize| r[v / 64] >> (v % 64) & 1 == 1;
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..nv {
        let Some(p) = (top..rows.len()).find(|&i| bit(&rows[i], col)) else { continue };
        rows.swap(top, p);
        let pivot = rows[top].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != top && bit(r, col) {
                r.iter_mut().zip(&pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        pivots.push(col);
        top += 1;
    }
    if rows[top..].iter().any(|r| bit(r, nv)) {
        return Gf2Outcome::Inconsistent;
    }
    let mut s = vec![false; nv];
    for (i, &col) in pivots.iter().enumerate() {
        s[col] = bit(&rows[i], nv);
    }
    Gf2Outcome::Solution(s)
}
