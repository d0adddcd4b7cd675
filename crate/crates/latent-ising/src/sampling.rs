//! Forward sampling of leaf spins.
//!
//! Row `r` of a sample drawn with seed `s` uses its own ChaCha8 stream keyed
//! by `(s, r)`, so rows can be generated in any order or in parallel and the
//! matrix is the same.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tree::WeightedTree;

/// `m` rows of `n` leaf spins, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMatrix {
    n: usize,
    data: Vec<i8>,
}

impl SampleMatrix {
    /// Wraps row-major spins, checking every value is ±1.
    pub fn new(n: usize, data: Vec<i8>) -> Result<Self> {
        if n == 0 || data.len() % n != 0 {
            return Err(Error::DimensionMismatch { expected: n, found: data.len() });
        }
        if let Some(k) = data.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::BadSpinValue { row: k / n, col: k % n, value: data[k] as i64 });
        }
        Ok(SampleMatrix { n, data })
    }

    pub fn from_rows(n: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 1 && v != -1 {
                    return Err(Error::BadSpinValue { row: r, col: c, value: v });
                }
                data.push(v as i8);
            }
        }
        Ok(SampleMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn row(&self, r: usize) -> &[i8] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, i8> {
        self.data.chunks_exact(self.n)
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }
}

/// Precomputed propagation order for one model.
#[derive(Debug, Clone)]
pub struct Sampler {
    n: usize,
    root: usize,
    // (child, parent, P[child spin == parent spin])
    steps: Vec<(usize, usize, f64)>,
    id_bound: usize,
}

impl Sampler {
    pub fn new(tree: &WeightedTree) -> Result<Self> {
        let t = tree.topology();
        if !t.has_standard_leaves() {
            return Err(Error::MalformedTree("sampling needs leaves 1..=n".into()));
        }
        let r = t.rooted();
        let steps = r.order[1..]
            .iter()
            .map(|&v| (v, r.parent[v], 0.5 * (1.0 + tree.theta()[r.parent_edge[v]])))
            .collect();
        Ok(Sampler { n: t.leaf_count(), root: r.root(), steps, id_bound: t.id_bound() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fills `out` (length `n`) with row `row` of the sample for `seed`.
    /// `spins` is scratch space.
    pub fn fill_row(&self, seed: u64, row: u64, out: &mut [i8], spins: &mut Vec<i8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(row);
        spins.clear();
        spins.resize(self.id_bound, 1);
        spins[self.root] = if rng.gen::<bool>() { 1 } else { -1 };
        for &(v, p, keep) in &self.steps {
            let u: f64 = rng.gen();
            spins[v] = if u < keep { spins[p] } else { -spins[p] };
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o = spins[k + 1];
        }
    }
}

/// `m` independent leaf samples; reproducible for a fixed `seed`.
pub fn sample(tree: &WeightedTree, m: usize, seed: u64) -> Result<SampleMatrix> {
    let s = Sampler::new(tree)?;
    let n = s.n();
    let mut data = vec![0i8; m * n];
    let mut scratch = Vec::new();
    for (r, row) in data.chunks_exact_mut(n).enumerate() {
        s.fill_row(seed, r as u64, row, &mut scratch);
    }
    Ok(SampleMatrix { n, data })
}
