use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Pairwise leaf correlations `α_ij` for leaves `1..=n`, stored once per
/// unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    n: usize,
    values: Vec<f64>,
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl CorrelationVector {
    pub fn zeros(n: usize) -> Self {
        CorrelationVector { n, values: vec![0.0; pair_count(n)] }
    }

    /// Values in pair order `(1,2), (1,3), …, (n-1,n)`.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != pair_count(n) {
            return Err(Error::DimensionMismatch { expected: pair_count(n), found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || libm::fabs(**v) > 1.0) {
            return Err(Error::BadParameter(alloc::format!("correlation {v} outside [-1, 1]")));
        }
        Ok(CorrelationVector { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(pair_count(n));
        for i in 1..=n {
            for j in i + 1..=n {
                values.push(f(i, j));
            }
        }
        CorrelationVector { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i >= 1 && j <= self.n && i != j, "pair ({i}, {j}) out of range");
        (i - 1) * (2 * self.n - i) / 2 + (j - i - 1)
    }

    /// `α_ij`; a leaf is perfectly correlated with itself.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        self.values[self.index(i, j)]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::UnknownPair(i, j));
        }
        for l in [i, j] {
            if l == 0 || l > self.n {
                return Err(Error::UnknownLeaf(l));
            }
        }
        Ok(self.get(i, j))
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.values[k] = value;
    }

    /// `(i, j, α_ij)` with `i < j`, in pair order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..=self.n)
            .flat_map(move |i| (i + 1..=self.n).map(move |j| (i, j)))
            .zip(self.values.iter())
            .map(|((i, j), &v)| (i, j, v))
    }

    pub fn abs(&self) -> Self {
        CorrelationVector { n: self.n, values: self.values.iter().map(|v| libm::fabs(*v)).collect() }
    }

    /// `max |α_ij − β_ij|`.
    pub fn max_abs_diff(&self, other: &CorrelationVector) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max))
    }
}
