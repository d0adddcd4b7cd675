use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};

/// Products closer than this are treated as equal when choosing a split.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// One of the three ways to pair a sorted quartet `a < b < c < d`, listed in
/// lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pairing {
    /// `{(ab)(cd)}`
    AbCd,
    /// `{(ac)(bd)}`
    AcBd,
    /// `{(ad)(bc)}`
    AdBc,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::AbCd, Pairing::AcBd, Pairing::AdBc];

    /// The two pairs for a sorted quartet.
    pub fn pairs(self, q: [usize; 4]) -> [(usize, usize); 2] {
        let [a, b, c, d] = q;
        match self {
            Pairing::AbCd => [(a, b), (c, d)],
            Pairing::AcBd => [(a, c), (b, d)],
            Pairing::AdBc => [(a, d), (b, c)],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Pairing whose path-length sum is strictly smallest, `None` on a tie.
pub(crate) fn pairing_from_sums(sums: [usize; 3]) -> Option<Pairing> {
    let min = *sums.iter().min().unwrap();
    let mut hits = Pairing::ALL.iter().zip(sums).filter(|(_, s)| *s == min);
    let first = hits.next().map(|(p, _)| *p);
    if hits.next().is_some() {
        None
    } else {
        first
    }
}

/// Quartet classification from correlation magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartetSplit {
    /// Sorted leaf labels.
    pub quartet: [usize; 4],
    pub split: Pairing,
    /// Largest minus smallest of the three cross-products.
    pub gap: f64,
}

/// `|α_xy|·|α_zw|` for each of the three pairings of a sorted quartet.
pub fn cross_products(alpha: &CorrelationVector, q: [usize; 4]) -> [f64; 3] {
    Pairing::ALL.map(|p| {
        let [(a, b), (c, d)] = p.pairs(q);
        libm::fabs(alpha.get(a, b)) * libm::fabs(alpha.get(c, d))
    })
}

/// Classifies a quartet by its largest cross-product. Products within
/// [`TIE_TOLERANCE`] of the maximum tie, and ties go to the first pairing in
/// lexicographic order.
pub fn quartet_split(alpha: &CorrelationVector, quartet: [usize; 4]) -> Result<QuartetSplit> {
    let mut q = quartet;
    q.sort_unstable();
    for &l in &q {
        if l == 0 || l > alpha.n() {
            return Err(Error::UnknownLeaf(l));
        }
    }
    if q.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BadParameter("quartet leaves must be distinct".into()));
    }
    let prods = cross_products(alpha, q);
    let max = prods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = prods.iter().cloned().fold(f64::INFINITY, f64::min);
    let k = prods.iter().position(|&p| p >= max - TIE_TOLERANCE).unwrap();
    Ok(QuartetSplit { quartet: q, split: Pairing::ALL[k], gap: max - min })
}
