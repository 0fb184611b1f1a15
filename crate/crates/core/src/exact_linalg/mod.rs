//! Exact sparse linear algebra over ℚ.

mod echelon;
pub(crate) mod int;
mod matrix;

pub use echelon::Echelon;
pub use matrix::SparseMatrix;

use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("d∘d ≠ 0 between degrees {0} and {1}")]
    CompositionNotZero(usize, usize),
    #[error("shape mismatch: map {0} has {1} columns but map {2} has {3} rows")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("bad rational literal {0:?}")]
    BadRational(String),
}

/// Parses "p/q", "p" or "-p/q".
pub fn parse_rational(s: &str) -> Result<Rational, LinalgError> {
    let bad = || LinalgError::BadRational(s.to_string());
    let t = s.trim();
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

pub fn rank(m: &SparseMatrix) -> usize {
    Echelon::of_matrix(m).rank()
}

/// Basis of the null space, one vector per non-pivot column.
pub fn kernel_basis(m: &SparseMatrix) -> Vec<Vec<Rational>> {
    Echelon::of_matrix(m).null_space()
}

/// Homology dimensions indexed by degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HomologyProfile {
    pub dims: BTreeMap<usize, usize>,
}

impl HomologyProfile {
    pub fn get(&self, k: usize) -> usize {
        self.dims.get(&k).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    /// Degrees with nonzero homology.
    pub fn support(&self) -> Vec<usize> {
        self.dims.iter().filter(|(_, d)| **d > 0).map(|(k, _)| *k).collect()
    }
}

/// Homology of `0 ← C_0 ← C_1 ← … ← C_r ← 0` where `ds[k-1]` is `d_k : C_k → C_{k-1}`
/// (a `dim C_{k-1} × dim C_k` matrix). Degrees run 0..=r.
pub fn homology(ds: &[SparseMatrix]) -> Result<HomologyProfile, LinalgError> {
    for k in 1..ds.len() {
        if ds[k - 1].cols() != ds[k].rows() {
            return Err(LinalgError::ShapeMismatch(k, ds[k - 1].cols(), k + 1, ds[k].rows()));
        }
        if !ds[k - 1].mul(&ds[k]).is_zero() {
            return Err(LinalgError::CompositionNotZero(k, k + 1));
        }
    }
    let ranks: Vec<usize> = ds.iter().map(rank).collect();
    let mut dims = BTreeMap::new();
    if ds.is_empty() {
        return Ok(HomologyProfile { dims });
    }
    for k in 0..=ds.len() {
        let dim_c = if k == 0 { ds[0].rows() } else { ds[k - 1].cols() };
        let out = if k == 0 { 0 } else { ranks[k - 1] };
        let inc = if k < ds.len() { ranks[k] } else { 0 };
        dims.insert(k, dim_c - out - inc);
    }
    Ok(HomologyProfile { dims })
}
