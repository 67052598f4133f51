//! Linear families: k moment constraints `sum_i q_i u_j(x_i) = a_j`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::types::{Alphabet, NType};
use crate::{Error, Result};

/// A linear family of pmfs given by exact rational moment constraints:
/// the set of q with `sum_i u[j][i] * q_i = a[j]` for every row j.
///
/// Exact representations are kept for membership tests on integer types;
/// float views are derived once for the iterative solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFamily {
    u: Vec<Vec<BigRational>>,
    a: Vec<BigRational>,
    // Rows with denominators cleared: sum_i w[j][i] * c_i = b[j] * n holds
    // for an n-type with counts c exactly when row j holds for counts/n.
    cleared: Vec<(Vec<BigInt>, BigInt)>,
    uf: Vec<Vec<f64>>,
    af: Vec<f64>,
}

/// Clear denominators of one constraint row, returning integer
/// coefficients w and integer target b with the same zero set.
pub(crate) fn clear_row(coeffs: &[BigRational], target: &BigRational) -> (Vec<BigInt>, BigInt) {
    let mut lcm = target.denom().clone();
    for c in coeffs {
        lcm = lcm.lcm(c.denom());
    }
    let scale = BigRational::from_integer(lcm);
    let w = coeffs.iter().map(|c| (c * &scale).to_integer()).collect();
    let b = (target * &scale).to_integer();
    (w, b)
}

impl LinearFamily {
    /// Build a family from a k-by-m coefficient matrix and k targets.
    pub fn new(u: Vec<Vec<BigRational>>, a: Vec<BigRational>) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidParameter("linear family needs at least one constraint"));
        }
        if u.len() != a.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), got: a.len() });
        }
        let m = u[0].len();
        if m == 0 {
            return Err(Error::InvalidParameter("constraint rows must be non-empty"));
        }
        for row in &u {
            if row.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: row.len() });
            }
        }
        let cleared = u.iter().zip(&a).map(|(row, t)| clear_row(row, t)).collect();
        let uf = u
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.to_f64().ok_or(Error::InvalidParameter("coefficient out of f64 range")))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let af = a
            .iter()
            .map(|t| t.to_f64().ok_or(Error::InvalidParameter("target out of f64 range")))
            .collect::<Result<Vec<f64>>>()?;
        Ok(LinearFamily { u, a, cleared, uf, af })
    }

    /// Single mean constraint `sum q_i * value_i = target` over an
    /// alphabet with numeric letter values.
    pub fn mean_constraint(alphabet: &Alphabet, target: BigRational) -> Result<Self> {
        let values = alphabet
            .values()
            .ok_or(Error::InvalidParameter("alphabet carries no letter values"))?;
        Self::new(alloc::vec![values.to_vec()], alloc::vec![target])
    }

    pub fn k(&self) -> usize {
        self.u.len()
    }

    pub fn m(&self) -> usize {
        self.u[0].len()
    }

    pub fn u(&self) -> &[Vec<BigRational>] {
        &self.u
    }

    pub fn a(&self) -> &[BigRational] {
        &self.a
    }

    pub(crate) fn u_float(&self) -> &[Vec<f64>] {
        &self.uf
    }

    pub(crate) fn a_float(&self) -> &[f64] {
        &self.af
    }

    /// Exact membership of an n-type: every cleared row must satisfy
    /// `sum w_i c_i = b * n`.
    pub fn holds_exactly(&self, t: &NType) -> Result<bool> {
        if t.m() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: t.m() });
        }
        let n = BigInt::from(t.n());
        Ok(self.cleared.iter().all(|(w, b)| {
            let mut s = BigInt::zero();
            for (wi, &c) in w.iter().zip(t.counts()) {
                s += wi * BigInt::from(c);
            }
            s == b * &n
        }))
    }

    /// Float residuals `sum u[j] . q - a[j]` of an arbitrary weight vector.
    pub fn residuals(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: q.len() });
        }
        Ok(self
            .uf
            .iter()
            .zip(&self.af)
            .map(|(row, &t)| row.iter().zip(q).map(|(u, w)| u * w).sum::<f64>() - t)
            .collect())
    }

    /// Where one row's target sits relative to the range of its
    /// coefficients over the given support (exact rational comparison).
    /// A constraint is achievable by some pmf on the support iff the
    /// target is not `Outside`; the interior-point solvers additionally
    /// require `Interior`.
    pub(crate) fn target_hull_position(&self, row: usize, support: &[usize]) -> HullPosition {
        let coeffs = &self.u[row];
        let mut lo: Option<&BigRational> = None;
        let mut hi: Option<&BigRational> = None;
        for &i in support {
            let c = &coeffs[i];
            if lo.is_none_or(|l| c < l) {
                lo = Some(c);
            }
            if hi.is_none_or(|h| c > h) {
                hi = Some(c);
            }
        }
        let (Some(l), Some(h)) = (lo, hi) else {
            return HullPosition::Outside;
        };
        let a = &self.a[row];
        if a < l || a > h {
            HullPosition::Outside
        } else if a == l || a == h {
            HullPosition::Boundary
        } else {
            HullPosition::Interior
        }
    }
}

/// Position of a constraint target within the achievable interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum HullPosition {
    Outside,
    Boundary,
    Interior,
}
