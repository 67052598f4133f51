//! Numeric support: log-space accumulation, factorials, binomials and
//! small dense linear solves (float and exact rational).

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Natural logarithm (works without `std`).
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Exponential (works without `std`).
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// log Gamma(x) for x > 0.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// log n! via the Gamma function.
#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Natural log of an arbitrarily large positive integer.
///
/// The top 64 bits carry the mantissa, the discarded low bits contribute a
/// relative error below 2^-63, so the result is accurate to the last few
/// ulps regardless of magnitude. `ln(0) = -inf`.
pub fn ln_biguint(x: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return ln(x.to_u64().expect("fits in 64 bits") as f64);
    }
    let shift = bits - 64;
    let mant = (x >> shift).to_u64().expect("top 64 bits");
    ln(mant as f64) + shift as f64 * core::f64::consts::LN_2
}

/// Natural log of a positive rational, accurate even when numerator and
/// denominator are individually astronomical.
pub fn ln_big_rational(x: &BigRational) -> f64 {
    debug_assert!(!x.is_negative(), "log of a negative rational");
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    // Multiply and divide alternately; each intermediate division is exact
    // because C(n-k+1..n-k+i, i) is an integer.
    for i in 1..=k {
        acc *= BigUint::from(n - k + i);
        acc /= BigUint::from(i);
    }
    acc
}

/// Streaming log-sum-exp accumulator with a running maximum.
///
/// Represents `log sum_i exp(x_i)` as `max + log(sum_i exp(x_i - max))`.
/// The empty sum (and any sum of `-inf` terms) is `-inf`, the log of an
/// exactly-zero mass. Accumulators merge associatively enough for a fixed
/// merge order to be bitwise reproducible; callers that split work must
/// merge partial accumulators in a deterministic order.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    /// sum of exp(x_i - max); 0 encodes the empty accumulator.
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    /// Add one log-space term; `-inf` terms are no-ops.
    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if self.sum == 0.0 {
            self.max = x;
            self.sum = 1.0;
        } else if x > self.max {
            self.sum = self.sum * exp(self.max - x) + 1.0;
            self.max = x;
        } else {
            self.sum += exp(x - self.max);
        }
    }

    /// Merge another accumulator into this one.
    pub fn merge(&mut self, other: LogSumExp) {
        if other.sum == 0.0 {
            return;
        }
        if self.sum == 0.0 {
            *self = other;
        } else if other.max > self.max {
            self.sum = self.sum * exp(self.max - other.max) + other.sum;
            self.max = other.max;
        } else {
            self.sum += other.sum * exp(other.max - self.max);
        }
    }

    /// The accumulated `log sum exp`, `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + ln(self.sum)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sum == 0.0
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

/// Solve the dense system `a x = b` in place by Gaussian elimination with
/// partial pivoting. Returns `None` when the matrix is numerically singular.
/// Intended for the k-by-k Newton systems of the projection solvers, where
/// k is the (small) number of moment constraints.
pub fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let k = b.len();
    debug_assert!(a.len() == k && a.iter().all(|row| row.len() == k));
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("residuals are finite")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut s = b[row];
        for c in row + 1..k {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Outcome of an exact affine solve over the rationals.
pub enum AffineSolution {
    /// The system pins every coordinate.
    Unique(Vec<BigRational>),
    /// Consistent but with free coordinates remaining.
    Underdetermined,
    /// No solution.
    Inconsistent,
}

/// Solve `rows * x = rhs` exactly over the rationals by fraction-free
/// Gaussian elimination. Used to detect constraint systems that pin a
/// unique point before any iterative solver runs.
pub fn solve_exact_affine(rows: &[Vec<BigRational>], rhs: &[BigRational]) -> AffineSolution {
    let nrows = rows.len();
    debug_assert_eq!(nrows, rhs.len());
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].clone();
        for v in m[r][c..].iter_mut() {
            *v /= &inv;
        }
        for i in 0..nrows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for cc in c..=ncols {
                    let sub = &m[r][cc] * &f;
                    m[i][cc] -= sub;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    // Any zero row with nonzero rhs makes the system inconsistent.
    for i in r..nrows {
        if !m[i][ncols].is_zero() {
            return AffineSolution::Inconsistent;
        }
    }
    if pivot_cols.len() < ncols {
        return AffineSolution::Underdetermined;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[row][ncols].clone();
    }
    AffineSolution::Unique(x)
}

/// Exact absolute value for rationals (convenience re-export point).
pub fn rational_abs(x: &BigRational) -> BigRational {
    x.abs()
}
