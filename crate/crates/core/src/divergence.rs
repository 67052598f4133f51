//! I-divergence, L-divergence, Kerridge inaccuracy, multiplicities and
//! type probabilities, all in natural-log space.
//!
//! Conventions: `0 log 0 = 0` (sums run over the support of the weighting
//! pmf only) and `log b/0 = +inf`, so `I(p||q) = +inf` exactly when p puts
//! mass outside the support of q, and `L(q||p) = -inf` exactly when q has
//! a zero on the support of p.

use num_bigint::BigUint;
use num_traits::One;

use crate::math::{ln, ln_factorial};
use crate::types::{NType, Pmf};
use crate::{Error, Result};

/// A base-e log-probability; `-inf` encodes an exactly-zero mass.
///
/// Adding `-inf` to anything yields `-inf`, and a log-sum-exp over only
/// `-inf` terms is `-inf` (see [`crate::math::LogSumExp`]).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub const ZERO_MASS: LogWeight = LogWeight(f64::NEG_INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero_mass(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

/// Shannon entropy `-sum p_i log p_i` in nats.
pub fn entropy(p: &Pmf) -> f64 {
    let mut h = 0.0;
    for i in p.support() {
        let w = p.weight(i);
        h -= w * ln(w);
    }
    h
}

/// I-divergence (relative entropy) `sum_{S(p)} p_i log(p_i / q_i)`.
/// `+inf` exactly when p has mass outside the support of q; never negative.
pub fn i_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    check_len(p.len(), q.len())?;
    let mut acc = 0.0;
    for i in p.support() {
        let qi = q.weight(i);
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        let pi = p.weight(i);
        acc += pi * ln(pi / qi);
    }
    // Clamp the tiny negative float residue of I(p, p) to the exact lower
    // bound so the non-negativity contract holds verbatim.
    Ok(if acc < 0.0 && acc > -1e-13 { 0.0 } else { acc })
}

/// L-divergence `sum_{S(p)} p_i log q_i`: the per-letter log-likelihood of
/// the source q under the type p. `-inf` exactly when q has a zero on the
/// support of p; never positive.
pub fn l_divergence(q: &Pmf, p: &Pmf) -> Result<f64> {
    check_len(q.len(), p.len())?;
    let mut acc = 0.0;
    for i in p.support() {
        let qi = q.weight(i);
        if qi == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += p.weight(i) * ln(qi);
    }
    Ok(acc.min(0.0))
}

/// Kerridge inaccuracy `-L(q||p) = -sum_{S(p)} p_i log q_i`; never negative.
pub fn kerridge_inaccuracy(p: &Pmf, q: &Pmf) -> Result<f64> {
    Ok(-l_divergence(q, p)?)
}

/// log of the multiplicity `n! / prod n_i!` of a type (float path).
pub fn log_multiplicity(t: &NType) -> f64 {
    let mut acc = ln_factorial(t.n());
    for &c in t.counts() {
        acc -= ln_factorial(c);
    }
    acc
}

/// Exact big-integer multiplicity `n! / prod n_i!`.
pub fn multiplicity_exact(t: &NType) -> BigUint {
    // Running product of binomials: n! / prod n_i! =
    // prod_j C(s_j, c_j) with s_j the prefix sums.
    let mut acc = BigUint::one();
    let mut s = 0u64;
    for &c in t.counts() {
        s += c;
        acc *= crate::math::binomial(s, c);
    }
    acc
}

/// log probability that `source` generates the type t:
/// `log Gamma(t) + sum_i n_i log source_i`.
pub fn log_type_probability(t: &NType, source: &Pmf) -> Result<LogWeight> {
    check_len(t.m(), source.len())?;
    let mut acc = log_multiplicity(t);
    for (i, &c) in t.counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let w = source.weight(i);
        if w == 0.0 {
            return Ok(LogWeight::ZERO_MASS);
        }
        acc += c as f64 * ln(w);
    }
    Ok(LogWeight(acc))
}

/// Per-source log-likelihood factor without the multiplicity:
/// `sum_i n_i log q_i = n * L(q || counts/n)`.
pub fn log_source_likelihood(t: &NType, q: &Pmf) -> Result<LogWeight> {
    check_len(t.m(), q.len())?;
    let mut acc = 0.0;
    for (i, &c) in t.counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let w = q.weight(i);
        if w == 0.0 {
            return Ok(LogWeight::ZERO_MASS);
        }
        acc += c as f64 * ln(w);
    }
    Ok(LogWeight(acc))
}

/// [`log_source_likelihood`] for a source given as an exact type.
pub fn log_source_likelihood_type(t: &NType, q: &NType) -> Result<LogWeight> {
    check_len(t.m(), q.m())?;
    log_source_likelihood(t, &q.induced_pmf())
}

/// Prior-weighted score `lambda(q || t) = L(q || t) + log(prior mass) / n`.
/// A zero prior mass or unsupported source excludes q with `-inf`.
pub fn lambda_score(q: &NType, t: &NType, prior_logmass: LogWeight, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("lambda score needs n > 0"));
    }
    let l = log_source_likelihood_type(t, q)?;
    if l.is_zero_mass() || prior_logmass.is_zero_mass() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(l.value() / t.n() as f64 + prior_logmass.value() / n as f64)
}
