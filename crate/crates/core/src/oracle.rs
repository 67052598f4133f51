//! Exact-arithmetic reference computations.
//!
//! Everything here works in big-integer or big-rational arithmetic end to
//! end and only rounds once, at the final conversion to `f64` (if at all).
//! The float pipeline is validated against these references in the test
//! suites; they are also exposed so callers can audit any individual
//! probability the fast path reports.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::divergence::multiplicity_exact;
use crate::enumeration::{nearest_source, EnumerationPlan};
use crate::math::ln_big_rational;
use crate::sets::{PreparedSet, SetExpr};
use crate::types::NType;
use crate::{Error, PriorSpec, Result};

/// x^e for a non-negative rational and machine-sized exponent.
fn rational_pow(x: &BigRational, e: u64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    Pow::pow(x.clone(), e as i32)
}

/// `prod_i counts_i^{observed_i}` with the convention 0^0 = 1. This is the
/// posterior weight of an n-source, up to the common factor n^-n.
pub fn source_weight_exact(counts: &[u64], observed: &NType) -> BigUint {
    let mut acc = BigUint::one();
    for (&c, &t) in counts.iter().zip(observed.counts()) {
        if t == 0 {
            continue;
        }
        if c == 0 {
            return BigUint::zero();
        }
        acc *= BigUint::from(c).pow(t as u32);
    }
    acc
}

/// Exact probability that n draws from `q` produce the type `t`:
/// multiplicity times `prod q_i^{t_i}`.
pub fn type_probability_exact(t: &NType, q: &[BigRational]) -> Result<BigRational> {
    if q.len() != t.m() {
        return Err(Error::DimensionMismatch { expected: t.m(), got: q.len() });
    }
    let mut acc = BigRational::from_integer(BigInt::from(multiplicity_exact(t)));
    for (qi, &ti) in q.iter().zip(t.counts()) {
        if ti == 0 {
            continue;
        }
        if qi.is_zero() {
            return Ok(BigRational::zero());
        }
        acc *= rational_pow(qi, ti);
    }
    Ok(acc)
}

/// Natural log of [`type_probability_exact`]; `-inf` for probability zero.
pub fn log_type_probability_exact(t: &NType, q: &[BigRational]) -> Result<f64> {
    let p = type_probability_exact(t, q)?;
    if p.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_big_rational(&p))
}

/// Exact prior masses per n-source cell for an atom prior. Atom weights
/// are finite floats, hence exact rationals; cell assignment matches the
/// float pipeline's quantization bit for bit (same apportionment).
fn atom_masses_exact(
    atoms: &[crate::PriorAtom],
    n: u64,
) -> Result<BTreeMap<Vec<u64>, BigRational>> {
    let mut masses: BTreeMap<Vec<u64>, BigRational> = BTreeMap::new();
    for atom in atoms {
        let cell = nearest_source(&atom.to_rationals(), n)?;
        let w = BigRational::from_float(atom.weight())
            .ok_or(Error::InvalidParameter("atom weight is not finite"))?;
        *masses.entry(cell).or_insert_with(BigRational::zero) += w;
    }
    Ok(masses)
}

/// Exact posterior probability of `set_b` against the conditioning set
/// `set_q`, given the observed type and a prior on the n-source lattice.
///
/// The common factor n^-n in every source likelihood cancels between
/// numerator and denominator, so the uniform-prior case reduces to ratios
/// of big-integer sums. Errors with `ConditioningOnNull` when the
/// conditioning mass is exactly zero.
pub fn posterior_prob_exact(
    set_b: &SetExpr,
    set_q: &SetExpr,
    observed: &NType,
    prior: &PriorSpec,
) -> Result<BigRational> {
    let n = observed.n();
    let m = observed.m();
    set_b.check_dimension(m)?;
    set_q.check_dimension(m)?;
    match prior {
        PriorSpec::Uniform => {
            let b = PreparedSet::new(set_b, m, n)?;
            let plan = EnumerationPlan::new(n, m)?.with_filter(set_q.clone())?;
            let mut num = BigUint::zero();
            let mut den = BigUint::zero();
            plan.for_each(|counts| {
                let w = source_weight_exact(counts, observed);
                if b.contains(counts) {
                    num += &w;
                }
                den += w;
            })?;
            if den.is_zero() {
                return Err(Error::ConditioningOnNull);
            }
            Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
        }
        PriorSpec::Atoms(atoms) => {
            let b = PreparedSet::new(set_b, m, n)?;
            let q = PreparedSet::new(set_q, m, n)?;
            let masses = atom_masses_exact(atoms, n)?;
            let mut num = BigRational::zero();
            let mut den = BigRational::zero();
            for (counts, w) in &masses {
                if !q.contains(counts) {
                    continue;
                }
                let lik = BigRational::from_integer(BigInt::from(source_weight_exact(
                    counts, observed,
                )));
                let term = w * lik;
                if b.contains(counts) {
                    num += &term;
                }
                den += term;
            }
            if den.is_zero() {
                return Err(Error::ConditioningOnNull);
            }
            Ok(num / den)
        }
    }
}
