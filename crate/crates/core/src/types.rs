//! Alphabets, pmfs and exact integer types (n-rational pmfs).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// A finite ordered alphabet of `m` letters, optionally carrying exact
/// rational letter values for moment constraints (for example the values
/// 1, 2, 3, 4 of a four-letter alphabet).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<String>,
    values: Option<Vec<BigRational>>,
}

impl Alphabet {
    /// Build an alphabet from distinct letter labels and optional values.
    pub fn new(letters: Vec<String>, values: Option<Vec<BigRational>>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidParameter("alphabet must have at least one letter"));
        }
        for (i, l) in letters.iter().enumerate() {
            if letters[..i].contains(l) {
                return Err(Error::DuplicateLetter(l.clone()));
            }
        }
        if let Some(v) = &values {
            if v.len() != letters.len() {
                return Err(Error::DimensionMismatch { expected: letters.len(), got: v.len() });
            }
        }
        Ok(Alphabet { letters, values })
    }

    /// Alphabet with letters "1".."m" valued 1..m.
    pub fn integer_valued(m: usize) -> Self {
        let letters = (1..=m).map(|i| {
            let mut s = String::new();
            fmt::Write::write_fmt(&mut s, format_args!("{i}")).expect("writing to a String");
            s
        });
        let values = (1..=m).map(|i| BigRational::from_integer((i as i64).into()));
        Alphabet { letters: letters.collect(), values: Some(values.collect()) }
    }

    pub fn size(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn values(&self) -> Option<&[BigRational]> {
        self.values.as_deref()
    }
}

/// A probability mass function on a finite ordered alphabet.
///
/// Weights are validated at construction: non-negative, finite, summing to
/// one within the stated tolerance, with non-empty support. They are never
/// renormalized afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    weights: Vec<f64>,
    tolerance: f64,
}

/// Validate `weights` as a pmf. Weights are checked, not renormalized.
pub fn make_pmf(weights: &[f64], tolerance: f64) -> Result<Pmf> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter("pmf must have at least one weight"));
    }
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidParameter("tolerance must be finite and non-negative"));
    }
    let mut sum = 0.0;
    let mut any_positive = false;
    for (i, &w) in weights.iter().enumerate() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeight { index: i, value: w });
        }
        any_positive |= w > 0.0;
        sum += w;
    }
    if !((sum - 1.0).abs() <= tolerance) {
        return Err(Error::MassNotNormalized { sum, tolerance });
    }
    if !any_positive {
        return Err(Error::EmptySupport);
    }
    Ok(Pmf { weights: weights.to_vec(), tolerance })
}

/// Indices with strictly positive weight, in ascending order.
pub fn support(p: &Pmf) -> Vec<usize> {
    p.support().collect()
}

impl Pmf {
    /// The uniform pmf on `m` letters.
    pub fn uniform(m: usize) -> Pmf {
        debug_assert!(m > 0);
        Pmf { weights: alloc::vec![1.0 / m as f64; m], tolerance: 0.0 }
    }

    /// Build a pmf from exact rational weights; the sum-to-one check runs in
    /// exact arithmetic, so no floating drift can fail it.
    pub fn from_exact(weights: &[BigRational]) -> Result<Pmf> {
        let mut sum = BigRational::zero();
        for (i, w) in weights.iter().enumerate() {
            if w < &BigRational::zero() {
                return Err(Error::InvalidWeight { index: i, value: w.to_f64().unwrap_or(f64::NAN) });
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(Error::MassNotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
                tolerance: 0.0,
            });
        }
        let floats: Vec<f64> = weights
            .iter()
            .map(|w| w.to_f64().ok_or(Error::InvalidParameter("weight out of f64 range")))
            .collect::<Result<_>>()?;
        if floats.iter().all(|&w| w == 0.0) {
            return Err(Error::EmptySupport);
        }
        Ok(Pmf { weights: floats, tolerance: 0.0 })
    }

    /// Internal constructor for weights already known to be valid.
    pub(crate) fn from_validated(weights: Vec<f64>) -> Pmf {
        Pmf { weights, tolerance: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Iterator over support indices.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i)
    }

    /// Exact rational view of the weights. Every finite f64 is a dyadic
    /// rational, so this conversion is lossless.
    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.weights
            .iter()
            .map(|&w| BigRational::from_float(w).expect("pmf weights are finite"))
            .collect()
    }
}

/// An exact integer type: counts `[n_1, ..., n_m]` with `sum n_i = n > 0`,
/// identified with the n-rational pmf `counts / n`.
///
/// The derived ordering is lexicographic on the count vector and is the
/// tie-breaking order used throughout the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NType {
    counts: Vec<u64>,
    n: u64,
}

impl NType {
    /// Build a type after checking `sum counts = n` and `n > 0`.
    pub fn new(counts: Vec<u64>, n: u64) -> Result<Self> {
        let sum: u64 = counts.iter().sum();
        if n == 0 || sum != n || counts.is_empty() {
            return Err(Error::InvalidCounts { sum, n });
        }
        Ok(NType { counts, n })
    }

    /// Build a type with `n` inferred from the counts.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let n = counts.iter().sum();
        Self::new(counts, n)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    /// The induced pmf `counts / n`. Validity is guaranteed by the exact
    /// integer invariant `sum counts = n`, so no tolerance is involved; the
    /// stored weights are the correctly rounded values `counts_i / n`.
    pub fn induced_pmf(&self) -> Pmf {
        let n = self.n as f64;
        Pmf::from_validated(self.counts.iter().map(|&c| c as f64 / n).collect())
    }

    /// Exact rational view `counts / n`.
    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.counts
            .iter()
            .map(|&c| BigRational::new((c as i64).into(), (self.n as i64).into()))
            .collect()
    }
}

impl fmt::Display for NType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]/{}", self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_pmf_accepts_valid_and_rejects_invalid() {
        assert!(make_pmf(&[0.5, 0.5], 1e-12).is_ok());
        // Sums to 1.000 exactly in decimal; well inside the loose tolerance.
        assert!(make_pmf(&[0.705, 0.073, 0.039, 0.183], 1e-3).is_ok());
        assert!(matches!(
            make_pmf(&[0.6, 0.5], 1e-12),
            Err(Error::MassNotNormalized { .. })
        ));
        assert!(matches!(
            make_pmf(&[-0.1, 1.1], 1e-12),
            Err(Error::InvalidWeight { index: 0, .. })
        ));
        assert!(matches!(make_pmf(&[0.0, 0.0], 1.0), Err(Error::EmptySupport)));
        assert!(matches!(
            make_pmf(&[f64::NAN, 1.0], 1e-12),
            Err(Error::InvalidWeight { .. })
        ));
    }

    #[test]
    fn support_reports_positive_indices() {
        let p = make_pmf(&[1.0, 0.0], 0.0).unwrap();
        assert_eq!(support(&p), [0]);
        let q = make_pmf(&[0.25, 0.25, 0.25, 0.25], 0.0).unwrap();
        assert_eq!(support(&q), [0, 1, 2, 3]);
        let t = NType::from_counts(alloc::vec![1, 1, 1, 7]).unwrap();
        assert_eq!(support(&t.induced_pmf()), [0, 1, 2, 3]);
    }

    #[test]
    fn ntype_validates_counts() {
        assert!(NType::new(alloc::vec![2, 0], 2).is_ok());
        assert!(matches!(NType::new(alloc::vec![2, 1], 2), Err(Error::InvalidCounts { .. })));
        assert!(matches!(NType::new(alloc::vec![], 0), Err(Error::InvalidCounts { .. })));
        assert!(matches!(NType::from_counts(alloc::vec![0, 0]), Err(Error::InvalidCounts { .. })));
    }

    #[test]
    fn induced_pmf_is_exact_for_awkward_denominators() {
        // 1/3 + 1/3 + 1/3 need not hit 1.0 in floating point; the exact
        // integer invariant keeps the induced pmf valid anyway.
        let t = NType::from_counts(alloc::vec![1, 1, 1]).unwrap();
        let p = t.induced_pmf();
        assert_eq!(p.len(), 3);
        assert!(Pmf::from_exact(&t.to_rationals()).is_ok());
        assert_eq!(support(&p), [0, 1, 2]);
    }

    #[test]
    fn exact_pmf_roundtrip_through_rationals() {
        let p = make_pmf(&[0.1, 0.1, 0.1, 0.7], 1e-12).unwrap();
        // f64 -> rational is lossless, but these decimals do not sum to an
        // exact 1 in binary, so the exact constructor must reject them.
        assert!(Pmf::from_exact(&p.to_rationals()).is_err());
        // Dyadic weights survive the exact check.
        let q = make_pmf(&[0.25, 0.25, 0.5], 0.0).unwrap();
        assert!(Pmf::from_exact(&q.to_rationals()).is_ok());
    }

    #[test]
    fn alphabet_rejects_duplicates_and_bad_values() {
        use alloc::string::ToString;
        assert!(Alphabet::new(alloc::vec!["a".to_string(), "a".to_string()], None).is_err());
        let a = Alphabet::integer_valued(4);
        assert_eq!(a.size(), 4);
        assert_eq!(a.letters()[3], "4");
        assert_eq!(a.values().unwrap()[2], BigRational::from_integer(3.into()));
    }

    #[test]
    fn ntype_ordering_is_lexicographic() {
        let a = NType::new(alloc::vec![0, 2], 2).unwrap();
        let b = NType::new(alloc::vec![1, 1], 2).unwrap();
        let c = NType::new(alloc::vec![2, 0], 2).unwrap();
        assert!(a < b && b < c);
    }
}
