//! Prior specifications over sources: uniform over all n-sources, or a
//! finite list of exact rational atoms with positive weights.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::{Error, Result};

/// One prior atom: an exact rational pmf `counts / den` with a weight.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorAtom {
    counts: Vec<u64>,
    den: u64,
    weight: f64,
}

impl PriorAtom {
    pub fn new(counts: Vec<u64>, den: u64, weight: f64) -> Result<Self> {
        let sum: u64 = counts.iter().sum();
        if den == 0 || sum != den || counts.is_empty() {
            return Err(Error::InvalidCounts { sum, n: den });
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::InvalidPrior("atom weight must be positive and finite".to_string()));
        }
        Ok(PriorAtom { counts, den, weight })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Exact rational coordinates `counts / den`.
    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.counts
            .iter()
            .map(|&c| BigRational::new((c as i64).into(), (self.den as i64).into()))
            .collect()
    }
}

/// Prior over sources.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorSpec {
    /// Uniform over all n-sources (mass 1/N each, N the number of n-types).
    Uniform,
    /// Finite atom list; weights are normalized to sum 1 at construction.
    Atoms(Vec<PriorAtom>),
}

impl PriorSpec {
    /// Build an atom prior. Weights must be positive and sum to 1 within
    /// `1e-9`; they are then rescaled by their exact float sum so that
    /// downstream mass bookkeeping starts from a normalized list.
    pub fn atoms(mut atoms: Vec<PriorAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPrior("atom list is empty".to_string()));
        }
        let m = atoms[0].counts.len();
        for a in &atoms {
            if a.counts.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: a.counts.len() });
            }
        }
        let sum: f64 = atoms.iter().map(|a| a.weight).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPrior(alloc::format!(
                "atom weights sum to {sum}, expected 1 within 1e-9"
            )));
        }
        for a in &mut atoms {
            a.weight /= sum;
        }
        Ok(PriorSpec::Atoms(atoms))
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, PriorSpec::Uniform)
    }

    /// Alphabet size the prior commits to, if any.
    pub fn m(&self) -> Option<usize> {
        match self {
            PriorSpec::Uniform => None,
            PriorSpec::Atoms(atoms) => atoms.first().map(|a| a.counts.len()),
        }
    }
}
