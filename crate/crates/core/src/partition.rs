//! Quantization of continuous observations onto a finite alphabet: exact
//! interval partitions of the real line, sample classification, cell-mass
//! pmfs, and the best-candidate log-likelihood over a finite source list.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::divergence::l_divergence;
use crate::types::{make_pmf, NType, Pmf};
use crate::{Error, Result};

/// Mass-normalization slack accepted when building a cell-mass pmf.
const CELL_MASS_TOLERANCE: f64 = 1e-9;

/// An ordered interval partition of the real line into m >= 2 cells.
///
/// Cut points are exact rationals; cell j is `[cut_{j-1}, cut_j)` (the
/// first cell is unbounded below, the last unbounded above), so boundary
/// samples classify into the cell on their right, decided exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSpec {
    cuts: Vec<BigRational>,
    labels: Option<Vec<String>>,
}

impl PartitionSpec {
    /// Build a partition from strictly increasing cut points.
    pub fn intervals(cuts: Vec<BigRational>) -> Result<PartitionSpec> {
        if cuts.is_empty() {
            return Err(Error::InvalidPartition(String::from(
                "a partition needs at least one cut point",
            )));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(String::from(
                "cut points must be strictly increasing",
            )));
        }
        Ok(PartitionSpec { cuts, labels: None })
    }

    /// Attach display labels, one per cell.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<PartitionSpec> {
        if labels.len() != self.m() {
            return Err(Error::InvalidPartition(alloc::format!(
                "{} labels for {} cells",
                labels.len(),
                self.m()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Number of cells.
    pub fn m(&self) -> usize {
        self.cuts.len() + 1
    }

    pub fn cuts(&self) -> &[BigRational] {
        &self.cuts
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Cell index of a sample; the comparison against the rational cut
    /// points is exact. Non-finite samples are rejected.
    pub fn classify(&self, x: f64) -> Result<usize> {
        let Some(r) = BigRational::from_float(x) else {
            return Err(Error::InvalidParameter("sample is not a finite number"));
        };
        Ok(self.cuts.iter().take_while(|c| **c <= r).count())
    }
}

/// Validate per-cell masses against a partition and return them as a pmf
/// on the induced finite alphabet. Masses must be one per cell and sum to
/// 1 within `1e-9`; they are taken as-is, never renormalized.
pub fn quantize(masses: &[f64], partition: &PartitionSpec) -> Result<Pmf> {
    if masses.len() != partition.m() {
        return Err(Error::DimensionMismatch { expected: partition.m(), got: masses.len() });
    }
    make_pmf(masses, CELL_MASS_TOLERANCE)
}

/// Classify a batch of samples and return the resulting type (cell counts
/// over the partition's alphabet).
pub fn quantize_samples(samples: &[f64], partition: &PartitionSpec) -> Result<NType> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("cannot type an empty sample batch"));
    }
    let mut counts = vec![0u64; partition.m()];
    for &x in samples {
        counts[partition.classify(x)?] += 1;
    }
    NType::new(counts, samples.len() as u64)
}

/// Best per-letter log-likelihood of a type over a finite candidate list:
/// `max_j L(source_j || t)`. `-inf` when every candidate misses some
/// letter of the type's support.
pub fn l_m_divergence(t: &Pmf, sources: &[Pmf]) -> Result<f64> {
    if sources.is_empty() {
        return Err(Error::InvalidParameter("candidate source list is empty"));
    }
    let mut best = f64::NEG_INFINITY;
    for s in sources {
        let v = l_divergence(s, t)?;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn thirds() -> PartitionSpec {
        PartitionSpec::intervals(vec![rat(1, 3), rat(2, 3)]).unwrap()
    }

    #[test]
    fn construction_validates_cut_order() {
        assert!(PartitionSpec::intervals(vec![]).is_err());
        assert!(PartitionSpec::intervals(vec![rat(1, 2), rat(1, 2)]).is_err());
        assert!(PartitionSpec::intervals(vec![rat(2, 3), rat(1, 3)]).is_err());
        assert_eq!(thirds().m(), 3);
    }

    #[test]
    fn classification_is_exact_at_boundaries() {
        let p = PartitionSpec::intervals(vec![rat(1, 4), rat(1, 2)]).unwrap();
        assert_eq!(p.classify(0.0).unwrap(), 0);
        // 0.25 and 0.5 are exact floats sitting on the cuts: they belong
        // to the right cell.
        assert_eq!(p.classify(0.25).unwrap(), 1);
        assert_eq!(p.classify(0.5).unwrap(), 2);
        // The float just below 0.25 stays left.
        assert_eq!(p.classify(0.25 - f64::EPSILON / 4.0).unwrap(), 0);
        assert_eq!(p.classify(-1e300).unwrap(), 0);
        assert_eq!(p.classify(1e300).unwrap(), 2);
        assert!(p.classify(f64::NAN).is_err());
        assert!(p.classify(f64::INFINITY).is_err());

        // 1/3 is not a float: the nearest f64 sits strictly below the cut.
        let t = thirds();
        assert_eq!(t.classify(1.0 / 3.0).unwrap(), 0);
        assert_eq!(t.classify(0.34).unwrap(), 1);
    }

    #[test]
    fn sample_batches_become_types() {
        let t = thirds();
        let samples = [0.1, 0.2, 0.4, 0.9, 0.95, 0.5];
        let ty = quantize_samples(&samples, &t).unwrap();
        assert_eq!(ty.counts(), [2, 2, 2]);
        assert_eq!(ty.n(), 6);
        assert!(quantize_samples(&[], &t).is_err());
    }

    #[test]
    fn cell_masses_validate_against_the_partition() {
        let t = thirds();
        let p = quantize(&[0.2, 0.3, 0.5], &t).unwrap();
        assert_eq!(p.len(), 3);
        assert!(quantize(&[0.5, 0.5], &t).is_err());
        assert!(quantize(&[0.2, 0.3, 0.4], &t).is_err()); // sums to 0.9
    }

    #[test]
    fn best_candidate_likelihood_is_the_max() {
        let t = make_pmf(&[0.5, 0.25, 0.25], 1e-12).unwrap();
        let a = make_pmf(&[0.6, 0.2, 0.2], 1e-12).unwrap();
        let b = make_pmf(&[0.2, 0.4, 0.4], 1e-12).unwrap();
        let la = l_divergence(&a, &t).unwrap();
        let lb = l_divergence(&b, &t).unwrap();
        let lm = l_m_divergence(&t, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(lm, la.max(lb));
        assert_eq!(lm, la); // a is closer to t

        // A candidate with a structural zero on t's support scores -inf.
        let c = make_pmf(&[1.0, 0.0, 0.0], 1e-12).unwrap();
        assert_eq!(l_m_divergence(&t, &[c]).unwrap(), f64::NEG_INFINITY);
        assert!(l_m_divergence(&t, &[]).is_err());
    }

    #[test]
    fn labels_attach_per_cell() {
        let t = thirds()
            .with_labels(vec!["low".into(), "mid".into(), "high".into()])
            .unwrap();
        assert_eq!(t.labels().unwrap()[1], "mid");
        assert!(thirds().with_labels(vec!["only".into()]).is_err());
    }
}
