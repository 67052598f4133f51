//! Exhaustive enumeration of n-types, optionally restricted to a source
//! set, plus k-equivalent scaling, type rounding and prior quantization.
//!
//! The unfiltered stream visits every composition of n into m non-negative
//! parts exactly once, ordered with the leading coordinate descending and
//! recursively so for the remaining coordinates ([n,0,...], then
//! [n-1,1,0,...], down to [0,...,0,n]). The stream splits into one block
//! per leading-coordinate value; blocks are independent, so callers may
//! fan them out to worker threads, provided partial reductions are merged
//! in block order to keep results bitwise reproducible.
//!
//! A single linear equality in the filter is pushed into the enumerator:
//! the last two coordinates are solved from the (sum, equality) pair of
//! integer equations instead of being enumerated. For the mean-constrained
//! sets this turns an O(n^(m-1)) sweep into the O(n^(m-2)) feasible slice.
//! All remaining atoms are verified per candidate in exact arithmetic, so
//! push-down never changes which types are emitted, only how fast.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::math::{binomial, ln_biguint};
use crate::sets::{PreparedSet, SetExpr};
use crate::types::{NType, Pmf};
use crate::{Error, PriorSpec, Result};

/// A plan for enumerating the n-types on m letters, optionally filtered.
#[derive(Clone, Debug)]
pub struct EnumerationPlan {
    n: u64,
    m: usize,
    filter: Option<SetExpr>,
}

impl EnumerationPlan {
    pub fn new(n: u64, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("enumeration needs n >= 1 and m >= 1"));
        }
        Ok(EnumerationPlan { n, m, filter: None })
    }

    /// Restrict the stream to members of `filter` (exact membership).
    pub fn with_filter(mut self, filter: SetExpr) -> Result<Self> {
        filter.check_dimension(self.m)?;
        self.filter = Some(filter);
        Ok(self)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of unfiltered stream members: C(n+m-1, m-1).
    pub fn count_unfiltered(&self) -> BigUint {
        binomial(self.n + self.m as u64 - 1, self.m as u64 - 1)
    }

    /// Split the stream into per-leading-coordinate blocks. Blocks share
    /// the compiled filter and may run on different threads.
    pub fn blocks(&self) -> Result<Vec<Block>> {
        let (pushdown, rest) = match &self.filter {
            None => (None, None),
            Some(f) => {
                let prepared = PreparedSet::new(f, self.m, self.n)?;
                let (eq, rest) = prepared.split_equality();
                (eq.map(Arc::new), rest.map(Arc::new))
            }
        };
        if self.m == 1 {
            return Ok(vec![Block {
                n: self.n,
                m: 1,
                first: self.n,
                pushdown,
                rest,
            }]);
        }
        Ok((0..=self.n)
            .rev()
            .map(|first| Block {
                n: self.n,
                m: self.m,
                first,
                pushdown: pushdown.clone(),
                rest: rest.clone(),
            })
            .collect())
    }

    /// Visit every stream member in order; the slice is a reused buffer.
    pub fn for_each<F: FnMut(&[u64])>(&self, mut f: F) -> Result<()> {
        for b in self.blocks()? {
            b.try_for_each(|c| {
                f(c);
                ControlFlow::<()>::Continue(())
            });
        }
        Ok(())
    }

    /// Materialize the stream; meant for small instances and tests.
    pub fn collect_types(&self) -> Result<Vec<NType>> {
        let mut out = Vec::new();
        self.for_each(|c| {
            out.push(NType::new(c.to_vec(), c.iter().sum()).expect("emitted counts sum to n"));
        })?;
        Ok(out)
    }
}

/// Enumerate one plan into a vector of types (small-instance convenience).
pub fn enumerate_sources(plan: &EnumerationPlan) -> Result<Vec<NType>> {
    plan.collect_types()
}

/// One leading-coordinate slice of an enumeration stream.
#[derive(Clone, Debug)]
pub struct Block {
    n: u64,
    m: usize,
    first: u64,
    /// Cleared equality row pushed into the coordinate solve.
    pushdown: Option<Arc<(Vec<BigInt>, BigInt)>>,
    /// Remaining predicate, verified per candidate.
    rest: Option<Arc<PreparedSet>>,
}

impl Block {
    pub fn leading_count(&self) -> u64 {
        self.first
    }

    /// Visit the block's filtered members in stream order. The closure may
    /// break early; the buffer behind the slice is reused across calls.
    pub fn try_for_each<B>(&self, mut f: impl FnMut(&[u64]) -> ControlFlow<B>) -> Option<B> {
        let mut buf = vec![0u64; self.m];
        buf[0] = self.first;
        let rem = self.n - self.first;
        let emit = |buf: &[u64], f: &mut dyn FnMut(&[u64]) -> ControlFlow<B>| -> ControlFlow<B> {
            if let Some(rest) = &self.rest {
                if !rest.contains(buf) {
                    return ControlFlow::Continue(());
                }
            }
            f(buf)
        };

        match (self.m, &self.pushdown) {
            (1, pd) | (2, pd) => {
                // Nothing left to solve: the block pins every coordinate.
                if self.m == 2 {
                    buf[1] = rem;
                }
                if let Some(pd) = pd {
                    let (w, rhs) = pd.as_ref();
                    if &dot(w, &buf) != rhs {
                        return None;
                    }
                }
                match emit(&buf, &mut f) {
                    ControlFlow::Break(b) => Some(b),
                    ControlFlow::Continue(()) => None,
                }
            }
            (_, None) => {
                // Plain successor walk over the m-1 suffix coordinates.
                let mm = self.m - 1;
                let mut v = vec![0u64; mm];
                v[0] = rem;
                loop {
                    buf[1..].copy_from_slice(&v);
                    if let ControlFlow::Break(b) = emit(&buf, &mut f) {
                        return Some(b);
                    }
                    if !advance(&mut v) {
                        return None;
                    }
                }
            }
            (_, Some(pd)) => {
                // Iterate the free prefix; the trailing pair is solved from
                // (pair sum, cleared equality).
                let (w, rhs) = pd.as_ref();
                let wa = &w[self.m - 2];
                let wb = &w[self.m - 1];
                let d = wa - wb;
                let slots = self.m - 2; // free suffix coords plus the pair-sum slot
                let mut v = vec![0u64; slots];
                v[0] = rem;
                loop {
                    let pair_total = v[slots - 1];
                    buf[1..self.m - 2].copy_from_slice(&v[..slots - 1]);
                    // Target for the trailing pair after the fixed prefix.
                    let mut t = rhs - BigInt::from(self.first) * &w[0];
                    for (i, &c) in v[..slots - 1].iter().enumerate() {
                        t -= BigInt::from(c) * &w[i + 1];
                    }
                    if d.is_zero() {
                        // Degenerate pair: any split works or none does.
                        if wa * BigInt::from(pair_total) == t {
                            for x in (0..=pair_total).rev() {
                                buf[self.m - 2] = x;
                                buf[self.m - 1] = pair_total - x;
                                if let ControlFlow::Break(b) = emit(&buf, &mut f) {
                                    return Some(b);
                                }
                            }
                        }
                    } else {
                        // wa*x + wb*(pair_total - x) = t has at most one
                        // integer solution x in [0, pair_total].
                        let num = t - wb * BigInt::from(pair_total);
                        let (q, r) = num.div_rem(&d);
                        if r.is_zero() && !q.is_negative() {
                            if let Some(x) = q.to_u64() {
                                if x <= pair_total {
                                    buf[self.m - 2] = x;
                                    buf[self.m - 1] = pair_total - x;
                                    if let ControlFlow::Break(b) = emit(&buf, &mut f) {
                                        return Some(b);
                                    }
                                }
                            }
                        }
                    }
                    if !advance(&mut v) {
                        return None;
                    }
                }
            }
        }
    }
}

/// Successor in the leading-descending composition order. Returns false
/// after the last composition [0, ..., 0, total].
#[inline]
fn advance(v: &mut [u64]) -> bool {
    let s = v.len();
    if s <= 1 {
        return false;
    }
    let Some(j) = (0..s - 1).rev().find(|&j| v[j] > 0) else {
        return false;
    };
    let tail: u64 = v[j + 1..].iter().sum();
    v[j] -= 1;
    v[j + 1] = tail + 1;
    for k in j + 2..s {
        v[k] = 0;
    }
    true
}

fn dot(w: &[BigInt], counts: &[u64]) -> BigInt {
    let mut s = BigInt::zero();
    for (wi, &c) in w.iter().zip(counts) {
        s += wi * BigInt::from(c);
    }
    s
}

/// The k-equivalent type [k n_1, ..., k n_m] / kn: same induced pmf,
/// sample size scaled by k.
pub fn k_equivalent(base: &NType, k: u64) -> Result<NType> {
    if k == 0 {
        return Err(Error::ZeroScale);
    }
    let counts = base
        .counts()
        .iter()
        .map(|&c| c.checked_mul(k).ok_or(Error::InvalidParameter("k-equivalent counts overflow")))
        .collect::<Result<Vec<u64>>>()?;
    let n = base
        .n()
        .checked_mul(k)
        .ok_or(Error::InvalidParameter("k-equivalent sample size overflows"))?;
    NType::new(counts, n)
}

/// Round a pmf to the nearest n-type by largest-remainder apportionment.
///
/// The targets n*p_i are formed in exact rational arithmetic against the
/// normalized weights, so every coordinate satisfies |counts_i/n - p_i| <
/// 1/n (up to the pmf's own normalization slack) and the induced pmf is
/// within m/(2n) of p in total variation. Remainder ties go to the lowest
/// index.
pub fn round_to_type(p: &Pmf, n: u64) -> Result<NType> {
    if n == 0 {
        return Err(Error::InvalidParameter("rounding needs n >= 1"));
    }
    let rats = p.to_rationals();
    let total: BigRational = rats.iter().sum();
    // total > 0 is guaranteed by the non-empty-support pmf invariant.
    let n_big = BigRational::from_integer(BigInt::from(n));
    let mut counts = Vec::with_capacity(rats.len());
    let mut remainders: Vec<(usize, BigRational)> = Vec::with_capacity(rats.len());
    let mut assigned = 0u64;
    for (i, w) in rats.iter().enumerate() {
        let target = &n_big * w / &total;
        let floor = target.floor();
        let c = floor.to_integer().to_u64().ok_or(Error::InvalidParameter("count overflow"))?;
        assigned += c;
        remainders.push((i, target - floor));
        counts.push(c);
    }
    let deficit = (n - assigned) as usize;
    // Stable sort: descending remainder, ties by ascending index.
    remainders.sort_by(|(i, a), (j, b)| b.cmp(a).then(i.cmp(j)));
    for (i, _) in remainders.into_iter().take(deficit) {
        counts[i] += 1;
    }
    NType::new(counts, n)
}

/// A prior quantized onto the n-source lattice.
#[derive(Clone, Debug)]
pub struct QuantizedPrior {
    n: u64,
    m: usize,
    kind: QuantizedKind,
}

#[derive(Clone, Debug)]
enum QuantizedKind {
    /// Every n-source carries the same mass 1/N.
    Uniform { log_mass: f64 },
    /// Atom masses accumulated on their nearest n-sources.
    Atoms { masses: BTreeMap<Vec<u64>, f64> },
}

impl QuantizedPrior {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, QuantizedKind::Uniform { .. })
    }

    /// log prior mass of the source with the given counts; `-inf` when the
    /// source is outside the quantized support.
    pub fn log_mass(&self, counts: &[u64]) -> f64 {
        match &self.kind {
            QuantizedKind::Uniform { log_mass } => *log_mass,
            QuantizedKind::Atoms { masses } => {
                masses.get(counts).map_or(f64::NEG_INFINITY, |&w| crate::math::ln(w))
            }
        }
    }

    /// Linear mass (0 outside the support).
    pub fn mass(&self, counts: &[u64]) -> f64 {
        match &self.kind {
            QuantizedKind::Uniform { log_mass } => crate::math::exp(*log_mass),
            QuantizedKind::Atoms { masses } => masses.get(counts).copied().unwrap_or(0.0),
        }
    }

    /// Iterate the explicit support (atom priors only); the uniform prior's
    /// support is the whole lattice and is enumerated, not stored.
    pub fn support(&self) -> Option<impl Iterator<Item = (&Vec<u64>, f64)>> {
        match &self.kind {
            QuantizedKind::Uniform { .. } => None,
            QuantizedKind::Atoms { masses } => Some(masses.iter().map(|(c, &w)| (c, w))),
        }
    }
}

/// Quantize a prior onto the n-source lattice of an m-letter alphabet.
///
/// Each atom's mass goes to the total-variation-nearest n-source, the
/// canonical disjoint-cell assignment; the nearest source is computed by
/// exact largest-remainder apportionment of the atom's rational
/// coordinates (remainder ties to the lowest index, consistently with
/// [`round_to_type`]).
pub fn quantize_prior(prior: &PriorSpec, n: u64, m: usize) -> Result<QuantizedPrior> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("quantization needs n >= 1 and m >= 1"));
    }
    match prior {
        PriorSpec::Uniform => {
            let count = binomial(n + m as u64 - 1, m as u64 - 1);
            Ok(QuantizedPrior {
                n,
                m,
                kind: QuantizedKind::Uniform { log_mass: -ln_biguint(&count) },
            })
        }
        PriorSpec::Atoms(atoms) => {
            if atoms.is_empty() {
                return Err(Error::InvalidPrior(alloc::string::String::from("no atoms")));
            }
            if atoms[0].counts().len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: atoms[0].counts().len(),
                });
            }
            let mut masses: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
            for atom in atoms {
                let cell = nearest_source(&atom.to_rationals(), n)?;
                *masses.entry(cell).or_insert(0.0) += atom.weight();
            }
            Ok(QuantizedPrior { n, m, kind: QuantizedKind::Atoms { masses } })
        }
    }
}

/// Largest-remainder apportionment of exact rational coordinates summing
/// to 1; returns the TV-nearest count vector with sum n.
pub(crate) fn nearest_source(coords: &[BigRational], n: u64) -> Result<Vec<u64>> {
    let n_big = BigRational::from_integer(BigInt::from(n));
    let mut counts = Vec::with_capacity(coords.len());
    let mut remainders: Vec<(usize, BigRational)> = Vec::with_capacity(coords.len());
    let mut assigned = 0u64;
    for (i, w) in coords.iter().enumerate() {
        let target = &n_big * w;
        let floor = target.floor();
        let c = floor.to_integer().to_u64().ok_or(Error::InvalidParameter("count overflow"))?;
        assigned += c;
        remainders.push((i, target - floor));
        counts.push(c);
    }
    let deficit = (n - assigned) as usize;
    remainders.sort_by(|(i, a), (j, b)| b.cmp(a).then(i.cmp(j)));
    for (i, _) in remainders.into_iter().take(deficit) {
        counts[i] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::make_pmf;
    use crate::{BallConvention, PriorAtom};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn order_matches_documented_examples() {
        let plan = EnumerationPlan::new(2, 2).unwrap();
        let types = enumerate_sources(&plan).unwrap();
        let counts: Vec<&[u64]> = types.iter().map(NType::counts).collect();
        assert_eq!(counts, [&[2, 0][..], &[1, 1], &[0, 2]]);
        assert_eq!(plan.count_unfiltered(), BigUint::from(3u32));

        let plan3 = EnumerationPlan::new(2, 3).unwrap();
        let types3 = enumerate_sources(&plan3).unwrap();
        let counts3: Vec<&[u64]> = types3.iter().map(NType::counts).collect();
        assert_eq!(
            counts3,
            [
                &[2, 0, 0][..],
                &[1, 1, 0],
                &[1, 0, 1],
                &[0, 2, 0],
                &[0, 1, 1],
                &[0, 0, 2]
            ]
        );
    }

    #[test]
    fn counts_match_binomial_for_spot_sizes() {
        for (n, m) in [(10, 4usize), (1, 1), (7, 3), (23, 5), (50, 2)] {
            let plan = EnumerationPlan::new(n, m).unwrap();
            let mut seen = 0u64;
            plan.for_each(|_| seen += 1).unwrap();
            assert_eq!(BigUint::from(seen), plan.count_unfiltered(), "n={n} m={m}");
        }
        assert_eq!(
            EnumerationPlan::new(10, 4).unwrap().count_unfiltered(),
            BigUint::from(286u32)
        );
    }

    #[test]
    fn pushdown_agrees_with_post_filtering() {
        // Mean 17/10 on values 1..4, with an extra ball atom to exercise
        // the rest-predicate path.
        let mean = SetExpr::LinearEq {
            coeffs: alloc::vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)],
            target: rat(17, 10),
        };
        let ball = SetExpr::ball(
            make_pmf(&[0.7, 0.1, 0.05, 0.15], 1e-12).unwrap(),
            0.5,
            BallConvention::L1,
        )
        .unwrap();
        let filter = SetExpr::Intersection(alloc::vec![mean, ball]);

        for n in [10u64, 20, 30] {
            let filtered = enumerate_sources(
                &EnumerationPlan::new(n, 4).unwrap().with_filter(filter.clone()).unwrap(),
            )
            .unwrap();
            let brute: Vec<NType> = enumerate_sources(&EnumerationPlan::new(n, 4).unwrap())
                .unwrap()
                .into_iter()
                .filter(|t| filter.contains_type(t).unwrap())
                .collect();
            assert_eq!(filtered, brute, "n={n}");
        }
    }

    #[test]
    fn degenerate_pair_coefficients_are_enumerated() {
        // Constraint touching only the first coordinate leaves the last two
        // columns identical (both zero), exercising the degenerate solve.
        let filter = SetExpr::LinearEq {
            coeffs: alloc::vec![rat(1, 1), rat(0, 1), rat(0, 1)],
            target: rat(1, 2),
        };
        let plan = EnumerationPlan::new(10, 3).unwrap().with_filter(filter.clone()).unwrap();
        let members = enumerate_sources(&plan).unwrap();
        assert_eq!(members.len(), 6); // c0 = 5, c1 + c2 = 5
        let brute: Vec<NType> = enumerate_sources(&EnumerationPlan::new(10, 3).unwrap())
            .unwrap()
            .into_iter()
            .filter(|t| filter.contains_type(t).unwrap())
            .collect();
        assert_eq!(members, brute);
    }

    #[test]
    fn filtered_members_satisfy_equality_exactly() {
        let filter = SetExpr::LinearEq {
            coeffs: alloc::vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)],
            target: rat(17, 10),
        };
        let plan = EnumerationPlan::new(50, 4).unwrap().with_filter(filter.clone()).unwrap();
        let members = enumerate_sources(&plan).unwrap();
        assert!(!members.is_empty());
        for t in &members {
            assert!(filter.contains_type(t).unwrap());
            assert_eq!(t.counts().iter().map(|&c| c).sum::<u64>(), 50);
        }
    }

    #[test]
    fn k_equivalent_scales_counts() {
        let base = NType::new(alloc::vec![1, 1, 1, 7], 10).unwrap();
        let scaled = k_equivalent(&base, 5).unwrap();
        assert_eq!(scaled.counts(), [5, 5, 5, 35]);
        assert_eq!(scaled.n(), 50);
        assert_eq!(k_equivalent(&base, 1).unwrap(), base);
        assert!(matches!(k_equivalent(&base, 0), Err(Error::ZeroScale)));

        for k in [2u64, 3, 7, 30] {
            let s = k_equivalent(&base, k).unwrap();
            assert_eq!(s.induced_pmf().weights(), base.induced_pmf().weights());
        }
        // Composition of scalings.
        let once = k_equivalent(&k_equivalent(&base, 3).unwrap(), 4).unwrap();
        assert_eq!(once, k_equivalent(&base, 12).unwrap());
    }

    #[test]
    fn rounding_apportions_by_largest_remainder() {
        let half = make_pmf(&[0.5, 0.5], 0.0).unwrap();
        assert_eq!(round_to_type(&half, 4).unwrap().counts(), [2, 2]);

        let third = NType::from_counts(alloc::vec![1, 1, 1]).unwrap().induced_pmf();
        assert_eq!(round_to_type(&third, 4).unwrap().counts(), [2, 1, 1]);

        // TV bound m/(2n) on a few awkward pmfs.
        for (weights, n) in [
            (alloc::vec![0.21, 0.33, 0.46], 17u64),
            (alloc::vec![0.125, 0.125, 0.75], 9),
            (alloc::vec![0.9, 0.05, 0.05], 1),
        ] {
            let p = make_pmf(&weights, 1e-12).unwrap();
            let t = round_to_type(&p, n).unwrap();
            let tv: f64 = t
                .induced_pmf()
                .weights()
                .iter()
                .zip(p.weights())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / 2.0;
            let m = weights.len() as f64;
            assert!(tv <= m / (2.0 * n as f64) + 1e-12, "tv={tv} n={n}");
        }
    }

    #[test]
    fn quantize_uniform_and_atoms() {
        let q = quantize_prior(&PriorSpec::Uniform, 2, 2).unwrap();
        assert!(q.is_uniform());
        assert!((q.mass(&[1, 1]) - 1.0 / 3.0).abs() < 1e-15);

        // An atom exactly on an n-source keeps its mass there.
        let exact = PriorSpec::atoms(alloc::vec![PriorAtom::new(alloc::vec![1, 1], 2, 1.0)
            .unwrap()])
        .unwrap();
        let q = quantize_prior(&exact, 2, 2).unwrap();
        assert_eq!(q.mass(&[1, 1]), 1.0);
        assert_eq!(q.mass(&[2, 0]), 0.0);

        // [0.49, 0.51] is nearest to [1,1]/2.
        let skew = PriorSpec::atoms(alloc::vec![PriorAtom::new(alloc::vec![49, 51], 100, 1.0)
            .unwrap()])
        .unwrap();
        let q = quantize_prior(&skew, 2, 2).unwrap();
        assert_eq!(q.mass(&[1, 1]), 1.0);

        // Masses always sum to 1.
        let spread = PriorSpec::atoms(alloc::vec![
            PriorAtom::new(alloc::vec![1, 2], 3, 0.25).unwrap(),
            PriorAtom::new(alloc::vec![2, 1], 3, 0.5).unwrap(),
            PriorAtom::new(alloc::vec![0, 1], 1, 0.25).unwrap(),
        ])
        .unwrap();
        let q = quantize_prior(&spread, 6, 2).unwrap();
        let total: f64 = q.support().unwrap().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantization_remainder_ties_go_low() {
        // [1/2, 1/2] at n = 3: remainders tie, the lower index wins.
        let tie = PriorSpec::atoms(alloc::vec![PriorAtom::new(alloc::vec![1, 1], 2, 1.0)
            .unwrap()])
        .unwrap();
        let q = quantize_prior(&tie, 3, 2).unwrap();
        assert_eq!(q.mass(&[2, 1]), 1.0);
    }
}
