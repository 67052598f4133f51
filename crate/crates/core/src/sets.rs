//! Source-set specifications: predicate trees over linear constraints,
//! variation balls, complements and intersections, evaluable exactly on
//! integer types and within tolerance on float pmfs.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::family::clear_row;
use crate::types::{NType, Pmf};
use crate::{Error, Result};

/// Residual tolerance for evaluating set membership of float pmfs.
/// Exact integer types never use it.
pub const PMF_EVAL_TOLERANCE: f64 = 1e-12;

/// Which constant the variation-ball radius refers to.
///
/// `HalfL1` reads the radius as a bound on `(1/2) sum |p_i - q_i|`,
/// `L1` as a bound on `sum |p_i - q_i|`. The bundled concentration table
/// is reproduced by the `L1` reading, which is therefore the default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallConvention {
    HalfL1,
    L1,
}

impl Default for BallConvention {
    fn default() -> Self {
        BallConvention::L1
    }
}

impl BallConvention {
    /// The bound on the raw L1 distance implied by radius r: r itself under
    /// `L1`, 2r under `HalfL1`.
    fn l1_factor(self) -> u32 {
        match self {
            BallConvention::HalfL1 => 2,
            BallConvention::L1 => 1,
        }
    }
}

impl fmt::Display for BallConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BallConvention::HalfL1 => write!(f, "half-l1"),
            BallConvention::L1 => write!(f, "l1"),
        }
    }
}

/// A set of sources described as an expression tree.
///
/// The empty intersection is the whole simplex. Closed balls include their
/// boundary; boundary membership of an integer type is decided in exact
/// rational arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum SetExpr {
    /// `sum coeffs_i q_i = target`
    LinearEq { coeffs: Vec<BigRational>, target: BigRational },
    /// `sum coeffs_i q_i >= target`
    LinearGe { coeffs: Vec<BigRational>, target: BigRational },
    /// Closed variation ball around a center pmf.
    Ball { center: Pmf, radius: f64, convention: BallConvention },
    Complement(Box<SetExpr>),
    Intersection(Vec<SetExpr>),
}

impl SetExpr {
    /// The whole simplex.
    pub fn simplex() -> SetExpr {
        SetExpr::Intersection(Vec::new())
    }

    /// Closed ball of the given radius and convention.
    pub fn ball(center: Pmf, radius: f64, convention: BallConvention) -> Result<SetExpr> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter("ball radius must be finite and non-negative"));
        }
        Ok(SetExpr::Ball { center, radius, convention })
    }

    /// Dimension check: every atom must match m letters. On mismatch the
    /// error reports the expression's own dimension as the expected one.
    pub fn check_dimension(&self, m: usize) -> Result<()> {
        match self {
            SetExpr::LinearEq { coeffs, .. } | SetExpr::LinearGe { coeffs, .. } => {
                if coeffs.len() != m {
                    return Err(Error::DimensionMismatch { expected: coeffs.len(), got: m });
                }
            }
            SetExpr::Ball { center, .. } => {
                if center.len() != m {
                    return Err(Error::DimensionMismatch { expected: center.len(), got: m });
                }
            }
            SetExpr::Complement(child) => child.check_dimension(m)?,
            SetExpr::Intersection(children) => {
                for c in children {
                    c.check_dimension(m)?;
                }
            }
        }
        Ok(())
    }

    /// Exact membership of an integer type.
    pub fn contains_type(&self, t: &NType) -> Result<bool> {
        self.check_dimension(t.m())?;
        Ok(PreparedSet::new(self, t.m(), t.n())?.contains(t.counts()))
    }

    /// Tolerance-based membership of a float pmf; constraint residuals up to
    /// [`PMF_EVAL_TOLERANCE`] count as satisfied.
    pub fn contains_pmf(&self, p: &Pmf) -> Result<bool> {
        self.check_dimension(p.len())?;
        Ok(self.eval_pmf(p.weights()))
    }

    fn eval_pmf(&self, w: &[f64]) -> bool {
        match self {
            SetExpr::LinearEq { coeffs, target } => {
                let lhs: f64 = coeffs
                    .iter()
                    .zip(w)
                    .map(|(c, &x)| c.to_f64().unwrap_or(f64::NAN) * x)
                    .sum();
                (lhs - target.to_f64().unwrap_or(f64::NAN)).abs() <= PMF_EVAL_TOLERANCE
            }
            SetExpr::LinearGe { coeffs, target } => {
                let lhs: f64 = coeffs
                    .iter()
                    .zip(w)
                    .map(|(c, &x)| c.to_f64().unwrap_or(f64::NAN) * x)
                    .sum();
                lhs >= target.to_f64().unwrap_or(f64::NAN) - PMF_EVAL_TOLERANCE
            }
            SetExpr::Ball { center, radius, convention } => {
                let dist: f64 =
                    center.weights().iter().zip(w).map(|(&c, &x)| (c - x).abs()).sum();
                dist <= radius * convention.l1_factor() as f64 + PMF_EVAL_TOLERANCE
            }
            SetExpr::Complement(child) => !child.eval_pmf(w),
            SetExpr::Intersection(children) => children.iter().all(|c| c.eval_pmf(w)),
        }
    }

    /// Flatten into a convex polytope (equalities and ">=" inequalities)
    /// when the expression is an intersection of linear atoms only.
    pub fn as_polytope(&self) -> Option<Polytope> {
        let mut poly = Polytope { eqs: Vec::new(), ges: Vec::new() };
        fn collect(e: &SetExpr, poly: &mut Polytope) -> bool {
            match e {
                SetExpr::LinearEq { coeffs, target } => {
                    poly.eqs.push((coeffs.clone(), target.clone()));
                    true
                }
                SetExpr::LinearGe { coeffs, target } => {
                    poly.ges.push((coeffs.clone(), target.clone()));
                    true
                }
                SetExpr::Intersection(children) => children.iter().all(|c| collect(c, poly)),
                SetExpr::Ball { .. } | SetExpr::Complement(_) => false,
            }
        }
        if collect(self, &mut poly) {
            Some(poly)
        } else {
            None
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::LinearEq { coeffs, target } => {
                write!(f, "{{q: [")?;
                write_coeffs(f, coeffs)?;
                write!(f, "].q = {target}}}")
            }
            SetExpr::LinearGe { coeffs, target } => {
                write!(f, "{{q: [")?;
                write_coeffs(f, coeffs)?;
                write!(f, "].q >= {target}}}")
            }
            SetExpr::Ball { center, radius, convention } => {
                write!(f, "ball(center=[")?;
                for (i, w) in center.weights().iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{w}")?;
                }
                write!(f, "], radius={radius}, {convention})")
            }
            SetExpr::Complement(child) => write!(f, "complement({child})"),
            SetExpr::Intersection(children) if children.is_empty() => write!(f, "simplex"),
            SetExpr::Intersection(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

fn write_coeffs(f: &mut fmt::Formatter<'_>, coeffs: &[BigRational]) -> fmt::Result {
    for (i, c) in coeffs.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{c}")?;
    }
    Ok(())
}

/// Evaluate a set expression on either representation of a source.
pub fn evaluate_set(spec: &SetExpr, q: SetPoint<'_>) -> Result<bool> {
    match q {
        SetPoint::Type(t) => spec.contains_type(t),
        SetPoint::Pmf(p) => spec.contains_pmf(p),
    }
}

/// A point argument for [`evaluate_set`].
#[derive(Clone, Copy)]
pub enum SetPoint<'a> {
    Type(&'a NType),
    Pmf(&'a Pmf),
}

impl<'a> From<&'a NType> for SetPoint<'a> {
    fn from(t: &'a NType) -> Self {
        SetPoint::Type(t)
    }
}

impl<'a> From<&'a Pmf> for SetPoint<'a> {
    fn from(p: &'a Pmf) -> Self {
        SetPoint::Pmf(p)
    }
}

/// Linear description of a convex source set: equality rows and ">=" rows.
#[derive(Clone, Debug)]
pub struct Polytope {
    pub eqs: Vec<(Vec<BigRational>, BigRational)>,
    pub ges: Vec<(Vec<BigRational>, BigRational)>,
}

/// A set expression compiled against a fixed (m, n) lattice: all atom
/// tests reduce to big-integer comparisons on raw count vectors.
#[derive(Clone, Debug)]
pub(crate) enum PreparedSet {
    /// sum w_i c_i == rhs
    Eq { w: Vec<BigInt>, rhs: BigInt },
    /// sum w_i c_i >= rhs
    Ge { w: Vec<BigInt>, rhs: BigInt },
    /// sum |c_i * den - num_i * n| * rhs_den <= rhs_num  (cleared L1 ball)
    Ball { num: Vec<BigInt>, den: BigInt, n: BigInt, rhs_num: BigInt, rhs_den: BigInt },
    Not(Box<PreparedSet>),
    All(Vec<PreparedSet>),
}

impl PreparedSet {
    pub(crate) fn new(expr: &SetExpr, m: usize, n: u64) -> Result<Self> {
        expr.check_dimension(m)?;
        Ok(Self::build(expr, n))
    }

    fn build(expr: &SetExpr, n: u64) -> Self {
        match expr {
            SetExpr::LinearEq { coeffs, target } => {
                let (w, b) = clear_row(coeffs, target);
                PreparedSet::Eq { w, rhs: b * BigInt::from(n) }
            }
            SetExpr::LinearGe { coeffs, target } => {
                let (w, b) = clear_row(coeffs, target);
                PreparedSet::Ge { w, rhs: b * BigInt::from(n) }
            }
            SetExpr::Ball { center, radius, convention } => {
                // Weights and radius are finite f64, hence exact dyadic
                // rationals; clear the center to a common denominator.
                let rats: Vec<BigRational> = center.to_rationals();
                let mut den = BigInt::from(1);
                for r in &rats {
                    den = den.lcm(r.denom());
                }
                let num: Vec<BigInt> = rats
                    .iter()
                    .map(|r| (r * BigRational::from_integer(den.clone())).to_integer())
                    .collect();
                let n_big = BigInt::from(n);
                let rad = BigRational::from_float(*radius).expect("radius is finite");
                // Membership: sum_i |c_i/n - num_i/den| <= factor * radius,
                // cleared by n*den on the left and by the radius denominator
                // on the right.
                let rhs = rad
                    * BigRational::from_integer(BigInt::from(convention.l1_factor()))
                    * BigRational::from_integer(&n_big * &den);
                PreparedSet::Ball {
                    num,
                    den,
                    n: n_big,
                    rhs_num: rhs.numer().clone(),
                    rhs_den: rhs.denom().clone(),
                }
            }
            SetExpr::Complement(child) => PreparedSet::Not(Box::new(Self::build(child, n))),
            SetExpr::Intersection(children) => {
                PreparedSet::All(children.iter().map(|c| Self::build(c, n)).collect())
            }
        }
    }

    /// Exact membership test on a raw count vector of the prepared length.
    pub(crate) fn contains(&self, counts: &[u64]) -> bool {
        match self {
            PreparedSet::Eq { w, rhs } => &dot(w, counts) == rhs,
            PreparedSet::Ge { w, rhs } => &dot(w, counts) >= rhs,
            PreparedSet::Ball { num, den, n, rhs_num, rhs_den } => {
                let mut acc = BigInt::zero();
                for (ni, &c) in num.iter().zip(counts) {
                    acc += (BigInt::from(c) * den - ni * n).abs();
                }
                acc * rhs_den <= *rhs_num
            }
            PreparedSet::Not(child) => !child.contains(counts),
            PreparedSet::All(children) => children.iter().all(|c| c.contains(counts)),
        }
    }

    /// Split off one equality atom usable for enumerator push-down: returns
    /// its cleared row plus the remaining predicate, or None when the tree
    /// has no top-level equality.
    pub(crate) fn split_equality(self) -> (Option<(Vec<BigInt>, BigInt)>, Option<PreparedSet>) {
        match self {
            PreparedSet::Eq { w, rhs } => (Some((w, rhs)), None),
            PreparedSet::All(children) => {
                let mut eq = None;
                let mut rest = Vec::new();
                for c in children {
                    match c {
                        PreparedSet::Eq { w, rhs } if eq.is_none() => eq = Some((w, rhs)),
                        other => rest.push(other),
                    }
                }
                let rest = match (eq.is_some(), rest.len()) {
                    (_, 0) => None,
                    _ => Some(PreparedSet::All(rest)),
                };
                (eq, rest)
            }
            other => (None, Some(other)),
        }
    }
}

fn dot(w: &[BigInt], counts: &[u64]) -> BigInt {
    let mut s = BigInt::zero();
    for (wi, &c) in w.iter().zip(counts) {
        s += wi * BigInt::from(c);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::make_pmf;
    use alloc::vec;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn mean_17_10() -> SetExpr {
        SetExpr::LinearEq {
            coeffs: vec![rat(1, 1), rat(2, 1), rat(3, 1), rat(4, 1)],
            target: rat(17, 10),
        }
    }

    #[test]
    fn equality_on_types_uses_integer_arithmetic() {
        let t = NType::new(vec![17, 0, 1, 2], 20).unwrap();
        assert!(!mean_17_10().contains_type(&t).unwrap());
        let member = NType::new(vec![5, 3, 2, 0], 10).unwrap();
        assert!(mean_17_10().contains_type(&member).unwrap());
    }

    #[test]
    fn equality_on_pmf_uses_tolerance() {
        let qhat = make_pmf(&[0.705, 0.073, 0.039, 0.183], 1e-3).unwrap();
        // 0.705 + 2*0.073 + 3*0.039 + 4*0.183 = 1.7 up to float rounding.
        assert!(mean_17_10().contains_pmf(&qhat).unwrap());
        let off = make_pmf(&[0.7, 0.1, 0.1, 0.1], 1e-12).unwrap();
        assert!(!mean_17_10().contains_pmf(&off).unwrap());
    }

    #[test]
    fn complement_of_everything_is_empty() {
        let whole = SetExpr::ball(Pmf::uniform(3), 2.5, BallConvention::L1).unwrap();
        let nothing = SetExpr::Complement(Box::new(whole));
        for counts in [[3, 0, 0], [1, 1, 1], [0, 2, 1]] {
            let t = NType::from_counts(counts.to_vec()).unwrap();
            assert!(!nothing.contains_type(&t).unwrap());
        }
    }

    #[test]
    fn ball_boundary_is_inside_for_both_conventions() {
        // Center [1/2, 1/2], type [3/4, 1/4]: L1 distance exactly 1/2.
        let center = make_pmf(&[0.5, 0.5], 0.0).unwrap();
        let t = NType::new(vec![3, 1], 4).unwrap();
        let on_l1 = SetExpr::ball(center.clone(), 0.5, BallConvention::L1).unwrap();
        assert!(on_l1.contains_type(&t).unwrap());
        let under_l1 = SetExpr::ball(center.clone(), 0.4999, BallConvention::L1).unwrap();
        assert!(!under_l1.contains_type(&t).unwrap());
        // Half-L1 reads the same radius as twice the allowance.
        let on_half = SetExpr::ball(center.clone(), 0.25, BallConvention::HalfL1).unwrap();
        assert!(on_half.contains_type(&t).unwrap());
        let under_half = SetExpr::ball(center, 0.2499, BallConvention::HalfL1).unwrap();
        assert!(!under_half.contains_type(&t).unwrap());
    }

    #[test]
    fn type_and_pmf_evaluations_agree_away_from_boundaries() {
        let spec = SetExpr::Intersection(vec![
            SetExpr::LinearGe {
                coeffs: vec![rat(1, 1), rat(0, 1), rat(0, 1)],
                target: rat(1, 4),
            },
            SetExpr::ball(Pmf::uniform(3), 0.8, BallConvention::L1).unwrap(),
        ]);
        for counts in [[5, 3, 2], [1, 8, 1], [4, 4, 2], [10, 0, 0], [2, 5, 3]] {
            let t = NType::from_counts(counts.to_vec()).unwrap();
            let exact = spec.contains_type(&t).unwrap();
            let approx = spec.contains_pmf(&t.induced_pmf()).unwrap();
            assert_eq!(exact, approx, "disagreement at {t}");
        }
    }

    #[test]
    fn polytope_extraction_accepts_linear_trees_only() {
        let linear = SetExpr::Intersection(vec![
            mean_17_10(),
            SetExpr::LinearGe {
                coeffs: vec![rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1)],
                target: rat(1, 10),
            },
        ]);
        let poly = linear.as_polytope().unwrap();
        assert_eq!(poly.eqs.len(), 1);
        assert_eq!(poly.ges.len(), 1);
        let with_ball = SetExpr::Intersection(vec![
            mean_17_10(),
            SetExpr::ball(Pmf::uniform(4), 0.1, BallConvention::L1).unwrap(),
        ]);
        assert!(with_ball.as_polytope().is_none());
        assert!(SetExpr::simplex().as_polytope().is_some());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = NType::from_counts(vec![1, 1]).unwrap();
        assert!(matches!(
            mean_17_10().contains_type(&t),
            Err(Error::DimensionMismatch { expected: 4, got: 2 })
        ));
    }
}
