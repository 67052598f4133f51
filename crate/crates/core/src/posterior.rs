//! Posterior mass of source sets given an observed type, MAP sources,
//! decay-rate series with non-asymptotic sandwich bounds, and the
//! type-side counterparts (probability that the empirical type falls in a
//! set, with its large-n limits).
//!
//! All probabilities flow through one weight: an n-source with counts c
//! observed to produce the type t carries
//! `w = log prior_mass + sum_i t_i log(c_i / n)`,
//! the multiplicity of t cancelling between numerator and denominator.
//! Sums of `exp(w)` are accumulated with streaming log-sum-exp in the
//! enumeration order, so every figure is bitwise reproducible.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::enumeration::{k_equivalent, round_to_type, EnumerationPlan};
use crate::math::{exp, ln, ln_factorial, LogSumExp};
use crate::oracle::source_weight_exact;
use crate::projection::l_projection_convex;
use crate::sets::{BallConvention, PreparedSet, SetExpr};
use crate::types::{NType, Pmf};
use crate::{Error, PriorSpec, Result};

/// Width of the float near-tie window the MAP search resolves exactly.
const MAP_TIE_WINDOW: f64 = 1e-9;

/// Posterior probability of a source set, with its log-mass parts.
#[derive(Clone, Debug)]
pub struct PosteriorReport {
    pub n: u64,
    /// log joint mass of the event set intersected with the conditioning
    /// set (`-inf` when empty or massless).
    pub log_numerator: f64,
    /// log mass of the conditioning set.
    pub log_denominator: f64,
    /// `exp(log_numerator - log_denominator)`, clamped into [0, 1].
    pub probability: f64,
    /// Lattice members of the two sets (support cells for atom priors).
    pub members_numerator: u64,
    pub members_denominator: u64,
}

/// Per-source posterior scores shared by the report and MAP paths.
struct Weigher {
    /// ln c for c in 0..=n (index 0 is never consulted).
    ln_counts: Vec<f64>,
    /// `n ln n`, the normalization part of the log-likelihood.
    n_ln_n: f64,
    observed: Vec<u64>,
}

impl Weigher {
    fn new(observed: &NType) -> Weigher {
        let n = observed.n();
        let ln_counts = (0..=n).map(|c| if c == 0 { 0.0 } else { ln(c as f64) }).collect();
        Weigher {
            ln_counts,
            n_ln_n: n as f64 * ln(n as f64),
            observed: observed.counts().to_vec(),
        }
    }

    /// `sum_i t_i ln(c_i / n)`; `-inf` when the source misses a letter the
    /// observation needs.
    fn log_likelihood(&self, counts: &[u64]) -> f64 {
        let mut acc = 0.0;
        for (&c, &t) in counts.iter().zip(&self.observed) {
            if t == 0 {
                continue;
            }
            if c == 0 {
                return f64::NEG_INFINITY;
            }
            acc += t as f64 * self.ln_counts[c as usize];
        }
        acc - self.n_ln_n
    }
}

/// Accumulated mass and extremes of one source set under the posterior.
#[derive(Clone, Copy)]
struct MassAccumulator {
    lse: LogSumExp,
    max_weight: f64,
    members: u64,
}

impl MassAccumulator {
    fn new() -> MassAccumulator {
        MassAccumulator { lse: LogSumExp::new(), max_weight: f64::NEG_INFINITY, members: 0 }
    }

    fn add(&mut self, w: f64) {
        self.lse.add(w);
        if w > self.max_weight {
            self.max_weight = w;
        }
        self.members += 1;
    }
}

/// Walk the conditioning set once, feeding every member's posterior weight
/// to `visit(counts, weight, in_b)`.
fn scan_posterior<F: FnMut(&[u64], f64, bool)>(
    set_b: &SetExpr,
    set_q: &SetExpr,
    observed: &NType,
    prior: &PriorSpec,
    mut visit: F,
) -> Result<()> {
    let n = observed.n();
    let m = observed.m();
    set_b.check_dimension(m)?;
    set_q.check_dimension(m)?;
    let weigher = Weigher::new(observed);
    let quantized = crate::enumeration::quantize_prior(prior, n, m)?;
    let b = PreparedSet::new(set_b, m, n)?;
    match quantized.support() {
        None => {
            // Uniform prior: sweep the whole filtered lattice.
            let log_mass = quantized.log_mass(observed.counts());
            let plan = EnumerationPlan::new(n, m)?.with_filter(set_q.clone())?;
            plan.for_each(|counts| {
                let w = log_mass + weigher.log_likelihood(counts);
                visit(counts, w, b.contains(counts));
            })?;
        }
        Some(support) => {
            // Atom prior: only its support cells can carry mass.
            let q = PreparedSet::new(set_q, m, n)?;
            for (counts, mass) in support {
                if !q.contains(counts) {
                    continue;
                }
                let w = ln(mass) + weigher.log_likelihood(counts);
                visit(counts, w, b.contains(counts));
            }
        }
    }
    Ok(())
}

/// Posterior probability that the source lies in `set_b`, conditioned on
/// membership in `set_q` and on having produced the observed type.
///
/// Errors with `ConditioningOnNull` when the conditioning set carries zero
/// posterior mass (no members, or every member outside the observation's
/// support pattern).
pub fn posterior_prob(
    set_b: &SetExpr,
    set_q: &SetExpr,
    observed: &NType,
    prior: &PriorSpec,
) -> Result<PosteriorReport> {
    let mut num = MassAccumulator::new();
    let mut den = MassAccumulator::new();
    scan_posterior(set_b, set_q, observed, prior, |_, w, in_b| {
        den.add(w);
        if in_b {
            num.add(w);
        }
    })?;
    let log_denominator = den.lse.value();
    if log_denominator == f64::NEG_INFINITY {
        return Err(Error::ConditioningOnNull);
    }
    let log_numerator = num.lse.value();
    let probability = exp(log_numerator - log_denominator).min(1.0);
    Ok(PosteriorReport {
        n: observed.n(),
        log_numerator,
        log_denominator,
        probability,
        members_numerator: num.members,
        members_denominator: den.members,
    })
}

/// Maximum-a-posteriori source within a conditioning set.
#[derive(Clone, Debug)]
pub struct MapReport {
    pub source: NType,
    /// log posterior weight (prior plus likelihood) of the winner.
    pub log_score: f64,
    /// Posterior probability of the winner itself.
    pub posterior: f64,
}

/// Find the posterior-mode source in `set_q` for the observed type.
///
/// Float scores within `1e-9` of the maximum are re-compared in exact
/// arithmetic (big-integer likelihoods, and exact-rational prior masses
/// for atom priors); exact ties resolve to the lexicographically smallest
/// count vector. Errors with `EmptyFeasibleSet` when the conditioning set
/// has no members and `ConditioningOnNull` when it has members but none
/// carries posterior mass.
pub fn map_source(set_q: &SetExpr, observed: &NType, prior: &PriorSpec) -> Result<MapReport> {
    let everything = SetExpr::simplex();
    // Pass 1: float maximum and total mass.
    let mut best = f64::NEG_INFINITY;
    let mut members = 0u64;
    let mut den = LogSumExp::new();
    scan_posterior(&everything, set_q, observed, prior, |_, w, _| {
        members += 1;
        den.add(w);
        if w > best {
            best = w;
        }
    })?;
    if members == 0 {
        return Err(Error::EmptyFeasibleSet);
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::ConditioningOnNull);
    }
    // Pass 2: everything within the near-tie window of the maximum.
    let mut candidates: Vec<Vec<u64>> = Vec::new();
    scan_posterior(&everything, set_q, observed, prior, |counts, w, _| {
        if w >= best - MAP_TIE_WINDOW {
            candidates.push(counts.to_vec());
        }
    })?;
    debug_assert!(!candidates.is_empty());
    let winner = if candidates.len() == 1 {
        candidates.pop().expect("one candidate")
    } else {
        resolve_ties_exactly(candidates, observed, prior)?
    };
    let weigher = Weigher::new(observed);
    let quantized = crate::enumeration::quantize_prior(prior, observed.n(), observed.m())?;
    let log_score = quantized.log_mass(&winner) + weigher.log_likelihood(&winner);
    let posterior = exp(log_score - den.value()).min(1.0);
    Ok(MapReport {
        source: NType::new(winner, observed.n())?,
        log_score,
        posterior,
    })
}

/// Exact comparison of near-tied posterior weights: prior mass times
/// `prod c_i^{t_i}` as a big rational. Returns the maximal candidate,
/// lexicographically smallest on exact ties.
fn resolve_ties_exactly(
    candidates: Vec<Vec<u64>>,
    observed: &NType,
    prior: &PriorSpec,
) -> Result<Vec<u64>> {
    let exact_mass = |counts: &[u64]| -> Result<BigRational> {
        match prior {
            // Uniform mass is a shared constant; weigh by likelihood only.
            PriorSpec::Uniform => Ok(BigRational::from_integer(1.into())),
            PriorSpec::Atoms(atoms) => {
                let mut total = BigRational::from_integer(0.into());
                for atom in atoms {
                    let cell = crate::enumeration::nearest_source(&atom.to_rationals(), observed.n())?;
                    if cell == counts {
                        total += BigRational::from_float(atom.weight())
                            .ok_or(Error::InvalidParameter("atom weight is not finite"))?;
                    }
                }
                Ok(total)
            }
        }
    };
    let mut best: Option<(Vec<u64>, BigRational)> = None;
    for counts in candidates {
        let lik = source_weight_exact(&counts, observed);
        let score = exact_mass(&counts)?
            * BigRational::from_integer(num_bigint::BigInt::from(lik));
        best = match best {
            None => Some((counts, score)),
            Some((bc, bs)) => {
                if score > bs || (score == bs && counts < bc) {
                    Some((counts, score))
                } else {
                    Some((bc, bs))
                }
            }
        };
    }
    Ok(best.expect("non-empty candidate list").0)
}

/// A deterministic schedule of observed types across sample sizes.
#[derive(Clone, Debug)]
pub enum TypeSchedule {
    /// The k-equivalent subsequence of a base type: every requested n must
    /// be a multiple of the base sample size.
    Static { base: NType, ns: Vec<u64> },
    /// Nearest lattice types of a fixed target pmf at each requested n.
    Dynamic { target: Pmf, ns: Vec<u64> },
}

impl TypeSchedule {
    /// Materialize the observed type at every scheduled sample size.
    pub fn realize(&self) -> Result<Vec<NType>> {
        match self {
            TypeSchedule::Static { base, ns } => ns
                .iter()
                .map(|&n| {
                    if n == 0 || n % base.n() != 0 {
                        return Err(Error::SubsequenceViolation { n, n0: base.n() });
                    }
                    k_equivalent(base, n / base.n())
                })
                .collect(),
            TypeSchedule::Dynamic { target, ns } => {
                ns.iter().map(|&n| round_to_type(target, n)).collect()
            }
        }
    }

    /// The pmf the scheduled types converge to.
    pub fn limit_pmf(&self) -> Pmf {
        match self {
            TypeSchedule::Static { base, .. } => base.induced_pmf(),
            TypeSchedule::Dynamic { target, .. } => target.clone(),
        }
    }
}

/// One sample size of a posterior decay-rate series.
#[derive(Clone, Debug)]
pub struct DecayRateEntry {
    pub n: u64,
    /// log joint mass of the event set inside the conditioning set.
    pub log_numerator: f64,
    /// log mass of the conditioning set.
    pub log_denominator: f64,
    /// Posterior probability of the event set at this n.
    pub probability: f64,
    /// `(1/n) log` of the posterior probability.
    pub normalized_log_posterior: f64,
    /// Difference of the per-letter score maxima over the two sets.
    pub lambda_gap: f64,
    /// Sandwich bounds: the normalized log posterior always lies in
    /// `[lambda_gap - slack, lambda_gap + slack]` with
    /// `slack = (m/n) log(n+1)`.
    pub lower: f64,
    pub upper: f64,
}

/// Decay-rate series plus, when computable, the limiting rate predicted
/// from L-projections of the schedule's limit pmf.
#[derive(Clone, Debug)]
pub struct DecayRateSeries {
    pub entries: Vec<DecayRateEntry>,
    /// `L*(B intersect Q) - L*(Q)` under a uniform prior on linear convex
    /// sets; `None` when the prediction machinery does not apply (atom
    /// priors, non-polytope sets, degenerate projections).
    pub predicted_limit: Option<f64>,
}

/// Per-n posterior of `set_b` along a type schedule, with sandwich bounds
/// certifying how far the normalized log posterior can sit from the
/// lambda-gap point estimate.
pub fn source_decay_rate(
    set_b: &SetExpr,
    set_q: &SetExpr,
    schedule: &TypeSchedule,
    prior: &PriorSpec,
) -> Result<DecayRateSeries> {
    let mut entries = Vec::new();
    for observed in schedule.realize()? {
        let n = observed.n();
        let m = observed.m();
        let mut num = MassAccumulator::new();
        let mut den = MassAccumulator::new();
        scan_posterior(set_b, set_q, &observed, prior, |_, w, in_b| {
            den.add(w);
            if in_b {
                num.add(w);
            }
        })?;
        if den.lse.value() == f64::NEG_INFINITY {
            return Err(Error::ConditioningOnNull);
        }
        let nf = n as f64;
        let slack = m as f64 / nf * ln(nf + 1.0);
        let lambda_gap = (num.max_weight - den.max_weight) / nf;
        let log_numerator = num.lse.value();
        let log_denominator = den.lse.value();
        entries.push(DecayRateEntry {
            n,
            log_numerator,
            log_denominator,
            probability: exp(log_numerator - log_denominator).min(1.0),
            normalized_log_posterior: (log_numerator - log_denominator) / nf,
            lambda_gap,
            lower: lambda_gap - slack,
            upper: lambda_gap + slack,
        });
    }
    let predicted_limit = predict_limit(set_b, set_q, &schedule.limit_pmf(), prior);
    Ok(DecayRateSeries { entries, predicted_limit })
}

/// Limit of the normalized log posterior under a uniform prior: the
/// best per-letter log-likelihood over B intersect Q minus the best over
/// Q, both found by L-projection of the limiting type pmf.
fn predict_limit(
    set_b: &SetExpr,
    set_q: &SetExpr,
    limit: &Pmf,
    prior: &PriorSpec,
) -> Option<f64> {
    if !prior.is_uniform() {
        return None;
    }
    let both = SetExpr::Intersection(alloc::vec![set_b.clone(), set_q.clone()]);
    let num = l_projection_convex(limit, &both).ok()?;
    let den = l_projection_convex(limit, set_q).ok()?;
    Some(num.objective - den.objective)
}

/// One sample size of a posterior-concentration series.
#[derive(Clone, Debug)]
pub struct ColtEntry {
    pub n: u64,
    pub probability: f64,
    pub log_posterior: f64,
}

/// Posterior concentration series: the dominant source and the posterior
/// mass of a ball around it along the schedule.
#[derive(Clone, Debug)]
pub struct ColtSeries {
    /// L-projection of the schedule's limit pmf onto the conditioning set:
    /// the point the posterior concentrates on.
    pub center: Pmf,
    pub radius: f64,
    pub convention: BallConvention,
    pub entries: Vec<ColtEntry>,
}

/// Compute the posterior mass of a ball around the dominant source at
/// every scheduled sample size. The conditioning set must be an
/// intersection of linear constraints (the dominant point is found by
/// L-projection onto it).
pub fn colt_series(
    set_q: &SetExpr,
    schedule: &TypeSchedule,
    prior: &PriorSpec,
    radius: f64,
    convention: BallConvention,
) -> Result<ColtSeries> {
    let limit = schedule.limit_pmf();
    set_q.check_dimension(limit.len())?;
    let center = l_projection_convex(&limit, set_q)?.pmf;
    let ball = SetExpr::ball(center.clone(), radius, convention)?;
    let mut entries = Vec::new();
    for observed in schedule.realize()? {
        let report = posterior_prob(&ball, set_q, &observed, prior)?;
        entries.push(ColtEntry {
            n: observed.n(),
            probability: report.probability,
            log_posterior: report.log_numerator - report.log_denominator,
        });
    }
    Ok(ColtSeries { center, radius, convention, entries })
}

/// Probability that n draws from a source produce a type inside a set.
#[derive(Clone, Debug)]
pub struct TypeSetProbability {
    pub n: u64,
    pub log_probability: f64,
    pub probability: f64,
    /// Number of n-types in the set.
    pub members: u64,
}

/// Exact-enumeration probability `P(type of n draws from source is in
/// set)`. The source must have full support; a source with structural
/// zeros lives on a smaller alphabet and should be restated there.
pub fn type_probability_set(
    set: &SetExpr,
    source: &Pmf,
    n: u64,
) -> Result<TypeSetProbability> {
    let m = source.len();
    set.check_dimension(m)?;
    if source.support().count() != m {
        return Err(Error::SupportCondition(String::from(
            "type probabilities need a fully supported source",
        )));
    }
    let plan = EnumerationPlan::new(n, m)?.with_filter(set.clone())?;
    // ln Gamma(t) + sum t_i ln r_i per member, with factorials from a table.
    let ln_fact: Vec<f64> = (0..=n).map(ln_factorial).collect();
    let ln_r: Vec<f64> = source.weights().iter().map(|&w| ln(w)).collect();
    let mut lse = LogSumExp::new();
    let mut members = 0u64;
    plan.for_each(|counts| {
        let mut w = ln_fact[n as usize];
        for (i, &c) in counts.iter().enumerate() {
            w -= ln_fact[c as usize];
            if c > 0 {
                w += c as f64 * ln_r[i];
            }
        }
        lse.add(w);
        members += 1;
    })?;
    let log_probability = lse.value();
    Ok(TypeSetProbability {
        n,
        log_probability,
        probability: exp(log_probability).min(1.0),
        members,
    })
}

/// One sample size of a conditional type-concentration series.
#[derive(Clone, Debug)]
pub struct TypeConditionalEntry {
    pub n: u64,
    /// Probability of the ball around the dominant type, conditioned on
    /// the empirical type lying in the rare set.
    pub probability: f64,
    /// `log P(type in the rare set and in the ball)`.
    pub log_ball_probability: f64,
    /// `log P(type in the rare set)`.
    pub log_set_probability: f64,
    /// `(1/n) log P(type in the rare set)`; converges to minus
    /// the information rate.
    pub rate: f64,
    /// Smallest divergence to the source over the set's lattice members:
    /// the rate is at least `-best_divergence - (m/n) log(n+1)` and at
    /// most `-information_rate + (m/n) log(n+1)`.
    pub best_divergence: f64,
}

/// Conditional concentration of empirical types on the I-projection.
#[derive(Clone, Debug)]
pub struct ColtTypesSeries {
    /// I-projection of the source onto the rare set: the point the
    /// conditioned types concentrate on.
    pub center: Pmf,
    pub radius: f64,
    pub convention: BallConvention,
    /// `I(center || source)`: the predicted decay rate of the rare-set
    /// probability.
    pub information_rate: f64,
    pub entries: Vec<TypeConditionalEntry>,
}

/// Type-side conditional concentration series: for each scheduled n, the
/// probability that the empirical type of n draws from `source` lies
/// within a ball around the I-projection of the source onto `rare`,
/// conditioned on the type lying in `rare` at all. Conditioning on the
/// whole simplex reduces to the unconditional law of large numbers for
/// types. The rare set must be an intersection of linear constraints and
/// reachable from the source's support; the source must have full
/// support.
pub fn colt_types(
    source: &Pmf,
    rare: &SetExpr,
    radius: f64,
    convention: BallConvention,
    ns: &[u64],
) -> Result<ColtTypesSeries> {
    let m = source.len();
    rare.check_dimension(m)?;
    if source.support().count() != m {
        return Err(Error::SupportCondition(String::from(
            "type probabilities need a fully supported source",
        )));
    }
    let projection = crate::projection::i_projection_convex(source, rare)?;
    let center = projection.pmf;
    let information_rate = projection.objective;
    let ball = SetExpr::ball(center.clone(), radius, convention)?;
    let ln_r: Vec<f64> = source.weights().iter().map(|&w| ln(w)).collect();
    let mut entries = Vec::with_capacity(ns.len());
    for &n in ns {
        let plan = EnumerationPlan::new(n, m)?.with_filter(rare.clone())?;
        let in_ball = PreparedSet::new(&ball, m, n)?;
        let ln_fact: Vec<f64> = (0..=n).map(ln_factorial).collect();
        let mut den = LogSumExp::new();
        let mut num = LogSumExp::new();
        let mut best_divergence = f64::INFINITY;
        plan.for_each(|counts| {
            let mut w = ln_fact[n as usize];
            let mut div = 0.0;
            for (i, &c) in counts.iter().enumerate() {
                w -= ln_fact[c as usize];
                if c > 0 {
                    w += c as f64 * ln_r[i];
                    let f = c as f64 / n as f64;
                    div += f * (ln(f) - ln_r[i]);
                }
            }
            if div < best_divergence {
                best_divergence = div;
            }
            den.add(w);
            if in_ball.contains(counts) {
                num.add(w);
            }
        })?;
        let log_set_probability = den.value();
        if log_set_probability == f64::NEG_INFINITY {
            return Err(Error::ConditioningOnNull);
        }
        entries.push(TypeConditionalEntry {
            n,
            probability: exp(num.value() - log_set_probability).min(1.0),
            log_ball_probability: num.value(),
            log_set_probability,
            rate: log_set_probability / n as f64,
            best_divergence,
        });
    }
    Ok(ColtTypesSeries { center, radius, convention, information_rate, entries })
}
