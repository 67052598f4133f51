//! Exact method-of-types computations on finite alphabets.
//!
//! The crate works with probability mass functions on a finite ordered
//! alphabet of `m` letters and with *n-types*: integer count vectors
//! `[n_1, ..., n_m]` summing to `n`, identified with the n-rational pmf
//! `counts / n`. On top of these it provides
//!
//! * I-divergence `I(p||q) = sum p_i log(p_i/q_i)` and L-divergence
//!   `L(q||p) = sum p_i log q_i`, together with multiplicities and
//!   type probabilities ([`divergence`]),
//! * exhaustive enumeration of all n-types, optionally restricted to a
//!   constraint set, with exact rational membership tests
//!   ([`enumeration`], [`sets`]),
//! * I-projections onto linear families (exponential-family solve) and
//!   L-projections onto linear families and convex polytopes
//!   (Lambda-family solve plus active-set search) ([`projection`]),
//! * exact posterior probabilities of source sets given an observed
//!   type, decay-rate series with finite-n sandwich bounds, and the
//!   conditional-concentration series behind the limit theorems
//!   ([`posterior`]),
//! * a finite-partition bridge for distributions on a continuous
//!   alphabet ([`partition`]).
//!
//! Everything that decides set membership of an n-type runs in exact
//! big-rational arithmetic; floating point enters only through
//! divergences, solvers and log-space mass accumulation. The [`oracle`]
//! module carries the exact big-rational reference implementations used
//! to pin down the floating-point paths in tests.
//!
//! The crate is `no_std` (with `alloc`); all types are immutable after
//! construction and safe to share across threads.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod divergence;
pub mod enumeration;
mod error;
pub mod family;
pub mod math;
pub mod oracle;
pub mod partition;
pub mod posterior;
pub mod prior;
pub mod projection;
pub mod sets;
pub mod types;

pub use divergence::{
    entropy, i_divergence, kerridge_inaccuracy, l_divergence, lambda_score, log_multiplicity,
    log_source_likelihood, log_type_probability, multiplicity_exact,
};
pub use enumeration::{
    enumerate_sources, k_equivalent, quantize_prior, round_to_type, EnumerationPlan,
    QuantizedPrior,
};
pub use error::Error;
pub use family::LinearFamily;
pub use partition::{l_m_divergence, quantize, quantize_samples, PartitionSpec};
pub use posterior::{
    colt_series, colt_types, map_source, posterior_prob, source_decay_rate,
    type_probability_set, ColtEntry, ColtSeries, ColtTypesSeries, DecayRateEntry,
    DecayRateSeries, MapReport, PosteriorReport, TypeConditionalEntry, TypeSchedule,
    TypeSetProbability,
};
pub use prior::{PriorAtom, PriorSpec};
pub use projection::{
    check_l_optimality, i_projection_convex, i_projection_linear, l_projection_convex,
    l_projection_linear, ExpFamilyMember, FamilyMember, LambdaFamilyMember, OptimalityReport,
    ProjectionResult, SolverDiagnostics,
};
pub use sets::{evaluate_set, BallConvention, SetExpr, SetPoint};
pub use types::{make_pmf, support, Alphabet, NType, Pmf};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
