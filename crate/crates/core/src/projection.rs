//! I- and L-projections onto linear families and linear convex sets.
//!
//! The L-projection of p onto a family maximizes `sum_{S(p)} p_i log q_i`;
//! its interior solution lives in the reciprocal-affine family
//! `q_i = p_i / (1 - sum_j theta_j (u_ji - a_j))`. The I-projection of r
//! minimizes `sum q_i log(q_i / r_i)`; its interior solution is the
//! exponential-family member `q_i = r_i exp(sum_j theta_j (u_ji - a_j) -
//! A(theta))`. Both parameterizations auto-normalize at a constraint root:
//! for the reciprocal form, `sum_i q_i(theta) = 1 + sum_j theta_j
//! G_j(theta)` with `G_j = sum_i q_i (u_ji - a_j)`, so driving the
//! residuals G to zero settles normalization for free.
//!
//! Solve order per projection: an exact rational solve of the affine
//! system first (it settles families whose feasible slice is a single
//! point, including boundary vertices the iterative forms cannot reach),
//! then a strict-interior feasibility check per row, then damped Newton,
//! then a bisection fallback for single-constraint reciprocal solves.
//! Convex sets (equality rows plus ">=" rows) are handled by enumerating
//! candidate active sets and checking primal feasibility and multiplier
//! signs; any candidate passing both is a global optimum by convexity.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::divergence::{i_divergence, l_divergence};
use crate::family::{HullPosition, LinearFamily};
use crate::math::{exp, ln, solve_dense, solve_exact_affine, AffineSolution};
use crate::sets::SetExpr;
use crate::types::{make_pmf, Pmf};
use crate::{Error, Result};

/// Constraint-residual level the Newton loops drive toward.
const SOLVE_TOL: f64 = 1e-12;
/// Residual level a result must reach to be reported as converged.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Multiplier sign slack in the active-set optimality check.
pub const KKT_TOLERANCE: f64 = 1e-8;
/// Slack when checking inactive ">=" rows on a candidate optimum.
const FEASIBILITY_TOL: f64 = 1e-9;
/// Floor for reciprocal-family denominators during line search.
const D_MIN: f64 = 1e-12;
/// Alternative step acceptance: a trial that shrinks the gradient norm by
/// this factor counts as progress. Near the optimum the objective decrease
/// per step falls below one ulp of the objective and the Armijo test goes
/// blind, while the gradient stays resolvable down to ~1e-15; without this
/// the loops stall around residual 1e-10.
const GRAD_SHRINK: f64 = 0.9;
const MAX_NEWTON: u32 = 200;
const MAX_BISECT: u32 = 300;
const MAX_INEQUALITIES: usize = 12;

/// Convergence record of one projection solve.
#[derive(Clone, Debug)]
pub struct SolverDiagnostics {
    /// Newton (or bisection) iterations spent.
    pub iterations: u32,
    /// Final max-norm of the constraint residuals `sum_i q_i u_ji - a_j`.
    pub residual: f64,
    /// True when the solve met [`RESIDUAL_TOLERANCE`].
    pub converged: bool,
    /// True when the single-constraint bisection fallback produced the root.
    pub used_bisection: bool,
    /// True when the feasible slice was a single point solved exactly.
    pub pinned: bool,
}

/// Reciprocal-affine family member: `q_i = p_i / d_i(theta)` with
/// `d_i = 1 - sum_j theta_j (u_ji - a_j)`.
#[derive(Clone, Debug)]
pub struct LambdaFamilyMember {
    pub theta: Vec<f64>,
}

/// Exponential family member: `q_i = r_i exp(sum_j theta_j (u_ji - a_j)
/// - log_normalizer)`.
#[derive(Clone, Debug)]
pub struct ExpFamilyMember {
    pub theta: Vec<f64>,
    pub log_normalizer: f64,
}

/// Structured form of a projection optimum, when one is available.
#[derive(Clone, Debug)]
pub enum FamilyMember {
    Lambda(LambdaFamilyMember),
    Exponential(ExpFamilyMember),
}

/// Result of a projection: the optimizing pmf, its structured form (absent
/// for exactly-pinned solves), the objective value in nats, and solver
/// diagnostics. For convex projections `active` lists the ">=" rows that
/// are tight at the optimum, in input order.
#[derive(Clone, Debug)]
pub struct ProjectionResult {
    pub pmf: Pmf,
    pub member: Option<FamilyMember>,
    pub objective: f64,
    pub diagnostics: SolverDiagnostics,
    pub active: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Maximize `sum_{S(p)} p_i log q_i`.
    Lambda,
    /// Minimize `sum q_i log(q_i / r_i)`.
    Exponential,
}

/// Base-pmf data restricted to its support, with centered constraint rows.
struct Restricted {
    /// Support letter indices into 0..m.
    idx: Vec<usize>,
    /// Base weights on the support (they sum to 1).
    w: Vec<f64>,
    /// Centered rows `c[j][t] = u_j(idx[t]) - a_j`.
    c: Vec<Vec<f64>>,
}

impl Restricted {
    fn new(base: &Pmf, family: &LinearFamily) -> Restricted {
        let idx: Vec<usize> = base.support().collect();
        let w: Vec<f64> = idx.iter().map(|&i| base.weight(i)).collect();
        let c = family
            .u_float()
            .iter()
            .zip(family.a_float())
            .map(|(row, &a)| idx.iter().map(|&i| row[i] - a).collect())
            .collect();
        Restricted { idx, w, c }
    }

    fn k(&self) -> usize {
        self.c.len()
    }

    fn len(&self) -> usize {
        self.idx.len()
    }
}

/// L-projection of `p` onto a linear family: the family member maximizing
/// the per-letter log-likelihood `sum_{S(p)} p_i log q_i`. The optimum is
/// supported on S(p); letters outside keep probability zero.
pub fn l_projection_linear(p: &Pmf, family: &LinearFamily) -> Result<ProjectionResult> {
    project_linear(Kind::Lambda, p, family)
}

/// I-projection of `r` onto a linear family: the family member minimizing
/// the relative entropy `sum q_i log(q_i / r_i)`. The optimum is supported
/// on S(r).
pub fn i_projection_linear(r: &Pmf, family: &LinearFamily) -> Result<ProjectionResult> {
    project_linear(Kind::Exponential, r, family)
}

fn project_linear(kind: Kind, base: &Pmf, family: &LinearFamily) -> Result<ProjectionResult> {
    if family.m() != base.len() {
        return Err(Error::DimensionMismatch { expected: base.len(), got: family.m() });
    }
    let support: Vec<usize> = base.support().collect();

    // Exact pre-solve: when the constraints plus normalization pin the
    // support coordinates uniquely, the feasible slice is that point (or
    // empty), independent of the objective.
    match pinned_point(family, &support, base.len())? {
        Pinned::Point(weights) => {
            let pmf = result_pmf(&weights)?;
            let objective = objective_value(kind, &pmf, base)?;
            let residual = max_abs(&family.residuals(pmf.weights())?);
            return Ok(ProjectionResult {
                pmf,
                member: None,
                objective,
                diagnostics: SolverDiagnostics {
                    iterations: 0,
                    residual,
                    converged: residual <= RESIDUAL_TOLERANCE,
                    used_bisection: false,
                    pinned: true,
                },
                active: Vec::new(),
            });
        }
        Pinned::Infeasible(why) => return Err(Error::InfeasibleConstraints(why)),
        Pinned::Open => {}
    }

    // Interior requirement per row: a target on the hull edge forces mass
    // onto the extreme letters only, which the interior parameterizations
    // cannot represent and which degenerates the L-objective.
    for j in 0..family.k() {
        match family.target_hull_position(j, &support) {
            HullPosition::Interior => {}
            HullPosition::Boundary => {
                return Err(Error::SupportCondition(alloc::format!(
                    "constraint {j} touches its target only on the boundary of \
                     the achievable range over the base support"
                )))
            }
            HullPosition::Outside => {
                return Err(Error::InfeasibleConstraints(alloc::format!(
                    "constraint {j} is not achievable by any pmf on the base support"
                )))
            }
        }
    }

    let data = Restricted::new(base, family);
    let solved = match kind {
        Kind::Lambda => solve_lambda(&data),
        Kind::Exponential => Ok(solve_exponential(&data)),
    }?;
    if !solved.diagnostics.converged {
        return Err(Error::SolverFailure {
            iterations: solved.diagnostics.iterations,
            residual: solved.diagnostics.residual,
            detail: String::from("projection residuals did not converge"),
        });
    }
    let mut weights = vec![0.0; base.len()];
    for (t, &i) in data.idx.iter().enumerate() {
        weights[i] = solved.q[t];
    }
    let pmf = result_pmf(&weights)?;
    let objective = objective_value(kind, &pmf, base)?;
    let member = match kind {
        Kind::Lambda => FamilyMember::Lambda(LambdaFamilyMember { theta: solved.theta }),
        Kind::Exponential => FamilyMember::Exponential(ExpFamilyMember {
            theta: solved.theta,
            log_normalizer: solved.log_normalizer,
        }),
    };
    Ok(ProjectionResult {
        pmf,
        member: Some(member),
        objective,
        diagnostics: solved.diagnostics,
        active: Vec::new(),
    })
}

enum Pinned {
    /// Unique feasible point (full-length weights, zeros off support).
    Point(Vec<f64>),
    Infeasible(String),
    /// The affine slice has positive dimension; solve iteratively.
    Open,
}

/// Exact rational solve of (constraint rows + normalization) restricted to
/// the support coordinates.
fn pinned_point(family: &LinearFamily, support: &[usize], m: usize) -> Result<Pinned> {
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(family.k() + 1);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(family.k() + 1);
    for (row, a) in family.u().iter().zip(family.a()) {
        rows.push(support.iter().map(|&i| row[i].clone()).collect());
        rhs.push(a.clone());
    }
    rows.push(vec![BigRational::from_integer(1.into()); support.len()]);
    rhs.push(BigRational::from_integer(1.into()));
    match solve_exact_affine(&rows, &rhs) {
        AffineSolution::Underdetermined => Ok(Pinned::Open),
        AffineSolution::Inconsistent => Ok(Pinned::Infeasible(String::from(
            "constraints are mutually inconsistent on the base support",
        ))),
        AffineSolution::Unique(sol) => {
            if sol.iter().any(|x| x < &BigRational::zero()) {
                return Ok(Pinned::Infeasible(String::from(
                    "the unique solution of the constraint system has a negative coordinate",
                )));
            }
            let mut weights = vec![0.0; m];
            for (&i, x) in support.iter().zip(&sol) {
                weights[i] = x.to_f64().ok_or(Error::InvalidParameter(
                    "pinned coordinate out of f64 range",
                ))?;
            }
            Ok(Pinned::Point(weights))
        }
    }
}

struct Solved {
    /// Optimal weights on the support coordinates.
    q: Vec<f64>,
    theta: Vec<f64>,
    log_normalizer: f64,
    diagnostics: SolverDiagnostics,
}

/// Reciprocal-family Newton solve; falls back to bisection for k = 1.
fn solve_lambda(data: &Restricted) -> Result<Solved> {
    let k = data.k();
    let s = data.len();
    let mut theta = vec![0.0; k];
    let mut d = vec![1.0; s];
    let mut iterations = 0;
    let mut converged = false;

    let compute_d = |theta: &[f64], d: &mut [f64]| {
        for t in 0..s {
            let mut acc = 1.0;
            for j in 0..k {
                acc -= theta[j] * data.c[j][t];
            }
            d[t] = acc;
        }
    };
    let phi = |d: &[f64]| -> f64 { -data.w.iter().zip(d).map(|(&w, &di)| w * ln(di)).sum::<f64>() };

    let mut d_new = vec![0.0; s];
    for _ in 0..MAX_NEWTON {
        iterations += 1;
        let mut g = vec![0.0; k];
        for j in 0..k {
            g[j] = (0..s).map(|t| data.w[t] * data.c[j][t] / d[t]).sum();
        }
        if max_abs(&g) <= SOLVE_TOL {
            converged = true;
            break;
        }
        let mut h = vec![vec![0.0; k]; k];
        for j in 0..k {
            for l in j..k {
                let v: f64 =
                    (0..s).map(|t| data.w[t] * data.c[j][t] * data.c[l][t] / (d[t] * d[t])).sum();
                h[j][l] = v;
                h[l][j] = v;
            }
        }
        let Some(step) = newton_step(&h, &g) else { break };
        // Backtracking: keep all denominators above D_MIN and require a
        // decrease of the barrier objective phi = -sum w log d, or failing
        // that a GRAD_SHRINK cut of the gradient norm.
        let phi0 = phi(&d);
        let g_norm = max_abs(&g);
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        let mut t_step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> =
                theta.iter().zip(&step).map(|(th, dl)| th + t_step * dl).collect();
            compute_d(&trial, &mut d_new);
            if d_new.iter().all(|&x| x >= D_MIN) {
                let trial_g_norm = (0..k)
                    .map(|j| (0..s).map(|t| data.w[t] * data.c[j][t] / d_new[t]).sum::<f64>())
                    .fold(0.0f64, |m, x| m.max(x.abs()));
                if phi(&d_new) <= phi0 + 1e-4 * t_step * slope
                    || trial_g_norm <= GRAD_SHRINK * g_norm
                {
                    theta = trial;
                    d.copy_from_slice(&d_new);
                    accepted = true;
                    break;
                }
            }
            t_step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let residual = {
        let mut g = vec![0.0; k];
        for j in 0..k {
            g[j] = (0..s).map(|t| data.w[t] * data.c[j][t] / d[t]).sum();
        }
        max_abs(&g)
    };
    if (converged || residual <= RESIDUAL_TOLERANCE) && d.iter().all(|&x| x > 0.0) {
        let q: Vec<f64> = (0..s).map(|t| data.w[t] / d[t]).collect();
        return Ok(Solved {
            q,
            theta,
            log_normalizer: 0.0,
            diagnostics: SolverDiagnostics {
                iterations,
                residual,
                converged: true,
                used_bisection: false,
                pinned: false,
            },
        });
    }
    if k == 1 {
        return bisect_lambda(data, iterations);
    }
    Ok(Solved {
        q: vec![0.0; s],
        theta,
        log_normalizer: 0.0,
        diagnostics: SolverDiagnostics {
            iterations,
            residual,
            converged: false,
            used_bisection: false,
            pinned: false,
        },
    })
}

/// Single-constraint reciprocal solve by bisection. The residual
/// `G(theta) = sum_t w_t c_t / (1 - theta c_t)` increases strictly on the
/// open domain between the poles and spans -inf..+inf, so the sign
/// bisection always converges to the unique root.
fn bisect_lambda(data: &Restricted, prior_iterations: u32) -> Result<Solved> {
    let c = &data.c[0];
    let s = data.len();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for &ci in c {
        if ci > 0.0 {
            hi = hi.min(1.0 / ci);
        } else if ci < 0.0 {
            lo = lo.max(1.0 / ci);
        }
    }
    // Strict interior feasibility guarantees coefficients of both signs.
    debug_assert!(lo.is_finite() && hi.is_finite());
    let g = |theta: f64| -> f64 {
        (0..s).map(|t| data.w[t] * c[t] / (1.0 - theta * c[t])).sum()
    };
    let mut a = lo;
    let mut b = hi;
    let mut iterations = prior_iterations;
    let mut mid = 0.5 * (a + b);
    for _ in 0..MAX_BISECT {
        iterations += 1;
        mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // adjacent floats: cannot shrink further
        }
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let residual = g(mid).abs();
    let q: Vec<f64> = (0..s).map(|t| data.w[t] / (1.0 - mid * c[t])).collect();
    let converged = residual <= RESIDUAL_TOLERANCE;
    if !converged {
        return Err(Error::SolverFailure {
            iterations,
            residual,
            detail: String::from("bisection could not reach the residual tolerance"),
        });
    }
    Ok(Solved {
        q,
        theta: vec![mid],
        log_normalizer: 0.0,
        diagnostics: SolverDiagnostics {
            iterations,
            residual,
            converged,
            used_bisection: true,
            pinned: false,
        },
    })
}

/// Exponential-family dual Newton solve: minimize `A(theta) = log sum_t
/// w_t exp(theta . c_t)` (centered rows make the linear term vanish).
fn solve_exponential(data: &Restricted) -> Solved {
    let k = data.k();
    let s = data.len();
    let mut theta = vec![0.0; k];
    let mut iterations = 0;
    let mut converged = false;

    // Returns (objective A, member weights q) at a parameter point.
    let eval = |theta: &[f64]| -> (f64, Vec<f64>) {
        let logits: Vec<f64> = (0..s)
            .map(|t| (0..k).map(|j| theta[j] * data.c[j][t]).sum::<f64>())
            .collect();
        let shift = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> =
            (0..s).map(|t| data.w[t] * exp(logits[t] - shift)).collect();
        let z: f64 = weights.iter().sum();
        (shift + ln(z), weights.iter().map(|w| w / z).collect())
    };

    let (mut obj, mut q) = eval(&theta);
    for _ in 0..MAX_NEWTON {
        iterations += 1;
        let mut g = vec![0.0; k];
        for j in 0..k {
            g[j] = (0..s).map(|t| q[t] * data.c[j][t]).sum();
        }
        if max_abs(&g) <= SOLVE_TOL {
            converged = true;
            break;
        }
        // Hessian of A is the covariance of the centered rows under q.
        let mut h = vec![vec![0.0; k]; k];
        for j in 0..k {
            for l in j..k {
                let e: f64 = (0..s).map(|t| q[t] * data.c[j][t] * data.c[l][t]).sum();
                let v = e - g[j] * g[l];
                h[j][l] = v;
                h[l][j] = v;
            }
        }
        let Some(step) = newton_step(&h, &g) else { break };
        // Armijo decrease of A, or a GRAD_SHRINK cut of the gradient norm
        // once A bottoms out in float resolution.
        let g_norm = max_abs(&g);
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        let mut t_step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> =
                theta.iter().zip(&step).map(|(th, dl)| th + t_step * dl).collect();
            let (obj_t, q_t) = eval(&trial);
            let trial_g_norm = (0..k)
                .map(|j| (0..s).map(|t| q_t[t] * data.c[j][t]).sum::<f64>())
                .fold(0.0f64, |m, x| m.max(x.abs()));
            if obj_t <= obj + 1e-4 * t_step * slope || trial_g_norm <= GRAD_SHRINK * g_norm {
                theta = trial;
                obj = obj_t;
                q = q_t;
                accepted = true;
                break;
            }
            t_step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let residual = {
        let mut g = vec![0.0; k];
        for j in 0..k {
            g[j] = (0..s).map(|t| q[t] * data.c[j][t]).sum();
        }
        max_abs(&g)
    };
    Solved {
        q,
        theta,
        log_normalizer: obj,
        diagnostics: SolverDiagnostics {
            iterations,
            residual,
            converged: converged || residual <= RESIDUAL_TOLERANCE,
            used_bisection: false,
            pinned: false,
        },
    }
}

/// Solve `H step = -g`, adding an escalating ridge when H is singular.
fn newton_step(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let k = g.len();
    let trace: f64 = (0..k).map(|j| h[j][j]).sum();
    let mut ridge = 0.0;
    for _ in 0..6 {
        let mut a: Vec<Vec<f64>> = h.to_vec();
        if ridge > 0.0 {
            for (j, row) in a.iter_mut().enumerate() {
                row[j] += ridge;
            }
        }
        let mut b: Vec<f64> = g.iter().map(|x| -x).collect();
        if let Some(sol) = solve_dense(&mut a, &mut b) {
            return Some(sol);
        }
        ridge = if ridge == 0.0 { 1e-12 * (1.0 + trace.abs()) } else { ridge * 100.0 };
    }
    None
}

fn objective_value(kind: Kind, q: &Pmf, base: &Pmf) -> Result<f64> {
    match kind {
        Kind::Lambda => l_divergence(q, base),
        Kind::Exponential => i_divergence(q, base),
    }
}

fn result_pmf(weights: &[f64]) -> Result<Pmf> {
    // Auto-normalization leaves only float residue in the total mass.
    make_pmf(weights, 1e-9)
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// L-projection onto a convex set given as an intersection of linear
/// equalities and ">=" inequalities (anything else is unsupported).
pub fn l_projection_convex(p: &Pmf, set: &SetExpr) -> Result<ProjectionResult> {
    project_convex(Kind::Lambda, p, set)
}

/// I-projection onto a convex set given as an intersection of linear
/// equalities and ">=" inequalities.
pub fn i_projection_convex(r: &Pmf, set: &SetExpr) -> Result<ProjectionResult> {
    project_convex(Kind::Exponential, r, set)
}

fn project_convex(kind: Kind, base: &Pmf, set: &SetExpr) -> Result<ProjectionResult> {
    set.check_dimension(base.len())?;
    let poly = set.as_polytope().ok_or(Error::UnsupportedSetExpression(
        "convex projection needs an intersection of linear equalities and inequalities",
    ))?;
    let g = poly.ges.len();
    if g > MAX_INEQUALITIES {
        return Err(Error::UnsupportedSetExpression(
            "convex projection supports at most 12 inequality rows",
        ));
    }

    // Residual of one ">=" row at a float point.
    let ge_slack = |row: usize, q: &Pmf| -> f64 {
        let (coeffs, target) = &poly.ges[row];
        coeffs
            .iter()
            .zip(q.weights())
            .map(|(c, &x)| c.to_f64().unwrap_or(f64::NAN) * x)
            .sum::<f64>()
            - target.to_f64().unwrap_or(f64::NAN)
    };

    let mut best: Option<(ProjectionResult, u32)> = None;
    for mask in 0u32..(1u32 << g) {
        let active: Vec<usize> = (0..g).filter(|j| mask & (1 << j) != 0).collect();
        let candidate = solve_mask(kind, base, &poly, &active);
        let Ok(mut cand) = candidate else { continue };

        // Primal feasibility: inactive rows must hold with slack.
        if (0..g)
            .filter(|j| !active.contains(j))
            .any(|j| ge_slack(j, &cand.pmf) < -FEASIBILITY_TOL)
        {
            continue;
        }
        // Multiplier signs for active rows, when a structured member is
        // available: active-row multipliers must be non-negative. Exactly
        // pinned candidates carry no multipliers; they are kept as
        // feasible candidates and win only on objective.
        let dual_ok = match &cand.member {
            None => true,
            Some(member) => {
                let theta: &[f64] = match member {
                    FamilyMember::Lambda(m) => &m.theta,
                    FamilyMember::Exponential(m) => &m.theta,
                };
                // Rows are ordered equalities first, then active rows.
                theta[poly.eqs.len()..].iter().all(|&t| t >= -KKT_TOLERANCE)
            }
        };
        if !dual_ok {
            continue;
        }
        cand.active = active;
        let better = match (&best, kind) {
            (None, _) => true,
            (Some((b, _)), Kind::Lambda) => cand.objective > b.objective,
            (Some((b, _)), Kind::Exponential) => cand.objective < b.objective,
        };
        if better {
            best = Some((cand, mask));
        }
    }
    match best {
        Some((result, _)) => Ok(result),
        None => Err(Error::InfeasibleConstraints(String::from(
            "no active-constraint combination produced a feasible optimum",
        ))),
    }
}

/// Projection with the given ">=" rows forced active (as equalities).
fn solve_mask(
    kind: Kind,
    base: &Pmf,
    poly: &crate::sets::Polytope,
    active: &[usize],
) -> Result<ProjectionResult> {
    let mut rows: Vec<Vec<BigRational>> = poly.eqs.iter().map(|(r, _)| r.clone()).collect();
    let mut rhs: Vec<BigRational> = poly.eqs.iter().map(|(_, t)| t.clone()).collect();
    for &j in active {
        rows.push(poly.ges[j].0.clone());
        rhs.push(poly.ges[j].1.clone());
    }
    if rows.is_empty() {
        // Unconstrained: the projection of the base onto the simplex is
        // the base itself (both objectives are uniquely optimized there).
        let objective = objective_value(kind, base, base)?;
        return Ok(ProjectionResult {
            pmf: base.clone(),
            member: None,
            objective,
            diagnostics: SolverDiagnostics {
                iterations: 0,
                residual: 0.0,
                converged: true,
                used_bisection: false,
                pinned: true,
            },
            active: Vec::new(),
        });
    }
    let family = LinearFamily::new(rows, rhs)?;
    project_linear(kind, base, &family)
}

/// Certificate report for a claimed L-projection.
#[derive(Clone, Debug)]
pub struct OptimalityReport {
    /// `sum_{S(p)} p_i (1 - q'_i / qhat_i)` per probe; identically zero
    /// over the family exactly at the optimum.
    pub certificate: Vec<f64>,
    pub max_abs_certificate: f64,
    /// `L(qhat || p)`.
    pub objective: f64,
    /// `L(qhat || p) - L(q' || p)` per probe; non-negative at the optimum.
    pub probe_gaps: Vec<f64>,
}

/// Evaluate the first-order optimality certificate of a claimed
/// L-projection `qhat` of `p` against feasible probe members `q'`.
///
/// At the true optimum the certificate vanishes for every member of the
/// family (the derivative of `L((1-t) qhat + t q')` at t = 0), and every
/// probe gap is non-negative. `qhat` must be strictly positive on S(p).
pub fn check_l_optimality(p: &Pmf, qhat: &Pmf, probes: &[Pmf]) -> Result<OptimalityReport> {
    if qhat.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: qhat.len() });
    }
    for i in p.support() {
        if qhat.weight(i) == 0.0 {
            return Err(Error::SupportCondition(String::from(
                "candidate projection vanishes on the base support",
            )));
        }
    }
    let objective = l_divergence(qhat, p)?;
    let mut certificate = Vec::with_capacity(probes.len());
    let mut probe_gaps = Vec::with_capacity(probes.len());
    for probe in probes {
        if probe.len() != p.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: probe.len() });
        }
        let mut v = 0.0;
        for i in p.support() {
            v += p.weight(i) * (1.0 - probe.weight(i) / qhat.weight(i));
        }
        certificate.push(v);
        probe_gaps.push(objective - l_divergence(probe, p)?);
    }
    let max_abs_certificate = max_abs(&certificate);
    Ok(OptimalityReport { certificate, max_abs_certificate, objective, probe_gaps })
}
