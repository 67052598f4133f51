//! Subcommand implementations. Each builds one [`Document`] from a loaded
//! [`Problem`] and the global flags.
//!
//! Sample sizes run in parallel: the per-n computations are independent
//! (each gets its own single-n schedule), and the results are collected in
//! schedule order before any formatting, so the emitted bytes cannot
//! depend on the worker count.

use rayon::prelude::*;

use motkit::{
    colt_types, l_divergence, log_multiplicity, map_source, source_decay_rate, BallConvention,
    ColtEntry, DecayRateEntry, EnumerationPlan, FamilyMember, NType, Pmf, ProjectionResult,
    TypeConditionalEntry,
};

use crate::config::{Problem, ScheduleKind};
use crate::output::{Cell, Document};
use crate::{CliError, ProjectionKind, SanovSide};

/// Map each scheduled n through `f` on a pool of `jobs` workers (all cores
/// when absent), preserving schedule order. Errors are reported in
/// schedule order too, so the failing n is the same on every run.
fn per_n<T, F>(ns: &[u64], jobs: Option<usize>, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64) -> Result<T, CliError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::computation(format!("cannot build thread pool: {e}")))?;
    let results: Vec<Result<T, CliError>> =
        pool.install(|| ns.par_iter().map(|&n| f(n)).collect());
    results.into_iter().collect()
}

fn pmf_text(pmf: &Pmf) -> String {
    let cells: Vec<String> = pmf.weights().iter().map(|w| format!("{w:.6}")).collect();
    format!("[{}]", cells.join(", "))
}

/// Posterior ball mass around the dominant source at every scheduled n.
pub fn cmd_table1(problem: &Problem, ball: BallConvention, jobs: Option<usize>) -> Result<Document, CliError> {
    let cond = problem.conditioning(ball)?;
    let prior = problem.prior()?;
    let radius = problem.ball_radius()?;
    let ns = problem.schedule_ns()?;
    let series = per_n(ns, jobs, |n| {
        let schedule = problem.schedule_at(n)?;
        Ok(motkit::colt_series(&cond, &schedule, &prior, radius, ball)?)
    })?;
    let mut doc = Document::new("posterior ball mass around the dominant source", &["n", "probability"]);
    if let Some(first) = series.first() {
        doc.note("center", Cell::Text(pmf_text(&first.center)));
        doc.note("radius", Cell::Text(format!("{}", first.radius)));
        doc.note("convention", Cell::Text(format!("{}", first.convention)));
    }
    for s in &series {
        let entry: &ColtEntry = &s.entries[0];
        doc.push(vec![Cell::Int(entry.n), Cell::Prob(entry.probability)]);
    }
    Ok(doc)
}

/// I- or L-projection of the observed type's pmf onto the conditioning set.
pub fn cmd_project(problem: &Problem, which: ProjectionKind, ball: BallConvention) -> Result<Document, CliError> {
    let base = problem.observed()?.induced_pmf();
    let cond = problem.conditioning(ball)?;
    let result: ProjectionResult = match which {
        ProjectionKind::I => motkit::i_projection_convex(&base, &cond)?,
        ProjectionKind::L => motkit::l_projection_convex(&base, &cond)?,
    };
    let title = match which {
        ProjectionKind::I => "i-projection onto the conditioning set",
        ProjectionKind::L => "l-projection onto the conditioning set",
    };
    let mut doc = Document::new(title, &["field", "index", "value"]);
    let blank = || Cell::Text(String::new());
    let family = match &result.member {
        None => "pinned",
        Some(FamilyMember::Lambda(_)) => "lambda",
        Some(FamilyMember::Exponential(_)) => "exponential",
    };
    doc.push(vec![Cell::Text("family".into()), blank(), Cell::Text(family.into())]);
    for (i, &w) in result.pmf.weights().iter().enumerate() {
        doc.push(vec![Cell::Text("pmf".into()), Cell::Int(i as u64 + 1), Cell::Prob(w)]);
    }
    match &result.member {
        None => {}
        Some(FamilyMember::Lambda(lambda)) => {
            for (j, &t) in lambda.theta.iter().enumerate() {
                doc.push(vec![Cell::Text("theta".into()), Cell::Int(j as u64 + 1), Cell::Num(t)]);
            }
        }
        Some(FamilyMember::Exponential(exp)) => {
            for (j, &t) in exp.theta.iter().enumerate() {
                doc.push(vec![Cell::Text("theta".into()), Cell::Int(j as u64 + 1), Cell::Num(t)]);
            }
            doc.push(vec![
                Cell::Text("log_normalizer".into()),
                blank(),
                Cell::Num(exp.log_normalizer),
            ]);
        }
    }
    doc.push(vec![Cell::Text("objective".into()), blank(), Cell::Rate(result.objective)]);
    doc.push(vec![
        Cell::Text("residual".into()),
        blank(),
        Cell::Num(result.diagnostics.residual),
    ]);
    doc.push(vec![
        Cell::Text("iterations".into()),
        blank(),
        Cell::Int(result.diagnostics.iterations as u64),
    ]);
    doc.push(vec![
        Cell::Text("converged".into()),
        blank(),
        Cell::Text(result.diagnostics.converged.to_string()),
    ]);
    for &row in &result.active {
        doc.push(vec![Cell::Text("active".into()), Cell::Int(row as u64 + 1), blank()]);
    }
    Ok(doc)
}

const SANOV_HEADER: [&str; 10] = [
    "n",
    "k",
    "log_numerator",
    "log_denominator",
    "probability",
    "rate",
    "lower",
    "upper",
    "limit",
    "gap",
];

/// One decay-series row, in header order. `gap` is derived: |rate - limit|.
struct SanovRow {
    n: u64,
    k: u64,
    log_num: f64,
    log_den: f64,
    probability: f64,
    rate: f64,
    lower: f64,
    upper: f64,
    limit: Option<f64>,
}

impl SanovRow {
    fn cells(self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n),
            Cell::Int(self.k),
            Cell::Rate(self.log_num),
            Cell::Rate(self.log_den),
            Cell::Prob(self.probability),
            Cell::Rate(self.rate),
            Cell::Rate(self.lower),
            Cell::Rate(self.upper),
            Cell::OptRate(self.limit),
            Cell::OptRate(self.limit.map(|l| (self.rate - l).abs())),
        ]
    }
}

/// Decay-rate series with per-n sandwich bounds and the predicted limit.
pub fn cmd_sanov(
    problem: &Problem,
    side: SanovSide,
    ball: BallConvention,
    jobs: Option<usize>,
) -> Result<Document, CliError> {
    match side {
        SanovSide::Sources => sanov_sources(problem, ball, jobs),
        SanovSide::Types => sanov_types(problem, ball, jobs),
    }
}

/// Source side: normalized log posterior of the event set inside the
/// conditioning set along the schedule.
fn sanov_sources(problem: &Problem, ball: BallConvention, jobs: Option<usize>) -> Result<Document, CliError> {
    let (event, outer) = problem.event_and_outer(ball)?;
    let prior = problem.prior()?;
    let ns = problem.schedule_ns()?;
    let kind = problem.schedule_kind();
    let base_n = match kind {
        ScheduleKind::Static => problem.observed()?.n(),
        ScheduleKind::Dynamic => 0,
    };
    let series = per_n(ns, jobs, |n| {
        let schedule = problem.schedule_at(n)?;
        Ok(source_decay_rate(&event, &outer, &schedule, &prior)?)
    })?;
    let mut doc = Document::new("posterior decay of the event set", &SANOV_HEADER);
    let limit = series.first().and_then(|s| s.predicted_limit);
    doc.note("predicted_limit", Cell::OptRate(limit));
    for (pos, s) in series.iter().enumerate() {
        let e: &DecayRateEntry = &s.entries[0];
        let k = match kind {
            ScheduleKind::Static => e.n / base_n,
            ScheduleKind::Dynamic => pos as u64 + 1,
        };
        doc.push(
            SanovRow {
                n: e.n,
                k,
                log_num: e.log_numerator,
                log_den: e.log_denominator,
                probability: e.probability,
                rate: e.normalized_log_posterior,
                lower: e.lower,
                upper: e.upper,
                limit,
            }
            .cells(),
        );
    }
    Ok(doc)
}

/// Type side: probability that the empirical type falls in the rare set,
/// and the conditional mass of a ball around the I-projection.
fn sanov_types(problem: &Problem, ball: BallConvention, jobs: Option<usize>) -> Result<Document, CliError> {
    let source = problem.source()?;
    let rare = problem.conditioning(ball)?;
    let radius = problem.ball_radius()?;
    let ns = problem.schedule_ns()?;
    let m = problem.m as f64;
    let series = per_n(ns, jobs, |n| Ok(colt_types(&source, &rare, radius, ball, &[n])?))?;
    let mut doc = Document::new("rare-set decay and conditional concentration", &SANOV_HEADER);
    let mut limit = None;
    if let Some(first) = series.first() {
        limit = Some(-first.information_rate);
        doc.note("center", Cell::Text(pmf_text(&first.center)));
        doc.note("information_rate", Cell::Rate(first.information_rate));
        doc.note("radius", Cell::Text(format!("{}", first.radius)));
        doc.note("convention", Cell::Text(format!("{}", first.convention)));
        doc.note("predicted_limit", Cell::OptRate(limit));
    }
    for (pos, s) in series.iter().enumerate() {
        let e: &TypeConditionalEntry = &s.entries[0];
        let slack = m / e.n as f64 * ((e.n as f64 + 1.0).ln());
        doc.push(
            SanovRow {
                n: e.n,
                k: pos as u64 + 1,
                log_num: e.log_ball_probability,
                log_den: e.log_set_probability,
                probability: e.probability,
                rate: e.rate,
                lower: -e.best_divergence - slack,
                upper: -s.information_rate + slack,
                limit,
            }
            .cells(),
        );
    }
    Ok(doc)
}

/// Posterior-mode source within the conditioning set, per scheduled n
/// (the plain observed type when no schedule is given).
pub fn cmd_map(problem: &Problem, ball: BallConvention, jobs: Option<usize>) -> Result<Document, CliError> {
    let cond = problem.conditioning(ball)?;
    let prior = problem.prior()?;
    let reports = if problem.spec.schedule.is_some() {
        let ns = problem.schedule_ns()?;
        per_n(ns, jobs, |n| {
            let mut types = problem.schedule_at(n)?.realize()?;
            let t = types.remove(0);
            Ok(map_source(&cond, &t, &prior)?)
        })?
    } else {
        let t = problem.observed()?;
        vec![map_source(&cond, &t, &prior)?]
    };
    let mut header: Vec<String> = vec!["n".into()];
    header.extend((1..=problem.m).map(|i| format!("c{i}")));
    header.push("log_score".into());
    header.push("posterior".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut doc = Document::new("posterior-mode source", &header_refs);
    for r in &reports {
        let mut row = vec![Cell::Int(r.source.n())];
        row.extend(r.source.counts().iter().map(|&c| Cell::Int(c)));
        row.push(Cell::Rate(r.log_score));
        row.push(Cell::Prob(r.posterior));
        doc.push(row);
    }
    Ok(doc)
}

/// All lattice members of the conditioning set at one sample size.
pub fn cmd_enumerate(problem: &Problem, ball: BallConvention) -> Result<Document, CliError> {
    let cond = problem.conditioning(ball)?;
    let n = if problem.spec.observed.is_some() {
        problem.observed()?.n()
    } else {
        *problem
            .schedule_ns()
            .map_err(|_| {
                CliError::validation("enumeration needs [observed] or [schedule] to fix n".into())
            })?
            .first()
            .expect("ns checked non-empty")
    };
    let plan = EnumerationPlan::new(n, problem.m)?.with_filter(cond)?;
    let mut header: Vec<String> = vec!["n".into()];
    header.extend((1..=problem.m).map(|i| format!("c{i}")));
    header.push("log_multiplicity".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut doc = Document::new("lattice members of the conditioning set", &header_refs);
    let mut build_error = None;
    plan.for_each(|counts| {
        if build_error.is_some() {
            return;
        }
        match NType::new(counts.to_vec(), n) {
            Ok(t) => {
                let mut row = vec![Cell::Int(n)];
                row.extend(counts.iter().map(|&c| Cell::Int(c)));
                row.push(Cell::Rate(log_multiplicity(&t)));
                doc.push(row);
            }
            Err(e) => build_error = Some(e),
        }
    })?;
    if let Some(e) = build_error {
        return Err(e.into());
    }
    doc.note("members", Cell::Int(doc.rows.len() as u64));
    Ok(doc)
}

/// Quantize a continuous sample batch onto the partition's alphabet.
pub fn cmd_quantize(problem: &Problem) -> Result<Document, CliError> {
    let (partition, samples) = problem.partition()?;
    let t = motkit::quantize_samples(samples, &partition)?;
    let mut doc =
        Document::new("sample counts over the partition", &["cell", "label", "count", "fraction"]);
    doc.note("n", Cell::Int(t.n()));
    // When the spec names a source on the partition's alphabet, score the
    // quantized type against it (per-letter log-likelihood).
    if problem.spec.source.is_some() {
        let pmf = problem.source()?;
        doc.note("source_log_likelihood", Cell::Rate(l_divergence(&pmf, &t.induced_pmf())?));
    }
    let labels = default_labels(&partition);
    for (i, &c) in t.counts().iter().enumerate() {
        doc.push(vec![
            Cell::Int(i as u64 + 1),
            Cell::Text(labels[i].clone()),
            Cell::Int(c),
            Cell::Prob(c as f64 / t.n() as f64),
        ]);
    }
    Ok(doc)
}

/// Cell labels: explicit ones, else half-open interval text matching the
/// classification rule (boundary samples go right).
fn default_labels(partition: &motkit::PartitionSpec) -> Vec<String> {
    if let Some(labels) = partition.labels() {
        return labels.to_vec();
    }
    let cuts = partition.cuts();
    let mut labels = Vec::with_capacity(cuts.len() + 1);
    labels.push(format!("(-inf, {})", cuts[0]));
    for w in cuts.windows(2) {
        labels.push(format!("[{}, {})", w[0], w[1]));
    }
    labels.push(format!("[{}, +inf)", cuts[cuts.len() - 1]));
    labels
}
