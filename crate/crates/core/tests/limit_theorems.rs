//! Numerical demonstrations of the limit theorems, run as tests.
//!
//! Each test sweeps a deterministic schedule of sample sizes and checks the
//! finite-n behavior the theory prescribes: sandwich bounds that hold at
//! every n, and error terms that shrink along the schedule.

use motkit::divergence::log_source_likelihood;
use motkit::posterior::{colt_series, colt_types, posterior_prob, type_probability_set};
use motkit::{
    check_l_optimality, i_divergence, l_divergence, l_projection_linear, make_pmf, map_source,
    quantize_samples, Alphabet, BallConvention, EnumerationPlan, LinearFamily, NType,
    PartitionSpec, Pmf, PriorAtom, PriorSpec, SetExpr,
};
use motkit::posterior::TypeSchedule;
use num_bigint::BigInt;
use num_rational::BigRational;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `sum q_i * i >= target` over letter values 1..=m.
fn mean_ge(m: usize, num: i64, den: i64) -> SetExpr {
    SetExpr::LinearGe { coeffs: (1..=m as i64).map(|v| rat(v, 1)).collect(), target: rat(num, den) }
}

/// `sum q_i * i = target` over letter values 1..=m.
fn mean_eq(m: usize, num: i64, den: i64) -> SetExpr {
    SetExpr::LinearEq { coeffs: (1..=m as i64).map(|v| rat(v, 1)).collect(), target: rat(num, den) }
}

/// Unconditional rare-set probabilities decay at the information rate:
/// the normalized log probability is sandwiched between the projection
/// value and the best lattice member, both up to the counting slack.
#[test]
fn rare_type_probabilities_decay_at_the_information_rate() {
    let source = Pmf::uniform(3);
    let rare = mean_ge(3, 12, 5);
    let rate_limit = 0.123869048728678; // I(projection || source), frozen
    let mut errs = Vec::new();
    for n in [30u64, 60, 120] {
        let tp = type_probability_set(&rare, &source, n).unwrap();
        let slack = 3.0 / n as f64 * ((n as f64 + 1.0).ln());
        let rate = tp.log_probability / n as f64;

        // Best achievable divergence on the n-lattice inside the set.
        let members = EnumerationPlan::new(n, 3)
            .unwrap()
            .with_filter(rare.clone())
            .unwrap()
            .collect_types()
            .unwrap();
        assert_eq!(members.len() as u64, tp.members);
        let best = members
            .iter()
            .map(|t| i_divergence(&t.induced_pmf(), &source).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(best >= rate_limit - 1e-12, "lattice members cannot beat the projection");

        assert!(rate <= -rate_limit + slack + 1e-12, "n={n}: rate={rate}");
        assert!(rate >= -best - slack - 1e-12, "n={n}: rate={rate} best={best}");
        errs.push((rate + rate_limit).abs());
        println!("n={n}: members={} rate={rate:.6} err={:.6}", tp.members, rate + rate_limit);
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "errors must shrink: {errs:?}");
}

/// Conditioned on the rare set, types concentrate around the information
/// projection while the conditional rate converges to it.
#[test]
fn conditioned_types_concentrate_around_the_projection() {
    let source = Pmf::uniform(3);
    let rare = mean_ge(3, 12, 5);
    let series =
        colt_types(&source, &rare, 0.2, BallConvention::L1, &[30, 60, 120]).unwrap();
    let probs: Vec<f64> = series.entries.iter().map(|e| e.probability).collect();
    assert!(probs[0] < probs[1] && probs[1] < probs[2], "mass must collect: {probs:?}");
    assert!(probs[2] >= 0.95, "final ball mass {}", probs[2]);
    let errs: Vec<f64> =
        series.entries.iter().map(|e| (e.rate + series.information_rate).abs()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "rate errors must shrink: {errs:?}");
    for e in &series.entries {
        println!("n={}: ball mass={:.6} rate err={:.6}", e.n, e.probability, e.rate + series.information_rate);
    }
}

/// Static schedule: the posterior of a rare source line decays at the rate
/// predicted by the two L-projections, inside the sandwich at every n.
#[test]
fn static_posterior_decay_approaches_the_projected_limit() {
    let base = NType::new(vec![1, 1, 1, 7], 10).unwrap();
    let schedule = TypeSchedule::Static { base, ns: vec![50, 100, 200, 400] };
    let b = mean_eq(4, 17, 10);
    let series =
        motkit::posterior::source_decay_rate(&b, &SetExpr::simplex(), &schedule, &PriorSpec::Uniform)
            .unwrap();

    let predicted = series.predicted_limit.expect("uniform prior on a polytope is predictable");
    assert!((predicted - (-0.86943764065471775444)).abs() < 1e-12);

    let mut gaps = Vec::new();
    for e in &series.entries {
        assert!(e.lower <= e.normalized_log_posterior && e.normalized_log_posterior <= e.upper);
        let slack = e.upper - e.lambda_gap;
        let m_over_n = 4.0 / e.n as f64;
        assert!((slack - m_over_n * ((e.n as f64 + 1.0).ln())).abs() < 1e-12);
        gaps.push((e.normalized_log_posterior - predicted).abs());
        println!(
            "n={}: nlp={:.6} gap={:.6} slack={:.6}",
            e.n,
            e.normalized_log_posterior,
            e.normalized_log_posterior - predicted,
            slack
        );
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "gaps must shrink: {gaps:?}");
}

/// Dynamic schedule: same decay law along rounded types of a target that
/// never sits on the lattice.
#[test]
fn dynamic_posterior_decay_tracks_a_nonlattice_limit() {
    let target = make_pmf(&[0.15, 0.2, 0.3, 0.35], 1e-9).unwrap();
    let schedule = TypeSchedule::Dynamic { target: target.clone(), ns: vec![40, 80, 160, 320] };
    // Rare set: mean at most 17/10, written as a flipped >= row.
    let b = SetExpr::LinearGe {
        coeffs: (1..=4).map(|v| rat(-v, 1)).collect(),
        target: rat(-17, 10),
    };
    let series =
        motkit::posterior::source_decay_rate(&b, &SetExpr::simplex(), &schedule, &PriorSpec::Uniform)
            .unwrap();

    let predicted = series.predicted_limit.expect("prediction applies");
    // Cross-check the prediction against a direct projection of the target.
    let family = LinearFamily::mean_constraint(&Alphabet::integer_valued(4), rat(17, 10)).unwrap();
    let direct = l_projection_linear(&target, &family).unwrap().objective
        - l_divergence(&target, &target).unwrap();
    assert!((predicted - direct).abs() < 1e-11, "predicted={predicted} direct={direct}");
    assert!(predicted < 0.0);

    let mut gaps = Vec::new();
    for e in &series.entries {
        assert!(e.lower <= e.normalized_log_posterior && e.normalized_log_posterior <= e.upper);
        gaps.push((e.normalized_log_posterior - predicted).abs());
        println!("n={}: nlp={:.6} gap={:.6}", e.n, e.normalized_log_posterior, gaps.last().unwrap());
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "gaps must shrink: {gaps:?}");
}

/// With no conditioning beyond the simplex, posterior mass collects at the
/// observed type itself.
#[test]
fn posterior_mass_collects_at_the_observed_type() {
    let base = NType::new(vec![1, 1, 1, 7], 10).unwrap();
    let nu = base.induced_pmf();
    let schedule = TypeSchedule::Static { base, ns: vec![50, 100, 200, 400] };
    let series = colt_series(
        &SetExpr::simplex(),
        &schedule,
        &PriorSpec::Uniform,
        0.1,
        BallConvention::L1,
    )
    .unwrap();
    assert_eq!(series.center.weights(), nu.weights());
    for e in &series.entries {
        println!("n={}: posterior ball mass={:.6}", e.n, e.probability);
    }
    let probs: Vec<f64> = series.entries.iter().map(|e| e.probability).collect();
    assert!(probs.windows(2).all(|w| w[1] > w[0]), "mass must collect: {probs:?}");
    assert!(probs[3] > 0.9, "final mass {}", probs[3]);
}

/// Conditioned on the rare line, posterior mass collects at the projection
/// of the observed type onto it.
#[test]
fn conditioned_posterior_collects_at_the_projection() {
    let base = NType::new(vec![1, 1, 1, 7], 10).unwrap();
    let schedule = TypeSchedule::Static { base, ns: vec![50, 100, 200, 300] };
    let series = colt_series(
        &mean_eq(4, 17, 10),
        &schedule,
        &PriorSpec::Uniform,
        0.1,
        BallConvention::L1,
    )
    .unwrap();
    let probs: Vec<f64> = series.entries.iter().map(|e| e.probability).collect();
    assert!(probs.windows(2).all(|w| w[1] > w[0]), "mass must collect: {probs:?}");
    assert!(probs[3] >= 0.999, "final mass {}", probs[3]);
}

/// Finite prior support: the posterior degenerates onto the atom with the
/// best per-letter log-likelihood, and the MAP cell follows it.
#[test]
fn atom_priors_degenerate_onto_the_dominant_source() {
    let a_far = PriorAtom::new(vec![2, 1, 1, 1], 5, 0.5).unwrap(); // [0.4, 0.2, 0.2, 0.2]
    let a_near = PriorAtom::new(vec![1, 1, 1, 1], 4, 0.5).unwrap(); // uniform
    let prior = PriorSpec::atoms(vec![a_far, a_near]).unwrap();
    let base = NType::new(vec![1, 1, 1, 7], 10).unwrap();
    let ns = vec![20u64, 40, 80];
    let schedule = TypeSchedule::Static { base, ns: ns.clone() };

    // L(uniform || nu) = -log 4 beats L([.4,.2,.2,.2] || nu); the posterior
    // of a small ball around the winner grows to one, around the loser
    // shrinks to zero.
    let near_ball =
        SetExpr::ball(Pmf::uniform(4), 0.05, BallConvention::L1).unwrap();
    let far_ball = SetExpr::ball(
        make_pmf(&[0.4, 0.2, 0.2, 0.2], 1e-9).unwrap(),
        0.05,
        BallConvention::L1,
    )
    .unwrap();
    let mut near = Vec::new();
    let mut far = Vec::new();
    for observed in schedule.realize().unwrap() {
        let pn =
            posterior_prob(&near_ball, &SetExpr::simplex(), &observed, &prior).unwrap().probability;
        let pf =
            posterior_prob(&far_ball, &SetExpr::simplex(), &observed, &prior).unwrap().probability;
        assert!((pn + pf - 1.0).abs() < 1e-12, "the two atoms carry all the mass");
        println!("n={}: winner mass={pn:.8} loser mass={pf:.8}", observed.n());
        near.push(pn);
        far.push(pf);
    }
    assert!(near.windows(2).all(|w| w[1] > w[0]), "winner mass must grow: {near:?}");
    assert!(far.windows(2).all(|w| w[1] < w[0]), "loser mass must shrink: {far:?}");
    assert!(near[0] < 0.97 && near[2] > 0.9999, "degeneration spans the schedule");

    // MAP lands on the winner's lattice cell at every scheduled n.
    for (&n, observed) in ns.iter().zip(schedule.realize().unwrap()) {
        let map = map_source(&SetExpr::simplex(), &observed, &prior).unwrap();
        let want = vec![n / 4; 4];
        assert_eq!(map.source.counts(), &want[..], "n={n}");
    }

    // Degeneracy invariant: a set holding every atom has posterior one.
    let everything = SetExpr::ball(Pmf::uniform(4), 2.0, BallConvention::L1).unwrap();
    let t40 = NType::new(vec![4, 4, 4, 28], 40).unwrap();
    let report = posterior_prob(&everything, &SetExpr::simplex(), &t40, &prior).unwrap();
    assert_eq!(report.probability, 1.0);
}

/// The reciprocal-affine optimum dominates every family member it is
/// checked against, with a vanishing first-order certificate.
#[test]
fn likelihood_certificate_holds_at_the_projection() {
    let nu = make_pmf(&[0.1, 0.1, 0.1, 0.7], 1e-12).unwrap();
    let family = LinearFamily::mean_constraint(&Alphabet::integer_valued(4), rat(17, 10)).unwrap();
    let qhat = l_projection_linear(&nu, &family).unwrap().pmf;

    // Probes: members of the same family reached from other base points.
    let probes: Vec<Pmf> = [
        [0.4, 0.3, 0.2, 0.1],
        [0.05, 0.05, 0.2, 0.7],
        [0.25, 0.25, 0.25, 0.25],
    ]
    .iter()
    .map(|w| {
        l_projection_linear(&make_pmf(&w[..], 1e-9).unwrap(), &family).unwrap().pmf
    })
    .collect();

    let report = check_l_optimality(&nu, &qhat, &probes).unwrap();
    assert!(report.max_abs_certificate <= 1e-8, "certificate {}", report.max_abs_certificate);
    for gap in &report.probe_gaps {
        assert!(*gap >= -1e-12, "no probe may beat the optimum: {gap}");
    }
}

/// MAP over a constrained lattice equals the exhaustive likelihood argmax.
#[test]
fn map_matches_the_exhaustive_likelihood_argmax() {
    let observed = NType::new(vec![9, 6, 5], 20).unwrap();
    let q = mean_ge(3, 2, 1);
    let map = map_source(&q, &observed, &PriorSpec::Uniform).unwrap();

    let members = EnumerationPlan::new(20, 3)
        .unwrap()
        .with_filter(q.clone())
        .unwrap()
        .collect_types()
        .unwrap();
    let mut best: Option<(f64, &NType)> = None;
    for cell in &members {
        let score = log_source_likelihood(&observed, &cell.induced_pmf()).unwrap().value();
        let better = match best {
            None => score > f64::NEG_INFINITY,
            Some((b, _)) => score > b + 1e-12,
        };
        if better {
            best = Some((score, cell));
        }
    }
    let (_, want) = best.expect("feasible cell exists");
    assert_eq!(map.source.counts(), want.counts());
}

/// Real samples quantize into a type that feeds the posterior machinery.
#[test]
fn sample_quantization_feeds_the_lattice() {
    let cuts = vec![rat(-1, 2), rat(1, 2)];
    let partition = PartitionSpec::intervals(cuts).unwrap();
    let samples = [
        -1.32, -0.51, -0.70, 0.12, -0.05, 0.49, 0.50, 0.93, 1.71, 0.62, -0.88, 0.31,
    ];
    let t = quantize_samples(&samples, &partition).unwrap();
    assert_eq!(t.n(), 12);
    assert_eq!(t.counts().iter().sum::<u64>(), 12);
    // Boundary values land in the right-hand cell: 0.50 counts as "high".
    assert_eq!(t.counts(), &[4, 4, 4]);

    let ball = SetExpr::ball(t.induced_pmf(), 0.3, BallConvention::L1).unwrap();
    let report = posterior_prob(&ball, &SetExpr::simplex(), &t, &PriorSpec::Uniform).unwrap();
    assert!(report.probability > 0.0 && report.probability <= 1.0);

    let candidates =
        [Pmf::uniform(3), make_pmf(&[0.6, 0.3, 0.1], 1e-9).unwrap()];
    let worst = motkit::l_m_divergence(&t.induced_pmf(), &candidates).unwrap();
    let direct = candidates
        .iter()
        .map(|s| l_divergence(s, &t.induced_pmf()).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(worst, direct);
}
