//! Frozen end-to-end values.
//!
//! Every constant here was computed independently (50-digit arithmetic for
//! the projections, exact rationals for the lattice sums) and pasted in.
//! A failure means the library's semantics moved, not that a tolerance is
//! too tight; do not loosen these without re-deriving the constants.

use motkit::divergence::{
    entropy, i_divergence, kerridge_inaccuracy, l_divergence, log_multiplicity, multiplicity_exact,
};
use motkit::oracle::posterior_prob_exact;
use motkit::posterior::{colt_series, posterior_prob, TypeSchedule};
use motkit::projection::FamilyMember;
use motkit::{
    i_projection_linear, l_projection_linear, make_pmf, Alphabet, BallConvention, EnumerationPlan,
    LinearFamily, NType, PriorSpec, SetExpr,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Mean-value constraint `sum q_i * i = target` over letter values 1..=m.
fn mean_family(m: usize, num: i64, den: i64) -> LinearFamily {
    LinearFamily::mean_constraint(&Alphabet::integer_valued(m), rat(num, den)).unwrap()
}

const NU: [f64; 4] = [0.1, 0.1, 0.1, 0.7];

#[test]
fn l_projection_onto_the_mean_line_matches_the_frozen_solution() {
    let nu = make_pmf(&NU, 1e-12).unwrap();
    let family = mean_family(4, 17, 10);
    let result = l_projection_linear(&nu, &family).unwrap();

    // Reciprocal-affine solution of the single-constraint problem.
    let expected = [0.705074731369, 0.0731107667084, 0.0385542724755, 0.183260229447];
    for (i, &e) in expected.iter().enumerate() {
        assert!((result.pmf.weight(i) - e).abs() < 1e-11, "coord {i}: {}", result.pmf.weight(i));
    }
    match result.member {
        Some(FamilyMember::Lambda(ref lam)) => {
            assert!((lam.theta[0] - (-1.2259586607308949958)).abs() < 1e-11);
        }
        ref other => panic!("expected a reciprocal-affine member, got {other:?}"),
    }
    assert!(result.diagnostics.converged);
    assert!(result.diagnostics.residual <= 1e-10);
    assert!((result.objective - (-1.8098856293100441249)).abs() < 1e-12);
}

#[test]
fn i_projection_onto_the_mean_line_matches_the_frozen_solution() {
    let r = motkit::Pmf::uniform(4);
    let family = mean_family(4, 17, 10);
    let result = i_projection_linear(&r, &family).unwrap();

    let expected = [0.548612184091, 0.263703866682, 0.126755714363, 0.060928234864];
    for (i, &e) in expected.iter().enumerate() {
        assert!((result.pmf.weight(i) - e).abs() < 1e-11, "coord {i}: {}", result.pmf.weight(i));
    }
    match result.member {
        Some(FamilyMember::Exponential(ref member)) => {
            assert!((member.theta[0] - (-0.73256503124736825989)).abs() < 1e-10);
        }
        ref other => panic!("expected an exponential-family member, got {other:?}"),
    }
    assert!((result.objective - 0.2731353479476465296).abs() < 1e-12);
}

#[test]
fn divergence_values_for_the_three_decimal_candidate() {
    let nu = make_pmf(&NU, 1e-12).unwrap();
    let q3 = make_pmf(&[0.705, 0.073, 0.039, 0.183], 1e-9).unwrap();

    assert!((l_divergence(&q3, &nu).unwrap() - (-1.809893082984111773)).abs() < 1e-13);
    assert!((entropy(&nu) - 0.94044798865532637044).abs() < 1e-13);
    assert!(
        (kerridge_inaccuracy(&nu, &q3).unwrap() - 1.809893082984111773).abs() < 1e-13,
        "inaccuracy is minus the log-likelihood rate"
    );
    // I(p, q) = -H(p) - L(q, p) ties the three quantities together.
    let identity = i_divergence(&nu, &q3).unwrap()
        + entropy(&nu)
        + l_divergence(&q3, &nu).unwrap();
    assert!(identity.abs() < 1e-13);
}

#[test]
fn posterior_concentration_row_under_the_l1_convention() {
    let base = NType::new(vec![1, 1, 1, 7], 10).unwrap();
    let q = SetExpr::LinearEq {
        coeffs: (1..=4).map(|v| rat(v, 1)).collect(),
        target: rat(17, 10),
    };
    let schedule = TypeSchedule::Static { base, ns: vec![50, 100, 200, 300] };
    let series =
        colt_series(&q, &schedule, &PriorSpec::Uniform, 0.1, BallConvention::L1).unwrap();

    // Ball center is the L-projection onto the conditioning line.
    let expected_center = [0.705074731369, 0.0731107667084, 0.0385542724755, 0.183260229447];
    for (i, &e) in expected_center.iter().enumerate() {
        assert!((series.center.weight(i) - e).abs() < 1e-9);
    }
    let expected = [0.8676427767015994, 0.9480447635230733, 0.9940322410086221, 0.9990080492486244];
    for (entry, e) in series.entries.iter().zip(expected) {
        assert!((entry.probability - e).abs() < 1e-9, "n={}: {}", entry.n, entry.probability);
    }
}

#[test]
fn lattice_membership_counts_are_reproduced() {
    // |Q_50| for the mean-17/10 line over values 1..4, dead members included.
    let q = SetExpr::LinearEq {
        coeffs: (1..=4).map(|v| rat(v, 1)).collect(),
        target: rat(17, 10),
    };
    let members = EnumerationPlan::new(50, 4).unwrap().with_filter(q.clone()).unwrap();
    let mut count = 0u64;
    members.for_each(|_| count += 1).unwrap();
    assert_eq!(count, 120);

    // The posterior report sees the same lattice; only 85 of the 120
    // members share the observation's support and carry weight.
    let observed = NType::new(vec![5, 5, 5, 35], 50).unwrap();
    let ball = SetExpr::ball(
        make_pmf(&[0.705, 0.073, 0.039, 0.183], 1e-9).unwrap(),
        0.1,
        BallConvention::L1,
    )
    .unwrap();
    let report = posterior_prob(&ball, &q, &observed, &PriorSpec::Uniform).unwrap();
    assert_eq!(report.members_denominator, 120);

    // Unfiltered lattice size and the multiplicity of the base type.
    let plan = EnumerationPlan::new(50, 4).unwrap();
    assert_eq!(plan.count_unfiltered().to_u64().unwrap(), 23_426);
    let base = NType::new(vec![1, 1, 1, 7], 10).unwrap();
    assert_eq!(multiplicity_exact(&base).to_u64().unwrap(), 720);
    assert!((log_multiplicity(&base) - (720.0f64).ln()).abs() < 1e-10);
}

#[test]
fn small_posterior_agrees_with_the_exact_rational_sum() {
    // n = 6 over three letters, observed [1, 2, 3], B = {q_1 >= 1/2}.
    let observed = NType::new(vec![1, 2, 3], 6).unwrap();
    let b = SetExpr::LinearGe { coeffs: vec![rat(1, 1), rat(0, 1), rat(0, 1)], target: rat(1, 2) };
    let q = SetExpr::simplex();

    let exact = posterior_prob_exact(&b, &q, &observed, &PriorSpec::Uniform).unwrap();
    assert_eq!(exact, rat(40, 436));

    let report = posterior_prob(&b, &q, &observed, &PriorSpec::Uniform).unwrap();
    assert!((report.probability - 40.0 / 436.0).abs() < 1e-13);
    assert_eq!(report.members_numerator, 10);
    assert_eq!(report.members_denominator, 28);
}
