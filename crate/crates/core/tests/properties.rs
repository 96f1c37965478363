//! Cross-module invariants beyond the acceptance criteria: reflection and
//! envelope bounds against exact evaluations, bound-vs-search domination,
//! plus proptest structure checks on the pmf and distribution layers.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svf_core::bounds;
use svf_core::dist::ServiceDistribution as D;
use svf_core::experiments as exp;
use svf_core::lindley::{evaluate_exact_discrete, Instance, Schedule, Sequence};
use svf_core::schedule::{mean_based, round_to_grid, sigma_slack, ScheduleRule};
use svf_core::sequence::{enumerate_optimal, ratio_optspaced, SearchConfig};
use svf_core::GridPMF;

const SEED: u64 = 0x5EED;

/// For symmetric services under mean-based schedules, E W_(k+1) is bounded
/// by E|S_k| computed from the convolved centered pmf.
#[test]
fn reflection_bound_on_symmetric_instances() {
    let inst = Instance::new(
        (0..5)
            .map(|i| D::two_point(4.0 - (1.0 + i as f64), 4.0 + (1.0 + i as f64), 0.5).unwrap())
            .collect(),
        0.5,
    )
    .unwrap();
    let seq = Sequence::identity(5);
    let sched = mean_based(&inst);
    let cb = evaluate_exact_discrete(&inst, &seq, &sched, 1.0).unwrap();
    // E|S_k| from the centered convolution.
    let mut walk = GridPMF::point(1.0, 0);
    for k in 0..4 {
        let centered = inst.patient(k).clone().shifted(-inst.patient(k).mean());
        walk = walk.convolve(&centered.discretize(1.0, 0.0).unwrap());
        let e_abs: f64 = walk.iter_atoms().map(|(v, p)| p * v.abs()).sum();
        assert!(
            cb.ew[k + 1] <= e_abs + 1e-12,
            "k={k}: E W = {} > E|S| = {}",
            cb.ew[k + 1],
            e_abs
        );
    }
}

/// Envelope and split bounds dominate the measured mean-based ratio on
/// dilation-certified instances; the split bound never dips below 2.
#[test]
fn ratio_dominated_by_envelope_and_split_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..4 {
        let n = rng.gen_range(3..=5);
        let inst = Instance::new(
            (0..n)
                .map(|_| D::exponential(rng.gen_range(0.3..4.0)).unwrap())
                .collect(),
            1.0,
        )
        .unwrap();
        let report = svf_core::sequence::ratio_meanbased(&inst).unwrap();
        assert!(report.ratio >= 1.0 - 1e-12);

        let envelope = bounds::theorem12_envelope(&inst);
        assert_eq!(envelope.value, 4.0); // proven dilation, no symmetry
        assert!(report.ratio <= envelope.value);

        let split = bounds::theorem5_bound(&inst, 40_000, SEED).unwrap();
        assert!(split.value >= 2.0);
        assert!(
            report.ratio <= split.value + 4.0 * split.stderr.unwrap(),
            "ratio {} vs split bound {}",
            report.ratio,
            split.value
        );
    }
}

/// The schedule-free lower bound sits below 200 random (sequence, schedule)
/// costs of a location-scale instance.
#[test]
fn newsvendor_lower_bound_dominates_probes() {
    let inst = Instance::new(
        (1..=5)
            .map(|i| D::normal(6.0 + i as f64, 0.5 + 0.3 * i as f64).unwrap())
            .collect(),
        0.5,
    )
    .unwrap();
    let bound = bounds::newsvendor_lower(&inst, 0.5).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let step = 0.1f64;
    for probe in 0..200 {
        let mut perm: Vec<usize> = (0..5).collect();
        for i in (1..5).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let seq = Sequence::new(perm).unwrap();
        let sched = Schedule(
            (0..5)
                .map(|_| (rng.gen_range(0.0f64..15.0) / step).round() * step)
                .collect(),
        );
        let cost = evaluate_exact_discrete(&inst, &seq, &sched, step)
            .unwrap()
            .objective;
        assert!(
            cost >= bound - 1e-6,
            "probe {probe}: cost {cost} below bound {bound}"
        );
    }
}

/// The sigma-slack schedule keeps the evaluated SVF cost under the closed
/// upper bound, on a normal family and on the clinic mix.
#[test]
fn slack_upper_bound_dominates_evaluated_cost() {
    // Normal location-scale family.
    let inst = Instance::new(
        (1..=3).map(|i| D::normal(8.0, i as f64).unwrap()).collect(),
        0.5,
    )
    .unwrap();
    let (_, sched) = sigma_slack(&inst, 0.5).unwrap();
    let step = 0.05;
    let cost = evaluate_exact_discrete(
        &inst,
        &Sequence::identity(3),
        &round_to_grid(&sched, step),
        step,
    )
    .unwrap()
    .objective;
    let upper = bounds::svf_upper(&inst, 0.5).unwrap().value;
    assert!((upper - 2.0f64.sqrt() * (1.0 + 2.0)).abs() < 1e-12 || upper > 0.0);
    assert!(cost <= upper + 1e-6, "cost {cost} vs bound {upper}");

    // Clinic mix (not location-scale; the bound value still dominates the
    // evaluated cost at omega = 1/2).
    let mix = exp::generate(&exp::NamedFamily::CayirliMix { n_return: 5, n_new: 5 })
        .unwrap()
        .with_omega(0.5)
        .unwrap();
    let (alpha, sched) = sigma_slack(&mix, 0.5).unwrap();
    assert!(alpha > 0.0);
    let sds = mix.sds();
    let mut sorted = sds.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bound: f64 = sorted[..9].iter().sum::<f64>() * (2.0f64 * 0.5).sqrt();
    let step = 0.25;
    let cost = evaluate_exact_discrete(
        &mix,
        &Sequence::identity(10),
        &round_to_grid(&sched, step),
        step,
    )
    .unwrap()
    .objective;
    assert!(cost <= bound + 1e-6, "clinic cost {cost} vs bound {bound}");
}

/// The lognormal multiplicative bound dominates the measured optimally-
/// spaced ratio on small desk instances.
#[test]
fn multiplicative_bound_dominates_measured_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    for _ in 0..2 {
        let s_values: Vec<f64> = {
            let mut v: Vec<f64> = (0..4).map(|_| rng.gen_range(0.15..0.45)).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        let inst = Instance::new(
            s_values
                .iter()
                .enumerate()
                .map(|(i, &s)| D::lognormal(20f64.ln() + (i as f64 + 1.0).ln() / 4.0, s).unwrap())
                .collect(),
            0.5,
        )
        .unwrap();
        let bound = bounds::theorem9_bound(&inst, 0.5).unwrap().value;
        let report =
            ratio_optspaced(&inst, ScheduleRule::OptimalDiscrete { grid_step: 1.0 }).unwrap();
        assert!(
            report.ratio <= bound + 1e-9,
            "measured {} vs bound {}",
            report.ratio,
            bound
        );
    }
}

/// SVF stays optimal for exponential services under per-sequence optimal
/// continuous schedules across the tested weights.
#[test]
fn svf_optimal_for_exponential_optspaced() {
    for omega in [0.5, 0.8, 0.9] {
        for n in [3usize, 4] {
            let inst = Instance::new(
                (1..=n)
                    .map(|i| D::exponential((n + 1 - i) as f64).unwrap())
                    .collect(),
                omega,
            )
            .unwrap();
            let report =
                ratio_optspaced(&inst, ScheduleRule::OptimalContinuous { tol: 1e-9 }).unwrap();
            assert!(
                (report.ratio - 1.0).abs() <= 1e-6,
                "n={n} omega={omega}: ratio {}",
                report.ratio
            );
        }
    }
}

/// Newsvendor specialization at n = 2: the optimal first slot is the
/// (1-omega)-quantile of the first service law.
#[test]
fn continuous_optimum_hits_newsvendor_quantile() {
    for omega in [0.3, 0.5, 0.7] {
        let inst = Instance::new(
            vec![D::exponential(2.0).unwrap(), D::exponential(1.0).unwrap()],
            omega,
        )
        .unwrap();
        let (sched, _) = svf_core::schedule::optimal_schedule_continuous(
            &inst,
            &Sequence::identity(2),
            omega,
            1e-10,
        )
        .unwrap();
        let q = inst.patient(0).quantile(1.0 - omega).unwrap();
        assert!(
            (sched.entries()[0] - q).abs() < 1e-5,
            "omega={omega}: {} vs {}",
            sched.entries()[0],
            q
        );
    }
}

/// Figure-1 style exchangeability at n = 8: reduced search equals a full
/// per-patient search run with duplicates treated as distinct.
#[test]
fn exchangeability_cross_check() {
    let small = D::two_point(0.0, 1.0, 0.8).unwrap();
    let big = small.clone().scaled(50.0).unwrap();
    let mut patients = vec![small; 6];
    patients.push(big.clone());
    patients.push(big);
    let inst = Instance::new(patients, 1.0).unwrap();
    let reduced = svf_core::sequence::ratio_meanbased(&inst).unwrap();
    // 7 distinct arrangements after fixing one big patient last.
    assert_eq!(reduced.sequences_evaluated, 7);
    let mut cfg = SearchConfig::mean_based();
    cfg.prune = false;
    let full = enumerate_optimal(&inst, &cfg).unwrap();
    assert_eq!(full.sequences_evaluated, 28);
    assert_eq!(full.best_objective, reduced.best_objective);
    assert!(reduced.ratio >= 1.0);
}

/// Table-3 regression tripwire: the SVF cost column is nondecreasing in n.
#[test]
fn table3_svf_cost_monotone() {
    let rows = exp::run_table3(7).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].svf_cost >= w[0].svf_cost - 1e-12);
    }
}

/// Driver artifacts are byte-identical across reruns with the same seed.
#[test]
fn artifacts_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        let b = exp::run_cayirli_bounds(20_000, 7).unwrap();
        let p = exp::write_cayirli(dir.path(), &b, 7).unwrap();
        std::fs::read(p).unwrap()
    };
    assert_eq!(run(), run());

    let run = || {
        let rows = exp::run_asymptotic(&[300], 3_000, 11).unwrap();
        let p = exp::write_asymptotic(dir.path(), &rows, 11).unwrap();
        std::fs::read(p).unwrap()
    };
    assert_eq!(run(), run());
}

// ---------------------------------------------------------------------------
// proptest invariants
// ---------------------------------------------------------------------------

fn arb_pmf() -> impl Strategy<Value = GridPMF> {
    (
        proptest::collection::vec(0.01f64..1.0, 1..6),
        -5i64..5,
    )
        .prop_map(|(raw, offset)| {
            let total: f64 = raw.iter().sum();
            GridPMF::new(1.0, offset, raw.iter().map(|p| p / total).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn convolution_adds_moments(a in arb_pmf(), b in arb_pmf()) {
        let c = a.convolve(&b);
        prop_assert!((c.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!((c.mean() - (a.mean() + b.mean())).abs() < 1e-9);
        prop_assert!((c.variance() - (a.variance() + b.variance())).abs() < 1e-9);
    }

    #[test]
    fn quantile_monotone_and_consistent_with_cdf(
        lo in -5.0f64..0.0,
        span in 0.5f64..10.0,
        p_hi in 0.05f64..0.95,
        y in 0.01f64..0.99,
    ) {
        let d = D::two_point(lo, lo + span, p_hi).unwrap();
        let q = d.quantile(y).unwrap();
        // Infimum convention: the CDF at the quantile covers y, and any
        // strictly smaller support point does not.
        prop_assert!(d.cdf(q) >= y);
        let q2 = d.quantile((y + 0.005).min(0.995)).unwrap();
        prop_assert!(q2 >= q);
    }

    #[test]
    fn discretize_keeps_moments(mean in 1.0f64..20.0, cv in 0.05f64..0.6) {
        let (m, s) = D::lognormal_from_mean_sd(mean, cv * mean).unwrap();
        let d = D::lognormal(m, s).unwrap();
        let step = 0.05;
        let pmf = d.discretize(step, 1e-12).unwrap();
        let (exact_mean, exact_var) = d.moments();
        prop_assert!((pmf.mean() - exact_mean).abs() <= step / 2.0 + 1e-6);
        prop_assert!((pmf.variance() - exact_var).abs() <= exact_var * 0.02 + step);
    }

    #[test]
    fn sequence_display_parse_roundtrip(n in 1usize..10) {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(n / 2);
        let seq = Sequence::new(perm).unwrap();
        let back = Sequence::parse_one_based(&seq.display_one_based()).unwrap();
        prop_assert_eq!(seq, back);
    }

    #[test]
    fn negation_symmetrizes_cost(
        hi in 1.0f64..6.0,
        p in 0.1f64..0.9,
        x in 0u8..6,
    ) {
        // For a single step, E I and E W swap under joint negation of the
        // service and a mirrored slot around the mean: sanity of the
        // negated-law plumbing through the exact evaluator.
        let d = D::two_point(0.0, hi.round(), p).unwrap();
        let mean = d.mean();
        let inst = Instance::new(vec![d.clone(), d.clone()], 0.5).unwrap();
        let seq = Sequence::identity(2);
        let sched = Schedule(vec![x as f64, 0.0]);
        let cb = evaluate_exact_discrete(&inst, &seq, &sched, 1.0).unwrap();

        let neg = d.negated();
        let inst_n = Instance::new(vec![neg.clone(), neg], 0.5).unwrap();
        let sched_n = Schedule(vec![-(x as f64), 0.0]);
        let cb_n = evaluate_exact_discrete(&inst_n, &seq, &sched_n, 1.0).unwrap();
        // (B - x) and (-B - (-x)) are negatives of one another, so waiting
        // and idle exchange exactly.
        prop_assert!((cb.ew[1] - cb_n.ei[1]).abs() < 1e-12);
        prop_assert!((cb.ei[1] - cb_n.ew[1]).abs() < 1e-12);
        let _ = mean;
    }
}
