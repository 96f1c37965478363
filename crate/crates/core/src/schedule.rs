//! Schedule construction: mean-based, sigma-slack and lognormal-
//! multiplicative heuristics, plus optimal-schedule solvers (discrete
//! local search certified by full +-1_S neighborhood scans, and continuous
//! cyclic coordinate descent with golden-section line minimization).

use crate::dist::ServiceDistribution;
use crate::error::{Error, Result};
use crate::lindley::{
    cells_on_grid, discrete_cost_from_pmfs, exponential_params,
    expmix_cost, Instance, Schedule, Sequence, DEFAULT_MASS_TOL,
};
use crate::mixexp::perturb_duplicate_rates;
use crate::pmf::GridPMF;

/// How to resolve the slack multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    /// Resolve via the closed-form slack expressions below.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleRule {
    MeanBased,
    SigmaSlack(AlphaChoice),
    LognormalMultiplicative(AlphaChoice),
    OptimalDiscrete { grid_step: f64 },
    OptimalContinuous { tol: f64 },
}

/// Guard on the discrete solver: neighborhood scans cost 2^(n-1) per round.
const DISCRETE_DIM_CAP: usize = 16;
const GOLDEN_TOL: f64 = 1e-10;
pub const DEFAULT_CYCLE_TOL: f64 = 1e-8;

/// `x_j = E B_j`.
pub fn mean_based(instance: &Instance) -> Schedule {
    Schedule(instance.means())
}

/// Variance-sorted patient order with the stable index tie-break (the SVF
/// order used for slack formulas).
fn svf_order(instance: &Instance) -> Vec<usize> {
    let vars = instance.variances();
    let mut idx: Vec<usize> = (0..instance.n()).collect();
    idx.sort_by(|&a, &b| vars[a].partial_cmp(&vars[b]).unwrap().then(a.cmp(&b)));
    idx
}

/// `x = mu + alpha * sigma` with
/// `alpha = sqrt((1-omega)/(2*omega) + sigma_(n-1) / (2 * sum_{i<n} sigma_(i)))`,
/// sigmas taken in SVF order. Degenerate all-deterministic instances fall
/// back to the mean-based schedule with `alpha = 0`.
pub fn sigma_slack(instance: &Instance, omega: f64) -> Result<(f64, Schedule)> {
    sigma_slack_with(instance, omega, AlphaChoice::Auto)
}

pub fn sigma_slack_with(
    instance: &Instance,
    omega: f64,
    choice: AlphaChoice,
) -> Result<(f64, Schedule)> {
    let n = instance.n();
    if n < 2 {
        return Err(Error::invalid("sigma-slack needs at least 2 patients"));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!(
            "sigma-slack is defined for omega in (0,1), got {omega}"
        )));
    }
    let sds = instance.sds();
    let alpha = match choice {
        AlphaChoice::Fixed(a) if a >= 0.0 => a,
        AlphaChoice::Fixed(a) => {
            return Err(Error::invalid(format!("alpha must be >= 0, got {a}")))
        }
        AlphaChoice::Auto => {
            let order = svf_order(instance);
            let sorted: Vec<f64> = order.iter().map(|&j| sds[j]).collect();
            let head_sum: f64 = sorted[..n - 1].iter().sum();
            if head_sum == 0.0 && sorted[n - 1] == 0.0 {
                0.0
            } else {
                let second_largest = sorted[n - 2];
                let ratio = if head_sum > 0.0 { second_largest / (2.0 * head_sum) } else { 0.0 };
                ((1.0 - omega) / (2.0 * omega) + ratio).sqrt()
            }
        }
    };
    let x = instance
        .means()
        .iter()
        .zip(&sds)
        .map(|(m, s)| m + alpha * s)
        .collect();
    Ok((alpha, Schedule(x)))
}

/// `x = (1 + alpha) * mu` with `alpha = sqrt((exp(s_(n-1)^2) - 1) / (2*omega))`
/// for lognormal patients whose `m` and `s^2` are nondecreasing in SVF order.
pub fn lognormal_multiplicative(instance: &Instance, omega: f64) -> Result<(f64, Schedule)> {
    lognormal_multiplicative_with(instance, omega, AlphaChoice::Auto)
}

pub fn lognormal_multiplicative_with(
    instance: &Instance,
    omega: f64,
    choice: AlphaChoice,
) -> Result<(f64, Schedule)> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!(
            "multiplicative slack is defined for omega in (0,1), got {omega}"
        )));
    }
    let params = lognormal_params_sorted(instance)?;
    let n = params.len();
    let alpha = match choice {
        AlphaChoice::Fixed(a) if a >= 0.0 => a,
        AlphaChoice::Fixed(a) => {
            return Err(Error::invalid(format!("alpha must be >= 0, got {a}")))
        }
        AlphaChoice::Auto => {
            if n < 2 {
                return Err(Error::invalid("multiplicative slack needs at least 2 patients"));
            }
            let s_second = params[n - 2].1;
            ((s_second * s_second).exp_m1() / (2.0 * omega)).sqrt()
        }
    };
    let x = instance.means().iter().map(|m| (1.0 + alpha) * m).collect();
    Ok((alpha, Schedule(x)))
}

/// (m, s) per patient in SVF order; errors when a patient is not lognormal
/// or the `m`/`s^2` orderings fail.
pub fn lognormal_params_sorted(instance: &Instance) -> Result<Vec<(f64, f64)>> {
    let order = svf_order(instance);
    let mut out = Vec::with_capacity(order.len());
    for &j in &order {
        match instance.patient(j) {
            ServiceDistribution::Lognormal { m, s } => out.push((*m, *s)),
            ServiceDistribution::PointMass { value } if *value > 0.0 => {
                out.push((value.ln(), 0.0))
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "patient {} is not lognormal: {other:?}",
                    j + 1
                )))
            }
        }
    }
    for w in out.windows(2) {
        if w[0].0 > w[1].0 + 1e-12 || w[0].1 > w[1].1 + 1e-12 {
            return Err(Error::OrderingViolated(format!(
                "need m and s nondecreasing in variance order, got {w:?}"
            )));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Optimal schedules
// ---------------------------------------------------------------------------

/// Globally optimal integer-grid schedule for a fixed sequence. The cost is
/// an L-natural-convex function of the arrival epochs (cumulative slot
/// sums), so the search walks epoch space: a full scan over every move
/// `epochs +- step * 1_S` that keeps the epochs nondecreasing certifies
/// global optimality at termination. In slot-length space those moves
/// include the staircase exchanges a per-coordinate scan would miss.
/// Starts from the mean-based schedule rounded to the grid; equal-cost
/// moves prefer the lexicographically smallest schedule.
pub fn optimal_schedule_discrete(
    instance: &Instance,
    seq: &Sequence,
    omega: f64,
    grid_step: f64,
) -> Result<(Schedule, f64)> {
    let n = instance.n();
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!(
            "schedule optimization needs omega in (0,1), got {omega}"
        )));
    }
    let dim = n - 1;
    if dim > DISCRETE_DIM_CAP {
        return Err(Error::CapExceeded {
            n,
            cap: DISCRETE_DIM_CAP + 1,
            what: "discrete schedule neighborhood scan".into(),
        });
    }
    let pmfs: Vec<GridPMF> = instance
        .patients()
        .iter()
        .map(|d| d.discretize(grid_step, DEFAULT_MASS_TOL))
        .collect::<Result<_>>()?;
    let means = instance.means();

    // Decision variables: arrival epochs of slots 2..n in grid cells
    // (epoch of slot 1 is 0). Slot lengths are their differences.
    let slot_x = |epochs: &[i64]| -> Vec<i64> {
        let mut x = Vec::with_capacity(dim);
        let mut prev = 0;
        for &e in epochs {
            x.push(e - prev);
            prev = e;
        }
        x
    };
    let mut epochs: Vec<i64> = Vec::with_capacity(dim);
    let mut acc = 0i64;
    for i in 0..dim {
        acc += (means[seq.patient_in_slot(i)] / grid_step).round().max(0.0) as i64;
        epochs.push(acc);
    }
    let eval = |epochs: &[i64]| -> Result<f64> {
        let mut x_cells = vec![0i64; n];
        for (i, &c) in slot_x(epochs).iter().enumerate() {
            x_cells[seq.patient_in_slot(i)] = c;
        }
        Ok(discrete_cost_from_pmfs(&pmfs, seq, &x_cells, grid_step, omega)?.objective)
    };

    let mut current = eval(&epochs)?;
    if dim > 0 {
        let masks = 1u32 << dim;
        let mut trial = epochs.clone();
        loop {
            let mut best: Option<(f64, Vec<i64>)> = None;
            for dir in [1i64, -1i64] {
                'mask: for mask in 1..masks {
                    trial.copy_from_slice(&epochs);
                    for (i, t) in trial.iter_mut().enumerate() {
                        if mask & (1 << i) != 0 {
                            *t += dir;
                        }
                    }
                    // Feasibility: slot lengths stay nonnegative.
                    let mut prev = 0;
                    for &t in &trial {
                        if t < prev {
                            continue 'mask;
                        }
                        prev = t;
                    }
                    let c = eval(&trial)?;
                    let better = match &best {
                        None => c < current,
                        Some((bc, bx)) => {
                            c < *bc || (c == *bc && slot_x(&trial) < slot_x(bx))
                        }
                    };
                    if better {
                        best = Some((c, trial.clone()));
                    }
                }
            }
            match best {
                Some((c, e)) if c < current => {
                    current = c;
                    epochs = e;
                }
                _ => break, // no improving move in the full +-1_S scan
            }
        }
    }

    let mut x = means.clone();
    for (i, &c) in slot_x(&epochs).iter().enumerate() {
        x[seq.patient_in_slot(i)] = c as f64 * grid_step;
    }
    // The last-sequenced patient's entry is unused; pin it to the grid so
    // the whole schedule round-trips through grid checks.
    let last = seq.patient_in_slot(n - 1);
    x[last] = (means[last] / grid_step).round() * grid_step;
    Ok((Schedule(x), current))
}

/// Optimal continuous schedule for exponential services: cyclic coordinate
/// descent, each coordinate minimized by golden-section search over an
/// expanding bracket. The objective is jointly convex in the slot lengths,
/// so the fixed point is a global minimum up to `tol`.
pub fn optimal_schedule_continuous(
    instance: &Instance,
    seq: &Sequence,
    omega: f64,
    tol: f64,
) -> Result<(Schedule, f64)> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!(
            "schedule optimization needs omega in (0,1), got {omega}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be > 0"));
    }
    let n = instance.n();
    let (mut rates, shifts) = exponential_params(instance)?;
    perturb_duplicate_rates(&mut rates);
    let means = instance.means();

    let mut x: Vec<f64> = means.clone();
    let eval = |x: &[f64]| -> Result<f64> {
        Ok(expmix_cost(&rates, &shifts, seq, &Schedule(x.to_vec()), omega)?.objective)
    };
    let mut current = eval(&x)?;
    if n >= 2 {
        for _cycle in 0..200 {
            let start = current;
            for i in 0..n - 1 {
                let j = seq.patient_in_slot(i);
                let lo = shifts[j];
                let f1 = |v: f64, x: &mut Vec<f64>| -> Result<f64> {
                    x[j] = v;
                    eval(x)
                };
                // Expand the bracket until the cost rises; idle time grows
                // linearly in x_j so this must terminate.
                let mut hi = lo + (means[j] - lo).max(1.0);
                let mut f_hi = f1(hi, &mut x)?;
                let mut expansions = 0;
                loop {
                    let probe = lo + (hi - lo) * 2.0;
                    let f_probe = f1(probe, &mut x)?;
                    if f_probe > f_hi {
                        break;
                    }
                    hi = probe;
                    f_hi = f_probe;
                    expansions += 1;
                    if expansions > 60 {
                        return Err(Error::BracketFailure(format!(
                            "cost never increases in coordinate {}",
                            j + 1
                        )));
                    }
                }
                // Golden-section on [lo, 2*hi - lo].
                let mut a = lo;
                let mut b = lo + (hi - lo) * 2.0;
                let phi = (5f64.sqrt() - 1.0) / 2.0;
                let mut c = b - phi * (b - a);
                let mut d = a + phi * (b - a);
                let mut fc = f1(c, &mut x)?;
                let mut fd = f1(d, &mut x)?;
                while (b - a) > GOLDEN_TOL * (1.0 + a.abs() + b.abs()) {
                    if fc <= fd {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - phi * (b - a);
                        fc = f1(c, &mut x)?;
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + phi * (b - a);
                        fd = f1(d, &mut x)?;
                    }
                }
                let v = 0.5 * (a + b);
                current = f1(v, &mut x)?;
            }
            if start - current < tol {
                break;
            }
        }
    }
    Ok((Schedule(x), current))
}

/// Resolve a schedule rule for one sequence. Optimal rules return their
/// objective; heuristic rules leave it to the caller to evaluate.
pub fn resolve(
    instance: &Instance,
    seq: &Sequence,
    omega: f64,
    rule: &ScheduleRule,
) -> Result<(Schedule, Option<f64>)> {
    Ok(match rule {
        ScheduleRule::MeanBased => (mean_based(instance), None),
        ScheduleRule::SigmaSlack(choice) => {
            (sigma_slack_with(instance, omega, *choice)?.1, None)
        }
        ScheduleRule::LognormalMultiplicative(choice) => {
            (lognormal_multiplicative_with(instance, omega, *choice)?.1, None)
        }
        ScheduleRule::OptimalDiscrete { grid_step } => {
            let (s, obj) = optimal_schedule_discrete(instance, seq, omega, *grid_step)?;
            (s, Some(obj))
        }
        ScheduleRule::OptimalContinuous { tol } => {
            let (s, obj) = optimal_schedule_continuous(instance, seq, omega, *tol)?;
            (s, Some(obj))
        }
    })
}

/// Snap a schedule to the evaluation grid (used when heuristic schedules
/// feed the discrete evaluator).
pub fn round_to_grid(schedule: &Schedule, grid_step: f64) -> Schedule {
    Schedule(
        schedule
            .entries()
            .iter()
            .map(|&x| (x / grid_step).round() * grid_step)
            .collect(),
    )
}

/// True when every entry already sits on the grid.
pub fn on_grid(schedule: &Schedule, grid_step: f64) -> bool {
    schedule
        .entries()
        .iter()
        .all(|&x| cells_on_grid(x, grid_step).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ServiceDistribution as D;
    use crate::lindley::evaluate_exact_discrete;

    #[test]
    fn mean_based_examples() {
        let inst = Instance::new(
            vec![D::point_mass(2.0).unwrap(), D::point_mass(5.0).unwrap()],
            0.5,
        )
        .unwrap();
        assert_eq!(mean_based(&inst).entries(), &[2.0, 5.0]);

        let exp = Instance::new(
            vec![
                D::exponential(3.0).unwrap(),
                D::exponential(2.0).unwrap(),
                D::exponential(1.0).unwrap(),
            ],
            0.5,
        )
        .unwrap();
        let m = mean_based(&exp);
        assert!((m.entries()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.entries()[2] - 1.0).abs() < 1e-15);

        let ln = Instance::new(vec![D::lognormal(50f64.ln(), 0.33).unwrap()], 0.5).unwrap();
        let expect = 50.0 * (0.33f64 * 0.33 / 2.0).exp();
        assert!((mean_based(&ln).entries()[0] - expect).abs() < 1e-9);
    }

    #[test]
    fn sigma_slack_forced_values() {
        let inst = Instance::new(
            vec![D::normal(1.0, 1.0).unwrap(), D::normal(2.0, 1.0).unwrap()],
            0.5,
        )
        .unwrap();
        let (alpha, sched) = sigma_slack(&inst, 0.5).unwrap();
        assert!((alpha - 1.0).abs() < 1e-12);
        assert!((sched.entries()[0] - 2.0).abs() < 1e-12);

        // Equal sigmas: alpha = sqrt(1/2 + 1/(2(n-1))).
        for n in [3usize, 5, 8] {
            let inst = Instance::new(
                (0..n).map(|_| D::normal(4.0, 2.0).unwrap()).collect(),
                0.5,
            )
            .unwrap();
            let (alpha, _) = sigma_slack(&inst, 0.5).unwrap();
            let expect = (0.5 + 0.5 / (n as f64 - 1.0)).sqrt();
            assert!((alpha - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_slack_degenerate_is_mean_based() {
        let inst = Instance::new(
            vec![D::point_mass(2.0).unwrap(), D::point_mass(3.0).unwrap()],
            0.5,
        )
        .unwrap();
        let (alpha, sched) = sigma_slack(&inst, 0.5).unwrap();
        assert_eq!(alpha, 0.0);
        assert_eq!(sched.entries(), &[2.0, 3.0]);
    }

    #[test]
    fn lognormal_multiplicative_alpha() {
        let (m1, s1) = D::lognormal_from_mean_sd(15.50, 5.038).unwrap();
        let (m2, s2) = D::lognormal_from_mean_sd(19.09, 6.85).unwrap();
        let inst = Instance::new(
            vec![
                D::lognormal(m1, s1).unwrap(),
                D::lognormal(m2, s2).unwrap(),
                D::lognormal(m2, s2).unwrap(),
            ],
            0.5,
        )
        .unwrap();
        let (alpha, sched) = lognormal_multiplicative(&inst, 0.5).unwrap();
        // s_(n-1) = 0.3480 and omega = 1/2: alpha = sqrt(e^(s^2) - 1) ~ 0.3588.
        assert!((alpha - 0.3588).abs() < 1e-3);
        assert!((sched.entries()[0] - (1.0 + alpha) * 15.50).abs() < 1e-9);

        // s_(n-1) = 0 collapses to the mean-based schedule.
        let inst0 = Instance::new(
            vec![D::point_mass(2.0).unwrap(), D::point_mass(2.0).unwrap()],
            0.5,
        )
        .unwrap();
        let (alpha0, sched0) = lognormal_multiplicative(&inst0, 0.5).unwrap();
        assert_eq!(alpha0, 0.0);
        assert_eq!(sched0.entries(), &[2.0, 2.0]);

        // alpha shrinks like 1/sqrt(2 omega) as omega grows.
        let (a_low, _) = lognormal_multiplicative(&inst, 0.2).unwrap();
        let (a_high, _) = lognormal_multiplicative(&inst, 0.9).unwrap();
        assert!(a_low > alpha && alpha > a_high);

        let bad = Instance::new(
            vec![D::exponential(1.0).unwrap(), D::lognormal(1.0, 0.3).unwrap()],
            0.5,
        )
        .unwrap();
        assert!(lognormal_multiplicative(&bad, 0.5).is_err());
    }

    #[test]
    fn discrete_solver_exact_on_deterministic() {
        let inst = Instance::new(
            vec![
                D::point_mass(2.0).unwrap(),
                D::point_mass(4.0).unwrap(),
                D::point_mass(1.0).unwrap(),
            ],
            0.5,
        )
        .unwrap();
        let seq = Sequence::identity(3);
        let (sched, obj) = optimal_schedule_discrete(&inst, &seq, 0.5, 1.0).unwrap();
        assert_eq!(obj, 0.0);
        assert_eq!(sched.entries()[0], 2.0);
        assert_eq!(sched.entries()[1], 4.0);
    }

    #[test]
    fn discrete_solver_matches_brute_force_n2() {
        let inst = Instance::new(
            vec![
                D::two_point(0.0, 5.0, 0.3).unwrap(),
                D::two_point(0.0, 8.0, 0.5).unwrap(),
            ],
            0.5,
        )
        .unwrap();
        let seq = Sequence::identity(2);
        let (sched, obj) = optimal_schedule_discrete(&inst, &seq, 0.5, 1.0).unwrap();
        // Brute force over x1 in 0..=8.
        let mut best = f64::INFINITY;
        let mut best_x = 0.0;
        for x1 in 0..=8 {
            let s = Schedule(vec![x1 as f64, 0.0]);
            let c = evaluate_exact_discrete(&inst, &seq, &s, 1.0).unwrap().objective;
            if c < best {
                best = c;
                best_x = x1 as f64;
            }
        }
        assert!((obj - best).abs() < 1e-12);
        assert_eq!(sched.entries()[0], best_x);
        // Never worse than the rounded mean-based start.
        let start = round_to_grid(&mean_based(&inst), 1.0);
        let c0 = evaluate_exact_discrete(&inst, &seq, &start, 1.0).unwrap().objective;
        assert!(obj <= c0 + 1e-12);
    }

    #[test]
    fn continuous_solver_newsvendor_n2() {
        let inst = Instance::new(
            vec![D::exponential(1.0).unwrap(), D::exponential(1.0).unwrap()],
            0.5,
        )
        .unwrap();
        let seq = Sequence::identity(2);
        let (sched, obj) = optimal_schedule_continuous(&inst, &seq, 0.5, 1e-10).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((sched.entries()[0] - ln2).abs() < 1e-5, "{:?}", sched);
        assert!((obj - ln2 / 2.0).abs() < 1e-8);
    }

    #[test]
    fn continuous_solver_deterministic_cost_zero() {
        // Very high rates approximate deterministic service.
        let inst = Instance::new(
            vec![D::exponential(3.0).unwrap(), D::exponential(5.0).unwrap()],
            0.8,
        )
        .unwrap();
        let seq = Sequence::identity(2);
        let (_, obj) = optimal_schedule_continuous(&inst, &seq, 0.8, 1e-10).unwrap();
        assert!(obj > 0.0 && obj.is_finite());
    }

    #[test]
    fn discrete_per_coordinate_convexity() {
        let inst = Instance::new(
            vec![
                D::two_point(0.0, 2.0, 0.5).unwrap(),
                D::two_point(0.0, 4.0, 0.25).unwrap(),
                D::two_point(0.0, 3.0, 0.4).unwrap(),
            ],
            0.5,
        )
        .unwrap();
        let seq = Sequence::identity(3);
        for x1 in 1..4i64 {
            for x2 in 1..4i64 {
                for coord in 0..2usize {
                    let mut mk = |d: i64| {
                        let mut v = [x1 as f64, x2 as f64, 0.0];
                        v[coord] += d as f64;
                        evaluate_exact_discrete(&inst, &seq, &Schedule(v.to_vec()), 1.0)
                            .unwrap()
                            .objective
                    };
                    let f0 = mk(0);
                    let fm = mk(-1);
                    let fp = mk(1);
                    assert!(fm + fp >= 2.0 * f0 - 1e-9);
                }
            }
        }
    }
}
