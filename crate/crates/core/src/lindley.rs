//! Exact and Monte Carlo evaluation of the waiting/idle cost of a sequence
//! and schedule via the Lindley recursion
//! `W[i+1] = (W[i] + B[tau(i)] - x[tau(i)])^+`,
//! `I[i+1] = (W[i] + B[tau(i)] - x[tau(i)])^-`.

use crate::dist::ServiceDistribution;
use crate::error::{Error, Result};
use crate::exec;
use crate::math::Kahan;
use crate::mixexp::{perturb_duplicate_rates, MixExpLaw};
use crate::pmf::GridPMF;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default tail mass dropped when discretizing unbounded services for exact
/// evaluation.
pub const DEFAULT_MASS_TOL: f64 = 1e-12;

/// Replication block width for Monte Carlo runs. Blocks are seeded with
/// `seed ^ block_index` and folded in block order, so estimates do not
/// depend on the worker count.
const MC_BLOCK: u64 = 8192;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// An ordered patient list plus the idle/wait weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    patients: Vec<ServiceDistribution>,
    omega: f64,
}

impl Instance {
    /// `omega` lies in (0,1]; 1 is accepted for idle-only studies.
    pub fn new(patients: Vec<ServiceDistribution>, omega: f64) -> Result<Self> {
        if patients.is_empty() {
            return Err(Error::invalid("instance needs at least one patient"));
        }
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::invalid(format!("omega must be in (0,1], got {omega}")));
        }
        Ok(Instance { patients, omega })
    }

    pub fn n(&self) -> usize {
        self.patients.len()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Instance::new(self.patients.clone(), omega)
    }

    pub fn patients(&self) -> &[ServiceDistribution] {
        &self.patients
    }

    pub fn patient(&self, j: usize) -> &ServiceDistribution {
        &self.patients[j]
    }

    pub fn means(&self) -> Vec<f64> {
        self.patients.iter().map(|d| d.mean()).collect()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.patients.iter().map(|d| d.variance()).collect()
    }

    pub fn sds(&self) -> Vec<f64> {
        self.patients.iter().map(|d| d.sd()).collect()
    }
}

/// A permutation of patients; `perm[i]` is the patient served in slot `i`
/// (0-based internally, 1-based in display).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequence(Vec<usize>);

impl Sequence {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::invalid(format!("not a permutation: {perm:?}")));
            }
            seen[p] = true;
        }
        Ok(Sequence(perm))
    }

    pub fn identity(n: usize) -> Self {
        Sequence((0..n).collect())
    }

    pub fn slots(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Patient in slot `i`.
    pub fn patient_in_slot(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Render 1-based, comma separated: "2,1,3".
    pub fn display_one_based(&self) -> String {
        self.0
            .iter()
            .map(|p| (p + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parse "2,1,3" (1-based).
    pub fn parse_one_based(s: &str) -> Result<Self> {
        let perm: Vec<usize> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad sequence token {t:?}")))
                    .and_then(|v| {
                        v.checked_sub(1)
                            .ok_or_else(|| Error::invalid("sequence entries are 1-based"))
                    })
            })
            .collect::<Result<_>>()?;
        Sequence::new(perm)
    }
}

impl std::fmt::Display for Sequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.display_one_based())
    }
}

/// Slot lengths indexed by patient; the entry of the last-sequenced patient
/// is ignored by evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule(pub Vec<f64>);

impl Schedule {
    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn for_patient(&self, j: usize) -> f64 {
        self.0[j]
    }
}

/// Per-slot expectations and the weighted objective.
#[derive(Debug, Clone)]
pub struct CostBreakdown {
    /// E W_i per slot (ew[0] = 0).
    pub ew: Vec<f64>,
    /// E I_i per slot (ei[0] = 0).
    pub ei: Vec<f64>,
    pub total_wait: f64,
    pub total_idle: f64,
    pub objective: f64,
}

impl CostBreakdown {
    pub fn from_slots(ew: Vec<f64>, ei: Vec<f64>, omega: f64) -> Self {
        let total_wait = Kahan::new_sum(&ew);
        let total_idle = Kahan::new_sum(&ei);
        let objective = omega * total_idle + (1.0 - omega) * total_wait;
        CostBreakdown { ew, ei, total_wait, total_idle, objective }
    }

    /// CSV with one row per slot plus a summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,EW,EI\n");
        for (i, (w, idle)) in self.ew.iter().zip(&self.ei).enumerate() {
            out.push_str(&format!("{},{:.12},{:.12}\n", i + 1, w, idle));
        }
        out.push_str(&format!(
            "total,{:.12},{:.12}\nobjective,{:.12},\n",
            self.total_wait, self.total_idle, self.objective
        ));
        out
    }
}

impl Kahan {
    fn new_sum(xs: &[f64]) -> f64 {
        let mut k = Kahan::new();
        for &x in xs {
            k.add(x);
        }
        k.total()
    }
}

/// Monte Carlo estimate with standard errors per field.
#[derive(Debug, Clone)]
pub struct McCost {
    pub mean: CostBreakdown,
    pub stderr: CostStderr,
}

#[derive(Debug, Clone)]
pub struct CostStderr {
    pub ew: Vec<f64>,
    pub ei: Vec<f64>,
    pub total_wait: f64,
    pub total_idle: f64,
    pub objective: f64,
}

// ---------------------------------------------------------------------------
// Exact evaluation on a grid
// ---------------------------------------------------------------------------

pub(crate) fn cells_on_grid(value: f64, step: f64) -> Result<i64> {
    let cells = value / step;
    let rounded = cells.round();
    if (cells - rounded).abs() > 1e-9 * (1.0 + cells.abs()) {
        return Err(Error::OffGrid { value, step });
    }
    Ok(rounded as i64)
}

/// Exact discrete evaluation given pre-discretized service pmfs and slot
/// lengths in grid cells. This is the hot path shared by the search code.
pub(crate) fn discrete_cost_from_pmfs(
    pmfs: &[GridPMF],
    seq: &Sequence,
    x_cells: &[i64],
    step: f64,
    omega: f64,
) -> Result<CostBreakdown> {
    let n = seq.n();
    let mut ew = vec![0.0; n];
    let mut ei = vec![0.0; n];
    let mut w = GridPMF::point(step, 0);
    for i in 0..n - 1 {
        let j = seq.patient_in_slot(i);
        let shifted = w.convolve(&pmfs[j]).shift_cells(-x_cells[j]);
        let (next, e_idle, e_wait) = shifted.lindley_clip();
        next.check_mass()?;
        ew[i + 1] = e_wait;
        ei[i + 1] = e_idle;
        w = next;
    }
    Ok(CostBreakdown::from_slots(ew, ei, omega))
}

/// Evaluate the cost exactly by propagating waiting-time pmfs on a grid of
/// width `grid_step`. Service laws are discretized with tail tolerance
/// [`DEFAULT_MASS_TOL`]; every used schedule entry must sit on the grid.
pub fn evaluate_exact_discrete(
    instance: &Instance,
    seq: &Sequence,
    schedule: &Schedule,
    grid_step: f64,
) -> Result<CostBreakdown> {
    check_shapes(instance, seq, schedule)?;
    let pmfs: Vec<GridPMF> = instance
        .patients()
        .iter()
        .map(|d| d.discretize(grid_step, DEFAULT_MASS_TOL))
        .collect::<Result<_>>()?;
    let x_cells: Vec<i64> = schedule
        .entries()
        .iter()
        .map(|&x| cells_on_grid(x, grid_step))
        .collect::<Result<_>>()?;
    discrete_cost_from_pmfs(&pmfs, seq, &x_cells, grid_step, instance.omega())
}

// ---------------------------------------------------------------------------
// Exact evaluation for exponential services
// ---------------------------------------------------------------------------

/// Extract (rate, shift) for services the mixture evaluator supports.
pub(crate) fn exponential_params(instance: &Instance) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rates = Vec::with_capacity(instance.n());
    let mut shifts = Vec::with_capacity(instance.n());
    for (j, d) in instance.patients().iter().enumerate() {
        match d {
            ServiceDistribution::Exponential { rate } => {
                rates.push(*rate);
                shifts.push(0.0);
            }
            ServiceDistribution::Shifted(base, c) => match base.as_ref() {
                ServiceDistribution::Exponential { rate } => {
                    rates.push(*rate);
                    shifts.push(*c);
                }
                other => {
                    return Err(Error::NotExponential(format!(
                        "patient {}: {other:?}",
                        j + 1
                    )))
                }
            },
            other => {
                return Err(Error::NotExponential(format!(
                    "patient {}: {other:?}",
                    j + 1
                )))
            }
        }
    }
    Ok((rates, shifts))
}

pub(crate) fn expmix_cost(
    rates: &[f64],
    shifts: &[f64],
    seq: &Sequence,
    schedule: &Schedule,
    omega: f64,
) -> Result<CostBreakdown> {
    let n = seq.n();
    let mut ew = vec![0.0; n];
    let mut ei = vec![0.0; n];
    let mut w = MixExpLaw::zero();
    for i in 0..n - 1 {
        let j = seq.patient_in_slot(i);
        let x_eff = schedule.for_patient(j) - shifts[j];
        let (next, idle, mean) = w.lindley_step(rates[j], x_eff)?;
        ew[i + 1] = mean;
        ei[i + 1] = idle;
        w = next;
    }
    Ok(CostBreakdown::from_slots(ew, ei, omega))
}

/// Exact evaluation when every service is exponential (optionally shifted).
/// Duplicate rates are perturbed by a relative 1e-9 before evaluation;
/// [`has_duplicate_rates`] reports whether that happened.
pub fn evaluate_exact_expmix(
    instance: &Instance,
    seq: &Sequence,
    schedule: &Schedule,
) -> Result<CostBreakdown> {
    check_shapes(instance, seq, schedule)?;
    let (mut rates, shifts) = exponential_params(instance)?;
    perturb_duplicate_rates(&mut rates);
    expmix_cost(&rates, &shifts, seq, schedule, instance.omega())
}

/// True when every service is exponential (possibly shifted), so the
/// mixture evaluator applies.
pub fn has_exponential_services(instance: &Instance) -> bool {
    exponential_params(instance).is_ok()
}

/// True when the instance has exponential services with duplicate rates,
/// which the mixture evaluator perturbs by a relative 1e-9.
pub fn has_duplicate_rates(instance: &Instance) -> bool {
    match exponential_params(instance) {
        Ok((mut rates, _)) => perturb_duplicate_rates(&mut rates),
        Err(_) => false,
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo evaluation
// ---------------------------------------------------------------------------

struct Accum {
    sum_w: Vec<f64>,
    sum_w2: Vec<f64>,
    sum_i: Vec<f64>,
    sum_i2: Vec<f64>,
    sum_tw: f64,
    sum_tw2: f64,
    sum_ti: f64,
    sum_ti2: f64,
    sum_obj: f64,
    sum_obj2: f64,
}

impl Accum {
    fn new(n: usize) -> Self {
        Accum {
            sum_w: vec![0.0; n],
            sum_w2: vec![0.0; n],
            sum_i: vec![0.0; n],
            sum_i2: vec![0.0; n],
            sum_tw: 0.0,
            sum_tw2: 0.0,
            sum_ti: 0.0,
            sum_ti2: 0.0,
            sum_obj: 0.0,
            sum_obj2: 0.0,
        }
    }

    fn merge(&mut self, o: &Accum) {
        for i in 0..self.sum_w.len() {
            self.sum_w[i] += o.sum_w[i];
            self.sum_w2[i] += o.sum_w2[i];
            self.sum_i[i] += o.sum_i[i];
            self.sum_i2[i] += o.sum_i2[i];
        }
        self.sum_tw += o.sum_tw;
        self.sum_tw2 += o.sum_tw2;
        self.sum_ti += o.sum_ti;
        self.sum_ti2 += o.sum_ti2;
        self.sum_obj += o.sum_obj;
        self.sum_obj2 += o.sum_obj2;
    }
}

fn mean_se(sum: f64, sum2: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    if n < 1.5 {
        return (mean, 0.0);
    }
    let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Unbiased sample means of every `W_i`, `I_i` from direct simulation of the
/// recursion. Deterministic given `seed`, independent of worker count.
pub fn evaluate_mc(
    instance: &Instance,
    seq: &Sequence,
    schedule: &Schedule,
    samples: u64,
    seed: u64,
) -> Result<McCost> {
    check_shapes(instance, seq, schedule)?;
    if samples == 0 {
        return Err(Error::invalid("samples must be >= 1"));
    }
    let n = instance.n();
    let omega = instance.omega();
    let slot_dist: Vec<&ServiceDistribution> = seq
        .slots()
        .iter()
        .map(|&j| instance.patient(j))
        .collect();
    let slot_x: Vec<f64> = seq.slots().iter().map(|&j| schedule.for_patient(j)).collect();

    let blocks = exec::map_chunks(samples, MC_BLOCK, |range| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (range.start / MC_BLOCK));
        let mut acc = Accum::new(n);
        let mut w_path = vec![0.0; n];
        let mut i_path = vec![0.0; n];
        for _ in range {
            let mut w = 0.0;
            for i in 0..n - 1 {
                let b = slot_dist[i].sample(&mut rng);
                let y: f64 = w + b - slot_x[i];
                w = y.max(0.0);
                w_path[i + 1] = w;
                i_path[i + 1] = (-y).max(0.0);
            }
            let mut tw = 0.0;
            let mut ti = 0.0;
            for i in 1..n {
                acc.sum_w[i] += w_path[i];
                acc.sum_w2[i] += w_path[i] * w_path[i];
                acc.sum_i[i] += i_path[i];
                acc.sum_i2[i] += i_path[i] * i_path[i];
                tw += w_path[i];
                ti += i_path[i];
            }
            let obj = omega * ti + (1.0 - omega) * tw;
            acc.sum_tw += tw;
            acc.sum_tw2 += tw * tw;
            acc.sum_ti += ti;
            acc.sum_ti2 += ti * ti;
            acc.sum_obj += obj;
            acc.sum_obj2 += obj * obj;
        }
        acc
    });
    let mut total = Accum::new(n);
    for b in &blocks {
        total.merge(b);
    }

    let nf = samples as f64;
    let mut ew = vec![0.0; n];
    let mut ei = vec![0.0; n];
    let mut se_w = vec![0.0; n];
    let mut se_i = vec![0.0; n];
    for i in 0..n {
        let (m, s) = mean_se(total.sum_w[i], total.sum_w2[i], nf);
        ew[i] = m;
        se_w[i] = s;
        let (m, s) = mean_se(total.sum_i[i], total.sum_i2[i], nf);
        ei[i] = m;
        se_i[i] = s;
    }
    let (tw, se_tw) = mean_se(total.sum_tw, total.sum_tw2, nf);
    let (ti, se_ti) = mean_se(total.sum_ti, total.sum_ti2, nf);
    let (obj, se_obj) = mean_se(total.sum_obj, total.sum_obj2, nf);
    Ok(McCost {
        mean: CostBreakdown {
            ew,
            ei,
            total_wait: tw,
            total_idle: ti,
            objective: obj,
        },
        stderr: CostStderr {
            ew: se_w,
            ei: se_i,
            total_wait: se_tw,
            total_idle: se_ti,
            objective: se_obj,
        },
    })
}

// ---------------------------------------------------------------------------
// Session identity
// ---------------------------------------------------------------------------

/// Residual of the session-length identity
/// `sum E I_i + sum mu_i = sum_{i<n} x_{tau(i)} + E W_n + mu_{tau(n)}`.
/// Exact evaluators keep it below 1e-9.
pub fn session_identity_residual(
    cb: &CostBreakdown,
    instance: &Instance,
    seq: &Sequence,
    schedule: &Schedule,
) -> f64 {
    let n = seq.n();
    let means = instance.means();
    let mut lhs = Kahan::new();
    for &e in &cb.ei {
        lhs.add(e);
    }
    for &m in &means {
        lhs.add(m);
    }
    let mut rhs = Kahan::new();
    for i in 0..n - 1 {
        rhs.add(schedule.for_patient(seq.patient_in_slot(i)));
    }
    rhs.add(cb.ew[n - 1]);
    rhs.add(means[seq.patient_in_slot(n - 1)]);
    lhs.total() - rhs.total()
}

fn check_shapes(instance: &Instance, seq: &Sequence, schedule: &Schedule) -> Result<()> {
    if seq.n() != instance.n() || schedule.entries().len() != instance.n() {
        return Err(Error::invalid(format!(
            "shape mismatch: n = {}, sequence {}, schedule {}",
            instance.n(),
            seq.n(),
            schedule.entries().len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ServiceDistribution as D;

    fn mean_schedule(inst: &Instance) -> Schedule {
        Schedule(inst.means())
    }

    #[test]
    fn deterministic_flow_costs_nothing() {
        let inst = Instance::new(
            vec![D::point_mass(2.0).unwrap(), D::point_mass(5.0).unwrap()],
            0.5,
        )
        .unwrap();
        let seq = Sequence::identity(2);
        let sched = mean_schedule(&inst);
        let cb = evaluate_exact_discrete(&inst, &seq, &sched, 1.0).unwrap();
        assert_eq!(cb.objective, 0.0);
        assert!(cb.ew.iter().all(|&w| w == 0.0));
        assert!(cb.ei.iter().all(|&i| i == 0.0));
    }

    #[test]
    fn symmetric_three_point_pair_costs_a1() {
        // Two-patient instance from the unbounded-ratio construction:
        // mean-based cost equals a1 for any omega.
        let a1 = 0.5;
        let a2 = 0.4;
        let inst = Instance::new(
            vec![
                D::three_point_from_a(10.0, a1).unwrap(),
                D::three_point_from_a(10.0, a2).unwrap(),
            ],
            0.3,
        )
        .unwrap();
        let seq = Sequence::identity(2);
        let sched = mean_schedule(&inst);
        let cb = evaluate_exact_discrete(&inst, &seq, &sched, 0.5).unwrap();
        assert!((cb.objective - a1).abs() < 1e-12, "{}", cb.objective);
        // Swapped order costs a2.
        let swapped = Sequence::new(vec![1, 0]).unwrap();
        let cb2 = evaluate_exact_discrete(&inst, &swapped, &sched, 0.5).unwrap();
        assert!((cb2.objective - a2).abs() < 1e-12);
    }

    #[test]
    fn expmix_unit_exponential_closed_form() {
        let inst = Instance::new(
            vec![D::exponential(1.0).unwrap(), D::exponential(1.0).unwrap()],
            1.0,
        )
        .unwrap();
        let seq = Sequence::identity(2);
        let sched = Schedule(vec![1.0, 1.0]);
        let cb = evaluate_exact_expmix(&inst, &seq, &sched).unwrap();
        assert!((cb.objective - (-1.0f64).exp()).abs() < 1e-7);
        assert!(has_duplicate_rates(&inst));
    }

    #[test]
    fn expmix_single_patient_zero() {
        let inst = Instance::new(vec![D::exponential(2.5).unwrap()], 1.0).unwrap();
        let cb = evaluate_exact_expmix(
            &inst,
            &Sequence::identity(1),
            &Schedule(vec![0.4]),
        )
        .unwrap();
        assert_eq!(cb.objective, 0.0);
    }

    #[test]
    fn expmix_vs_discrete_vs_mc() {
        // Exponential(1.5) pair, mean-based: three evaluators agree.
        let inst = Instance::new(
            vec![D::exponential(1.5).unwrap(), D::exponential(3.0).unwrap()],
            0.5,
        )
        .unwrap();
        let seq = Sequence::new(vec![1, 0]).unwrap();
        let sched = Schedule(vec![2.0 / 3.0, 1.0 / 3.0]);
        let exact = evaluate_exact_expmix(&inst, &seq, &sched).unwrap();
        let disc = evaluate_exact_discrete(&inst, &seq, &sched, 1.0 / 300.0).unwrap();
        assert!((exact.objective - disc.objective).abs() < 1e-3);
        let mc = evaluate_mc(&inst, &seq, &sched, 400_000, 11).unwrap();
        let diff = (mc.mean.objective - exact.objective).abs();
        assert!(diff <= 4.0 * mc.stderr.objective.max(1e-12), "{diff}");
    }

    #[test]
    fn mc_is_deterministic() {
        let inst = Instance::new(
            vec![
                D::lognormal(1.0, 0.4).unwrap(),
                D::exponential(0.5).unwrap(),
                D::two_point(0.0, 3.0, 0.25).unwrap(),
            ],
            0.7,
        )
        .unwrap();
        let seq = Sequence::identity(3);
        let sched = mean_schedule(&inst);
        let a = evaluate_mc(&inst, &seq, &sched, 30_000, 5).unwrap();
        let b = evaluate_mc(&inst, &seq, &sched, 30_000, 5).unwrap();
        assert_eq!(a.mean.objective, b.mean.objective);
        assert_eq!(a.mean.ew, b.mean.ew);
        let c = evaluate_mc(&inst, &seq, &sched, 30_000, 6).unwrap();
        assert_ne!(a.mean.objective, c.mean.objective);
    }

    #[test]
    fn mc_deterministic_instance_zero_stderr() {
        let inst =
            Instance::new(vec![D::point_mass(3.0).unwrap(), D::point_mass(1.0).unwrap()], 0.5)
                .unwrap();
        let mc = evaluate_mc(
            &inst,
            &Sequence::identity(2),
            &Schedule(vec![3.0, 1.0]),
            1000,
            1,
        )
        .unwrap();
        assert_eq!(mc.mean.objective, 0.0);
        assert_eq!(mc.stderr.objective, 0.0);
    }

    #[test]
    fn session_identity_exact() {
        let inst = Instance::new(
            vec![
                D::exponential(3.0).unwrap(),
                D::exponential(2.0).unwrap(),
                D::exponential(1.0).unwrap(),
            ],
            1.0,
        )
        .unwrap();
        let seq = Sequence::identity(3);
        let sched = mean_schedule(&inst);
        let cb = evaluate_exact_expmix(&inst, &seq, &sched).unwrap();
        let r = session_identity_residual(&cb, &inst, &seq, &sched);
        assert!(r.abs() < 1e-9, "residual {r}");
        // Mean-based: identity reduces to sum EI = E W_n.
        assert!((cb.total_idle - cb.ew[2]).abs() < 1e-9);
    }

    #[test]
    fn off_grid_schedule_rejected() {
        let inst = Instance::new(vec![D::point_mass(1.0).unwrap(); 2], 0.5).unwrap();
        let r = evaluate_exact_discrete(
            &inst,
            &Sequence::identity(2),
            &Schedule(vec![1.3, 1.0]),
            1.0,
        );
        assert!(matches!(r, Err(Error::OffGrid { .. })));
    }

    #[test]
    fn shift_invariance_is_bit_exact() {
        let base = vec![
            D::two_point(0.0, 4.0, 0.3).unwrap(),
            D::two_point(1.0, 3.0, 0.6).unwrap(),
            D::two_point(0.0, 2.0, 0.5).unwrap(),
        ];
        let shifts = [2.0, -1.0, 5.0];
        let shifted: Vec<_> = base
            .iter()
            .zip(shifts)
            .map(|(d, c)| d.clone().shifted(c))
            .collect();
        let i1 = Instance::new(base, 0.4).unwrap();
        let i2 = Instance::new(shifted, 0.4).unwrap();
        let seq = Sequence::new(vec![2, 0, 1]).unwrap();
        let x1 = Schedule(vec![3.0, 2.0, 1.0]);
        let x2 = Schedule(vec![3.0 + 2.0, 2.0 - 1.0, 1.0 + 5.0]);
        let a = evaluate_exact_discrete(&i1, &seq, &x1, 1.0).unwrap();
        let b = evaluate_exact_discrete(&i2, &seq, &x2, 1.0).unwrap();
        assert_eq!(a.ew, b.ew);
        assert_eq!(a.ei, b.ei);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn scale_equivariance() {
        let base = vec![
            D::two_point(0.0, 4.0, 0.3).unwrap(),
            D::two_point(0.0, 2.0, 0.5).unwrap(),
        ];
        let g = 3.0;
        let scaled: Vec<_> = base
            .iter()
            .map(|d| d.clone().scaled(g).unwrap())
            .collect();
        let i1 = Instance::new(base, 0.6).unwrap();
        let i2 = Instance::new(scaled, 0.6).unwrap();
        let seq = Sequence::identity(2);
        let a = evaluate_exact_discrete(&i1, &seq, &Schedule(vec![1.0, 1.0]), 1.0).unwrap();
        let b =
            evaluate_exact_discrete(&i2, &seq, &Schedule(vec![g, g]), g).unwrap();
        assert!((b.objective - g * a.objective).abs() < 1e-12 * (1.0 + g * a.objective));
        for i in 0..2 {
            assert!((b.ew[i] - g * a.ew[i]).abs() < 1e-12 * (1.0 + g * a.ew[i]));
        }
    }
}
