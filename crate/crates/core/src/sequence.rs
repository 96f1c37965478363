//! Sequence construction and search: the smallest-variance-first order,
//! exhaustive enumeration with largest-variance-last pruning and
//! exchangeability reduction, the V-shaped restriction, and approximation
//! ratios against the SVF sequence.
//!
//! Enumeration is data-parallel over fixed-width candidate blocks; the
//! reduction is a minimum under the total order (objective, lexicographic
//! sequence), so results are independent of the worker count.

use crate::dist::{check_dilation_order, ServiceDistribution};
use crate::error::{Error, Result};
use crate::exec;
use crate::lindley::{
    discrete_cost_from_pmfs, expmix_cost, exponential_params, Instance, Schedule, Sequence,
    DEFAULT_MASS_TOL,
};
use crate::math::float_gcd;
use crate::mixexp::perturb_duplicate_rates;
use crate::pmf::GridPMF;
use crate::schedule::{self, ScheduleRule};

/// Candidate budgets: an unpruned exponential search at n = 11 or a pruned
/// discrete search at n = 7 still fits; anything larger needs `force`.
const BUDGET_EXPMIX: u64 = 3_628_800;
const BUDGET_DISCRETE: u64 = 720;
const BUDGET_VSHAPED: u64 = 1 << 22;
const CHUNK: u64 = 2048;
const LOG_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineChoice {
    /// Exponential services go to the mixture engine, finite-support
    /// instances to the grid engine with an inferred step.
    Auto,
    ExpMix,
    Discrete { grid_step: f64 },
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub rule: ScheduleRule,
    /// Overrides the instance weight when set.
    pub omega: Option<f64>,
    /// Fix the largest-variance patient in the last slot; requires a Proven
    /// dilation certificate unless `force_prune` is set.
    pub prune: bool,
    pub force_prune: bool,
    pub evaluator: EngineChoice,
    /// Override the enumeration budget.
    pub force: bool,
    pub log_sequences: bool,
}

impl SearchConfig {
    pub fn mean_based() -> Self {
        SearchConfig {
            rule: ScheduleRule::MeanBased,
            omega: None,
            prune: true,
            force_prune: false,
            evaluator: EngineChoice::Auto,
            force: false,
            log_sequences: false,
        }
    }

    pub fn with_rule(rule: ScheduleRule) -> Self {
        SearchConfig { rule, ..SearchConfig::mean_based() }
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub best_seq: Sequence,
    pub best_objective: f64,
    pub svf_objective: f64,
    /// svf / best; 1 when both vanish.
    pub ratio: f64,
    pub sequences_evaluated: u64,
    pub pruning_used: bool,
    pub per_sequence_log: Option<Vec<(Sequence, f64)>>,
}

/// Patients sorted by nondecreasing service-time variance, ties broken by
/// the original index.
pub fn svf(instance: &Instance) -> Sequence {
    let vars = instance.variances();
    let mut idx: Vec<usize> = (0..instance.n()).collect();
    idx.sort_by(|&a, &b| vars[a].partial_cmp(&vars[b]).unwrap().then(a.cmp(&b)));
    Sequence::new(idx).expect("sorted permutation")
}

// ---------------------------------------------------------------------------
// Evaluation engines, prepared once per search
// ---------------------------------------------------------------------------

enum Engine {
    ExpMix { rates: Vec<f64>, shifts: Vec<f64> },
    Discrete { pmfs: Vec<GridPMF>, step: f64 },
}

impl Engine {
    fn build(instance: &Instance, choice: EngineChoice) -> Result<Engine> {
        match choice {
            EngineChoice::ExpMix => {
                let (mut rates, shifts) = exponential_params(instance)?;
                perturb_duplicate_rates(&mut rates);
                Ok(Engine::ExpMix { rates, shifts })
            }
            EngineChoice::Discrete { grid_step } => {
                let pmfs = instance
                    .patients()
                    .iter()
                    .map(|d| d.discretize(grid_step, DEFAULT_MASS_TOL))
                    .collect::<Result<_>>()?;
                Ok(Engine::Discrete { pmfs, step: grid_step })
            }
            EngineChoice::Auto => {
                if exponential_params(instance).is_ok() {
                    Engine::build(instance, EngineChoice::ExpMix)
                } else if let Some(step) = infer_grid_step(instance.patients()) {
                    Engine::build(instance, EngineChoice::Discrete { grid_step: step })
                } else {
                    Err(Error::Unsupported(
                        "no exact evaluator for this instance; pass an explicit grid step"
                            .into(),
                    ))
                }
            }
        }
    }

    /// Objective of `seq` under a fixed patient-indexed schedule.
    fn objective(&self, seq: &Sequence, schedule: &Schedule, omega: f64) -> Result<f64> {
        match self {
            Engine::ExpMix { rates, shifts } => {
                Ok(expmix_cost(rates, shifts, seq, schedule, omega)?.objective)
            }
            Engine::Discrete { pmfs, step } => {
                let x_cells: Vec<i64> = schedule
                    .entries()
                    .iter()
                    .map(|&x| (x / step).round() as i64)
                    .collect();
                Ok(discrete_cost_from_pmfs(pmfs, seq, &x_cells, *step, omega)?.objective)
            }
        }
    }

    fn budget(&self) -> u64 {
        match self {
            Engine::ExpMix { .. } => BUDGET_EXPMIX,
            Engine::Discrete { .. } => BUDGET_DISCRETE,
        }
    }
}

/// Common grid step of all service atoms, when every patient has finite
/// support.
pub fn infer_grid_step(patients: &[ServiceDistribution]) -> Option<f64> {
    let mut values = Vec::new();
    for d in patients {
        for (v, _) in d.finite_support()? {
            values.push(v);
        }
    }
    if values.iter().all(|v| v.abs() < 1e-9) {
        return Some(1.0); // every law is an atom at zero; any grid works
    }
    float_gcd(values, 1e-9)
}

// ---------------------------------------------------------------------------
// Candidate spaces
// ---------------------------------------------------------------------------

/// Sequences to evaluate: a pool permuted into slots, with an optional fixed
/// final patient. Patients with identical laws are enumerated once per
/// distinct arrangement of their classes.
enum Candidates {
    /// All patients distinct: unrank permutations lazily in lex order.
    Perms { pool: Vec<u8>, count: u64 },
    /// Duplicate classes: materialized distinct class arrangements, mapped
    /// back to patient ids class by class in ascending order.
    Multiset { flat: Vec<u8>, n: usize, count: u64, class_members: Vec<Vec<u8>> },
}

impl Candidates {
    fn count(&self) -> u64 {
        match self {
            Candidates::Perms { count, .. } | Candidates::Multiset { count, .. } => *count,
        }
    }

    /// Write candidate `r` into `out` (patient ids, slot order).
    fn fill(&self, r: u64, out: &mut Vec<u8>) {
        out.clear();
        match self {
            Candidates::Perms { pool, .. } => {
                let mut avail = pool.clone();
                let m = avail.len();
                let mut rem = r;
                for i in 0..m {
                    let f = factorial((m - 1 - i) as u64);
                    let k = (rem / f) as usize;
                    rem %= f;
                    out.push(avail.remove(k));
                }
            }
            Candidates::Multiset { flat, n, class_members, .. } => {
                let row = &flat[(r as usize) * n..(r as usize + 1) * n];
                let mut next = vec![0usize; class_members.len()];
                for &cls in row {
                    let c = cls as usize;
                    out.push(class_members[c][next[c]]);
                    next[c] += 1;
                }
            }
        }
    }
}

fn factorial(k: u64) -> u64 {
    let mut acc: u64 = 1;
    for i in 2..=k {
        acc = acc.saturating_mul(i);
    }
    acc
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Group patients by identical canonical law.
fn duplicate_classes(patients: &[ServiceDistribution], pool: &[u8]) -> Vec<u8> {
    let mut reps: Vec<&ServiceDistribution> = Vec::new();
    let mut classes = Vec::with_capacity(pool.len());
    for &j in pool {
        let d = &patients[j as usize];
        match reps.iter().position(|r| *r == d) {
            Some(c) => classes.push(c as u8),
            None => {
                reps.push(d);
                classes.push(reps.len() as u8 - 1);
            }
        }
    }
    classes
}

fn multiset_count(classes: &[u8]) -> u64 {
    let mut counts = std::collections::HashMap::new();
    for &c in classes {
        *counts.entry(c).or_insert(0u64) += 1;
    }
    let mut placed: u64 = 0;
    let mut result: u64 = 1;
    for (_, c) in counts {
        placed += c;
        result = result.saturating_mul(binomial(placed, c));
    }
    result
}

fn next_permutation(a: &mut [u8]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Distinct-arrangement count of the pool, cheap to compute up front.
fn pool_candidate_count(instance: &Instance, pool: &[u8]) -> u64 {
    let classes = duplicate_classes(instance.patients(), pool);
    let n_classes = classes.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    if n_classes == pool.len() {
        factorial(pool.len() as u64)
    } else {
        multiset_count(&classes)
    }
}

fn build_candidates(instance: &Instance, pool: Vec<u8>) -> Result<Candidates> {
    let classes = duplicate_classes(instance.patients(), &pool);
    let n_classes = classes.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    if n_classes == pool.len() {
        let count = factorial(pool.len() as u64);
        let mut sorted = pool;
        sorted.sort_unstable();
        return Ok(Candidates::Perms { pool: sorted, count });
    }
    let mut class_members: Vec<Vec<u8>> = vec![Vec::new(); n_classes];
    for (&j, &c) in pool.iter().zip(&classes) {
        class_members[c as usize].push(j);
    }
    for m in &mut class_members {
        m.sort_unstable();
    }
    let count = multiset_count(&classes);
    if count > BUDGET_VSHAPED {
        return Err(Error::CapExceeded {
            n: pool.len(),
            cap: BUDGET_VSHAPED as usize,
            what: format!("materializing {count} distinct arrangements"),
        });
    }
    let n = classes.len();
    let mut flat = Vec::with_capacity((count as usize) * n);
    let mut cur = classes;
    cur.sort_unstable();
    loop {
        flat.extend_from_slice(&cur);
        if !next_permutation(&mut cur) {
            break;
        }
    }
    debug_assert_eq!(flat.len(), (count as usize) * n);
    Ok(Candidates::Multiset { flat, n, count, class_members })
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

struct ChunkBest {
    objective: f64,
    seq: Vec<u8>,
    log: Vec<(Vec<u8>, f64)>,
    error: Option<Error>,
}

/// Exhaustive search over candidate sequences under `config`. Returns the
/// exact minimizer and the SVF comparison.
pub fn enumerate_optimal(instance: &Instance, config: &SearchConfig) -> Result<SearchReport> {
    let n = instance.n();
    let omega = config.omega.unwrap_or(instance.omega());
    let mut pruning_used = false;
    let mut pool: Vec<u8> = (0..n as u8).collect();
    let mut fixed_last: Option<u8> = None;
    if config.prune && n > 1 {
        let certified = check_dilation_order(instance.patients()).is_proven();
        if certified || config.force_prune {
            let svf_order = svf(instance);
            let last = svf_order.patient_in_slot(n - 1) as u8;
            pool.retain(|&j| j != last);
            fixed_last = Some(last);
            pruning_used = true;
        }
    }
    let planned = pool_candidate_count(instance, &pool);

    // The optimal-schedule rules solve per sequence; heuristic rules share
    // one patient-indexed schedule across all sequences.
    let per_seq_opt = matches!(
        config.rule,
        ScheduleRule::OptimalDiscrete { .. } | ScheduleRule::OptimalContinuous { .. }
    );
    let engine = if per_seq_opt {
        None
    } else {
        Some(Engine::build(instance, config.evaluator)?)
    };
    let fixed_schedule = if per_seq_opt {
        None
    } else {
        let (s, _) = schedule::resolve(instance, &svf(instance), omega, &config.rule)?;
        Some(match engine.as_ref().unwrap() {
            Engine::Discrete { step, .. } => schedule::round_to_grid(&s, *step),
            Engine::ExpMix { .. } => s,
        })
    };

    let budget = match &engine {
        Some(e) => e.budget(),
        None => BUDGET_DISCRETE,
    };
    if planned > budget && !config.force {
        return Err(Error::CapExceeded {
            n,
            cap: budget as usize,
            what: format!("enumeration over {planned} candidate sequences"),
        });
    }
    let candidates = build_candidates(instance, pool)?;
    let count = candidates.count();

    let want_log = config.log_sequences && count <= LOG_LIMIT;
    let objective_of = |seq: &Sequence| -> Result<f64> {
        match (&engine, &fixed_schedule) {
            (Some(e), Some(s)) => e.objective(seq, s, omega),
            _ => Ok(schedule::resolve(instance, seq, omega, &config.rule)?
                .1
                .expect("optimal rule returns its objective")),
        }
    };

    let chunks = exec::map_chunks(count, CHUNK, |range| {
        let mut best = ChunkBest {
            objective: f64::INFINITY,
            seq: Vec::new(),
            log: Vec::new(),
            error: None,
        };
        let mut slots: Vec<u8> = Vec::with_capacity(n);
        for r in range {
            candidates.fill(r, &mut slots);
            if let Some(last) = fixed_last {
                slots.push(last);
            }
            let seq = Sequence::new(slots.iter().map(|&j| j as usize).collect())
                .expect("candidate permutation");
            match objective_of(&seq) {
                Ok(obj) => {
                    if want_log {
                        best.log.push((slots.clone(), obj));
                    }
                    if obj < best.objective
                        || (obj == best.objective && slots < best.seq)
                    {
                        best.objective = obj;
                        best.seq = slots.clone();
                    }
                }
                Err(e) => {
                    best.error = Some(e);
                    break;
                }
            }
            if let Some(last) = fixed_last {
                debug_assert_eq!(slots.last(), Some(&last));
            }
            slots.clear();
        }
        best
    });

    let mut best_obj = f64::INFINITY;
    let mut best_seq: Vec<u8> = Vec::new();
    let mut log = if want_log { Some(Vec::new()) } else { None };
    for chunk in chunks {
        if let Some(e) = chunk.error {
            return Err(e);
        }
        if chunk.objective < best_obj || (chunk.objective == best_obj && chunk.seq < best_seq)
        {
            best_obj = chunk.objective;
            best_seq = chunk.seq;
        }
        if let Some(log) = log.as_mut() {
            for (s, o) in chunk.log {
                log.push((
                    Sequence::new(s.iter().map(|&j| j as usize).collect()).unwrap(),
                    o,
                ));
            }
        }
    }

    let svf_seq = svf(instance);
    let svf_objective = objective_of(&svf_seq)?;
    let best_seq = Sequence::new(best_seq.iter().map(|&j| j as usize).collect())?;
    Ok(SearchReport {
        ratio: ratio_of(svf_objective, best_obj),
        best_seq,
        best_objective: best_obj,
        svf_objective,
        sequences_evaluated: count,
        pruning_used,
        per_sequence_log: log,
    })
}

fn ratio_of(svf_cost: f64, best: f64) -> f64 {
    if best > 0.0 {
        svf_cost / best
    } else if svf_cost <= 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Restricted search over V-shaped sequences (variance profile nonincreasing
/// then nondecreasing) under the mean-based schedule; about `2^(n-1)`
/// candidates. The SVF sequence is itself V-shaped, so `ratio <= svf/best`
/// of the full search.
pub fn vshaped_best(instance: &Instance, omega: f64) -> Result<SearchReport> {
    vshaped_best_with(instance, omega, EngineChoice::Auto, false)
}

pub fn vshaped_best_with(
    instance: &Instance,
    omega: f64,
    evaluator: EngineChoice,
    force: bool,
) -> Result<SearchReport> {
    let n = instance.n();
    let order = svf(instance);
    let engine = Engine::build(instance, evaluator)?;
    let (sched, _) = schedule::resolve(instance, &order, omega, &ScheduleRule::MeanBased)?;
    let sched = match &engine {
        Engine::Discrete { step, .. } => schedule::round_to_grid(&sched, *step),
        Engine::ExpMix { .. } => sched,
    };
    let count: u64 = 1 << (n - 1);
    if count > BUDGET_VSHAPED && !force {
        return Err(Error::CapExceeded {
            n,
            cap: 23,
            what: "V-shaped enumeration".into(),
        });
    }
    // The minimum-variance patient sits where the arms meet; assigning the
    // other n-1 patients to the descending or ascending arm generates every
    // V shape exactly once (up to variance ties).
    let sorted: Vec<u8> = order.slots().iter().map(|&j| j as u8).collect();
    let chunks = exec::map_chunks(count, CHUNK, |range| {
        let mut best = ChunkBest {
            objective: f64::INFINITY,
            seq: Vec::new(),
            log: Vec::new(),
            error: None,
        };
        let mut slots: Vec<u8> = Vec::with_capacity(n);
        for mask in range {
            slots.clear();
            for i in (1..n).rev() {
                if mask & (1 << (i - 1)) != 0 {
                    slots.push(sorted[i]);
                }
            }
            slots.push(sorted[0]);
            for i in 1..n {
                if mask & (1 << (i - 1)) == 0 {
                    slots.push(sorted[i]);
                }
            }
            let seq = Sequence::new(slots.iter().map(|&j| j as usize).collect()).unwrap();
            match engine.objective(&seq, &sched, omega) {
                Ok(obj) => {
                    if obj < best.objective
                        || (obj == best.objective && slots < best.seq)
                    {
                        best.objective = obj;
                        best.seq = slots.clone();
                    }
                }
                Err(e) => {
                    best.error = Some(e);
                    break;
                }
            }
        }
        best
    });
    let mut best_obj = f64::INFINITY;
    let mut best_seq: Vec<u8> = Vec::new();
    for chunk in chunks {
        if let Some(e) = chunk.error {
            return Err(e);
        }
        if chunk.objective < best_obj || (chunk.objective == best_obj && chunk.seq < best_seq)
        {
            best_obj = chunk.objective;
            best_seq = chunk.seq;
        }
    }
    let svf_objective = engine.objective(&order, &sched, omega)?;
    Ok(SearchReport {
        ratio: ratio_of(svf_objective, best_obj),
        best_seq: Sequence::new(best_seq.iter().map(|&j| j as usize).collect())?,
        best_objective: best_obj,
        svf_objective,
        sequences_evaluated: count,
        pruning_used: false,
        per_sequence_log: None,
    })
}

/// Approximation ratio under the mean-based schedule (the instance weight
/// applies).
pub fn ratio_meanbased(instance: &Instance) -> Result<SearchReport> {
    enumerate_optimal(instance, &SearchConfig::mean_based())
}

/// Approximation ratio under per-sequence optimal schedules: the numerator
/// is the SVF sequence with its own optimal schedule, the denominator the
/// minimum over sequences of the per-sequence optimum.
pub fn ratio_optspaced(instance: &Instance, rule: ScheduleRule) -> Result<SearchReport> {
    if !matches!(
        rule,
        ScheduleRule::OptimalDiscrete { .. } | ScheduleRule::OptimalContinuous { .. }
    ) {
        return Err(Error::invalid(
            "ratio_optspaced needs an optimal-schedule rule",
        ));
    }
    enumerate_optimal(instance, &SearchConfig::with_rule(rule))
}
