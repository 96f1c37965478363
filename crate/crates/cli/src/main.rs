//! Command-line front end: instance I/O, ad-hoc evaluation, sequence
//! search, schedule optimization, ratio and bound computation, and the
//! `reproduce` harness that regenerates the bundled CSV studies.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use svf_core::bounds;
use svf_core::error::Error as CoreError;
use svf_core::experiments as exp;
use svf_core::io as inst_io;
use svf_core::lindley::{
    evaluate_exact_discrete, evaluate_exact_expmix, evaluate_mc, has_duplicate_rates,
    session_identity_residual, CostBreakdown, Instance, Sequence,
};
use svf_core::schedule::{self, AlphaChoice, ScheduleRule};
use svf_core::sequence::{
    self, enumerate_optimal, infer_grid_step, EngineChoice, SearchConfig,
};

const EXIT_VALIDATION: i32 = 2;
const EXIT_CAP: i32 = 3;

#[derive(Parser)]
#[command(
    name = "svf-bench",
    about = "Evaluate, optimize and bound stochastic appointment schedules",
    version
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Instance file (JSON).
    #[arg(short = 'i', long = "instance")]
    instance: PathBuf,
    /// Override the instance weight omega in (0,1].
    #[arg(long)]
    omega: Option<f64>,
    /// Write the effective instance back out (round-trip check / archival).
    #[arg(long)]
    dump_instance: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ScheduleArgs {
    /// Schedule rule.
    #[arg(long, value_enum, default_value_t = RuleKind::Mean)]
    schedule: RuleKind,
    /// Slack multiplier: "auto" or a number (sigma-slack / lognormal-mult).
    #[arg(long, default_value = "auto")]
    alpha: String,
    /// Grid step for exact discrete evaluation and discrete optimization.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Tolerance for continuous schedule optimization.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RuleKind {
    Mean,
    SigmaSlack,
    LognormalMult,
    OptDiscrete,
    OptContinuous,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EvaluatorKind {
    Auto,
    Expmix,
    Discrete,
    Mc,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RatioMode {
    Mean,
    Opt,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BoundsWhich {
    All,
    K,
    T5,
    T9,
    Envelope,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Study {
    Table3,
    Table4,
    Figure1,
    Example2,
    Example3,
    Cayirli,
    Asymptotic,
    Twogroup,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the cost of a sequence and schedule on an instance.
    Eval {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Sequence as 1-based patient ids, e.g. "2,1,3" (default: SVF).
        #[arg(long)]
        seq: Option<String>,
        #[arg(long, value_enum, default_value_t = EvaluatorKind::Auto)]
        evaluator: EvaluatorKind,
        /// Monte Carlo replications (with --evaluator mc).
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = exp::DEFAULT_SEED)]
        seed: u64,
        /// Write the per-slot breakdown as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the smallest-variance-first order of an instance.
    Svf {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Exhaustive sequence search with SVF comparison.
    Search {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Disable largest-variance-last pruning.
        #[arg(long)]
        no_prune: bool,
        /// Prune even without a dilation certificate.
        #[arg(long)]
        force_prune: bool,
        /// Override the enumeration budget.
        #[arg(long)]
        force: bool,
        /// Restrict the search to V-shaped sequences (mean-based only).
        #[arg(long)]
        vshaped: bool,
    },
    /// Optimize the schedule for a fixed sequence.
    ScheduleOpt {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        #[arg(long)]
        seq: Option<String>,
    },
    /// Approximation ratio of SVF: mean-based or optimally spaced.
    Ratio {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = RatioMode::Mean)]
        mode: RatioMode,
        #[arg(long)]
        grid_step: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        force: bool,
    },
    /// Compute ratio bounds for an instance.
    Bounds {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = BoundsWhich::All)]
        which: BoundsWhich,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = exp::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a bundled study as CSV (plus a stdout mirror).
    Reproduce {
        #[arg(value_enum)]
        study: Study,
        /// Also run the extended (minutes-to-hours) scope.
        #[arg(long)]
        extended: bool,
        #[arg(long, default_value_t = exp::DEFAULT_SEED)]
        seed: u64,
        /// Replications for Monte Carlo studies (default per study).
        #[arg(long)]
        samples: Option<u64>,
        /// Output directory (default: $SVF_BENCH_OUT or ./out).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<CoreError>() {
                Some(CoreError::CapExceeded { .. }) => EXIT_CAP,
                Some(_) => EXIT_VALIDATION,
                None => EXIT_VALIDATION,
            };
            std::process::exit(code);
        }
    }
}

#[cfg(feature = "parallel")]
fn init_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads(threads: Option<usize>) {
    if threads.is_some() {
        eprintln!("note: built without the parallel feature; --threads ignored");
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Eval { instance, schedule, seq, evaluator, samples, seed, out } => {
            cmd_eval(instance, schedule, seq, evaluator, samples, seed, out)
        }
        Command::Svf { instance } => cmd_svf(instance),
        Command::Search { instance, schedule, no_prune, force_prune, force, vshaped } => {
            cmd_search(instance, schedule, no_prune, force_prune, force, vshaped)
        }
        Command::ScheduleOpt { instance, schedule, seq } => {
            cmd_schedule_opt(instance, schedule, seq)
        }
        Command::Ratio { instance, mode, grid_step, tol, force } => {
            cmd_ratio(instance, mode, grid_step, tol, force)
        }
        Command::Bounds { instance, which, samples, seed, out } => {
            cmd_bounds(instance, which, samples, seed, out)
        }
        Command::Reproduce { study, extended, seed, samples, out_dir } => {
            cmd_reproduce(study, extended, seed, samples, out_dir)
        }
    }
}

fn load_instance(args: &InstanceArgs) -> anyhow::Result<Instance> {
    let mut inst = inst_io::read_instance(&args.instance)
        .with_context(|| format!("reading {}", args.instance.display()))?;
    if let Some(w) = args.omega {
        inst = inst.with_omega(w)?;
    }
    if let Some(path) = &args.dump_instance {
        inst_io::write_instance(path, &inst)?;
        println!("instance dumped to {}", path.display());
    }
    Ok(inst)
}

fn parse_rule(args: &ScheduleArgs, omega: f64) -> anyhow::Result<ScheduleRule> {
    let alpha = match args.alpha.as_str() {
        "auto" => AlphaChoice::Auto,
        v => AlphaChoice::Fixed(
            v.parse::<f64>()
                .map_err(|_| anyhow!("--alpha must be \"auto\" or a number, got {v:?}"))?,
        ),
    };
    Ok(match args.schedule {
        RuleKind::Mean => ScheduleRule::MeanBased,
        RuleKind::SigmaSlack => ScheduleRule::SigmaSlack(alpha),
        RuleKind::LognormalMult => ScheduleRule::LognormalMultiplicative(alpha),
        RuleKind::OptDiscrete => {
            refuse_degenerate_optimization(omega)?;
            ScheduleRule::OptimalDiscrete {
                grid_step: args.grid_step.ok_or_else(|| {
                    anyhow!("--schedule opt-discrete needs --grid-step")
                })?,
            }
        }
        RuleKind::OptContinuous => {
            refuse_degenerate_optimization(omega)?;
            ScheduleRule::OptimalContinuous { tol: args.tol }
        }
    })
}

/// omega = 1 makes schedule optimization degenerate (all-zero slots win).
fn refuse_degenerate_optimization(omega: f64) -> anyhow::Result<()> {
    if omega >= 1.0 {
        bail!("schedule optimization with omega = 1 is degenerate (zero slots); pick omega < 1");
    }
    Ok(())
}

fn parse_seq(inst: &Instance, seq: &Option<String>) -> anyhow::Result<Sequence> {
    Ok(match seq {
        Some(s) => {
            let parsed = Sequence::parse_one_based(s)?;
            if parsed.n() != inst.n() {
                bail!("sequence covers {} patients, instance has {}", parsed.n(), inst.n());
            }
            parsed
        }
        None => sequence::svf(inst),
    })
}

fn print_breakdown(cb: &CostBreakdown, omega: f64) {
    println!("slot  EW            EI");
    for (i, (w, idle)) in cb.ew.iter().zip(&cb.ei).enumerate() {
        println!("{:<5} {:<13.9} {:<13.9}", i + 1, w, idle);
    }
    println!("total wait: {:.9}", cb.total_wait);
    println!("total idle: {:.9}", cb.total_idle);
    println!("objective (omega={omega}): {:.9}", cb.objective);
}

fn cmd_eval(
    inst_args: InstanceArgs,
    sched_args: ScheduleArgs,
    seq: Option<String>,
    evaluator: EvaluatorKind,
    samples: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let inst = load_instance(&inst_args)?;
    let omega = inst.omega();
    let rule = parse_rule(&sched_args, omega)?;
    let seq = parse_seq(&inst, &seq)?;
    let (sched, _) = schedule::resolve(&inst, &seq, omega, &rule)?;
    let cb = match evaluator {
        EvaluatorKind::Mc => {
            let mc = evaluate_mc(&inst, &seq, &sched, samples, seed)?;
            println!("seed: {seed}  samples: {samples}");
            println!("objective stderr: {:.3e}", mc.stderr.objective);
            mc.mean
        }
        EvaluatorKind::Expmix => {
            warn_duplicate_rates(&inst);
            evaluate_exact_expmix(&inst, &seq, &sched)?
        }
        EvaluatorKind::Discrete => {
            let step = resolve_grid(&inst, sched_args.grid_step)?;
            evaluate_exact_discrete(&inst, &seq, &schedule::round_to_grid(&sched, step), step)?
        }
        EvaluatorKind::Auto => {
            if svf_core::lindley::has_exponential_services(&inst) {
                warn_duplicate_rates(&inst);
                evaluate_exact_expmix(&inst, &seq, &sched)?
            } else {
                let step = resolve_grid(&inst, sched_args.grid_step)?;
                evaluate_exact_discrete(
                    &inst,
                    &seq,
                    &schedule::round_to_grid(&sched, step),
                    step,
                )?
            }
        }
    };
    println!("sequence: {seq}");
    print_breakdown(&cb, omega);
    let residual = session_identity_residual(&cb, &inst, &seq, &sched);
    println!("session identity residual: {residual:.3e}");
    if let Some(path) = out {
        std::fs::write(&path, cb.to_csv())?;
        println!("breakdown written to {}", path.display());
    }
    Ok(())
}

fn warn_duplicate_rates(inst: &Instance) {
    if has_duplicate_rates(inst) {
        eprintln!("note: duplicate exponential rates perturbed by a relative 1e-9");
    }
}

fn resolve_grid(inst: &Instance, flag: Option<f64>) -> anyhow::Result<f64> {
    match flag {
        Some(s) if s > 0.0 => Ok(s),
        Some(s) => bail!("--grid-step must be > 0, got {s}"),
        None => infer_grid_step(inst.patients())
            .ok_or_else(|| anyhow!("no common grid inferable; pass --grid-step")),
    }
}

fn cmd_svf(inst_args: InstanceArgs) -> anyhow::Result<()> {
    let inst = load_instance(&inst_args)?;
    let order = sequence::svf(&inst);
    println!("svf sequence: {order}");
    let vars = inst.variances();
    for (slot, &j) in order.slots().iter().enumerate() {
        println!("slot {:<3} patient {:<3} variance {:.6}", slot + 1, j + 1, vars[j]);
    }
    Ok(())
}

fn cmd_search(
    inst_args: InstanceArgs,
    sched_args: ScheduleArgs,
    no_prune: bool,
    force_prune: bool,
    force: bool,
    vshaped: bool,
) -> anyhow::Result<()> {
    let inst = load_instance(&inst_args)?;
    let omega = inst.omega();
    let engine = match sched_args.grid_step {
        Some(step) => EngineChoice::Discrete { grid_step: step },
        None => EngineChoice::Auto,
    };
    let report = if vshaped {
        if sched_args.schedule != RuleKind::Mean {
            bail!("--vshaped applies to the mean-based schedule only");
        }
        sequence::vshaped_best_with(&inst, omega, engine, force)?
    } else {
        let rule = parse_rule(&sched_args, omega)?;
        let mut cfg = SearchConfig::with_rule(rule);
        cfg.prune = !no_prune;
        cfg.force_prune = force_prune;
        cfg.force = force;
        cfg.evaluator = engine;
        enumerate_optimal(&inst, &cfg)?
    };
    println!("candidates evaluated: {}", report.sequences_evaluated);
    println!("pruning used: {}", report.pruning_used);
    println!("best sequence: {}", report.best_seq);
    println!("best objective: {:.9}", report.best_objective);
    println!("svf objective:  {:.9}", report.svf_objective);
    println!("ratio: {:.6}", report.ratio);
    Ok(())
}

fn cmd_schedule_opt(
    inst_args: InstanceArgs,
    sched_args: ScheduleArgs,
    seq: Option<String>,
) -> anyhow::Result<()> {
    let inst = load_instance(&inst_args)?;
    let omega = inst.omega();
    refuse_degenerate_optimization(omega)?;
    let seq = parse_seq(&inst, &seq)?;
    let rule = match parse_rule(&sched_args, omega)? {
        r @ (ScheduleRule::OptimalDiscrete { .. } | ScheduleRule::OptimalContinuous { .. }) => r,
        _ => bail!("schedule-opt needs --schedule opt-discrete or opt-continuous"),
    };
    let (sched, obj) = schedule::resolve(&inst, &seq, omega, &rule)?;
    println!("sequence: {seq}");
    println!("objective: {:.9}", obj.expect("optimal rule"));
    println!("schedule (per patient):");
    for (j, x) in sched.entries().iter().enumerate() {
        println!("  patient {:<3} x = {:.6}", j + 1, x);
    }
    Ok(())
}

fn cmd_ratio(
    inst_args: InstanceArgs,
    mode: RatioMode,
    grid_step: Option<f64>,
    tol: f64,
    force: bool,
) -> anyhow::Result<()> {
    let inst = load_instance(&inst_args)?;
    let report = match mode {
        RatioMode::Mean => {
            let mut cfg = SearchConfig::mean_based();
            cfg.force = force;
            if let Some(step) = grid_step {
                cfg.evaluator = EngineChoice::Discrete { grid_step: step };
            }
            enumerate_optimal(&inst, &cfg)?
        }
        RatioMode::Opt => {
            refuse_degenerate_optimization(inst.omega())?;
            let rule = if svf_core::lindley::has_exponential_services(&inst) {
                ScheduleRule::OptimalContinuous { tol }
            } else {
                ScheduleRule::OptimalDiscrete { grid_step: resolve_grid(&inst, grid_step)? }
            };
            let mut cfg = SearchConfig::with_rule(rule);
            cfg.force = force;
            enumerate_optimal(&inst, &cfg)?
        }
    };
    println!("best sequence: {}", report.best_seq);
    println!("best cost: {:.9}", report.best_objective);
    println!("svf cost:  {:.9}", report.svf_objective);
    println!("ratio: {:.6}", report.ratio);
    Ok(())
}

fn cmd_bounds(
    inst_args: InstanceArgs,
    which: BoundsWhich,
    samples: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let inst = load_instance(&inst_args)?;
    let omega = inst.omega();
    let mut reports: Vec<bounds::BoundReport> = Vec::new();
    fn note(
        reports: &mut Vec<bounds::BoundReport>,
        r: svf_core::error::Result<bounds::BoundReport>,
        what: &str,
    ) {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => eprintln!("note: {what} not applicable: {e}"),
        }
    }
    if matches!(which, BoundsWhich::All | BoundsWhich::Envelope) {
        reports.push(bounds::theorem12_envelope(&inst));
    }
    if matches!(which, BoundsWhich::All | BoundsWhich::K) {
        if omega < 1.0 {
            note(
                &mut reports,
                bounds::location_scale_shape(&inst)
                    .and_then(|shape| bounds::k_constant(&shape, omega)),
                "K constant",
            );
            note(&mut reports, bounds::newsvendor_lower(&inst, omega), "newsvendor lower bound");
            note(&mut reports, bounds::svf_upper(&inst, omega), "slack upper bound");
        } else {
            eprintln!("note: K-type bounds need omega < 1");
        }
    }
    if matches!(which, BoundsWhich::All | BoundsWhich::T5) {
        println!("seed: {seed}  samples: {samples}");
        note(&mut reports, bounds::theorem5_bound(&inst, samples, seed), "asymmetry-split bound");
    }
    if matches!(which, BoundsWhich::All | BoundsWhich::T9) {
        if omega < 1.0 {
            note(&mut reports, bounds::theorem9_bound(&inst, omega), "lognormal multiplicative bound");
        } else {
            eprintln!("note: the multiplicative bound needs omega < 1");
        }
    }
    println!("name,value,stderr,method,assumptions");
    for r in &reports {
        println!("{}", r.csv_row());
    }
    if let Some(path) = out {
        let mut text = String::from("name,value,stderr,method,assumptions\n");
        for r in &reports {
            text.push_str(&r.csv_row());
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        println!("bounds written to {}", path.display());
    }
    Ok(())
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("SVF_BENCH_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn cmd_reproduce(
    study: Study,
    extended: bool,
    seed: u64,
    samples: Option<u64>,
    out_flag: Option<PathBuf>,
) -> anyhow::Result<()> {
    let dir = out_dir(out_flag);
    match study {
        Study::Table3 => {
            let n_max = if extended { 11 } else { 9 };
            let rows = exp::run_table3(n_max)?;
            print_table(&rows);
            let path = exp::write_table(&dir, "table3.csv", &rows, &format!("cap={n_max}"))?;
            println!("written {}", path.display());
            if extended {
                println!("extended V-shaped run at n=23 (about 4.2M candidates)...");
                let inst = exp::generate(&exp::NamedFamily::ExpLinear { n: 23 })?;
                let v = sequence::vshaped_best(&inst, 1.0)?;
                println!(
                    "n=23 V-shaped: best {:.4}  svf {:.4}  svf/best {:.4}",
                    v.best_objective, v.svf_objective, v.ratio
                );
            }
        }
        Study::Table4 => {
            let n_max = if extended { 10 } else { 7 };
            let rows = exp::run_table4(n_max)?;
            print_table(&rows);
            let path = exp::write_table(
                &dir,
                "table4.csv",
                &rows,
                &format!("cap={n_max}, grid={}", exp::TABLE4_GRID_STEP),
            )?;
            println!("written {}", path.display());
        }
        Study::Figure1 => {
            let grid = exp::figure1_default_grid();
            let rows = exp::run_figure1(&grid)?;
            for r in &rows {
                println!("p={:.3}  rho1={:.5}", r.p, r.rho1);
            }
            let path = exp::write_figure1(&dir, &rows)?;
            println!("written {}", path.display());
        }
        Study::Example2 => {
            let s = exp::run_example2()?;
            println!(
                "svf {:.4}  swapped {:.4}  ratio lower bound {:.4}",
                s.svf_cost, s.swapped_cost, s.ratio_lower_bound
            );
            if extended {
                println!("extended run (n=50000, m=500, K=5000); this takes a while...");
                let big = exp::run_example2_sized(50_000, 500.0, 5000.0)?;
                println!(
                    "extended: svf {:.1}  swapped {:.1}  ratio lower bound {:.4} (unvalidated)",
                    big.svf_cost, big.swapped_cost, big.ratio_lower_bound
                );
            }
            let path = exp::write_example2(&dir, &s)?;
            println!("written {}", path.display());
        }
        Study::Example3 => {
            let s = exp::run_example3()?;
            println!(
                "svf-optimal {:.6}  best {:.6}  ratio {:.4}  best sequence {}",
                s.svf_optimal_cost, s.best_cost, s.ratio, s.best_sequence
            );
            let path = exp::write_example3(&dir, &s)?;
            println!("written {}", path.display());
        }
        Study::Cayirli => {
            let samples = samples.unwrap_or(1_000_000);
            println!("seed: {seed}  samples: {samples}");
            let b = exp::run_cayirli_bounds(samples, seed)?;
            println!(
                "asymmetry-split max: {:.4} (stderr {:.1e})",
                b.split_max.value,
                b.split_max.stderr.unwrap_or(0.0)
            );
            println!("multiplicative max: {:.4}", b.multiplicative_max.value);
            let path = exp::write_cayirli(&dir, &b, seed)?;
            println!("written {}", path.display());
        }
        Study::Asymptotic => {
            let samples = samples.unwrap_or(20_000);
            println!("seed: {seed}  samples: {samples}");
            let ks: &[usize] = if extended {
                &[100, 500, 1000, 5000, 20000]
            } else {
                &[100, 500, 1000, 5000]
            };
            let mut rows = exp::run_asymptotic(ks, samples, seed)?;
            rows.push(exp::asymptotic_degenerate_row(1000));
            for r in &rows {
                println!(
                    "family={} k={} normalized={:.4} (stderr {:.1e})",
                    r.family, r.k, r.normalized_ratio, r.stderr
                );
            }
            if extended {
                println!("extended flipped-lognormal run (n=10, two pruned 9! searches)...");
                let (straight, flipped) = exp::run_flipped_lognormal()?;
                for r in [&straight, &flipped] {
                    println!(
                        "{}: ratio {:.4} (opt {:.3}, svf {:.3})",
                        r.optimal_sequence, r.ratio, r.optimal_cost, r.svf_cost
                    );
                }
            }
            let path = exp::write_asymptotic(&dir, &rows, seed)?;
            println!("written {}", path.display());
        }
        Study::Twogroup => {
            let samples = samples.unwrap_or(2_000);
            println!("seed: {seed}  samples: {samples}");
            let s = exp::run_twogroup(
                100.0,
                std::f64::consts::SQRT_2 / 2.0 + 3f64.sqrt(),
                20_000,
                samples,
                seed,
            )?;
            println!(
                "svf {:.4} (se {:.1e})  mixed {:.4} (se {:.1e})",
                s.svf_cost, s.svf_stderr, s.mixed_cost, s.mixed_stderr
            );
            println!(
                "gap {:.4} (se {:.1e}, {:.1} sigma)  group2 max wait {}  kingman(group1) {:.4}",
                s.gap,
                s.gap_stderr,
                s.gap / s.gap_stderr,
                s.group2_max_wait,
                s.kingman_group1
            );
            let path = exp::write_twogroup(&dir, &s, seed)?;
            println!("written {}", path.display());
        }
    }
    Ok(())
}

fn print_table(rows: &[exp::TableRow]) {
    println!(
        "{:<4} {:<26} {:>12} {:>12} {:>8}",
        "n", "optimal sequence", "optimal", "svf", "ratio"
    );
    for r in rows {
        println!(
            "{:<4} {:<26} {:>12.4} {:>12.4} {:>8.4}",
            r.n, r.optimal_sequence, r.optimal_cost, r.svf_cost, r.ratio
        );
    }
}
