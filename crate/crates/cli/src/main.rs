//! `bboe` command-line harness: bundle generation, single plans, batch
//! benchmarks and ablation sweeps.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bboe_core::baselines::MonteCarloParams;
use bboe_core::bench::{
    ablation_trials, bench_trials, k_bias_percent, run_batch, run_planner, write_csv, AblationAxis, BenchReport, PlanSettings,
    PlannerId, TrialResult, TrialSpec, WorldSeedMode, DEFAULT_CANDIDATES,
};
use bboe_core::bundle::{generate_bundle, load_bundle, save_bundle, EdgeBundle};
use bboe_core::dynamics::{DimKind, SystemId, SystemSpec, DEFAULT_DT};
use bboe_core::planner::PlannerConfig;
use bboe_core::world::{generate_scenario_for, Level, World};

const DEFAULT_EDGES: usize = 2000;

#[derive(Parser)]
#[command(name = "bboe", version, about = "Bundle-of-edges kinodynamic planner and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an edge bundle and write it to disk.
    BundleGenerate(GenerateArgs),
    /// Run one planner on one scenario.
    Plan(PlanArgs),
    /// Run planners over seeded scenarios and report aggregates.
    Bench(BenchArgs),
    /// Sweep one parameter with everything else fixed.
    Ablate(AblateArgs),
    /// Write a generated scenario as JSON.
    Scenario(ScenarioArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "diff-drive")]
    system: SystemId,
    #[arg(long, default_value_t = 10_000)]
    edges: usize,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; defaults to `<system>-<edges>.bboe` in the bundle directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "BBOE_BUNDLE_DIR")]
    bundle_dir: Option<PathBuf>,
}

/// Where the edge bundle comes from: an explicit file, the bundle directory,
/// or in-memory generation.
#[derive(Args)]
struct BundleArgs {
    #[arg(long, default_value = "diff-drive")]
    system: SystemId,
    #[arg(long, default_value_t = DEFAULT_EDGES)]
    edges: usize,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Seed used when the bundle is generated in memory.
    #[arg(long, default_value_t = 0)]
    bundle_seed: u64,
    #[arg(long, env = "BBOE_BUNDLE_DIR")]
    bundle_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlannerArgs {
    /// Exploitation k_bias for bare `bboe` / `uni-bboe` ids.
    #[arg(long, default_value_t = 0.85)]
    k_bias: f64,
    #[arg(long)]
    skip_n: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta_hr: Option<f64>,
    /// Wall-clock budget per run. Defaults to 60 s, or none when only
    /// `--max-iter` is given.
    #[arg(long)]
    budget_s: Option<f64>,
    #[arg(long)]
    max_iter: Option<u64>,
    /// Online rollouts per expansion for rrt and gbrrt.
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    goal_bias: Option<f64>,
    /// Candidate edges per expansion for the no-strategy variants.
    #[arg(long, default_value_t = DEFAULT_CANDIDATES)]
    candidates: usize,
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario JSON file; otherwise a scenario is generated from
    /// `--difficulty` and `--seed`.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value = "easy")]
    difficulty: Level,
    /// Scenario seed and planner seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "bboe")]
    planner: String,
    /// Write the solution waypoints as CSV (t followed by state columns).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    bundle: BundleArgs,
    #[command(flatten)]
    planner_args: PlannerArgs,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long, value_delimiter = ',', default_value = "easy,medium,hard,very-hard")]
    difficulty: Vec<Level>,
    #[arg(long, value_delimiter = ',')]
    planner: Vec<String>,
    /// Trials per (planner, difficulty); trial seeds run from `--seed`.
    #[arg(long, default_value_t = 20)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "per-trial")]
    world_seed: WorldSeedMode,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV file for the raw trial rows.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    bundle: BundleArgs,
    #[command(flatten)]
    planner_args: PlannerArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    batch: BatchArgs,
}

#[derive(Args)]
struct AblateArgs {
    /// One of skip_n, k_bias, variant.
    #[arg(long)]
    axis: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[command(flatten)]
    batch: BatchArgs,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, default_value = "diff-drive")]
    system: SystemId,
    #[arg(long, default_value = "easy")]
    difficulty: Level,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Single-plan run that found no path.
    NoPath,
    /// Bad input, configuration or I/O.
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BundleGenerate(a) => cmd_bundle_generate(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Scenario(a) => cmd_scenario(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NoPath) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn bundle_file_name(system: SystemId, edges: usize) -> String {
    format!("{system}-{edges}.bboe")
}

fn cmd_bundle_generate(a: GenerateArgs) -> Result<(), Failure> {
    if a.edges == 0 {
        return Err(Failure::Usage("--edges must be at least 1".into()));
    }
    let out = match (a.out, a.bundle_dir) {
        (Some(p), _) => p,
        (None, Some(dir)) => dir.join(bundle_file_name(a.system, a.edges)),
        (None, None) => PathBuf::from(bundle_file_name(a.system, a.edges)),
    };
    let t0 = Instant::now();
    let bundle = generate_bundle(&SystemSpec::for_id(a.system), a.edges, a.dt, a.seed)?;
    let gen_s = t0.elapsed().as_secs_f64();
    save_bundle(&bundle, &out)?;
    let back = load_bundle(&out)?;
    if back != bundle {
        return Err(Failure::Usage(format!("{} did not read back identically", out.display())));
    }
    println!("wrote {} edges to {} (generated in {gen_s:.3} s)", bundle.len(), out.display());
    Ok(())
}

impl BundleArgs {
    fn resolve(&self) -> Result<EdgeBundle, Failure> {
        let t0 = Instant::now();
        let from_dir = self.bundle_dir.as_ref().map(|d| d.join(bundle_file_name(self.system, self.edges))).filter(|p| p.is_file());
        let (bundle, how) = match self.bundle.clone().or(from_dir) {
            Some(path) => (load_bundle(&path)?, format!("loaded {}", path.display())),
            None => {
                if self.edges == 0 {
                    return Err(Failure::Usage("--edges must be at least 1".into()));
                }
                let b = generate_bundle(&SystemSpec::for_id(self.system), self.edges, self.dt, self.bundle_seed)?;
                (b, format!("generated {} edges", self.edges))
            }
        };
        if bundle.system.id != self.system {
            return Err(Failure::Usage(format!("bundle system {} does not match --system {}", bundle.system.id, self.system)));
        }
        eprintln!("bundle: {how} in {:.3} s", t0.elapsed().as_secs_f64());
        Ok(bundle)
    }
}

impl PlannerArgs {
    fn settings(&self) -> Result<PlanSettings, Failure> {
        let mut config = PlannerConfig::default();
        if let Some(v) = self.skip_n {
            config.skip_n = v;
        }
        if let Some(v) = self.theta {
            config.theta = v;
        }
        if let Some(v) = self.gamma {
            config.gamma = v;
        }
        if let Some(v) = self.delta_hr {
            config.delta_hr = v;
        }
        if let Some(v) = self.max_iter {
            config.max_iter = v;
            config.time_budget = None;
        }
        if let Some(v) = self.budget_s {
            config.time_budget = Some(v);
        }
        config.validate()?;
        let mut monte_carlo = MonteCarloParams::default();
        if let Some(v) = self.rollouts {
            monte_carlo.prop_attempts_per_expand = v;
        }
        if let Some(v) = self.goal_bias {
            monte_carlo.goal_bias = v;
        }
        monte_carlo.validate()?;
        if self.candidates == 0 {
            return Err(Failure::Usage("--candidates must be at least 1".into()));
        }
        Ok(PlanSettings { config, monte_carlo, candidates: self.candidates })
    }

    fn planner(&self, s: &str) -> Result<PlannerId, Failure> {
        Ok(PlannerId::parse_with_default(s, k_bias_percent(self.k_bias)?)?)
    }
}

fn write_rows(rows: &[TrialResult], out: Option<&Path>) -> Result<(), Failure> {
    if let Some(path) = out {
        let file = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        write_csv(rows, BufWriter::new(file)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_plan(a: PlanArgs) -> Result<(), Failure> {
    let settings = a.planner_args.settings()?;
    let id = a.planner_args.planner(&a.planner)?;
    let (world, label) = match &a.scenario {
        Some(path) => (World::load(path)?, "custom".to_string()),
        None => (generate_scenario_for(a.bundle.system, a.difficulty.difficulty(), a.seed)?, a.difficulty.name().to_string()),
    };
    let bundle = if id.needs_bundle() {
        let b = a.bundle.resolve()?;
        if b.system.id != world.system {
            return Err(Failure::Usage(format!("bundle system {} does not match world system {}", b.system.id, world.system)));
        }
        Some(b)
    } else {
        None
    };
    let mut settings = settings;
    settings.config.seed = a.seed;
    let outcome = run_planner(id, &settings, &world, bundle.as_ref())?;
    let row = TrialResult::from_outcome(&id.to_string(), &label, a.seed, &Ok(outcome.clone()));
    write_csv(std::slice::from_ref(&row), io::stdout().lock())?;
    let Some(path) = &outcome.path else {
        return Err(Failure::NoPath);
    };
    if let Some(out) = &a.out {
        let spec = SystemSpec::for_id(world.system);
        let mut w = BufWriter::new(File::create(out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?);
        let names: Vec<String> = spec
            .dims
            .iter()
            .enumerate()
            .map(|(i, d)| match d {
                DimKind::X => "x".to_string(),
                DimKind::Y => "y".to_string(),
                DimKind::Heading => "theta".to_string(),
                _ => format!("s{i}"),
            })
            .collect();
        writeln!(w, "t,{}", names.join(","))?;
        for (t, s) in path.timed_waypoints(bundle.as_ref()) {
            let vals: Vec<String> = s.as_slice().iter().map(f64::to_string).collect();
            writeln!(w, "{t},{}", vals.join(","))?;
        }
        w.flush()?;
    }
    Ok(())
}

impl BatchArgs {
    fn planners(&self) -> Result<Vec<PlannerId>, Failure> {
        let ids: Vec<&String> = self.planner.iter().filter(|s| !s.is_empty()).collect();
        if ids.is_empty() {
            return Err(Failure::Usage(format!("at least one --planner is required (valid: {})", PlannerId::VALID)));
        }
        ids.into_iter().map(|s| self.planner_args.planner(s)).collect()
    }

    fn run(&self, trials: Vec<TrialSpec>) -> Result<(), Failure> {
        if trials.is_empty() {
            return Err(Failure::Usage("--trials must be at least 1".into()));
        }
        let bundle = if trials.iter().any(|t| t.planner.needs_bundle()) { Some(self.bundle.resolve()?) } else { None };
        let budget = trials[0].settings.config.time_budget.map_or("none".into(), |b| format!("{b} s"));
        println!(
            "{} trials, world seeds {}, budget {budget}, jobs {}",
            trials.len(),
            self.world_seed,
            self.jobs.max(1)
        );
        let rows = run_batch(&trials, self.bundle.system, bundle.as_ref(), self.jobs);
        write_rows(&rows, self.out.as_deref())?;
        print!("{}", BenchReport::from_rows(rows).table());
        Ok(())
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let b = &a.batch;
    let planners = b.planners()?;
    let settings = b.planner_args.settings()?;
    let trials = bench_trials(&planners, &b.difficulty, b.trials, b.seed, b.world_seed, &settings)?;
    b.run(trials)
}

fn cmd_ablate(a: AblateArgs) -> Result<(), Failure> {
    let axis: AblationAxis = a.axis.parse()?;
    let b = &a.batch;
    let planners = if axis == AblationAxis::Variant {
        Vec::new()
    } else if b.planner.is_empty() {
        vec![b.planner_args.planner("bboe")?]
    } else {
        b.planners()?
    };
    let settings = b.planner_args.settings()?;
    let trials = ablation_trials(axis, &a.values, &planners, &b.difficulty, b.trials, b.seed, b.world_seed, &settings)?;
    b.run(trials)
}

fn cmd_scenario(a: ScenarioArgs) -> Result<(), Failure> {
    let world = generate_scenario_for(a.system, a.difficulty.difficulty(), a.seed)?;
    match a.out {
        Some(path) => world.save(&path)?,
        None => println!("{}", world.to_json()),
    }
    Ok(())
}
