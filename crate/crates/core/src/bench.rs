//! Batch benchmarking: planner ids, trial rows, aggregate reports and CSV I/O.

use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{plan_ablation, plan_gbrrt, plan_rrt, AblationVariant, MonteCarloParams};
use crate::bundle::EdgeBundle;
use crate::dynamics::SystemId;
use crate::error::{BenchError, ConfigError};
use crate::planner::{plan_bboe, PlanReport, PlannerConfig};
use crate::world::{generate_scenario_for, Level, World};

/// Default number of candidate edges for the no-strategy ablations.
pub const DEFAULT_CANDIDATES: usize = 100;

pub const CSV_COLUMNS: [&str; 8] = ["planner", "difficulty", "seed", "success", "time_s", "cost_m", "iterations", "prop_attempts"];
pub const AXIS_COLUMN: &str = "axis_value";

/// Planner selector. `k_bias` values are held as whole percentages so ids
/// print and parse without rounding drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlannerId {
    Bboe { k_bias_pct: u32 },
    Rrt,
    Gbrrt,
    UniBboe { k_bias_pct: u32 },
    UniNoStrategy,
    BiNoStrategy,
}

impl PlannerId {
    pub const VALID: &'static str = "bboe-<pct>, rrt, gbrrt, uni-bboe-<pct>, uni-nostrategy, bi-nostrategy";

    pub fn needs_bundle(self) -> bool {
        !matches!(self, PlannerId::Rrt | PlannerId::Gbrrt)
    }

    /// Replaces the `k_bias` of a biased variant; other ids are returned unchanged.
    pub fn with_k_bias(self, k_bias_pct: u32) -> Self {
        match self {
            PlannerId::Bboe { .. } => PlannerId::Bboe { k_bias_pct },
            PlannerId::UniBboe { .. } => PlannerId::UniBboe { k_bias_pct },
            other => other,
        }
    }

    /// Parses an id, letting bare `bboe` / `uni-bboe` take `default_pct`.
    pub fn parse_with_default(s: &str, default_pct: u32) -> Result<Self, BenchError> {
        match s {
            "bboe" => Ok(PlannerId::Bboe { k_bias_pct: default_pct }),
            "uni-bboe" => Ok(PlannerId::UniBboe { k_bias_pct: default_pct }),
            _ => s.parse(),
        }
    }
}

impl fmt::Display for PlannerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlannerId::Bboe { k_bias_pct } => write!(f, "bboe-{k_bias_pct}"),
            PlannerId::Rrt => f.write_str("rrt"),
            PlannerId::Gbrrt => f.write_str("gbrrt"),
            PlannerId::UniBboe { k_bias_pct } => write!(f, "uni-bboe-{k_bias_pct}"),
            PlannerId::UniNoStrategy => f.write_str("uni-nostrategy"),
            PlannerId::BiNoStrategy => f.write_str("bi-nostrategy"),
        }
    }
}

impl FromStr for PlannerId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pct = |rest: &str| -> Result<u32, BenchError> {
            rest.parse::<u32>()
                .ok()
                .filter(|p| *p <= 100)
                .ok_or_else(|| BenchError::Usage(format!("bad k_bias percentage in planner `{s}`")))
        };
        match s {
            "rrt" => Ok(PlannerId::Rrt),
            "gbrrt" => Ok(PlannerId::Gbrrt),
            "uni-nostrategy" => Ok(PlannerId::UniNoStrategy),
            "bi-nostrategy" => Ok(PlannerId::BiNoStrategy),
            _ => {
                if let Some(rest) = s.strip_prefix("uni-bboe-") {
                    Ok(PlannerId::UniBboe { k_bias_pct: pct(rest)? })
                } else if let Some(rest) = s.strip_prefix("bboe-") {
                    Ok(PlannerId::Bboe { k_bias_pct: pct(rest)? })
                } else {
                    Err(BenchError::Usage(format!("unknown planner `{s}` (valid: {})", PlannerId::VALID)))
                }
            }
        }
    }
}

/// Converts a `k_bias` given as a fraction (`0.85`) or percentage (`85`).
pub fn k_bias_percent(v: f64) -> Result<u32, BenchError> {
    let pct = if v <= 1.0 { v * 100.0 } else { v };
    let rounded = pct.round();
    if !(0.0..=100.0).contains(&rounded) || (pct - rounded).abs() > 1e-9 {
        return Err(BenchError::Usage(format!("k_bias {v} is not a whole percentage in [0, 100]")));
    }
    Ok(rounded as u32)
}

/// Shared planner knobs for a batch. The per-trial seed overrides `config.seed`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanSettings {
    pub config: PlannerConfig,
    pub monte_carlo: MonteCarloParams,
    pub candidates: usize,
}

impl Default for PlanSettings {
    fn default() -> Self {
        PlanSettings { config: PlannerConfig::default(), monte_carlo: MonteCarloParams::default(), candidates: DEFAULT_CANDIDATES }
    }
}

/// Runs one planner. Biased ids override `config.k_bias_exploit`.
pub fn run_planner(
    id: PlannerId,
    settings: &PlanSettings,
    world: &World,
    bundle: Option<&EdgeBundle>,
) -> Result<PlanReport, ConfigError> {
    let need = || bundle.ok_or_else(|| ConfigError::Invalid(format!("planner {id} needs an edge bundle")));
    let mc = &settings.monte_carlo;
    match id {
        PlannerId::Bboe { k_bias_pct } => {
            let config = PlannerConfig { k_bias_exploit: k_bias_pct as f64 / 100.0, ..settings.config.clone() };
            plan_bboe(&config, world, need()?)
        }
        PlannerId::Rrt => plan_rrt(&settings.config, world, mc),
        PlannerId::Gbrrt => plan_gbrrt(&settings.config, world, mc),
        PlannerId::UniBboe { k_bias_pct } => plan_ablation(
            AblationVariant::UniBBoEWithBias { k_bias: k_bias_pct as f64 / 100.0 },
            &settings.config,
            world,
            need()?,
            mc.goal_bias,
        ),
        PlannerId::UniNoStrategy => plan_ablation(
            AblationVariant::UniBBoENoStrategy { candidates: settings.candidates },
            &settings.config,
            world,
            need()?,
            mc.goal_bias,
        ),
        PlannerId::BiNoStrategy => plan_ablation(
            AblationVariant::BiBBoENoStrategy { candidates: settings.candidates },
            &settings.config,
            world,
            need()?,
            mc.goal_bias,
        ),
    }
}

/// One benchmark row. `time_s` and `cost_m` are present exactly when the
/// trial succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub planner: String,
    pub difficulty: String,
    pub seed: u64,
    pub success: bool,
    pub time_s: Option<f64>,
    pub cost_m: Option<f64>,
    pub iterations: u64,
    pub prop_attempts: u64,
    /// Swept value for ablation rows.
    pub axis_value: Option<String>,
}

impl TrialResult {
    pub fn from_outcome(planner: &str, difficulty: &str, seed: u64, outcome: &Result<PlanReport, String>) -> Self {
        let base = TrialResult {
            planner: planner.to_string(),
            difficulty: difficulty.to_string(),
            seed,
            success: false,
            time_s: None,
            cost_m: None,
            iterations: 0,
            prop_attempts: 0,
            axis_value: None,
        };
        match outcome {
            Ok(report) => {
                let cost = report.cost();
                TrialResult {
                    success: cost.is_some(),
                    time_s: cost.map(|_| report.stats.elapsed_s),
                    cost_m: cost,
                    iterations: report.stats.iterations,
                    prop_attempts: report.stats.prop_attempts,
                    ..base
                }
            }
            Err(_) => base,
        }
    }

    /// Equality on everything except wall-clock time.
    pub fn same_outcome(&self, other: &TrialResult) -> bool {
        self.planner == other.planner
            && self.difficulty == other.difficulty
            && self.seed == other.seed
            && self.success == other.success
            && self.time_s.is_some() == other.time_s.is_some()
            && self.cost_m == other.cost_m
            && self.iterations == other.iterations
            && self.prop_attempts == other.prop_attempts
            && self.axis_value == other.axis_value
    }
}

/// How trial seeds map onto worlds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorldSeedMode {
    /// Every trial uses the world generated from the base seed.
    Fixed,
    /// Each trial generates its own world from its trial seed.
    PerTrial,
}

impl FromStr for WorldSeedMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(WorldSeedMode::Fixed),
            "per-trial" => Ok(WorldSeedMode::PerTrial),
            _ => Err(BenchError::Usage(format!("unknown world seed mode `{s}` (valid: fixed, per-trial)"))),
        }
    }
}

impl fmt::Display for WorldSeedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorldSeedMode::Fixed => "fixed",
            WorldSeedMode::PerTrial => "per-trial",
        })
    }
}

/// One cell of a batch: a planner on a generated scenario with a planner seed.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSpec {
    pub planner: PlannerId,
    pub level: Level,
    pub world_seed: u64,
    pub seed: u64,
    pub settings: PlanSettings,
    pub axis_value: Option<String>,
}

/// Every (planner, level, seed) combination, seeds `base_seed..base_seed + trials`.
pub fn bench_trials(
    planners: &[PlannerId],
    levels: &[Level],
    trials: u64,
    base_seed: u64,
    mode: WorldSeedMode,
    settings: &PlanSettings,
) -> Result<Vec<TrialSpec>, BenchError> {
    if planners.is_empty() {
        return Err(BenchError::Usage("at least one planner is required".into()));
    }
    if levels.is_empty() {
        return Err(BenchError::Usage("at least one difficulty is required".into()));
    }
    let mut out = Vec::new();
    for &planner in planners {
        for &level in levels {
            for seed in base_seed..base_seed + trials {
                let world_seed = match mode {
                    WorldSeedMode::Fixed => base_seed,
                    WorldSeedMode::PerTrial => seed,
                };
                out.push(TrialSpec { planner, level, world_seed, seed, settings: settings.clone(), axis_value: None });
            }
        }
    }
    Ok(out)
}

/// Runs a single trial; world or configuration errors become failed rows.
pub fn run_trial(spec: &TrialSpec, system: SystemId, bundle: Option<&EdgeBundle>) -> TrialResult {
    let mut settings = spec.settings.clone();
    settings.config.seed = spec.seed;
    let outcome = generate_scenario_for(system, spec.level.difficulty(), spec.world_seed)
        .map_err(|e| e.to_string())
        .and_then(|world| run_planner(spec.planner, &settings, &world, bundle).map_err(|e| e.to_string()));
    let mut row = TrialResult::from_outcome(&spec.planner.to_string(), spec.level.name(), spec.seed, &outcome);
    row.axis_value = spec.axis_value.clone();
    row
}

/// Runs every trial, on `jobs` threads when `jobs > 1`. Rows come back in
/// the order of `trials` either way.
pub fn run_batch(trials: &[TrialSpec], system: SystemId, bundle: Option<&EdgeBundle>, jobs: usize) -> Vec<TrialResult> {
    if jobs <= 1 {
        return trials.iter().map(|t| run_trial(t, system, bundle)).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| trials.par_iter().map(|t| run_trial(t, system, bundle)).collect()),
        Err(_) => trials.iter().map(|t| run_trial(t, system, bundle)).collect(),
    }
}

/// Sweepable parameter for `ablate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AblationAxis {
    SkipN,
    KBias,
    Variant,
}

impl FromStr for AblationAxis {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "skip_n" => Ok(AblationAxis::SkipN),
            "k_bias" => Ok(AblationAxis::KBias),
            "variant" => Ok(AblationAxis::Variant),
            _ => Err(BenchError::Usage(format!("unknown ablation axis `{s}` (valid: skip_n, k_bias, variant)"))),
        }
    }
}

/// Expands a sweep into trials. `skip_n` and `k_bias` sweeps apply to each of
/// `planners`; a `variant` sweep takes planner ids as its values.
pub fn ablation_trials(
    axis: AblationAxis,
    values: &[String],
    planners: &[PlannerId],
    levels: &[Level],
    trials: u64,
    base_seed: u64,
    mode: WorldSeedMode,
    settings: &PlanSettings,
) -> Result<Vec<TrialSpec>, BenchError> {
    if values.is_empty() {
        return Err(BenchError::Usage("at least one sweep value is required".into()));
    }
    let mut out = Vec::new();
    for value in values {
        let (planners, settings) = match axis {
            AblationAxis::SkipN => {
                let n: usize = value
                    .parse()
                    .ok()
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| BenchError::Usage(format!("invalid skip_n value `{value}` (valid: integers >= 1)")))?;
                let mut s = settings.clone();
                s.config.skip_n = n;
                (planners.to_vec(), s)
            }
            AblationAxis::KBias => {
                let pct = value
                    .parse::<f64>()
                    .map_err(|_| BenchError::Usage(format!("invalid k_bias value `{value}` (valid: fractions in [0, 1] or percentages)")))
                    .and_then(k_bias_percent)?;
                (planners.iter().map(|p| p.with_k_bias(pct)).collect(), settings.clone())
            }
            AblationAxis::Variant => {
                let id = value
                    .parse::<PlannerId>()
                    .map_err(|_| BenchError::Usage(format!("invalid variant `{value}` (valid: {})", PlannerId::VALID)))?;
                (vec![id], settings.clone())
            }
        };
        for mut t in bench_trials(&planners, levels, trials, base_seed, mode, &settings)? {
            t.axis_value = Some(value.clone());
            out.push(t);
        }
    }
    Ok(out)
}

/// `mean [min, max]` of one metric over successful rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Aggregate> {
        if values.is_empty() {
            return None;
        }
        let sum: f64 = values.iter().sum();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Aggregate { mean: sum / values.len() as f64, min, max })
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} [{:.3}, {:.3}]", self.mean, self.min, self.max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub planner: String,
    pub difficulty: String,
    pub axis_value: Option<String>,
    pub trials: usize,
    pub successes: usize,
    pub time: Option<Aggregate>,
    pub cost: Option<Aggregate>,
}

impl CellSummary {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub cells: Vec<CellSummary>,
    pub rows: Vec<TrialResult>,
}

impl BenchReport {
    /// Groups rows by (planner, difficulty, axis value) in first-seen order.
    pub fn from_rows(rows: Vec<TrialResult>) -> Self {
        let mut keys: Vec<(String, String, Option<String>)> = Vec::new();
        for r in &rows {
            let k = (r.planner.clone(), r.difficulty.clone(), r.axis_value.clone());
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        let cells = keys
            .into_iter()
            .map(|(planner, difficulty, axis_value)| {
                let members: Vec<&TrialResult> = rows
                    .iter()
                    .filter(|r| r.planner == planner && r.difficulty == difficulty && r.axis_value == axis_value)
                    .collect();
                let times: Vec<f64> = members.iter().filter_map(|r| r.time_s).collect();
                let costs: Vec<f64> = members.iter().filter_map(|r| r.cost_m).collect();
                CellSummary {
                    trials: members.len(),
                    successes: members.iter().filter(|r| r.success).count(),
                    time: Aggregate::of(&times),
                    cost: Aggregate::of(&costs),
                    planner,
                    difficulty,
                    axis_value,
                }
            })
            .collect();
        BenchReport { cells, rows }
    }

    pub fn cell(&self, planner: &str, difficulty: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.planner == planner && c.difficulty == difficulty)
    }

    /// Plain-text table, one line per cell.
    pub fn table(&self) -> String {
        let with_axis = self.cells.iter().any(|c| c.axis_value.is_some());
        let mut out = String::new();
        if with_axis {
            out.push_str(&format!("{:<10} ", "axis"));
        }
        out.push_str(&format!(
            "{:<16} {:<10} {:>9} {:>28} {:>28}\n",
            "planner", "difficulty", "success", "time_s mean [min, max]", "cost_m mean [min, max]"
        ));
        let show = |a: Option<Aggregate>| a.map_or("-".to_string(), |a| a.to_string());
        for c in &self.cells {
            if with_axis {
                out.push_str(&format!("{:<10} ", c.axis_value.as_deref().unwrap_or("")));
            }
            out.push_str(&format!(
                "{:<16} {:<10} {:>9} {:>28} {:>28}\n",
                c.planner,
                c.difficulty,
                format!("{}/{}", c.successes, c.trials),
                show(c.time),
                show(c.cost)
            ));
        }
        out
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Writes rows with the standard columns, plus `axis_value` when any row has one.
pub fn write_csv<W: io::Write>(rows: &[TrialResult], out: W) -> Result<(), csv::Error> {
    let with_axis = rows.iter().any(|r| r.axis_value.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if with_axis {
        header.push(AXIS_COLUMN);
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.planner.clone(),
            r.difficulty.clone(),
            r.seed.to_string(),
            r.success.to_string(),
            opt_num(r.time_s),
            opt_num(r.cost_m),
            r.iterations.to_string(),
            r.prop_attempts.to_string(),
        ];
        if with_axis {
            rec.push(r.axis_value.clone().unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses rows written by [`write_csv`].
pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<TrialResult>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = Vec::new();
    for name in CSV_COLUMNS {
        idx.push(col(name).ok_or_else(|| BenchError::Parse(format!("missing column `{name}`")))?);
    }
    let axis = col(AXIS_COLUMN);
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(idx[i]).unwrap_or("");
        let bad = |what: &str| BenchError::Parse(format!("row {}: bad {what}", line + 1));
        let num = |i: usize, what: &str| -> Result<Option<f64>, BenchError> {
            match field(i) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(what)),
            }
        };
        let row = TrialResult {
            planner: field(0).to_string(),
            difficulty: field(1).to_string(),
            seed: field(2).parse().map_err(|_| bad("seed"))?,
            success: field(3).parse().map_err(|_| bad("success"))?,
            time_s: num(4, "time_s")?,
            cost_m: num(5, "cost_m")?,
            iterations: field(6).parse().map_err(|_| bad("iterations"))?,
            prop_attempts: field(7).parse().map_err(|_| bad("prop_attempts"))?,
            axis_value: axis.and_then(|a| rec.get(a)).filter(|s| !s.is_empty()).map(str::to_string),
        };
        if row.success != (row.time_s.is_some() && row.cost_m.is_some()) {
            return Err(bad("success flag (must match presence of time_s and cost_m)"));
        }
        rows.push(row);
    }
    Ok(rows)
}
