//! Comparison planners: goal-biased Monte-Carlo RRT, a GBRRT-style planner
//! that replaces bundle edges with online rollouts, and the BBoE ablations.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use crate::bundle::{near_edges, transformed_end, EdgeBundle};
use crate::dynamics::{arc_length, distance, integrate, sample_control, sample_duration, State, SystemSpec, DEFAULT_DT};
use crate::error::ConfigError;
use crate::planner::{
    check_inputs, run_bidirectional, run_unidirectional, BundleExpander, EdgeSource, Expander, Expansion, NewEdge, PlanReport,
    PlannerConfig, Purpose,
};
use crate::strategy::edge_is_free;
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloParams {
    /// Random (control, duration) rollouts scored per expansion.
    pub prop_attempts_per_expand: usize,
    pub goal_bias: f64,
}

impl Default for MonteCarloParams {
    fn default() -> Self {
        MonteCarloParams { prop_attempts_per_expand: 10, goal_bias: 0.05 }
    }
}

impl MonteCarloParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.prop_attempts_per_expand == 0 {
            return Err(ConfigError::Invalid("prop_attempts_per_expand must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(ConfigError::Invalid(format!("goal_bias {} outside [0, 1]", self.goal_bias)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AblationVariant {
    /// Forward tree only, sorted skip-N selection with this `k_bias`.
    UniBBoEWithBias { k_bias: f64 },
    /// Forward tree only, best of `candidates` random neighborhood edges.
    UniBBoENoStrategy { candidates: usize },
    /// Both trees, best of `candidates` random neighborhood edges.
    BiBBoENoStrategy { candidates: usize },
}

impl AblationVariant {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            AblationVariant::UniBBoEWithBias { k_bias } if !(0.0..=1.0).contains(&k_bias) => {
                Err(ConfigError::Invalid(format!("k_bias {k_bias} outside [0, 1]")))
            }
            AblationVariant::UniBBoENoStrategy { candidates } | AblationVariant::BiBBoENoStrategy { candidates } if candidates == 0 => {
                Err(ConfigError::Invalid("candidates must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Best-of-k online rollouts toward the target.
struct MonteCarloExpander<'a> {
    spec: &'a SystemSpec,
    world: &'a World,
    rollouts: usize,
    dt: f64,
}

impl Expander for MonteCarloExpander<'_> {
    fn toward(&self, from: &State, target: &State, _purpose: Purpose, rng: &mut ChaCha8Rng) -> Expansion {
        let mut best: Option<(f64, NewEdge)> = None;
        for _ in 0..self.rollouts {
            let control = sample_control(self.spec, rng);
            let duration = sample_duration(self.spec, rng);
            let waypoints = integrate(self.spec, from, &control, duration, self.dt);
            if !self.world.waypoints_collision_free(&waypoints) {
                continue;
            }
            let end_state = *waypoints.last().unwrap();
            let d = distance(self.spec, &end_state, target);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                let source = EdgeSource::Rollout { control, duration, dt: self.dt };
                best = Some((d, NewEdge { source, end_state, arc_length: arc_length(&waypoints) }));
            }
        }
        Expansion { edge: best.map(|(_, e)| e), attempts: self.rollouts, branch: None }
    }

    fn random(&self, from: &State, x_rand: &State, rng: &mut ChaCha8Rng) -> Expansion {
        self.toward(from, x_rand, Purpose::Explore, rng)
    }
}

/// Best-scoring free edge among `candidates` uniformly drawn neighborhood edges.
struct CandidateExpander<'a> {
    bundle: &'a EdgeBundle,
    world: &'a World,
    candidates: usize,
    theta: f64,
}

impl Expander for CandidateExpander<'_> {
    fn toward(&self, from: &State, target: &State, _purpose: Purpose, rng: &mut ChaCha8Rng) -> Expansion {
        let spec = &self.bundle.system;
        let near = near_edges(self.bundle, from, self.theta);
        let amount = self.candidates.min(near.len());
        let mut best: Option<(f64, usize, NewEdge)> = None;
        if amount > 0 {
            for i in index::sample(rng, near.len(), amount) {
                let e = near[i];
                if !edge_is_free(spec, self.world, e, from) {
                    continue;
                }
                let end_state = transformed_end(spec, e, from);
                let d = distance(spec, &end_state, target);
                if best.as_ref().map_or(true, |&(bd, bid, _)| d < bd || (d == bd && e.id < bid)) {
                    let edge = NewEdge { source: EdgeSource::Bundle { edge_id: e.id }, end_state, arc_length: e.arc_length };
                    best = Some((d, e.id, edge));
                }
            }
        }
        Expansion { edge: best.map(|(_, _, e)| e), attempts: amount, branch: None }
    }

    fn random(&self, from: &State, x_rand: &State, rng: &mut ChaCha8Rng) -> Expansion {
        self.toward(from, x_rand, Purpose::Explore, rng)
    }
}

/// Goal-biased Monte-Carlo RRT with online rollouts.
pub fn plan_rrt(config: &PlannerConfig, world: &World, params: &MonteCarloParams) -> Result<PlanReport, ConfigError> {
    let spec = world.spec();
    check_inputs(&spec, world, config)?;
    params.validate()?;
    let expander = MonteCarloExpander { spec: &spec, world, rollouts: params.prop_attempts_per_expand, dt: DEFAULT_DT };
    Ok(run_unidirectional(&spec, world, config, params.goal_bias, &expander, None))
}

/// The two-tree loop with every bundle propagation replaced by best-of-k
/// online rollouts. Undirected exploration scores its rollouts toward the
/// sample that selected the node.
pub fn plan_gbrrt(config: &PlannerConfig, world: &World, params: &MonteCarloParams) -> Result<PlanReport, ConfigError> {
    let spec = world.spec();
    check_inputs(&spec, world, config)?;
    params.validate()?;
    let expander = MonteCarloExpander { spec: &spec, world, rollouts: params.prop_attempts_per_expand, dt: DEFAULT_DT };
    Ok(run_bidirectional(&spec, world, config, &expander, None))
}

/// Runs one ablation variant; `goal_bias` applies to the unidirectional ones.
pub fn plan_ablation(
    variant: AblationVariant,
    config: &PlannerConfig,
    world: &World,
    bundle: &EdgeBundle,
    goal_bias: f64,
) -> Result<PlanReport, ConfigError> {
    let spec = &bundle.system;
    check_inputs(spec, world, config)?;
    variant.validate()?;
    if !(0.0..=1.0).contains(&goal_bias) {
        return Err(ConfigError::Invalid(format!("goal_bias {goal_bias} outside [0, 1]")));
    }
    Ok(match variant {
        AblationVariant::UniBBoEWithBias { k_bias } => {
            let config = PlannerConfig { k_bias_exploit: k_bias, ..config.clone() };
            config.validate()?;
            let expander = BundleExpander::new(bundle, world, &config);
            run_unidirectional(spec, world, &config, goal_bias, &expander, Some(bundle))
        }
        AblationVariant::UniBBoENoStrategy { candidates } => {
            let expander = CandidateExpander { bundle, world, candidates, theta: config.theta };
            run_unidirectional(spec, world, config, goal_bias, &expander, Some(bundle))
        }
        AblationVariant::BiBBoENoStrategy { candidates } => {
            let expander = CandidateExpander { bundle, world, candidates, theta: config.theta };
            run_bidirectional(spec, world, config, &expander, Some(bundle))
        }
    })
}
