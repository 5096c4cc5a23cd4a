//! Bidirectional bundle-of-edges search.
//!
//! A forward tree grows from the start and a reverse tree from the goal. The
//! reverse tree only supplies a cost-to-go heuristic: forward nodes near it are
//! queued by `g + d + h` and the forward tree re-propagates toward the best
//! reverse node instead of splicing reverse edges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{transform_edge, transformed_end, EdgeBundle, EdgeInstance};
use crate::dynamics::{distance, integrate, Control, State, SystemSpec};
use crate::error::ConfigError;
use crate::spatial::GridIndex;
use crate::strategy::{best_edge, edge_is_free, random_edge, Branch, SelectionParams};
use crate::world::World;

pub type NodeId = u32;

/// Side length of spatial index cells, in m.
const INDEX_CELL: f64 = 1.0;
/// Iterations between wall-clock checks.
const CLOCK_STRIDE: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

/// How a node's incoming edge can be rebuilt from its parent state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeSource {
    Bundle { edge_id: usize },
    Rollout { control: Control, duration: f64, dt: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub state: State,
    pub parent: Option<NodeId>,
    pub incoming: Option<EdgeSource>,
    /// Arc length of the incoming edge (0 at the root).
    pub edge_length: f64,
    /// `g` in the forward tree, `h` in the reverse tree.
    pub cost_to_root: f64,
}

/// A collision-free edge produced by an expansion, ready to attach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewEdge {
    pub source: EdgeSource,
    pub end_state: State,
    pub arc_length: f64,
}

/// A search tree. Incoming edges are stored as recipes and rebuilt on demand
/// by [`Tree::incoming_instance`].
#[derive(Clone, Debug)]
pub struct Tree {
    direction: Direction,
    nodes: Vec<TreeNode>,
    index: GridIndex,
    floor: f64,
}

impl Tree {
    pub fn new(direction: Direction, root: State, world: &World, spec: &SystemSpec) -> Self {
        let mut index = GridIndex::new(&world.bounds, INDEX_CELL);
        index.insert(0, root.position());
        let root = TreeNode { state: root, parent: None, incoming: None, edge_length: 0.0, cost_to_root: 0.0 };
        Tree { direction, nodes: vec![root], index, floor: spec.position_weight_floor() }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false: a tree holds at least its root.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn add(&mut self, parent: NodeId, edge: NewEdge) -> NodeId {
        let id = self.nodes.len() as NodeId;
        let cost_to_root = self.nodes[parent as usize].cost_to_root + edge.arc_length;
        self.nodes.push(TreeNode {
            state: edge.end_state,
            parent: Some(parent),
            incoming: Some(edge.source),
            edge_length: edge.arc_length,
            cost_to_root,
        });
        self.index.insert(id, edge.end_state.position());
        id
    }

    /// Node minimizing the system metric to `x`; ties go to the lower id.
    pub fn nearest(&self, spec: &SystemSpec, x: &State) -> NodeId {
        self.index
            .nearest(x.position(), self.floor, |id| distance(spec, &self.nodes[id as usize].state, x))
            .expect("tree has a root")
    }

    /// Nodes within metric distance `r` of `x`, ascending by id.
    pub fn within(&self, spec: &SystemSpec, x: &State, r: f64) -> Vec<NodeId> {
        let mut ids = self.index.within(x.position(), r, self.floor, |id| distance(spec, &self.nodes[id as usize].state, x));
        ids.sort_unstable();
        ids
    }

    pub fn nearest_linear(&self, spec: &SystemSpec, x: &State) -> NodeId {
        (0..self.nodes.len() as NodeId)
            .min_by(|&a, &b| {
                distance(spec, &self.node(a).state, x).total_cmp(&distance(spec, &self.node(b).state, x)).then(a.cmp(&b))
            })
            .unwrap()
    }

    pub fn within_linear(&self, spec: &SystemSpec, x: &State, r: f64) -> Vec<NodeId> {
        (0..self.nodes.len() as NodeId).filter(|&id| distance(spec, &self.node(id).state, x) <= r).collect()
    }

    /// Rebuilds the incoming edge of `id` in the world frame. `bundle` is
    /// required for bundle-sourced edges.
    pub fn incoming_instance(&self, id: NodeId, spec: &SystemSpec, bundle: Option<&EdgeBundle>) -> Option<EdgeInstance> {
        let node = self.node(id);
        let parent = self.node(node.parent?);
        Some(match node.incoming? {
            EdgeSource::Bundle { edge_id } => {
                let bundle = bundle.expect("bundle-sourced edge needs the bundle");
                transform_edge(spec, &bundle.edges[edge_id], &parent.state)
            }
            EdgeSource::Rollout { control, duration, dt } => {
                EdgeInstance::from_rollout(integrate(spec, &parent.state, &control, duration, dt))
            }
        })
    }
}

#[derive(Clone, Copy, Debug)]
struct QueueEntry {
    key: f64,
    id: NodeId,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    // Reversed so the max-heap pops the smallest key, then the smallest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then(other.id.cmp(&self.id))
    }
}

/// Min-priority queue of forward nodes with decrease-only keys. Superseded
/// heap entries are skipped lazily on pop.
#[derive(Clone, Debug, Default)]
pub struct HeuristicQueue {
    heap: BinaryHeap<QueueEntry>,
    keys: Vec<f64>,
    live: usize,
}

impl HeuristicQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Current key of `id`, if queued.
    pub fn key(&self, id: NodeId) -> Option<f64> {
        self.keys.get(id as usize).copied().filter(|k| k.is_finite())
    }

    /// Inserts `id`, or lowers its key. Returns false if the existing key is
    /// already at most `key`.
    pub fn offer(&mut self, id: NodeId, key: f64) -> bool {
        let i = id as usize;
        if i >= self.keys.len() {
            self.keys.resize(i + 1, f64::INFINITY);
        }
        let current = self.keys[i];
        if key >= current {
            return false;
        }
        if current == f64::INFINITY {
            self.live += 1;
        }
        self.keys[i] = key;
        self.heap.push(QueueEntry { key, id });
        true
    }

    pub fn pop(&mut self) -> Option<(NodeId, f64)> {
        while let Some(QueueEntry { key, id }) = self.heap.pop() {
            if self.keys[id as usize] == key {
                self.keys[id as usize] = f64::INFINITY;
                self.live -= 1;
                return Some((id, key));
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    /// Upper bound on the neighborhood radius, in metric units.
    pub delta_hr: f64,
    pub gamma: f64,
    /// `k_bias` used when the forward tree exploits the reverse tree.
    pub k_bias_exploit: f64,
    pub skip_n: usize,
    pub theta: f64,
    pub exploit_ramp_iters: u64,
    pub q_max: f64,
    pub max_iter: u64,
    /// Wall-clock budget in seconds; `None` terminates on iterations only.
    pub time_budget: Option<f64>,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            delta_hr: 4.0,
            gamma: 8.0,
            k_bias_exploit: 0.85,
            skip_n: 500,
            theta: 0.5,
            exploit_ramp_iters: 500,
            q_max: 0.9,
            max_iter: u64::MAX,
            time_budget: Some(60.0),
            seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.delta_hr > 0.0) {
            return bad(format!("delta_hr {} must be positive", self.delta_hr));
        }
        if !(self.gamma > 0.0) {
            return bad(format!("gamma {} must be positive", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.q_max) {
            return bad(format!("q_max {} outside [0, 1]", self.q_max));
        }
        if self.exploit_ramp_iters == 0 {
            return bad("exploit_ramp_iters must be at least 1".into());
        }
        if let Some(t) = self.time_budget {
            if !(t > 0.0) {
                return bad(format!("time budget {t} must be positive"));
            }
        }
        self.selection(self.k_bias_exploit).validate()
    }

    pub fn selection(&self, k_bias: f64) -> SelectionParams {
        SelectionParams { k_bias, skip_n: self.skip_n, theta: self.theta }
    }

    /// Terminate on iterations only, for bit-reproducible runs.
    pub fn iteration_limited(mut self, max_iter: u64) -> Self {
        self.max_iter = max_iter;
        self.time_budget = None;
        self
    }
}

/// `min(gamma * (ln n / n)^(1/(d+1)), delta_hr)`, or `delta_hr` for `n <= 1`.
pub fn shrinking_radius(n_rev: usize, d: usize, gamma: f64, delta_hr: f64) -> f64 {
    if n_rev <= 1 {
        return delta_hr;
    }
    let n = n_rev as f64;
    (gamma * ((n.ln() / n).powf(1.0 / (d as f64 + 1.0)))).min(delta_hr)
}

/// Linear ramp from 0 to `q_max` over `exploit_ramp_iters` iterations.
pub fn exploitation_probability(k: u64, config: &PlannerConfig) -> f64 {
    config.q_max * (k as f64 / config.exploit_ramp_iters as f64).min(1.0)
}

/// Offers every forward node within `r_k` of the new reverse node with key
/// `g(x) + d(x, x_rev) + h(x_rev)`.
pub fn update_priority_queue(spec: &SystemSpec, forward: &Tree, queue: &mut HeuristicQueue, x_rev: &TreeNode, r_k: f64) {
    for id in forward.within(spec, &x_rev.state, r_k) {
        let x = forward.node(id);
        queue.offer(id, x.cost_to_root + distance(spec, &x.state, &x_rev.state) + x_rev.cost_to_root);
    }
}

/// Queues forward node `x_for` if any reverse node lies within `r_k` of it.
pub fn insert_to_priority_queue(spec: &SystemSpec, reverse: &Tree, queue: &mut HeuristicQueue, forward: &Tree, x_for: NodeId, r_k: f64) {
    let node = forward.node(x_for);
    if let Some((_, h)) = best_reverse(spec, reverse, &node.state, r_k) {
        queue.offer(x_for, node.cost_to_root + h);
    }
}

/// Reverse node within `r_k` of `x_pop` minimizing `g(x_pop) + d + h`.
pub fn best_reverse_target(spec: &SystemSpec, reverse: &Tree, x_pop: &TreeNode, r_k: f64) -> Option<NodeId> {
    best_reverse(spec, reverse, &x_pop.state, r_k).map(|(id, _)| id)
}

/// Argmin over in-range reverse nodes of `d + h`, with that minimum.
fn best_reverse(spec: &SystemSpec, reverse: &Tree, x: &State, r_k: f64) -> Option<(NodeId, f64)> {
    let mut best: Option<(NodeId, f64)> = None;
    for id in reverse.within(spec, x, r_k) {
        let v = reverse.node(id);
        let score = distance(spec, x, &v.state) + v.cost_to_root;
        if best.map_or(true, |(_, b)| score < b) {
            best = Some((id, score));
        }
    }
    best
}

/// A start-to-goal sequence of placed edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub instances: Vec<EdgeInstance>,
    /// Node states from the start to the final state.
    pub states: Vec<State>,
    /// Recipe of each instance, parallel to `instances`.
    pub sources: Vec<EdgeSource>,
    pub total_cost: f64,
}

impl Path {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("path has a start state")
    }

    /// All waypoints in order, without repeating shared edge endpoints.
    pub fn waypoints(&self) -> Vec<State> {
        let mut out = vec![self.states[0]];
        for inst in &self.instances {
            out.extend_from_slice(&inst.waypoints[1..]);
        }
        out
    }

    /// Waypoints with their time from the start. Bundle-sourced edges need
    /// the bundle for their duration and step.
    pub fn timed_waypoints(&self, bundle: Option<&EdgeBundle>) -> Vec<(f64, State)> {
        let mut out = vec![(0.0, self.states[0])];
        let mut t0 = 0.0;
        for (inst, source) in self.instances.iter().zip(&self.sources) {
            let (duration, dt) = match *source {
                EdgeSource::Bundle { edge_id } => {
                    let b = bundle.expect("bundle-sourced edge needs the bundle");
                    (b.edges[edge_id].duration, b.dt)
                }
                EdgeSource::Rollout { duration, dt, .. } => (duration, dt),
            };
            for (i, w) in inst.waypoints.iter().enumerate().skip(1) {
                out.push((t0 + (i as f64 * dt).min(duration), *w));
            }
            t0 += duration;
        }
        out
    }
}

/// Walks parent links from `goal` to the root.
pub fn extract_path(tree: &Tree, goal: NodeId, spec: &SystemSpec, bundle: Option<&EdgeBundle>) -> Path {
    let mut chain = vec![goal];
    while let Some(p) = tree.node(*chain.last().unwrap()).parent {
        chain.push(p);
    }
    chain.reverse();
    let states = chain.iter().map(|&id| tree.node(id).state).collect();
    let instances: Vec<EdgeInstance> =
        chain[1..].iter().map(|&id| tree.incoming_instance(id, spec, bundle).expect("non-root node has an edge")).collect();
    let sources = chain[1..].iter().map(|&id| tree.node(id).incoming.expect("non-root node has an edge")).collect();
    let total_cost = instances.iter().fold(0.0, |acc, inst| acc + inst.arc_length);
    Path { instances, states, sources, total_cost }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GoalReached,
    IterationLimit,
    TimeBudget,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanStats {
    pub iterations: u64,
    /// Edges or rollouts propagated and collision-checked, over both trees.
    pub prop_attempts: u64,
    /// Expansion calls (each may make several attempts).
    pub expansions: u64,
    pub exploit_pops: u64,
    pub exploit_successes: u64,
    /// Exploration calls that took the random branch; stays zero for BBoE.
    pub exploration_random_branches: u64,
    pub exploitation_random_branches: u64,
    pub elapsed_s: f64,
}

/// Outcome of a planner run; `path` is `None` on failure.
#[derive(Clone, Debug)]
pub struct PlanReport {
    pub path: Option<Path>,
    pub termination: Termination,
    pub stats: PlanStats,
    pub forward: Tree,
    pub reverse: Option<Tree>,
}

impl PlanReport {
    pub fn success(&self) -> bool {
        self.path.is_some()
    }

    pub fn cost(&self) -> Option<f64> {
        self.path.as_ref().map(|p| p.total_cost)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Purpose {
    Explore,
    Exploit,
}

pub(crate) struct Expansion {
    pub edge: Option<NewEdge>,
    pub attempts: usize,
    pub branch: Option<Branch>,
}

/// The expansion rule plugged into a search skeleton.
pub(crate) trait Expander {
    /// Propagate from `from` toward `target`.
    fn toward(&self, from: &State, target: &State, purpose: Purpose, rng: &mut ChaCha8Rng) -> Expansion;
    /// Undirected exploration from `from`; `x_rand` is the sample that chose `from`.
    fn random(&self, from: &State, x_rand: &State, rng: &mut ChaCha8Rng) -> Expansion;
}

pub(crate) struct BundleExpander<'a> {
    pub bundle: &'a EdgeBundle,
    pub world: &'a World,
    pub exploit: SelectionParams,
    pub explore: SelectionParams,
}

impl<'a> BundleExpander<'a> {
    pub fn new(bundle: &'a EdgeBundle, world: &'a World, config: &PlannerConfig) -> Self {
        BundleExpander { bundle, world, exploit: config.selection(config.k_bias_exploit), explore: config.selection(1.0) }
    }

    fn attach(&self, edge: &crate::bundle::Edge, from: &State) -> NewEdge {
        NewEdge {
            source: EdgeSource::Bundle { edge_id: edge.id },
            end_state: transformed_end(&self.bundle.system, edge, from),
            arc_length: edge.arc_length,
        }
    }
}

impl Expander for BundleExpander<'_> {
    fn toward(&self, from: &State, target: &State, purpose: Purpose, rng: &mut ChaCha8Rng) -> Expansion {
        let params = if purpose == Purpose::Exploit { &self.exploit } else { &self.explore };
        let (edge, attempts, branch) = best_edge(self.bundle, from, target, params, self.world, rng);
        Expansion { edge: edge.map(|e| self.attach(e, from)), attempts, branch }
    }

    fn random(&self, from: &State, _x_rand: &State, rng: &mut ChaCha8Rng) -> Expansion {
        match random_edge(self.bundle, from, self.explore.theta, rng) {
            None => Expansion { edge: None, attempts: 0, branch: None },
            Some(e) => {
                let free = edge_is_free(&self.bundle.system, self.world, e, from);
                Expansion { edge: free.then(|| self.attach(e, from)), attempts: 1, branch: None }
            }
        }
    }
}

/// Shared bookkeeping for one run.
pub(crate) struct RunState {
    started: Instant,
    budget: Option<f64>,
    pub stats: PlanStats,
}

impl RunState {
    pub fn new(config: &PlannerConfig) -> Self {
        RunState { started: Instant::now(), budget: config.time_budget, stats: PlanStats::default() }
    }

    /// True when iteration `k` should not start because the budget is spent.
    pub fn out_of_time(&self, k: u64) -> bool {
        match self.budget {
            Some(b) if (k - 1) % CLOCK_STRIDE == 0 => self.started.elapsed().as_secs_f64() >= b,
            _ => false,
        }
    }

    pub fn record(&mut self, e: &Expansion, purpose: Purpose) {
        self.stats.expansions += 1;
        self.stats.prop_attempts += e.attempts as u64;
        if e.branch == Some(Branch::Random) {
            match purpose {
                Purpose::Explore => self.stats.exploration_random_branches += 1,
                Purpose::Exploit => self.stats.exploitation_random_branches += 1,
            }
        }
    }

    pub fn finish(
        mut self,
        path: Option<Path>,
        termination: Termination,
        forward: Tree,
        reverse: Option<Tree>,
    ) -> PlanReport {
        self.stats.elapsed_s = self.started.elapsed().as_secs_f64();
        PlanReport { path, termination, stats: self.stats, forward, reverse }
    }
}

pub(crate) fn check_inputs(spec: &SystemSpec, world: &World, config: &PlannerConfig) -> Result<(), ConfigError> {
    if spec.id != world.system {
        return Err(ConfigError::SystemMismatch { bundle: spec.id.to_string(), world: world.system.to_string() });
    }
    if world.start.dim() != spec.state_dim {
        return Err(ConfigError::Invalid("start state dimension does not match the system".into()));
    }
    if world.state_in_collision(&world.start) {
        return Err(ConfigError::StartInCollision);
    }
    config.validate()
}

/// The two-tree loop: reverse exploration every iteration, then forward
/// exploitation with probability `q`, falling back to directed and then
/// undirected exploration.
pub(crate) fn run_bidirectional<E: Expander>(
    spec: &SystemSpec,
    world: &World,
    config: &PlannerConfig,
    expander: &E,
    bundle: Option<&EdgeBundle>,
) -> PlanReport {
    let mut run = RunState::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut forward = Tree::new(Direction::Forward, world.start, world, spec);
    if world.goal_region_reached(&world.start) {
        let path = extract_path(&forward, 0, spec, bundle);
        return run.finish(Some(path), Termination::GoalReached, forward, None);
    }
    let mut reverse = Tree::new(Direction::Reverse, world.goal_state(), world, spec);
    let mut queue = HeuristicQueue::new();

    let mut k: u64 = 0;
    while k < config.max_iter {
        k += 1;
        if run.out_of_time(k) {
            run.stats.iterations = k - 1;
            return run.finish(None, Termination::TimeBudget, forward, Some(reverse));
        }
        let r_k = shrinking_radius(reverse.len(), spec.state_dim, config.gamma, config.delta_hr);

        let x_rand = world.sample_state(spec, &mut rng);
        let x_near = reverse.nearest(spec, &x_rand);
        let e = expander.toward(&reverse.node(x_near).state, &x_rand, Purpose::Explore, &mut rng);
        run.record(&e, Purpose::Explore);
        if let Some(edge) = e.edge {
            let id = reverse.add(x_near, edge);
            update_priority_queue(spec, &forward, &mut queue, reverse.node(id), r_k);
        }

        let q = exploitation_probability(k, config);
        let c_rand: f64 = rng.gen();
        let mut eps_for: Option<(NodeId, NewEdge)> = None;
        if c_rand < q {
            if let Some((x_pop, _)) = queue.pop() {
                run.stats.exploit_pops += 1;
                let pop = forward.node(x_pop);
                if let Some(best) = best_reverse_target(spec, &reverse, pop, r_k) {
                    let e = expander.toward(&pop.state, &reverse.node(best).state, Purpose::Exploit, &mut rng);
                    run.record(&e, Purpose::Exploit);
                    if let Some(edge) = e.edge {
                        run.stats.exploit_successes += 1;
                        eps_for = Some((x_pop, edge));
                    }
                }
            }
            if eps_for.is_none() {
                let x_rand = world.sample_state(spec, &mut rng);
                let x_near = forward.nearest(spec, &x_rand);
                let e = expander.toward(&forward.node(x_near).state, &x_rand, Purpose::Explore, &mut rng);
                run.record(&e, Purpose::Explore);
                eps_for = e.edge.map(|edge| (x_near, edge));
            }
        }
        if c_rand >= q || eps_for.is_none() {
            let x_rand = world.sample_state(spec, &mut rng);
            let x_near = forward.nearest(spec, &x_rand);
            let e = expander.random(&forward.node(x_near).state, &x_rand, &mut rng);
            run.record(&e, Purpose::Explore);
            eps_for = e.edge.map(|edge| (x_near, edge));
        }

        if let Some((parent, edge)) = eps_for {
            let x_for = forward.add(parent, edge);
            if world.goal_region_reached(&edge.end_state) {
                run.stats.iterations = k;
                let path = extract_path(&forward, x_for, spec, bundle);
                return run.finish(Some(path), Termination::GoalReached, forward, Some(reverse));
            }
            insert_to_priority_queue(spec, &reverse, &mut queue, &forward, x_for, r_k);
        }
    }
    run.stats.iterations = k;
    run.finish(None, Termination::IterationLimit, forward, Some(reverse))
}

/// Single-tree loop: expand the nearest node toward the goal state with
/// probability `goal_bias`, else toward a uniform sample.
pub(crate) fn run_unidirectional<E: Expander>(
    spec: &SystemSpec,
    world: &World,
    config: &PlannerConfig,
    goal_bias: f64,
    expander: &E,
    bundle: Option<&EdgeBundle>,
) -> PlanReport {
    let mut run = RunState::new(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut forward = Tree::new(Direction::Forward, world.start, world, spec);
    if world.goal_region_reached(&world.start) {
        let path = extract_path(&forward, 0, spec, bundle);
        return run.finish(Some(path), Termination::GoalReached, forward, None);
    }
    let goal = world.goal_state();
    let mut k: u64 = 0;
    while k < config.max_iter {
        k += 1;
        if run.out_of_time(k) {
            run.stats.iterations = k - 1;
            return run.finish(None, Termination::TimeBudget, forward, None);
        }
        let target = if rng.gen::<f64>() < goal_bias { goal } else { world.sample_state(spec, &mut rng) };
        let x_near = forward.nearest(spec, &target);
        let e = expander.toward(&forward.node(x_near).state, &target, Purpose::Exploit, &mut rng);
        run.record(&e, Purpose::Exploit);
        if let Some(edge) = e.edge {
            let id = forward.add(x_near, edge);
            if world.goal_region_reached(&edge.end_state) {
                run.stats.iterations = k;
                let path = extract_path(&forward, id, spec, bundle);
                return run.finish(Some(path), Termination::GoalReached, forward, None);
            }
        }
    }
    run.stats.iterations = k;
    run.finish(None, Termination::IterationLimit, forward, None)
}

/// Runs BBoE on `world` with edges from `bundle`.
pub fn plan_bboe(config: &PlannerConfig, world: &World, bundle: &EdgeBundle) -> Result<PlanReport, ConfigError> {
    let spec = &bundle.system;
    check_inputs(spec, world, config)?;
    let expander = BundleExpander::new(bundle, world, config);
    Ok(run_bidirectional(spec, world, config, &expander, Some(bundle)))
}
