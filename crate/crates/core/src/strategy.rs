//! Edge selection: gather the edges near the current state, sort them by how
//! close their placed end state lands to the desired state, then propagate
//! either the skip-N biased subsequence or a uniform random subset until one
//! is collision-free.

use rand::seq::index;
use rand::Rng;

use crate::bundle::{near_edges, transformed_end, Edge, EdgeBundle, EdgeInstance, Placement};
use crate::dynamics::{distance, wrap_angle, DimKind, State, SystemSpec};
use crate::error::ConfigError;
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionParams {
    /// Probability of propagating the biased subset rather than the random one.
    pub k_bias: f64,
    /// Stride `N` of the biased subset; at least 2.
    pub skip_n: usize,
    /// Neighborhood radius for gathering edges (non-pose submetric).
    pub theta: f64,
}

impl SelectionParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.k_bias) {
            return Err(ConfigError::Invalid(format!("k_bias {} outside [0, 1]", self.k_bias)));
        }
        if self.skip_n < 2 {
            return Err(ConfigError::Invalid(format!("skip_n {} must be at least 2", self.skip_n)));
        }
        if !(self.theta >= 0.0) {
            return Err(ConfigError::Invalid(format!("theta {} must be nonnegative", self.theta)));
        }
        Ok(())
    }
}

/// Neighborhood edges ordered by distance of their placed end state to the target.
#[derive(Clone, Debug)]
pub struct SortedNeighborhood<'a> {
    pub edges: Vec<&'a Edge>,
    /// Sort key of each entry in `edges`.
    pub keys: Vec<f64>,
    pub anchor_pose: State,
}

impl SortedNeighborhood<'_> {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Sorts ascending by `distance(place(e, x_near).end, x_des)`, ties by edge id.
pub fn sort_by_goal_proximity<'a>(
    spec: &SystemSpec,
    near: Vec<&'a Edge>,
    x_near: &State,
    x_des: &State,
) -> SortedNeighborhood<'a> {
    let mut keyed = proximity_keys(spec, near, x_near, x_des);
    keyed.sort_unstable_by(rank_order);
    let (keys, edges) = keyed.into_iter().unzip();
    SortedNeighborhood { edges, keys, anchor_pose: *x_near }
}

fn proximity_keys<'a>(spec: &SystemSpec, near: Vec<&'a Edge>, x_near: &State, x_des: &State) -> Vec<(f64, &'a Edge)> {
    if spec.has_non_pose_dims() {
        near.into_iter().map(|e| (distance(spec, &transformed_end(spec, e, x_near), x_des), e)).collect()
    } else {
        // Pose-only systems share one placement for every edge.
        let placement = Placement::new(spec, &State::zeros(spec.state_dim), x_near);
        near.into_iter()
            .map(|e| {
                let end = if e.waypoints.len() == 1 { *x_near } else { placement.apply(spec, &e.end_state) };
                (distance(spec, &end, x_des), e)
            })
            .collect()
    }
}

fn rank_order(a: &(f64, &Edge), b: &(f64, &Edge)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id))
}

/// Neighborhood edges with packed sort entries `key bits | edge id | slot`.
/// Keys are nonnegative, so comparing the packed integers orders by
/// `(key, id)` exactly like [`sort_by_goal_proximity`].
struct RankedNeighborhood<'a> {
    near: Near<'a>,
    entries: Vec<u128>,
}

enum Near<'a> {
    All(&'a [Edge]),
    Subset(Vec<&'a Edge>),
}

impl<'a> RankedNeighborhood<'a> {
    fn build(bundle: &'a EdgeBundle, x_near: &State, x_des: &State, theta: f64) -> Self {
        let spec = &bundle.system;
        let pack = |key: f64, id: usize, slot: usize| -> u128 {
            debug_assert!(key >= 0.0);
            ((key.to_bits() as u128) << 64) | ((id as u128) << 32) | slot as u128
        };
        if spec.has_non_pose_dims() {
            let near = near_edges(bundle, x_near, theta);
            let entries = near
                .iter()
                .enumerate()
                .map(|(slot, e)| pack(distance(spec, &transformed_end(spec, e, x_near), x_des), e.id, slot))
                .collect();
            return RankedNeighborhood { near: Near::Subset(near), entries };
        }
        let placement = Placement::new(spec, &State::zeros(spec.state_dim), x_near);
        let plain = spec.dims[..3] == [DimKind::X, DimKind::Y, DimKind::Heading];
        let entries = bundle
            .edges
            .iter()
            .enumerate()
            .map(|(slot, e)| {
                let key = if e.waypoints.len() == 1 {
                    distance(spec, x_near, x_des)
                } else if plain {
                    planar_key(spec, &placement, x_near, &e.end_state, x_des)
                } else {
                    distance(spec, &placement.apply(spec, &e.end_state), x_des)
                };
                pack(key, e.id, slot)
            })
            .collect();
        RankedNeighborhood { near: Near::All(&bundle.edges), entries }
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    /// Puts the entries of the given ranks where a full sort would.
    fn select(&mut self, ranks: &[usize]) {
        let mut sorted: Vec<usize> = ranks.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut hi = self.entries.len();
        for &r in sorted.iter().rev() {
            self.entries[..hi].select_nth_unstable(r);
            hi = r;
        }
    }

    fn edge_at(&self, rank: usize) -> &'a Edge {
        let slot = (self.entries[rank] & 0xFFFF_FFFF) as usize;
        match &self.near {
            Near::All(edges) => &edges[slot],
            Near::Subset(near) => near[slot],
        }
    }
}

/// `distance(placement.apply(end), x_des)` for `[x, y, heading]` states,
/// evaluated with the same floating-point operations in the same order.
#[inline]
fn planar_key(spec: &SystemSpec, p: &Placement, pose: &State, end: &State, x_des: &State) -> f64 {
    let (cos, sin) = p.rotation();
    let [px, py] = pose.position();
    let (x, y) = (end[0], end[1]);
    let ex = cos * x - sin * y + px;
    let ey = sin * x + cos * y + py;
    let eh = wrap_angle(end[2] + pose[2]);
    let w = &spec.metric_weights;
    let dx = ex - x_des[0];
    let dy = ey - x_des[1];
    let dh = wrap_angle(eh - x_des[2]);
    let mut sum = 0.0;
    sum += w[0] * dx * dx;
    sum += w[1] * dy * dy;
    sum += w[2] * dh * dh;
    sum.sqrt()
}

/// Indices `{0, N, 2N, ..} ∩ [0, len)` plus `len - 1`, ascending, no duplicates.
pub fn biased_indices(len: usize, skip_n: usize) -> Vec<usize> {
    assert!(skip_n >= 2, "skip_n must be at least 2");
    if len == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..len).step_by(skip_n).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}

pub fn biased_subset<'a>(sorted: &SortedNeighborhood<'a>, skip_n: usize) -> Vec<&'a Edge> {
    biased_indices(sorted.len(), skip_n).into_iter().map(|i| sorted.edges[i]).collect()
}

/// `min(count, len)` distinct edges drawn uniformly without replacement, in draw order.
pub fn random_subset<'a, R: Rng + ?Sized>(sorted: &SortedNeighborhood<'a>, count: usize, rng: &mut R) -> Vec<&'a Edge> {
    let amount = count.min(sorted.len());
    if amount == 0 {
        return Vec::new();
    }
    index::sample(rng, sorted.len(), amount).into_iter().map(|i| sorted.edges[i]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Biased,
    Random,
}

/// Outcome of one propagation procedure call.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub instance: Option<EdgeInstance>,
    /// Edges placed and collision-checked during the call.
    pub attempts: usize,
    /// Which list was propagated; `None` when the neighborhood was empty.
    pub branch: Option<Branch>,
}

impl Propagation {
    fn empty() -> Self {
        Propagation { instance: None, attempts: 0, branch: None }
    }
}

/// True when every waypoint of `edge` placed at `pose` is free. Stops at the
/// first colliding waypoint without allocating.
pub fn edge_is_free(spec: &SystemSpec, world: &World, edge: &Edge, pose: &State) -> bool {
    if world.state_in_collision(pose) {
        return false;
    }
    let placement = Placement::new(spec, edge.start(), pose);
    edge.waypoints[1..].iter().all(|w| !world.state_in_collision(&placement.apply(spec, w)))
}

/// Places `edge` at `pose` and returns the instance only if every waypoint is free.
pub fn place_if_free(spec: &SystemSpec, world: &World, edge: &Edge, pose: &State) -> Option<EdgeInstance> {
    edge_is_free(spec, world, edge, pose).then(|| crate::bundle::transform_edge(spec, edge, pose))
}

/// Sorted, skip-N or randomized propagation from `x_near` toward `x_des`.
///
/// Draws `c ~ U[0, 1)` and uses the biased subset iff `c <= k_bias`, so
/// `k_bias = 1` always takes the biased branch. The random subset has as many
/// edges as the biased one would.
pub fn best_prop_using_edge_bundle<R: Rng + ?Sized>(
    bundle: &EdgeBundle,
    x_near: &State,
    x_des: &State,
    params: &SelectionParams,
    world: &World,
    rng: &mut R,
) -> Propagation {
    let (edge, attempts, branch) = best_edge(bundle, x_near, x_des, params, world, rng);
    let instance = edge.map(|e| crate::bundle::transform_edge(&bundle.system, e, x_near));
    Propagation { instance, attempts, branch }
}

/// Selection half of [`best_prop_using_edge_bundle`]: the first free edge of
/// the chosen list, the number of edges checked, and the branch taken.
pub(crate) fn best_edge<'a, R: Rng + ?Sized>(
    bundle: &'a EdgeBundle,
    x_near: &State,
    x_des: &State,
    params: &SelectionParams,
    world: &World,
    rng: &mut R,
) -> (Option<&'a Edge>, usize, Option<Branch>) {
    let spec = &bundle.system;
    let mut ranked = RankedNeighborhood::build(bundle, x_near, x_des, params.theta);
    let len = ranked.len();
    if len == 0 {
        return (None, 0, None);
    }
    let c_rand: f64 = rng.gen();
    // Same ranks as `biased_subset` / `random_subset` on the fully sorted list.
    let (branch, ranks) = if c_rand <= params.k_bias {
        (Branch::Biased, biased_indices(len, params.skip_n))
    } else {
        let count = biased_indices(len, params.skip_n).len().min(len);
        (Branch::Random, index::sample(rng, len, count).into_vec())
    };
    ranked.select(&ranks);
    let list = ranks.iter().map(|&r| ranked.edge_at(r));
    let mut attempts = 0;
    for edge in list {
        attempts += 1;
        if edge_is_free(spec, world, edge, x_near) {
            return (Some(edge), attempts, Some(branch));
        }
    }
    (None, attempts, Some(branch))
}

/// One uniformly chosen neighborhood edge, placed at `x_near` and checked once.
pub fn random_prop_using_edge_bundle<R: Rng + ?Sized>(
    bundle: &EdgeBundle,
    x_near: &State,
    theta: f64,
    world: &World,
    rng: &mut R,
) -> Propagation {
    match random_edge(bundle, x_near, theta, rng) {
        None => Propagation::empty(),
        Some(edge) => Propagation {
            instance: place_if_free(&bundle.system, world, edge, x_near),
            attempts: 1,
            branch: None,
        },
    }
}

/// Uniform pick from the neighborhood of `x_near`.
pub(crate) fn random_edge<'a, R: Rng + ?Sized>(bundle: &'a EdgeBundle, x_near: &State, theta: f64, rng: &mut R) -> Option<&'a Edge> {
    if bundle.system.has_non_pose_dims() {
        let near = near_edges(bundle, x_near, theta);
        if near.is_empty() {
            return None;
        }
        Some(near[rng.gen_range(0..near.len())])
    } else {
        Some(&bundle.edges[rng.gen_range(0..bundle.len())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{generate_bundle, transform_edge};
    use crate::dynamics::SystemId;
    use crate::world::{Bounds, Obstacle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn open_world() -> World {
        World::empty(
            SystemId::DiffDrive,
            Bounds { min: [-100.0, -100.0], max: [100.0, 100.0] },
            State::new(&[0.0, 0.0, 0.0]),
            [50.0, 50.0],
            1.0,
            0.3,
        )
        .unwrap()
    }

    #[test]
    fn biased_index_rule() {
        assert_eq!(biased_indices(12, 4), vec![0, 4, 8, 11]);
        assert_eq!(biased_indices(1, 4), vec![0]);
        assert_eq!(biased_indices(0, 4), Vec::<usize>::new());
        // len = M*N + 1 gives exactly M + 1 entries ending at MN.
        assert_eq!(biased_indices(13, 4), vec![0, 4, 8, 12]);
        for len in 1..200 {
            for n in 2..30 {
                let idx = biased_indices(len, n);
                let m = len.div_ceil(n);
                assert!(idx.len() == m || idx.len() == m + 1);
                assert!(idx.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(*idx.last().unwrap(), len - 1);
            }
        }
    }

    #[test]
    fn sort_empty_and_stable() {
        let spec = SystemSpec::diff_drive();
        let x = State::zeros(3);
        let s = sort_by_goal_proximity(&spec, Vec::new(), &x, &x);
        assert!(s.is_empty());

        let bundle = generate_bundle(&spec, 50, 0.05, 4).unwrap();
        let target = State::new(&[2.0, 1.0, 0.5]);
        let once = sort_by_goal_proximity(&spec, bundle.edges.iter().collect(), &x, &target);
        let twice = sort_by_goal_proximity(&spec, once.edges.clone(), &x, &target);
        let ids = |s: &SortedNeighborhood| s.edges.iter().map(|e| e.id).collect::<Vec<_>>();
        assert_eq!(ids(&once), ids(&twice));
        assert!(once.keys.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sort_ties_break_by_id() {
        let spec = SystemSpec::diff_drive();
        let bundle = generate_bundle(&spec, 5, 0.05, 4).unwrap();
        // Same edge repeated under different ids gives identical keys.
        let mut edges: Vec<Edge> = (0..5).map(|i| Edge { id: 4 - i, ..bundle.edges[0].clone() }).collect();
        edges.reverse();
        edges.swap(1, 3);
        let s = sort_by_goal_proximity(&spec, edges.iter().collect(), &State::zeros(3), &State::new(&[1.0, 0.0, 0.0]));
        assert_eq!(s.edges.iter().map(|e| e.id).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn sort_matches_brute_force() {
        let spec = SystemSpec::car_with_trailer();
        let bundle = generate_bundle(&spec, 50, 0.05, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x_near = State::new(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-PI..PI), 0.0]);
            let x_des = State::new(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-PI..PI), 1.0]);
            let got = sort_by_goal_proximity(&spec, bundle.edges.iter().collect(), &x_near, &x_des);
            let mut oracle: Vec<(f64, usize)> = bundle
                .edges
                .iter()
                .map(|e| (distance(&spec, &transform_edge(&spec, e, &x_near).end_state, &x_des), e.id))
                .collect();
            oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            assert_eq!(got.edges.iter().map(|e| e.id).collect::<Vec<_>>(), oracle.iter().map(|o| o.1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn random_subset_sizes_and_uniformity() {
        let spec = SystemSpec::diff_drive();
        let bundle = generate_bundle(&spec, 10, 0.05, 4).unwrap();
        let sorted = sort_by_goal_proximity(&spec, bundle.edges.iter().collect(), &State::zeros(3), &State::zeros(3));
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        assert!(random_subset(&sorted, 0, &mut rng).is_empty());
        let mut all: Vec<usize> = random_subset(&sorted, 25, &mut rng).iter().map(|e| e.id).collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());

        let mut counts = [0usize; 10];
        let draws = 10_000;
        for _ in 0..draws {
            counts[random_subset(&sorted, 1, &mut rng)[0].id] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.1).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn best_prop_free_world_returns_argmin() {
        let spec = SystemSpec::diff_drive();
        let bundle = generate_bundle(&spec, 200, 0.05, 21).unwrap();
        let world = open_world();
        let params = SelectionParams { k_bias: 1.0, skip_n: 10, theta: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x_near = State::new(&[1.0, -2.0, 0.7]);
        let x_des = State::new(&[3.0, 0.0, 0.0]);
        let p = best_prop_using_edge_bundle(&bundle, &x_near, &x_des, &params, &world, &mut rng);
        let best = bundle
            .edges
            .iter()
            .min_by(|a, b| {
                let da = distance(&spec, &transform_edge(&spec, a, &x_near).end_state, &x_des);
                let db = distance(&spec, &transform_edge(&spec, b, &x_near).end_state, &x_des);
                da.total_cmp(&db)
            })
            .unwrap();
        let inst = p.instance.unwrap();
        assert_eq!(inst.source_edge_id, Some(best.id));
        assert_eq!(p.attempts, 1);
        assert_eq!(p.branch, Some(Branch::Biased));
        assert_eq!(inst.waypoints[0], x_near);
    }

    #[test]
    fn k_bias_one_never_random() {
        let spec = SystemSpec::diff_drive();
        let bundle = generate_bundle(&spec, 100, 0.05, 21).unwrap();
        let world = open_world();
        let params = SelectionParams { k_bias: 1.0, skip_n: 7, theta: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let x_des = world.sample_state(&spec, &mut rng);
            let p = best_prop_using_edge_bundle(&bundle, &State::zeros(3), &x_des, &params, &world, &mut rng);
            assert_eq!(p.branch, Some(Branch::Biased));
        }
        let params = SelectionParams { k_bias: 0.0, ..params };
        let randoms = (0..500)
            .filter(|_| {
                let x_des = world.sample_state(&spec, &mut rng);
                best_prop_using_edge_bundle(&bundle, &State::zeros(3), &x_des, &params, &world, &mut rng).branch
                    == Some(Branch::Random)
            })
            .count();
        assert_eq!(randoms, 500);
    }

    #[test]
    fn empty_neighborhood_gives_none() {
        let spec = SystemSpec::car_with_trailer();
        let bundle = generate_bundle(&spec, 100, 0.05, 2).unwrap();
        let world = World::empty(
            SystemId::CarWithTrailer,
            Bounds { min: [-50.0, -50.0], max: [50.0, 50.0] },
            State::new(&[0.0, 0.0, 0.0, 0.0]),
            [10.0, 10.0],
            1.0,
            0.3,
        )
        .unwrap();
        let params = SelectionParams { k_bias: 1.0, skip_n: 4, theta: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Hitch angle far outside the sampled range: nothing nearby.
        let x = State::new(&[0.0, 0.0, 0.0, 3.0]);
        let p = best_prop_using_edge_bundle(&bundle, &x, &x, &params, &world, &mut rng);
        assert!(p.instance.is_none() && p.attempts == 0 && p.branch.is_none());
        let p = random_prop_using_edge_bundle(&bundle, &x, 0.0, &world, &mut rng);
        assert!(p.instance.is_none() && p.attempts == 0);
    }

    #[test]
    fn random_prop_open_world_always_succeeds() {
        let spec = SystemSpec::diff_drive();
        let bundle = generate_bundle(&spec, 100, 0.05, 2).unwrap();
        let world = open_world();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let x = world.sample_state(&spec, &mut rng);
            let x = State::new(&[x[0] * 0.5, x[1] * 0.5, x[2]]);
            let p = random_prop_using_edge_bundle(&bundle, &x, 0.5, &world, &mut rng);
            assert_eq!(p.attempts, 1);
            assert_eq!(p.instance.unwrap().waypoints[0], x);
        }
    }

    #[test]
    fn walled_in_state_never_propagates() {
        let mut spec = SystemSpec::diff_drive();
        spec.control_bounds = vec![(0.5, 1.0), (-1.0, 1.0)];
        spec.duration_bounds = (2.0, 3.0);
        let bundle = generate_bundle(&spec, 300, 0.05, 5).unwrap();
        let centre = [5.0, 5.0];
        let ring: Vec<Obstacle> = (0..40)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 40.0;
                Obstacle::Circle { center: [centre[0] + 0.6 * a.cos(), centre[1] + 0.6 * a.sin()], radius: 0.3 }
            })
            .collect();
        let x_near = State::new(&[centre[0], centre[1], 0.4]);
        let world = World::new(SystemId::DiffDrive, Bounds { min: [0.0, 0.0], max: [10.0, 10.0] }, ring, x_near, [9.0, 9.0], 0.5, 0.1)
            .unwrap();
        // Exhaustive check: every edge collides from this state.
        assert!(bundle.edges.iter().all(|e| !world.segment_collision_free(&transform_edge(&spec, e, &x_near))));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = random_prop_using_edge_bundle(&bundle, &x_near, 0.5, &world, &mut rng);
            assert!(p.instance.is_none());
            assert_eq!(p.attempts, 1);
        }
    }

    #[test]
    fn place_if_free_agrees_with_full_check() {
        let spec = SystemSpec::diff_drive();
        let bundle = generate_bundle(&spec, 200, 0.05, 9).unwrap();
        let world = crate::world::generate_scenario(crate::world::Level::Hard, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let x = world.sample_state(&spec, &mut rng);
            if world.state_in_collision(&x) {
                continue;
            }
            let e = &bundle.edges[rng.gen_range(0..bundle.len())];
            let full = transform_edge(&spec, e, &x);
            let fast = place_if_free(&spec, &world, e, &x);
            assert_eq!(fast.is_some(), world.segment_collision_free(&full));
            if let Some(inst) = fast {
                assert_eq!(inst, full);
            }
        }
    }

    /// Literal sort-then-subset procedure, for comparison with `best_edge`.
    fn reference_best<'a>(
        bundle: &'a EdgeBundle,
        x_near: &State,
        x_des: &State,
        params: &SelectionParams,
        world: &World,
        rng: &mut ChaCha8Rng,
    ) -> (Option<usize>, usize, Option<Branch>) {
        let near = near_edges(bundle, x_near, params.theta);
        if near.is_empty() {
            return (None, 0, None);
        }
        let sorted = sort_by_goal_proximity(&bundle.system, near, x_near, x_des);
        let c: f64 = rng.gen();
        let (branch, list) = if c <= params.k_bias {
            (Branch::Biased, biased_subset(&sorted, params.skip_n))
        } else {
            let n = biased_indices(sorted.len(), params.skip_n).len();
            (Branch::Random, random_subset(&sorted, n, rng))
        };
        for (i, e) in list.iter().enumerate() {
            if world.segment_collision_free(&transform_edge(&bundle.system, e, x_near)) {
                return (Some(e.id), i + 1, Some(branch));
            }
        }
        (None, list.len(), Some(branch))
    }

    #[test]
    fn rank_selection_matches_full_sort() {
        for (spec, level) in [(SystemSpec::diff_drive(), crate::world::Level::VeryHard), (SystemSpec::car_with_trailer(), crate::world::Level::Hard)] {
            let bundle = generate_bundle(&spec, 600, 0.05, 13).unwrap();
            let world = crate::world::generate_scenario_for(spec.id, level.difficulty(), 2).unwrap();
            let mut pick = ChaCha8Rng::seed_from_u64(5);
            for trial in 0..300 {
                let x_near = world.sample_state(&spec, &mut pick);
                if world.state_in_collision(&x_near) {
                    continue;
                }
                let x_des = world.sample_state(&spec, &mut pick);
                let params = SelectionParams { k_bias: 0.5, skip_n: [2, 7, 50, 599][trial % 4], theta: 0.6 };
                let mut a = ChaCha8Rng::seed_from_u64(trial as u64);
                let mut b = a.clone();
                let (edge, attempts, branch) = best_edge(&bundle, &x_near, &x_des, &params, &world, &mut a);
                let expected = reference_best(&bundle, &x_near, &x_des, &params, &world, &mut b);
                assert_eq!((edge.map(|e| e.id), attempts, branch), expected);
                assert_eq!(a, b, "rng streams must stay aligned");
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(SelectionParams { k_bias: 0.85, skip_n: 2, theta: 0.0 }.validate().is_ok());
        assert!(SelectionParams { k_bias: 1.2, skip_n: 2, theta: 0.0 }.validate().is_err());
        assert!(SelectionParams { k_bias: 0.5, skip_n: 1, theta: 0.0 }.validate().is_err());
        assert!(SelectionParams { k_bias: 0.5, skip_n: 3, theta: -1.0 }.validate().is_err());
    }
}
