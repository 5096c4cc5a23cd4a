//! Planar workspaces: obstacles, collision checks, goal test and seeded
//! scenario generation.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::EdgeInstance;
use crate::dynamics::{self, State, SystemId, SystemSpec};
use crate::error::WorldError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstacle {
    Circle { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
}

impl Obstacle {
    fn validate(&self) -> Result<(), WorldError> {
        match *self {
            Obstacle::Circle { radius, .. } if !(radius > 0.0) => {
                Err(WorldError::Invalid(format!("circle radius {radius} must be positive")))
            }
            Obstacle::Rect { min, max } if !(min[0] < max[0] && min[1] < max[1]) => {
                Err(WorldError::Invalid(format!("rect min {min:?} not below max {max:?}")))
            }
            _ => Ok(()),
        }
    }

    /// Open intersection test with a disc: touching is not a collision.
    #[inline]
    pub fn intersects_disc(&self, p: [f64; 2], r: f64) -> bool {
        match *self {
            Obstacle::Circle { center, radius } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let reach = radius + r;
                dx * dx + dy * dy < reach * reach
            }
            Obstacle::Rect { min, max } => {
                let cx = p[0].clamp(min[0], max[0]);
                let cy = p[1].clamp(min[1], max[1]);
                let (dx, dy) = (p[0] - cx, p[1] - cy);
                let d2 = dx * dx + dy * dy;
                if r > 0.0 {
                    d2 < r * r
                } else {
                    p[0] > min[0] && p[0] < max[0] && p[1] > min[1] && p[1] < max[1]
                }
            }
        }
    }

    /// Axis-aligned bounding box `[min, max]`.
    fn aabb(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Obstacle::Circle { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            Obstacle::Rect { min, max } => (min, max),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

/// On-disk shape of a world (JSON).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldFile {
    #[serde(default = "default_system")]
    pub system: SystemId,
    pub bounds: Bounds,
    pub obstacles: Vec<Obstacle>,
    pub start: Vec<f64>,
    pub goal_center: [f64; 2],
    pub goal_radius: f64,
    pub robot_radius: f64,
}

fn default_system() -> SystemId {
    SystemId::DiffDrive
}

/// Uniform-grid broadphase over obstacle bounding boxes inflated by the robot radius.
#[derive(Clone)]
struct ObstacleGrid {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl fmt::Debug for ObstacleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObstacleGrid({}x{} cells of {} m)", self.nx, self.ny, self.cell)
    }
}

impl ObstacleGrid {
    fn build(bounds: &Bounds, obstacles: &[Obstacle], inflate: f64) -> Self {
        let cell = 1.0;
        let nx = ((bounds.width() / cell).ceil() as usize).max(1);
        let ny = ((bounds.height() / cell).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); nx * ny];
        let mut grid = ObstacleGrid { origin: bounds.min, cell, nx, ny, cells: Vec::new() };
        for (i, obs) in obstacles.iter().enumerate() {
            let (lo, hi) = obs.aabb();
            let (x0, y0) = grid.cell_of([lo[0] - inflate, lo[1] - inflate]);
            let (x1, y1) = grid.cell_of([hi[0] + inflate, hi[1] + inflate]);
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    cells[cy * nx + cx].push(i as u32);
                }
            }
        }
        grid.cells = cells;
        grid
    }

    #[inline]
    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let fx = ((p[0] - self.origin[0]) / self.cell).floor();
        let fy = ((p[1] - self.origin[1]) / self.cell).floor();
        let cx = (fx.max(0.0) as usize).min(self.nx - 1);
        let cy = (fy.max(0.0) as usize).min(self.ny - 1);
        (cx, cy)
    }

    #[inline]
    fn candidates(&self, p: [f64; 2]) -> &[u32] {
        let (cx, cy) = self.cell_of(p);
        &self.cells[cy * self.nx + cx]
    }
}

/// A bounded 2D workspace with obstacles, a start state and a circular goal region.
#[derive(Clone, Debug)]
pub struct World {
    pub system: SystemId,
    pub bounds: Bounds,
    pub obstacles: Vec<Obstacle>,
    pub start: State,
    pub goal_center: [f64; 2],
    pub goal_radius: f64,
    pub robot_radius: f64,
    grid: ObstacleGrid,
}

impl PartialEq for World {
    fn eq(&self, other: &Self) -> bool {
        self.system == other.system
            && self.bounds == other.bounds
            && self.obstacles == other.obstacles
            && self.start == other.start
            && self.goal_center == other.goal_center
            && self.goal_radius == other.goal_radius
            && self.robot_radius == other.robot_radius
    }
}

impl World {
    pub fn new(
        system: SystemId,
        bounds: Bounds,
        obstacles: Vec<Obstacle>,
        start: State,
        goal_center: [f64; 2],
        goal_radius: f64,
        robot_radius: f64,
    ) -> Result<Self, WorldError> {
        if !(bounds.min[0] < bounds.max[0] && bounds.min[1] < bounds.max[1]) {
            return Err(WorldError::Invalid("degenerate bounds".into()));
        }
        for obs in &obstacles {
            obs.validate()?;
        }
        if !(robot_radius >= 0.0) || !(goal_radius > 0.0) {
            return Err(WorldError::Invalid("robot radius must be >= 0 and goal radius > 0".into()));
        }
        let spec = SystemSpec::for_id(system);
        if start.dim() != spec.state_dim {
            return Err(WorldError::Invalid(format!(
                "start has {} components, system {system} needs {}",
                start.dim(),
                spec.state_dim
            )));
        }
        if !bounds.contains(start.position()) || !bounds.contains(goal_center) {
            return Err(WorldError::Invalid("start and goal must lie inside the bounds".into()));
        }
        let grid = ObstacleGrid::build(&bounds, &obstacles, robot_radius);
        let world = World { system, bounds, obstacles, start, goal_center, goal_radius, robot_radius, grid };
        if world.state_in_collision(&start) {
            return Err(WorldError::Invalid("start state is in collision".into()));
        }
        Ok(world)
    }

    /// An obstacle-free world.
    pub fn empty(system: SystemId, bounds: Bounds, start: State, goal_center: [f64; 2], goal_radius: f64, robot_radius: f64) -> Result<Self, WorldError> {
        World::new(system, bounds, Vec::new(), start, goal_center, goal_radius, robot_radius)
    }

    pub fn spec(&self) -> SystemSpec {
        SystemSpec::for_id(self.system)
    }

    /// Robot disc at the state's position intersects an obstacle or leaves the bounds.
    #[inline]
    pub fn state_in_collision(&self, x: &State) -> bool {
        self.position_in_collision(x.position())
    }

    #[inline]
    pub fn position_in_collision(&self, p: [f64; 2]) -> bool {
        let r = self.robot_radius;
        if p[0] - r < self.bounds.min[0]
            || p[0] + r > self.bounds.max[0]
            || p[1] - r < self.bounds.min[1]
            || p[1] + r > self.bounds.max[1]
        {
            return true;
        }
        self.grid
            .candidates(p)
            .iter()
            .any(|&i| self.obstacles[i as usize].intersects_disc(p, r))
    }

    /// Every waypoint is collision-free. No interpolation between waypoints.
    pub fn segment_collision_free(&self, instance: &EdgeInstance) -> bool {
        self.waypoints_collision_free(&instance.waypoints)
    }

    pub fn waypoints_collision_free(&self, waypoints: &[State]) -> bool {
        !waypoints.is_empty() && waypoints.iter().all(|w| !self.state_in_collision(w))
    }

    /// Closed disc test on workspace position; heading is unconstrained.
    #[inline]
    pub fn goal_region_reached(&self, x: &State) -> bool {
        let [px, py] = x.position();
        let (dx, dy) = (px - self.goal_center[0], py - self.goal_center[1]);
        (dx * dx + dy * dy).sqrt() <= self.goal_radius
    }

    /// Root state of the reverse tree: goal center, heading along the
    /// start-to-goal direction, other components zero relative to it.
    pub fn goal_state(&self) -> State {
        let spec = self.spec();
        let [sx, sy] = self.start.position();
        let heading = (self.goal_center[1] - sy).atan2(self.goal_center[0] - sx);
        let mut x = State::zeros(spec.state_dim);
        x[0] = self.goal_center[0];
        x[1] = self.goal_center[1];
        x[spec.heading_dim()] = dynamics::wrap_angle(heading);
        for d in spec.non_pose_dims() {
            if spec.dims[d].is_angle() {
                x[d] = dynamics::wrap_angle(heading);
            }
        }
        x
    }

    /// Uniform random state over the bounds.
    pub fn sample_state<R: Rng + ?Sized>(&self, spec: &SystemSpec, rng: &mut R) -> State {
        dynamics::sample_state(spec, self.bounds.min, self.bounds.max, rng)
    }

    pub fn to_file(&self) -> WorldFile {
        WorldFile {
            system: self.system,
            bounds: self.bounds,
            obstacles: self.obstacles.clone(),
            start: self.start.as_slice().to_vec(),
            goal_center: self.goal_center,
            goal_radius: self.goal_radius,
            robot_radius: self.robot_radius,
        }
    }

    pub fn from_file(file: WorldFile) -> Result<Self, WorldError> {
        if file.start.is_empty() || file.start.len() > dynamics::MAX_STATE_DIM {
            return Err(WorldError::Invalid(format!("start has {} components", file.start.len())));
        }
        World::new(
            file.system,
            file.bounds,
            file.obstacles,
            State::new(&file.start),
            file.goal_center,
            file.goal_radius,
            file.robot_radius,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("world serializes")
    }

    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io { path: path.to_path_buf(), source })?;
        let file: WorldFile =
            serde_json::from_str(&text).map_err(|source| WorldError::Parse { path: path.to_path_buf(), source })?;
        World::from_file(file)
    }

    pub fn save(&self, path: &Path) -> Result<(), WorldError> {
        std::fs::write(path, self.to_json()).map_err(|source| WorldError::Io { path: path.to_path_buf(), source })
    }
}

/// Monte-Carlo estimate of the fraction of the bounds where the robot disc is free.
pub fn free_space_fraction(world: &World, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free = (0..samples)
        .filter(|_| {
            let p = [
                dynamics::uniform(&mut rng, world.bounds.min[0], world.bounds.max[0]),
                dynamics::uniform(&mut rng, world.bounds.min[1], world.bounds.max[1]),
            ];
            !world.position_in_collision(p)
        })
        .count();
    free as f64 / samples as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Easy,
    Medium,
    Hard,
    VeryHard,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Easy, Level::Medium, Level::Hard, Level::VeryHard];

    pub fn name(self) -> &'static str {
        match self {
            Level::Easy => "easy",
            Level::Medium => "medium",
            Level::Hard => "hard",
            Level::VeryHard => "very-hard",
        }
    }

    pub fn difficulty(self) -> Difficulty {
        let obstacle_count = match self {
            Level::Easy => 8,
            Level::Medium => 20,
            Level::Hard => 40,
            Level::VeryHard => 70,
        };
        Difficulty { level: self, obstacle_count, size_range: (0.4, 1.5) }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Level::ALL
            .into_iter()
            .find(|l| l.name() == norm || (norm == "veryhard" && *l == Level::VeryHard))
            .ok_or_else(|| format!("unknown difficulty `{s}` (expected easy, medium, hard or very-hard)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Difficulty {
    pub level: Level,
    pub obstacle_count: usize,
    /// Circle radius / rectangle half-extent range in m.
    pub size_range: (f64, f64),
}

pub const SCENARIO_SIZE: f64 = 20.0;
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.3;
pub const DEFAULT_GOAL_RADIUS: f64 = 1.0;
const CORNER_OFFSET: f64 = 1.5;
const START_CLEARANCE: f64 = 1.0;
const MAX_REJECTIONS: usize = 10_000;
const CONNECTIVITY_CELL: f64 = 0.1;

/// Seeded DiffDrive scenario.
pub fn generate_scenario(level: Level, seed: u64) -> Result<World, WorldError> {
    generate_scenario_for(SystemId::DiffDrive, level.difficulty(), seed)
}

/// Places `obstacle_count` obstacles in a 20 m x 20 m square with start and
/// goal in opposite corners. An obstacle is redrawn if it crowds the start,
/// covers the goal center, or cuts the start off from the goal region on a
/// 0.1 m free-space grid. Obstacles are drawn from one stream, so a harder
/// level with the same seed contains every obstacle of an easier one.
pub fn generate_scenario_for(system: SystemId, difficulty: Difficulty, seed: u64) -> Result<World, WorldError> {
    let spec = SystemSpec::for_id(system);
    let bounds = Bounds { min: [0.0, 0.0], max: [SCENARIO_SIZE, SCENARIO_SIZE] };
    let robot_radius = DEFAULT_ROBOT_RADIUS;
    let goal_radius = DEFAULT_GOAL_RADIUS;
    let start_pos = [CORNER_OFFSET, CORNER_OFFSET];
    let goal_center = [SCENARIO_SIZE - CORNER_OFFSET, SCENARIO_SIZE - CORNER_OFFSET];
    let mut start = State::zeros(spec.state_dim);
    start[0] = start_pos[0];
    start[1] = start_pos[1];
    start[spec.heading_dim()] = PI / 4.0;
    for d in spec.non_pose_dims() {
        if spec.dims[d].is_angle() {
            start[d] = PI / 4.0;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0B57_AC1E_0000);
    let mut occupancy = Occupancy::new(&bounds, robot_radius);
    let mut obstacles = Vec::with_capacity(difficulty.obstacle_count);
    let mut rejections = 0;
    let (lo, hi) = difficulty.size_range;
    while obstacles.len() < difficulty.obstacle_count {
        let center = [
            dynamics::uniform(&mut rng, bounds.min[0], bounds.max[0]),
            dynamics::uniform(&mut rng, bounds.min[1], bounds.max[1]),
        ];
        let obs = if rng.gen::<bool>() {
            Obstacle::Circle { center, radius: dynamics::uniform(&mut rng, lo, hi) }
        } else {
            let (hw, hh) = (dynamics::uniform(&mut rng, lo, hi), dynamics::uniform(&mut rng, lo, hi));
            Obstacle::Rect { min: [center[0] - hw, center[1] - hh], max: [center[0] + hw, center[1] + hh] }
        };
        let blocks_start = obs.intersects_disc(start_pos, robot_radius + START_CLEARANCE);
        let covers_goal = obs.intersects_disc(goal_center, robot_radius);
        let accepted = !blocks_start && !covers_goal && {
            let mut trial = occupancy.clone();
            trial.add(&obs);
            if trial.connected(start_pos, goal_center, goal_radius) {
                occupancy = trial;
                true
            } else {
                false
            }
        };
        if accepted {
            obstacles.push(obs);
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(WorldError::Infeasible { attempts: rejections });
            }
        }
    }
    World::new(system, bounds, obstacles, start, goal_center, goal_radius, robot_radius)
}

/// Free-space raster for the robot disc, used to keep generated scenarios solvable.
#[derive(Clone)]
struct Occupancy {
    origin: [f64; 2],
    nx: usize,
    ny: usize,
    robot_radius: f64,
    blocked: Vec<bool>,
}

impl Occupancy {
    fn new(bounds: &Bounds, robot_radius: f64) -> Self {
        let nx = (bounds.width() / CONNECTIVITY_CELL).round() as usize;
        let ny = (bounds.height() / CONNECTIVITY_CELL).round() as usize;
        let mut occ = Occupancy { origin: bounds.min, nx, ny, robot_radius, blocked: vec![false; nx * ny] };
        for iy in 0..ny {
            for ix in 0..nx {
                let [x, y] = occ.center(ix, iy);
                let out = x - robot_radius < bounds.min[0]
                    || x + robot_radius > bounds.max[0]
                    || y - robot_radius < bounds.min[1]
                    || y + robot_radius > bounds.max[1];
                occ.blocked[iy * nx + ix] = out;
            }
        }
        occ
    }

    fn center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * CONNECTIVITY_CELL,
            self.origin[1] + (iy as f64 + 0.5) * CONNECTIVITY_CELL,
        ]
    }

    fn index_range(&self, lo: f64, hi: f64, origin: f64, n: usize) -> (usize, usize) {
        let a = ((lo - origin) / CONNECTIVITY_CELL).floor().max(0.0) as usize;
        let b = (((hi - origin) / CONNECTIVITY_CELL).ceil().max(0.0) as usize).min(n.saturating_sub(1));
        (a.min(n.saturating_sub(1)), b)
    }

    fn add(&mut self, obs: &Obstacle) {
        let (lo, hi) = obs.aabb();
        let r = self.robot_radius;
        let (x0, x1) = self.index_range(lo[0] - r, hi[0] + r, self.origin[0], self.nx);
        let (y0, y1) = self.index_range(lo[1] - r, hi[1] + r, self.origin[1], self.ny);
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                if obs.intersects_disc(self.center(ix, iy), r) {
                    self.blocked[iy * self.nx + ix] = true;
                }
            }
        }
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let ix = (((p[0] - self.origin[0]) / CONNECTIVITY_CELL).floor().max(0.0) as usize).min(self.nx - 1);
        let iy = (((p[1] - self.origin[1]) / CONNECTIVITY_CELL).floor().max(0.0) as usize).min(self.ny - 1);
        (ix, iy)
    }

    /// 4-connected flood fill from the start cell to any free cell inside the goal disc.
    fn connected(&self, start: [f64; 2], goal: [f64; 2], goal_radius: f64) -> bool {
        let (sx, sy) = self.cell_of(start);
        let s = sy * self.nx + sx;
        if self.blocked[s] {
            return false;
        }
        let mut seen = vec![false; self.blocked.len()];
        let mut queue = VecDeque::new();
        seen[s] = true;
        queue.push_back((sx, sy));
        while let Some((ix, iy)) = queue.pop_front() {
            let c = self.center(ix, iy);
            if (c[0] - goal[0]).hypot(c[1] - goal[1]) <= goal_radius {
                return true;
            }
            let mut visit = |jx: usize, jy: usize| {
                let j = jy * self.nx + jx;
                if !seen[j] && !self.blocked[j] {
                    seen[j] = true;
                    queue.push_back((jx, jy));
                }
            };
            if ix > 0 {
                visit(ix - 1, iy);
            }
            if ix + 1 < self.nx {
                visit(ix + 1, iy);
            }
            if iy > 0 {
                visit(ix, iy - 1);
            }
            if iy + 1 < self.ny {
                visit(ix, iy + 1);
            }
        }
        false
    }
}
