//! Precomputed edge bundles.
//!
//! Edges are generated once, offline, in a canonical frame where the pose
//! components of the start state are zero. At plan time an edge is placed at
//! the robot's current pose by a rigid SE(2) transform; non-pose components
//! are shifted so the placed edge starts exactly at the current state.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    self, arc_length, integrate, sample_control, sample_duration, uniform, wrap_angle, Control, DimKind, State,
    SystemId, SystemSpec,
};
use crate::error::BundleError;

pub const BUNDLE_MAGIC: &[u8; 4] = b"BBOE";
pub const BUNDLE_VERSION: u32 = 1;

/// One precomputed forward propagation in the canonical frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub control: Control,
    pub duration: f64,
    pub waypoints: Vec<State>,
    pub end_state: State,
    /// Sum of workspace-position steps along the waypoints, in m.
    pub arc_length: f64,
}

impl Edge {
    fn from_waypoints(id: usize, control: Control, duration: f64, waypoints: Vec<State>) -> Self {
        let end_state = *waypoints.last().expect("edge has waypoints");
        let arc_length = arc_length(&waypoints);
        Edge { id, control, duration, waypoints, end_state, arc_length }
    }

    #[inline]
    pub fn start(&self) -> &State {
        &self.waypoints[0]
    }
}

/// The full set of edges for one system.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeBundle {
    pub system: SystemSpec,
    pub edges: Vec<Edge>,
    pub dt: f64,
    pub seed: u64,
    pub version: u32,
}

impl EdgeBundle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// An edge placed in the world frame at some tree node.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeInstance {
    /// Bundle edge this instance was placed from; `None` for online rollouts.
    pub source_edge_id: Option<usize>,
    pub waypoints: Vec<State>,
    pub end_state: State,
    pub arc_length: f64,
}

impl EdgeInstance {
    /// Wraps a freshly integrated trajectory (online propagation).
    pub fn from_rollout(waypoints: Vec<State>) -> Self {
        let end_state = *waypoints.last().expect("rollout has waypoints");
        let arc_length = arc_length(&waypoints);
        EdgeInstance { source_edge_id: None, waypoints, end_state, arc_length }
    }

    #[inline]
    pub fn start(&self) -> &State {
        &self.waypoints[0]
    }
}

/// Rigid placement of canonical states at a world pose.
#[derive(Clone, Copy, Debug)]
pub struct Placement {
    cos: f64,
    sin: f64,
    px: f64,
    py: f64,
    heading: f64,
    /// Additive shift per non-pose dimension (zero for pose dimensions).
    shift: [f64; dynamics::MAX_STATE_DIM],
}

impl Placement {
    /// Placement that maps `canonical_start` onto `pose`.
    pub fn new(spec: &SystemSpec, canonical_start: &State, pose: &State) -> Self {
        let heading = pose[spec.heading_dim()];
        let mut shift = [0.0; dynamics::MAX_STATE_DIM];
        for d in spec.non_pose_dims() {
            shift[d] = pose[d] - canonical_start[d];
        }
        let [px, py] = pose.position();
        Placement { cos: heading.cos(), sin: heading.sin(), px, py, heading, shift }
    }

    /// `(cos, sin)` of the pose heading.
    #[inline]
    pub fn rotation(&self) -> (f64, f64) {
        (self.cos, self.sin)
    }

    #[inline]
    pub fn apply(&self, spec: &SystemSpec, s: &State) -> State {
        let mut out = *s;
        let [x, y] = s.position();
        out[0] = self.cos * x - self.sin * y + self.px;
        out[1] = self.sin * x + self.cos * y + self.py;
        for (d, kind) in spec.dims.iter().enumerate().skip(2) {
            match kind {
                DimKind::Heading => out[d] = wrap_angle(s[d] + self.heading),
                DimKind::BodyAngle { .. } => out[d] = wrap_angle(s[d] + self.shift[d]),
                DimKind::Scalar { .. } => out[d] = s[d] + self.shift[d],
                DimKind::X | DimKind::Y => {}
            }
        }
        out
    }

    /// Inverse of [`Placement::apply`].
    pub fn invert(&self, spec: &SystemSpec, s: &State) -> State {
        let mut out = *s;
        let (dx, dy) = (s[0] - self.px, s[1] - self.py);
        out[0] = self.cos * dx + self.sin * dy;
        out[1] = -self.sin * dx + self.cos * dy;
        for (d, kind) in spec.dims.iter().enumerate().skip(2) {
            match kind {
                DimKind::Heading => out[d] = wrap_angle(s[d] - self.heading),
                DimKind::BodyAngle { .. } => out[d] = wrap_angle(s[d] - self.shift[d]),
                DimKind::Scalar { .. } => out[d] = s[d] - self.shift[d],
                DimKind::X | DimKind::Y => {}
            }
        }
        out
    }
}

/// Generates `count` edges from pose-zeroed starts with random non-pose
/// components, controls and durations.
pub fn generate_bundle(spec: &SystemSpec, count: usize, dt: f64, seed: u64) -> Result<EdgeBundle, BundleError> {
    if count == 0 {
        return Err(BundleError::EmptyBundle);
    }
    spec.validate().map_err(|e| BundleError::Malformed(e.to_string()))?;
    if !(dt > 0.0 && dt <= spec.duration_bounds.0) {
        return Err(BundleError::Malformed(format!("dt {dt} must be in (0, t_min]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(count);
    for id in 0..count {
        let mut x0 = State::zeros(spec.state_dim);
        for d in spec.non_pose_dims() {
            x0[d] = match spec.dims[d] {
                DimKind::BodyAngle { lo, hi } => wrap_angle(uniform(&mut rng, lo, hi)),
                DimKind::Scalar { lo, hi } => uniform(&mut rng, lo, hi),
                _ => unreachable!(),
            };
        }
        let control = sample_control(spec, &mut rng);
        let duration = sample_duration(spec, &mut rng);
        let waypoints = integrate(spec, &x0, &control, duration, dt);
        edges.push(Edge::from_waypoints(id, control, duration, waypoints));
    }
    Ok(EdgeBundle { system: spec.clone(), edges, dt, seed, version: BUNDLE_VERSION })
}

/// Places `edge` so that it starts at `pose`. The first waypoint equals `pose` exactly.
pub fn transform_edge(spec: &SystemSpec, edge: &Edge, pose: &State) -> EdgeInstance {
    let placement = Placement::new(spec, edge.start(), pose);
    let mut waypoints = Vec::with_capacity(edge.waypoints.len());
    waypoints.push(*pose);
    waypoints.extend(edge.waypoints[1..].iter().map(|w| placement.apply(spec, w)));
    let end_state = *waypoints.last().unwrap();
    EdgeInstance { source_edge_id: Some(edge.id), waypoints, end_state, arc_length: edge.arc_length }
}

/// World-frame end state of `edge` placed at `pose`, without materializing waypoints.
#[inline]
pub fn transformed_end(spec: &SystemSpec, edge: &Edge, pose: &State) -> State {
    if edge.waypoints.len() == 1 {
        return *pose;
    }
    Placement::new(spec, edge.start(), pose).apply(spec, &edge.end_state)
}

/// Non-pose components of `x` expressed the way canonical edge starts store
/// them: body angles relative to the heading, scalars as-is.
pub fn canonical_non_pose(spec: &SystemSpec, x: &State) -> State {
    let mut out = State::zeros(spec.state_dim);
    let heading = x[spec.heading_dim()];
    for d in spec.non_pose_dims() {
        out[d] = match spec.dims[d] {
            DimKind::BodyAngle { .. } => wrap_angle(x[d] - heading),
            _ => x[d],
        };
    }
    out
}

/// Weighted distance over non-pose dimensions only.
pub fn non_pose_distance(spec: &SystemSpec, a: &State, b: &State) -> f64 {
    let mut sum = 0.0;
    for d in spec.non_pose_dims() {
        let mut diff = a[d] - b[d];
        if spec.dims[d].is_angle() {
            diff = wrap_angle(diff);
        }
        sum += spec.metric_weights[d] * diff * diff;
    }
    sum.sqrt()
}

/// Edges whose canonical start lies within `theta` of `x_near` under the
/// non-pose submetric. Pose-only systems get the whole bundle.
pub fn near_edges<'a>(bundle: &'a EdgeBundle, x_near: &State, theta: f64) -> Vec<&'a Edge> {
    let spec = &bundle.system;
    if !spec.has_non_pose_dims() {
        return bundle.edges.iter().collect();
    }
    let target = canonical_non_pose(spec, x_near);
    bundle.edges.iter().filter(|e| non_pose_distance(spec, e.start(), &target) <= theta).collect()
}

pub fn save_bundle(bundle: &EdgeBundle, path: &Path) -> Result<(), BundleError> {
    let bytes = encode_bundle(bundle);
    fs::write(path, bytes).map_err(|source| BundleError::Io { path: path.to_path_buf(), source })
}

pub fn load_bundle(path: &Path) -> Result<EdgeBundle, BundleError> {
    let bytes = fs::read(path).map_err(|source| {
        if source.kind() == ErrorKind::NotFound {
            BundleError::Missing { path: path.to_path_buf() }
        } else {
            BundleError::Io { path: path.to_path_buf(), source }
        }
    })?;
    decode_bundle(&bytes)
}

const KIND_X: u8 = 0;
const KIND_Y: u8 = 1;
const KIND_HEADING: u8 = 2;
const KIND_BODY_ANGLE: u8 = 3;
const KIND_SCALAR: u8 = 4;

/// Little-endian encoding: magic, version, system id, dims, edge count, dt,
/// seed, system parameters, edge records, trailing CRC32.
pub fn encode_bundle(bundle: &EdgeBundle) -> Vec<u8> {
    let spec = &bundle.system;
    let waypoint_total: usize = bundle.edges.iter().map(|e| e.waypoints.len()).sum();
    let mut out = Vec::with_capacity(128 + waypoint_total * spec.state_dim * 8 + bundle.edges.len() * 32);
    out.extend_from_slice(BUNDLE_MAGIC);
    out.extend_from_slice(&bundle.version.to_le_bytes());
    out.push(spec.id.code());
    out.push(spec.state_dim as u8);
    out.push(spec.control_dim as u8);
    out.extend_from_slice(&(bundle.edges.len() as u32).to_le_bytes());
    put_f64(&mut out, bundle.dt);
    out.extend_from_slice(&bundle.seed.to_le_bytes());

    for kind in &spec.dims {
        let (code, lo, hi) = match *kind {
            DimKind::X => (KIND_X, 0.0, 0.0),
            DimKind::Y => (KIND_Y, 0.0, 0.0),
            DimKind::Heading => (KIND_HEADING, 0.0, 0.0),
            DimKind::BodyAngle { lo, hi } => (KIND_BODY_ANGLE, lo, hi),
            DimKind::Scalar { lo, hi } => (KIND_SCALAR, lo, hi),
        };
        out.push(code);
        put_f64(&mut out, lo);
        put_f64(&mut out, hi);
    }
    out.extend(spec.pose_dims.iter().map(|&d| d as u8));
    for &(lo, hi) in &spec.control_bounds {
        put_f64(&mut out, lo);
        put_f64(&mut out, hi);
    }
    put_f64(&mut out, spec.duration_bounds.0);
    put_f64(&mut out, spec.duration_bounds.1);
    for &w in &spec.metric_weights {
        put_f64(&mut out, w);
    }
    put_f64(&mut out, spec.wheelbase);
    put_f64(&mut out, spec.hitch_length);

    for edge in &bundle.edges {
        for &c in edge.control.as_slice() {
            put_f64(&mut out, c);
        }
        put_f64(&mut out, edge.duration);
        out.extend_from_slice(&(edge.waypoints.len() as u32).to_le_bytes());
        for w in &edge.waypoints {
            for &v in w.as_slice() {
                put_f64(&mut out, v);
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_bundle(bytes: &[u8]) -> Result<EdgeBundle, BundleError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != BUNDLE_MAGIC {
        return Err(BundleError::BadMagic);
    }
    let version = r.u32()?;
    if version != BUNDLE_VERSION {
        return Err(BundleError::VersionMismatch { found: version, expected: BUNDLE_VERSION });
    }
    let id = SystemId::from_code(r.u8()?)
        .ok_or_else(|| BundleError::Malformed("unknown system id".into()))?;
    let state_dim = r.u8()? as usize;
    let control_dim = r.u8()? as usize;
    if state_dim == 0 || state_dim > dynamics::MAX_STATE_DIM || control_dim == 0 || control_dim > dynamics::MAX_CONTROL_DIM
    {
        return Err(BundleError::Malformed(format!("dimensions {state_dim}/{control_dim} out of range")));
    }
    let count = r.u32()? as usize;
    let dt = r.f64()?;
    let seed = r.u64()?;

    let mut dims = Vec::with_capacity(state_dim);
    for _ in 0..state_dim {
        let code = r.u8()?;
        let (lo, hi) = (r.f64()?, r.f64()?);
        dims.push(match code {
            KIND_X => DimKind::X,
            KIND_Y => DimKind::Y,
            KIND_HEADING => DimKind::Heading,
            KIND_BODY_ANGLE => DimKind::BodyAngle { lo, hi },
            KIND_SCALAR => DimKind::Scalar { lo, hi },
            other => return Err(BundleError::Malformed(format!("unknown dimension kind {other}"))),
        });
    }
    let pose_dims = [r.u8()? as usize, r.u8()? as usize, r.u8()? as usize];
    let mut control_bounds = Vec::with_capacity(control_dim);
    for _ in 0..control_dim {
        control_bounds.push((r.f64()?, r.f64()?));
    }
    let duration_bounds = (r.f64()?, r.f64()?);
    let mut metric_weights = Vec::with_capacity(state_dim);
    for _ in 0..state_dim {
        metric_weights.push(r.f64()?);
    }
    let wheelbase = r.f64()?;
    let hitch_length = r.f64()?;
    let system = SystemSpec {
        id,
        state_dim,
        dims,
        pose_dims,
        control_dim,
        control_bounds,
        duration_bounds,
        metric_weights,
        wheelbase,
        hitch_length,
    };
    system.validate().map_err(|e| BundleError::Malformed(e.to_string()))?;

    // Smallest possible record is control + duration + count + one waypoint.
    let min_record = 8 * control_dim + 8 + 4 + 8 * state_dim;
    if count.saturating_mul(min_record) > r.remaining() {
        return Err(BundleError::Truncated { offset: bytes.len() });
    }
    let mut edges = Vec::with_capacity(count);
    let mut vals = [0.0; dynamics::MAX_STATE_DIM];
    for edge_id in 0..count {
        let mut cvals = [0.0; dynamics::MAX_CONTROL_DIM];
        for c in cvals.iter_mut().take(control_dim) {
            *c = r.f64()?;
        }
        let duration = r.f64()?;
        let n = r.u32()? as usize;
        if n == 0 {
            return Err(BundleError::Malformed(format!("edge {edge_id} has no waypoints")));
        }
        if n.saturating_mul(8 * state_dim) > r.remaining() {
            return Err(BundleError::Truncated { offset: bytes.len() });
        }
        let mut waypoints = Vec::with_capacity(n);
        for _ in 0..n {
            for v in vals.iter_mut().take(state_dim) {
                *v = r.f64()?;
            }
            waypoints.push(State::new(&vals[..state_dim]));
        }
        edges.push(Edge::from_waypoints(edge_id, Control::new(&cvals[..control_dim]), duration, waypoints));
    }
    let body_end = r.pos;
    let stored = r.u32()?;
    if r.remaining() != 0 {
        return Err(BundleError::Malformed(format!("{} trailing bytes after checksum", r.remaining())));
    }
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(BundleError::Checksum { stored, computed });
    }
    Ok(EdgeBundle { system, edges, dt, seed, version })
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], BundleError> {
        if self.remaining() < n {
            return Err(BundleError::Truncated { offset: self.buf.len() });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, BundleError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, BundleError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, BundleError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, BundleError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
