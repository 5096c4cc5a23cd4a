//! Robot systems, their kinematic models and fixed-step RK4 propagation.
//!
//! All three systems are planar and carry their pose as `(x, y, heading)`.
//! The car-with-trailer adds the trailer heading, a world-frame angle that
//! turns together with the body when a trajectory is rigidly moved.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SpecError;

pub const MAX_STATE_DIM: usize = 4;
pub const MAX_CONTROL_DIM: usize = 2;

/// Default RK4 step in seconds.
pub const DEFAULT_DT: f64 = 0.05;

/// Wraps an angle into `(-pi, pi]`. Values already in range are returned untouched.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    // One period off covers sums of two wrapped angles.
    let once = if a > 0.0 { a - 2.0 * PI } else { a + 2.0 * PI };
    if once > -PI && once <= PI {
        return once;
    }
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Number of integration steps for `duration` at step `dt`, i.e. `ceil(duration / dt)`
/// with a small tolerance so that `1.0 / 0.05` does not become 21 steps.
pub fn step_count(duration: f64, dt: f64) -> usize {
    let ratio = duration / dt;
    let full = (ratio + 1e-9).floor();
    if duration - full * dt > 1e-9 * dt {
        full as usize + 1
    } else {
        (full as usize).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemId {
    DiffDrive,
    Unicycle,
    CarWithTrailer,
}

impl SystemId {
    pub const ALL: [SystemId; 3] = [SystemId::DiffDrive, SystemId::Unicycle, SystemId::CarWithTrailer];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::DiffDrive => "diff-drive",
            SystemId::Unicycle => "unicycle",
            SystemId::CarWithTrailer => "car-with-trailer",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            SystemId::DiffDrive => 0,
            SystemId::Unicycle => 1,
            SystemId::CarWithTrailer => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.code() == code)
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|id| id.name() == norm)
            .ok_or_else(|| format!("unknown system `{s}` (expected diff-drive, unicycle or car-with-trailer)"))
    }
}

/// Role of one state dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DimKind {
    X,
    Y,
    Heading,
    /// World-frame angle that turns with the body (trailer heading). The bounds
    /// apply to its offset from the heading when sampling.
    BodyAngle { lo: f64, hi: f64 },
    /// Frame-independent scalar, sampled uniformly in `[lo, hi]`.
    Scalar { lo: f64, hi: f64 },
}

impl DimKind {
    pub fn is_angle(self) -> bool {
        matches!(self, DimKind::Heading | DimKind::BodyAngle { .. })
    }

    pub fn is_pose(self) -> bool {
        matches!(self, DimKind::X | DimKind::Y | DimKind::Heading)
    }
}

/// A state vector. Positions in m, angles in rad.
#[derive(Clone, Copy, PartialEq)]
pub struct State {
    values: [f64; MAX_STATE_DIM],
    dim: u8,
}

impl State {
    pub fn new(values: &[f64]) -> Self {
        assert!(values.len() <= MAX_STATE_DIM, "state dimension {} too large", values.len());
        let mut v = [0.0; MAX_STATE_DIM];
        v[..values.len()].copy_from_slice(values);
        State { values: v, dim: values.len() as u8 }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_STATE_DIM);
        State { values: [0.0; MAX_STATE_DIM], dim: dim as u8 }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim as usize]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values[..self.dim as usize]
    }

    /// Workspace position, assuming the usual `(x, y, ..)` layout.
    #[inline]
    pub fn position(&self) -> [f64; 2] {
        [self.values[0], self.values[1]]
    }

    fn axpy(&self, h: f64, k: &State) -> State {
        let mut out = *self;
        for i in 0..self.dim() {
            out.values[i] += h * k.values[i];
        }
        out
    }
}

impl Index<usize> for State {
    type Output = f64;

    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for State {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State{:?}", self.as_slice())
    }
}

/// A control vector, held constant over one propagation.
#[derive(Clone, Copy, PartialEq)]
pub struct Control {
    values: [f64; MAX_CONTROL_DIM],
    dim: u8,
}

impl Control {
    pub fn new(values: &[f64]) -> Self {
        assert!(values.len() <= MAX_CONTROL_DIM, "control dimension {} too large", values.len());
        let mut v = [0.0; MAX_CONTROL_DIM];
        v[..values.len()].copy_from_slice(values);
        Control { values: v, dim: values.len() as u8 }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.dim as usize]
    }
}

impl Index<usize> for Control {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl fmt::Debug for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Control{:?}", self.as_slice())
    }
}

/// State/control spaces, bounds and metric of one robot system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub id: SystemId,
    pub state_dim: usize,
    pub dims: Vec<DimKind>,
    /// Indices of `(x, y, heading)`.
    pub pose_dims: [usize; 3],
    pub control_dim: usize,
    pub control_bounds: Vec<(f64, f64)>,
    /// `[t_min, t_max]` in seconds.
    pub duration_bounds: (f64, f64),
    pub metric_weights: Vec<f64>,
    /// Car wheelbase `L` in m (car-with-trailer only).
    pub wheelbase: f64,
    /// Hitch-to-trailer-axle length `D` in m (car-with-trailer only).
    pub hitch_length: f64,
}

impl SystemSpec {
    pub fn diff_drive() -> Self {
        Self::planar(SystemId::DiffDrive)
    }

    pub fn unicycle() -> Self {
        Self::planar(SystemId::Unicycle)
    }

    fn planar(id: SystemId) -> Self {
        SystemSpec {
            id,
            state_dim: 3,
            dims: vec![DimKind::X, DimKind::Y, DimKind::Heading],
            pose_dims: [0, 1, 2],
            control_dim: 2,
            control_bounds: vec![(-1.0, 1.0), (-1.0, 1.0)],
            duration_bounds: (0.5, 3.0),
            metric_weights: vec![1.0, 1.0, 0.5],
            wheelbase: 0.5,
            hitch_length: 1.0,
        }
    }

    pub fn car_with_trailer() -> Self {
        SystemSpec {
            id: SystemId::CarWithTrailer,
            state_dim: 4,
            dims: vec![
                DimKind::X,
                DimKind::Y,
                DimKind::Heading,
                DimKind::BodyAngle { lo: -PI / 3.0, hi: PI / 3.0 },
            ],
            pose_dims: [0, 1, 2],
            control_dim: 2,
            control_bounds: vec![(-1.0, 1.0), (-0.6, 0.6)],
            duration_bounds: (0.5, 3.0),
            metric_weights: vec![1.0, 1.0, 0.5, 0.5],
            wheelbase: 0.5,
            hitch_length: 1.0,
        }
    }

    pub fn for_id(id: SystemId) -> Self {
        match id {
            SystemId::DiffDrive => Self::diff_drive(),
            SystemId::Unicycle => Self::unicycle(),
            SystemId::CarWithTrailer => Self::car_with_trailer(),
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |msg: String| Err(SpecError(msg));
        if self.state_dim == 0 || self.state_dim > MAX_STATE_DIM || self.dims.len() != self.state_dim {
            return bad(format!("state_dim {} inconsistent with {} dim kinds", self.state_dim, self.dims.len()));
        }
        let [px, py, ph] = self.pose_dims;
        if px == py || px == ph || py == ph || self.pose_dims.iter().any(|&d| d >= self.state_dim) {
            return bad(format!("pose dims {:?} are not three distinct valid indices", self.pose_dims));
        }
        if self.dims[px] != DimKind::X || self.dims[py] != DimKind::Y || self.dims[ph] != DimKind::Heading {
            return bad("pose dims do not point at x, y, heading".into());
        }
        // Positions are read through State::position().
        if px != 0 || py != 1 {
            return bad("x and y must be the first two state dimensions".into());
        }
        if self.control_dim == 0 || self.control_dim > MAX_CONTROL_DIM || self.control_bounds.len() != self.control_dim
        {
            return bad(format!("control_dim {} inconsistent with bounds", self.control_dim));
        }
        if self.control_bounds.iter().any(|&(lo, hi)| !(lo <= hi)) {
            return bad("control bound with lo > hi".into());
        }
        let (tmin, tmax) = self.duration_bounds;
        if !(tmin > 0.0 && tmin <= tmax) {
            return bad(format!("duration bounds [{tmin}, {tmax}] invalid"));
        }
        if self.metric_weights.len() != self.state_dim
            || self.metric_weights.iter().any(|&w| !(w >= 0.0))
            || !self.metric_weights.iter().any(|&w| w > 0.0)
        {
            return bad("metric weights must be state_dim nonnegative values, one positive".into());
        }
        Ok(())
    }

    #[inline]
    pub fn heading_dim(&self) -> usize {
        self.pose_dims[2]
    }

    /// Indices of the dimensions that are not part of the pose.
    pub fn non_pose_dims(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.state_dim).filter(move |&d| !self.dims[d].is_pose())
    }

    pub fn has_non_pose_dims(&self) -> bool {
        self.state_dim > 3
    }

    /// Lower bound factor relating workspace distance to the full metric:
    /// `distance(a, b) >= position_weight_floor() * |pos(a) - pos(b)|`.
    pub fn position_weight_floor(&self) -> f64 {
        self.metric_weights[0].min(self.metric_weights[1]).sqrt()
    }

    /// Wraps every angular component into `(-pi, pi]`.
    pub fn normalize(&self, x: &mut State) {
        for (d, kind) in self.dims.iter().enumerate() {
            if kind.is_angle() {
                x[d] = wrap_angle(x[d]);
            }
        }
    }
}

/// State derivative `f(x, u)`.
pub fn derivative(spec: &SystemSpec, x: &State, u: &Control) -> State {
    assert_eq!(x.dim(), spec.state_dim, "state dimension mismatch");
    assert_eq!(u.dim(), spec.control_dim, "control dimension mismatch");
    let theta = x[2];
    let mut dx = State::zeros(spec.state_dim);
    match spec.id {
        SystemId::DiffDrive | SystemId::Unicycle => {
            let (v, omega) = (u[0], u[1]);
            dx[0] = v * theta.cos();
            dx[1] = v * theta.sin();
            dx[2] = omega;
        }
        SystemId::CarWithTrailer => {
            let (v, steer) = (u[0], u[1]);
            dx[0] = v * theta.cos();
            dx[1] = v * theta.sin();
            dx[2] = v / spec.wheelbase * steer.tan();
            dx[3] = v / spec.hitch_length * (theta - x[3]).sin();
        }
    }
    dx
}

fn rk4_step(spec: &SystemSpec, x: &State, u: &Control, h: f64) -> State {
    let k1 = derivative(spec, x, u);
    let k2 = derivative(spec, &x.axpy(0.5 * h, &k1), u);
    let k3 = derivative(spec, &x.axpy(0.5 * h, &k2), u);
    let k4 = derivative(spec, &x.axpy(h, &k3), u);
    let mut next = *x;
    for i in 0..x.dim() {
        next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    spec.normalize(&mut next);
    next
}

/// Integrates constant control `u` for `duration` seconds with RK4 steps of `dt`,
/// returning waypoints at `0, dt, 2dt, .., duration` (last step may be shorter).
pub fn integrate(spec: &SystemSpec, x0: &State, u: &Control, duration: f64, dt: f64) -> Vec<State> {
    assert!(duration > 0.0 && dt > 0.0 && dt <= duration + 1e-12, "need 0 < dt <= duration");
    let steps = step_count(duration, dt);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*x0);
    let mut x = *x0;
    for i in 0..steps {
        let h = if i + 1 == steps { duration - dt * i as f64 } else { dt };
        x = rk4_step(spec, &x, u, h);
        out.push(x);
    }
    out
}

/// Uniform control in the per-dimension bounds.
pub fn sample_control<R: Rng + ?Sized>(spec: &SystemSpec, rng: &mut R) -> Control {
    let mut vals = [0.0; MAX_CONTROL_DIM];
    for (v, &(lo, hi)) in vals.iter_mut().zip(&spec.control_bounds) {
        *v = uniform(rng, lo, hi);
    }
    Control::new(&vals[..spec.control_dim])
}

pub fn sample_duration<R: Rng + ?Sized>(spec: &SystemSpec, rng: &mut R) -> f64 {
    let (lo, hi) = spec.duration_bounds;
    uniform(rng, lo, hi)
}

/// Uniform state with position in `[min, max]`, any heading, and non-pose
/// dimensions drawn from their bounds.
pub fn sample_state<R: Rng + ?Sized>(spec: &SystemSpec, min: [f64; 2], max: [f64; 2], rng: &mut R) -> State {
    let mut x = State::zeros(spec.state_dim);
    for (d, kind) in spec.dims.iter().enumerate() {
        x[d] = match *kind {
            DimKind::X => uniform(rng, min[0], max[0]),
            DimKind::Y => uniform(rng, min[1], max[1]),
            DimKind::Heading => uniform(rng, -PI, PI),
            DimKind::BodyAngle { .. } | DimKind::Scalar { .. } => 0.0,
        };
    }
    let heading = x[spec.heading_dim()];
    for (d, kind) in spec.dims.iter().enumerate() {
        match *kind {
            DimKind::BodyAngle { lo, hi } => x[d] = wrap_angle(heading + uniform(rng, lo, hi)),
            DimKind::Scalar { lo, hi } => x[d] = uniform(rng, lo, hi),
            _ => {}
        }
    }
    spec.normalize(&mut x);
    x
}

#[inline]
pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Weighted Euclidean distance with wrapped angular differences.
#[inline]
pub fn distance(spec: &SystemSpec, a: &State, b: &State) -> f64 {
    let mut sum = 0.0;
    for d in 0..spec.state_dim {
        let mut diff = a[d] - b[d];
        if spec.dims[d].is_angle() {
            diff = wrap_angle(diff);
        }
        sum += spec.metric_weights[d] * diff * diff;
    }
    sum.sqrt()
}

/// Plain Euclidean distance between workspace positions.
#[inline]
pub fn position_distance(a: &State, b: &State) -> f64 {
    let [ax, ay] = a.position();
    let [bx, by] = b.position();
    (ax - bx).hypot(ay - by)
}

/// Sum of workspace-position steps along a waypoint sequence.
pub fn arc_length(waypoints: &[State]) -> f64 {
    waypoints.windows(2).map(|w| position_distance(&w[0], &w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(-0.1), -0.1);
        for k in -20..20 {
            let a = wrap_angle(0.37 * k as f64);
            assert!(a > -PI && a <= PI);
        }
    }

    #[test]
    fn step_count_handles_inexact_ratio() {
        assert_eq!(step_count(1.0, 0.05), 20);
        assert_eq!(step_count(1.01, 0.05), 21);
        assert_eq!(step_count(0.05, 0.05), 1);
        assert_eq!(step_count(PI / 2.0, 0.01), 158);
    }

    #[test]
    fn derivative_examples() {
        let spec = SystemSpec::diff_drive();
        let d = derivative(&spec, &State::new(&[0.0, 0.0, 0.0]), &Control::new(&[1.0, 0.0]));
        assert_eq!(d.as_slice(), &[1.0, 0.0, 0.0]);
        let d = derivative(&spec, &State::new(&[0.0, 0.0, PI / 2.0]), &Control::new(&[1.0, 0.0]));
        assert!(close(d.as_slice(), &[0.0, 1.0, 0.0], 1e-15));

        let car = SystemSpec::car_with_trailer();
        let d = derivative(&car, &State::new(&[1.0, 2.0, 0.3, 0.3]), &Control::new(&[0.8, 0.0]));
        assert_eq!(d[2], 0.0);
        assert_eq!(d[3], 0.0);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn derivative_rejects_bad_dims() {
        let spec = SystemSpec::diff_drive();
        derivative(&spec, &State::new(&[0.0, 0.0]), &Control::new(&[1.0, 0.0]));
    }

    #[test]
    fn integrate_straight_line_exact() {
        let spec = SystemSpec::diff_drive();
        let wps = integrate(&spec, &State::new(&[0.0, 0.0, 0.0]), &Control::new(&[1.0, 0.0]), 1.0, 0.05);
        assert_eq!(wps.len(), 21);
        assert!(close(wps.last().unwrap().as_slice(), &[1.0, 0.0, 0.0], 1e-9));
    }

    #[test]
    fn integrate_pure_rotation() {
        let spec = SystemSpec::diff_drive();
        let wps = integrate(&spec, &State::new(&[0.0, 0.0, 0.0]), &Control::new(&[0.0, 1.0]), PI / 2.0, 0.01);
        assert_eq!(wps.len(), step_count(PI / 2.0, 0.01) + 1);
        assert!(close(wps.last().unwrap().as_slice(), &[0.0, 0.0, PI / 2.0], 1e-6));
    }

    #[test]
    fn integrate_matches_closed_form_arc() {
        // Unit-speed unit-rate unicycle: x = sin t, y = 1 - cos t, heading = t.
        let spec = SystemSpec::diff_drive();
        let t = PI / 2.0;
        let wps = integrate(&spec, &State::new(&[0.0, 0.0, 0.0]), &Control::new(&[1.0, 1.0]), t, DEFAULT_DT);
        let expected = [t.sin(), 1.0 - t.cos(), t];
        assert!(close(wps.last().unwrap().as_slice(), &expected, 1e-5));
        // Every intermediate waypoint too.
        for (i, w) in wps.iter().enumerate().take(wps.len() - 1) {
            let ti = i as f64 * DEFAULT_DT;
            assert!(close(w.as_slice(), &[ti.sin(), 1.0 - ti.cos(), ti], 1e-5));
        }
    }

    #[test]
    fn integrate_first_waypoint_is_start() {
        let spec = SystemSpec::car_with_trailer();
        let x0 = State::new(&[0.3, -1.2, 2.9, -2.8]);
        let wps = integrate(&spec, &x0, &Control::new(&[0.7, 0.4]), 1.23, 0.05);
        assert_eq!(wps[0], x0);
        assert_eq!(wps.len(), step_count(1.23, 0.05) + 1);
        for w in &wps {
            assert!(w[2] > -PI && w[2] <= PI && w[3] > -PI && w[3] <= PI);
        }
    }

    #[test]
    fn sample_control_degenerate_and_deterministic() {
        let mut spec = SystemSpec::diff_drive();
        spec.control_bounds = vec![(0.0, 0.0), (0.0, 0.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_control(&spec, &mut rng).as_slice(), &[0.0, 0.0]);

        let spec = SystemSpec::diff_drive();
        let a: Vec<Control> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| sample_control(&spec, &mut r)).collect()
        };
        let b: Vec<Control> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..50).map(|_| sample_control(&spec, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn sample_control_mean_and_bounds() {
        let spec = SystemSpec::diff_drive();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let mut sums = [0.0; 2];
        for _ in 0..n {
            let u = sample_control(&spec, &mut rng);
            sums[0] += u[0];
            sums[1] += u[1];
        }
        assert!((sums[0] / n as f64).abs() < 0.05);
        assert!((sums[1] / n as f64).abs() < 0.05);

        let car = SystemSpec::car_with_trailer();
        for _ in 0..1_000_000 {
            let u = sample_control(&car, &mut rng);
            for (i, &(lo, hi)) in car.control_bounds.iter().enumerate() {
                assert!(u[i] >= lo && u[i] <= hi);
            }
        }
    }

    #[test]
    fn distance_wraps_headings() {
        let mut spec = SystemSpec::diff_drive();
        spec.metric_weights = vec![1.0, 1.0, 1.0];
        let a = State::new(&[1.0, 1.0, 3.1]);
        let b = State::new(&[1.0, 1.0, -3.1]);
        let gap = 2.0 * PI - 6.2;
        assert!((distance(&spec, &a, &b) - gap).abs() < 1e-12);
        assert!((gap - 0.0832).abs() < 1e-4);
        assert_eq!(distance(&spec, &a, &a), 0.0);
    }

    #[test]
    fn distance_symmetric_and_triangle() {
        let spec = SystemSpec::car_with_trailer();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = || sample_state(&spec, [-5.0, -5.0], [5.0, 5.0], &mut rng);
        for _ in 0..1000 {
            let (a, b, c) = (s(), s(), s());
            assert_eq!(distance(&spec, &a, &b), distance(&spec, &b, &a));
            assert!(distance(&spec, &a, &c) <= distance(&spec, &a, &b) + distance(&spec, &b, &c) + 1e-9);
        }
    }

    #[test]
    fn default_specs_validate() {
        for id in SystemId::ALL {
            SystemSpec::for_id(id).validate().unwrap();
            assert_eq!(id.name().parse::<SystemId>().unwrap(), id);
        }
        let mut bad = SystemSpec::diff_drive();
        bad.pose_dims = [0, 0, 2];
        assert!(bad.validate().is_err());
        let mut bad = SystemSpec::diff_drive();
        bad.duration_bounds = (0.0, 1.0);
        assert!(bad.validate().is_err());
        let mut bad = SystemSpec::diff_drive();
        bad.metric_weights = vec![0.0, 0.0, 0.0];
        assert!(bad.validate().is_err());
    }
}
