//! Sampling-based receding-horizon planner: dynamic window generation,
//! constant-control trajectory rollout under the unicycle model, cost
//! evaluation, and deterministic minimum-cost selection.
//!
//! `plan` is a pure function of its inputs. Candidate evaluations run in
//! parallel; the selection reduction is defined on sample index, so
//! parallelism cannot change the result.

use nalgebra::Point2;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{point_in_collision, PolygonObstacle};
use crate::gpdf::DistanceField;
use crate::variant::CollisionModel;

/// Planar pose; `theta` stays wrapped into `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl RobotState {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn position(&self) -> Point2<f64> {
        Point2::new(self.x, self.y)
    }
}

/// Linear speed and angular velocity pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

impl ControlInput {
    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    fn clamp(&self, lower: ControlInput, upper: ControlInput) -> ControlInput {
        ControlInput {
            v: self.v.clamp(lower.v, upper.v),
            omega: self.omega.clamp(lower.omega, upper.omega),
        }
    }
}

/// Absolute control bounds and per-step change bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlLimits {
    pub min: ControlInput,
    pub max: ControlInput,
    /// Largest allowed decrease per step, componentwise (nonnegative).
    pub max_decrease: ControlInput,
    /// Largest allowed increase per step, componentwise (nonnegative).
    pub max_increase: ControlInput,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self {
            min: ControlInput::new(0.0, -1.0),
            max: ControlInput::new(1.5, 1.0),
            max_decrease: ControlInput::new(0.3, 0.16),
            max_increase: ControlInput::new(0.3, 0.16),
        }
    }
}

/// Admissible control interval for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlWindow {
    pub lower: ControlInput,
    pub upper: ControlInput,
}

/// Candidate grid resolution and the cap on the candidate count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub v_resolution: f64,
    pub omega_resolution: f64,
    pub max_candidates: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            v_resolution: 0.3,
            omega_resolution: 0.08,
            max_candidates: 84,
        }
    }
}

/// Constant-control rollout: N+1 states, index 0 is the state the plan was
/// made from.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<RobotState>,
    pub control: ControlInput,
}

impl Trajectory {
    pub fn endpoint(&self) -> &RobotState {
        self.states.last().expect("rollout has at least one state")
    }
}

/// Cost-term weights and the collision-term shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    pub collision: f64,
    pub collision_distance: f64,
    pub collision_gradient: f64,
    pub reference: f64,
    pub velocity: f64,
    pub target: f64,
    /// Exponent rate of the gradient-alignment penalty.
    pub gradient_rate: f64,
    /// Heading misalignment (radians) at which the penalty switches on.
    pub heading_threshold: f64,
    /// Collision terms are inactive while the whole candidate stays farther
    /// than this from every obstacle, meters.
    pub activation_range: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            collision: 1.0,
            collision_distance: 0.2,
            collision_gradient: 0.0018,
            reference: 1.0,
            velocity: 2.0,
            target: 0.2,
            gradient_rate: 2.0,
            heading_threshold: 2.0 * std::f64::consts::FRAC_PI_3,
            activation_range: 1.0,
        }
    }
}

/// One evaluated candidate. An infeasible candidate has `total` infinity and
/// its cost breakdown left at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEvaluation {
    pub trajectory: Trajectory,
    pub feasible: bool,
    pub j_col_dist: f64,
    pub j_col_grad: f64,
    pub j_ref: f64,
    pub j_vel: f64,
    pub j_tar: f64,
    pub total: f64,
}

/// Cost breakdown of the selected candidate, recorded into the trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct CostBreakdown {
    pub j_col_dist: f64,
    pub j_col_grad: f64,
    pub j_ref: f64,
    pub j_vel: f64,
    pub j_tar: f64,
    pub total: f64,
}

/// Endpoint of one candidate, kept for plot exports.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CandidateEndpoint {
    pub x: f64,
    pub y: f64,
    pub feasible: bool,
    /// None when infeasible.
    pub total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanDiagnostics {
    pub candidate_count: usize,
    pub feasible_count: usize,
    pub all_infeasible: bool,
    pub selected: CostBreakdown,
    pub endpoints: Vec<CandidateEndpoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub control: ControlInput,
    pub trajectory: Trajectory,
    pub diagnostics: PlanDiagnostics,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    /// Defensive: window construction always yields at least one candidate.
    #[error("candidate sampling produced no controls")]
    NoCandidates,
}

/// Everything a planning call reads besides the robot state and previous
/// control. Shared read-only across parallel candidate evaluations.
pub struct PlanContext<'a> {
    pub field: &'a dyn DistanceField,
    /// Obstacles already inflated by the robot radius; feasibility is exact
    /// against these while the cost terms use field queries.
    pub inflated_obstacles: &'a [PolygonObstacle],
    /// Other robots' predicted positions; empty when planning solo.
    pub fleet_points: &'a [Point2<f64>],
    /// Center distance below which a fleet point overlaps the robot (twice
    /// the robot radius).
    pub fleet_clearance: f64,
    /// Reference positions aligned with trajectory states 1..=N.
    pub reference: &'a [Point2<f64>],
    pub target: Point2<f64>,
    pub v_ref: f64,
    pub limits: &'a ControlLimits,
    pub sampling: &'a SamplingParams,
    pub weights: &'a CostWeights,
    pub horizon: usize,
    pub dt: f64,
    pub model: &'a dyn CollisionModel,
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut t = (theta + std::f64::consts::PI).rem_euclid(tau);
    if t == 0.0 {
        t = tau;
    }
    t - std::f64::consts::PI
}

/// Explicit-Euler unicycle step; the position update uses the old heading.
pub fn step(state: &RobotState, u: ControlInput, dt: f64) -> RobotState {
    RobotState {
        x: state.x + u.v * state.theta.cos() * dt,
        y: state.y + u.v * state.theta.sin() * dt,
        theta: wrap_angle(state.theta + u.omega * dt),
    }
}

/// Intersection of the absolute bounds with the reachable set around the
/// previous control. The previous control is clamped into the absolute
/// bounds first, which keeps the window non-empty.
pub fn dynamic_window(prev: ControlInput, limits: &ControlLimits) -> ControlWindow {
    let prev = prev.clamp(limits.min, limits.max);
    let lower = ControlInput {
        v: limits.min.v.max(prev.v - limits.max_decrease.v),
        omega: limits.min.omega.max(prev.omega - limits.max_decrease.omega),
    };
    let upper = ControlInput {
        v: limits.max.v.min(prev.v + limits.max_increase.v),
        omega: limits.max.omega.min(prev.omega + limits.max_increase.omega),
    };
    ControlWindow { lower, upper }
}

fn axis_count(width: f64, resolution: f64) -> usize {
    (width / resolution + 1e-9).floor() as usize + 1
}

/// Linearly spaced control grid over the window, inclusive of both endpoints
/// on each axis. The per-axis counts follow the axis widths at the given
/// resolutions; when their product would exceed the cap, the larger axis is
/// reduced to fit. Speed-major ordering defines the sample index used by the
/// selection tie-break.
pub fn sample_candidates(window: &ControlWindow, sampling: &SamplingParams) -> Vec<ControlInput> {
    let width_v = window.upper.v - window.lower.v;
    let width_w = window.upper.omega - window.lower.omega;
    let mut count_v = axis_count(width_v, sampling.v_resolution);
    let mut count_w = axis_count(width_w, sampling.omega_resolution);
    let cap = sampling.max_candidates.max(1);
    while count_v * count_w > cap {
        if count_v >= count_w {
            count_v = (cap / count_w).max(1);
        } else {
            count_w = (cap / count_v).max(1);
        }
    }
    let axis = |lower: f64, upper: f64, count: usize, i: usize| {
        if count <= 1 {
            lower
        } else {
            lower + (i as f64 / (count - 1) as f64) * (upper - lower)
        }
    };
    let mut out = Vec::with_capacity(count_v * count_w);
    for i in 0..count_v {
        let v = axis(window.lower.v, window.upper.v, count_v, i);
        for j in 0..count_w {
            let omega = axis(window.lower.omega, window.upper.omega, count_w, j);
            out.push(ControlInput { v, omega });
        }
    }
    out
}

/// N steps of the unicycle model under a constant control.
pub fn rollout(state: &RobotState, u: ControlInput, steps: usize, dt: f64) -> Trajectory {
    assert!(steps >= 1, "horizon must be at least one step");
    let mut states = Vec::with_capacity(steps + 1);
    states.push(*state);
    for _ in 0..steps {
        let next = step(states.last().unwrap(), u, dt);
        states.push(next);
    }
    Trajectory { states, control: u }
}

/// Reciprocal of the smallest distance over states 1..=N, zero while the
/// candidate stays beyond the activation range, infinite on contact. State 0
/// is the current pose and is excluded.
pub fn cost_col_dist(traj: &Trajectory, field: &dyn DistanceField, activation_range: f64) -> f64 {
    let min_d = traj.states[1..]
        .iter()
        .map(|s| field.distance(s.position()))
        .fold(f64::INFINITY, f64::min);
    if min_d > activation_range {
        0.0
    } else if min_d <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / min_d
    }
}

fn gradient_penalty(theta: f64, gradient: nalgebra::Vector2<f64>, weights: &CostWeights) -> f64 {
    if gradient == nalgebra::Vector2::zeros() {
        return 0.0;
    }
    let misalignment = wrap_angle(theta - gradient.y.atan2(gradient.x)).abs();
    if misalignment >= weights.heading_threshold {
        (weights.gradient_rate * misalignment).exp() - 1.0
    } else {
        0.0
    }
}

/// Sum of the exponential heading-misalignment penalties over states 1..=N,
/// counted only where the misalignment against the away-from-obstacle
/// gradient direction reaches the threshold (inclusive). A state contributes
/// only while it sits within the activation range, so the penalty ramps with
/// how much of the candidate actually runs near obstacles; degenerate
/// gradients contribute nothing.
pub fn cost_col_grad(traj: &Trajectory, field: &dyn DistanceField, weights: &CostWeights) -> f64 {
    traj.states[1..]
        .iter()
        .map(|s| {
            let q = field.query(s.position());
            if q.distance > weights.activation_range {
                0.0
            } else {
                gradient_penalty(s.theta, q.gradient, weights)
            }
        })
        .sum()
}

/// Mean positional deviation from the reference positions, aligned with
/// states 1..=N. Heading is excluded.
pub fn cost_ref(traj: &Trajectory, reference: &[Point2<f64>]) -> f64 {
    debug_assert_eq!(traj.states.len() - 1, reference.len());
    let sum: f64 = traj.states[1..]
        .iter()
        .zip(reference)
        .map(|(s, r)| nalgebra::distance(&s.position(), r))
        .sum();
    sum / reference.len() as f64
}

/// Absolute deviation from the reference speed.
pub fn cost_vel(u: ControlInput, v_ref: f64) -> f64 {
    (u.v - v_ref).abs()
}

/// Absolute wrapped difference between the bearing to the target and the
/// bearing to the trajectory endpoint, both taken from the current position.
/// Zero when either bearing is degenerate.
pub fn cost_tar(traj: &Trajectory, target: Point2<f64>) -> f64 {
    let current = traj.states[0].position();
    let endpoint = traj.endpoint().position();
    if nalgebra::distance(&endpoint, &current) < 1e-9
        || nalgebra::distance(&target, &current) < 1e-9
    {
        return 0.0;
    }
    let to_target = (target.y - current.y).atan2(target.x - current.x);
    let to_endpoint = (endpoint.y - current.y).atan2(endpoint.x - current.x);
    wrap_angle(to_target - to_endpoint).abs()
}

fn weighted(q: f64, j: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else {
        q * j
    }
}

fn trajectory_feasible(traj: &Trajectory, ctx: &PlanContext<'_>) -> bool {
    for state in &traj.states[1..] {
        let p = state.position();
        if point_in_collision(p, ctx.inflated_obstacles) {
            return false;
        }
        for q in ctx.fleet_points {
            if nalgebra::distance(&p, q) < ctx.fleet_clearance {
                return false;
            }
        }
    }
    true
}

/// Feasibility check plus the weighted total of all five cost terms. The
/// cost breakdown of an infeasible candidate is left at zero.
pub fn evaluate(traj: Trajectory, ctx: &PlanContext<'_>) -> CandidateEvaluation {
    if !trajectory_feasible(&traj, ctx) {
        return CandidateEvaluation {
            trajectory: traj,
            feasible: false,
            j_col_dist: 0.0,
            j_col_grad: 0.0,
            j_ref: 0.0,
            j_vel: 0.0,
            j_tar: 0.0,
            total: f64::INFINITY,
        };
    }
    let w = ctx.weights;
    let col = ctx.model.evaluate(&traj, ctx.field, w);
    let j_ref = cost_ref(&traj, ctx.reference);
    let j_vel = cost_vel(traj.control, ctx.v_ref);
    let j_tar = cost_tar(&traj, ctx.target);
    let j_col = weighted(w.collision_distance, col.j_col_dist)
        + weighted(w.collision_gradient, col.j_col_grad);
    let total = weighted(w.collision, j_col)
        + weighted(w.reference, j_ref)
        + weighted(w.velocity, j_vel)
        + weighted(w.target, j_tar);
    CandidateEvaluation {
        trajectory: traj,
        feasible: true,
        j_col_dist: col.j_col_dist,
        j_col_grad: col.j_col_grad,
        j_ref,
        j_vel,
        j_tar,
        total,
    }
}

/// Selection order: feasible before infeasible, then lower total, then
/// smaller |omega|, then larger v, then lower sample index.
fn beats(a: &CandidateEvaluation, a_idx: usize, b: &CandidateEvaluation, b_idx: usize) -> bool {
    if a.feasible != b.feasible {
        return a.feasible;
    }
    if a.total != b.total {
        return a.total < b.total;
    }
    let (wa, wb) = (
        a.trajectory.control.omega.abs(),
        b.trajectory.control.omega.abs(),
    );
    if wa != wb {
        return wa < wb;
    }
    if a.trajectory.control.v != b.trajectory.control.v {
        return a.trajectory.control.v > b.trajectory.control.v;
    }
    a_idx < b_idx
}

/// Evaluates every candidate in the dynamic window and returns the
/// minimum-cost one. When every candidate is infeasible, returns the
/// emergency stop: the window's lower speed bound (at least zero) with zero
/// angular velocity, flagged in the diagnostics.
pub fn plan(
    state: &RobotState,
    prev_u: ControlInput,
    ctx: &PlanContext<'_>,
) -> Result<PlanOutcome, PlanError> {
    let window = dynamic_window(prev_u, ctx.limits);
    let candidates = sample_candidates(&window, ctx.sampling);
    if candidates.is_empty() {
        return Err(PlanError::NoCandidates);
    }
    let evaluations: Vec<CandidateEvaluation> = candidates
        .par_iter()
        .map(|&u| evaluate(rollout(state, u, ctx.horizon, ctx.dt), ctx))
        .collect();

    let endpoints = evaluations
        .iter()
        .map(|e| {
            let p = e.trajectory.endpoint();
            CandidateEndpoint {
                x: p.x,
                y: p.y,
                feasible: e.feasible,
                total: e.feasible.then_some(e.total),
            }
        })
        .collect();
    let feasible_count = evaluations.iter().filter(|e| e.feasible).count();

    if feasible_count == 0 {
        let stop = ControlInput::new(window.lower.v.max(0.0), 0.0);
        return Ok(PlanOutcome {
            control: stop,
            trajectory: rollout(state, stop, ctx.horizon, ctx.dt),
            diagnostics: PlanDiagnostics {
                candidate_count: evaluations.len(),
                feasible_count: 0,
                all_infeasible: true,
                selected: CostBreakdown::default(),
                endpoints,
            },
        });
    }

    let mut best = 0;
    for idx in 1..evaluations.len() {
        if beats(&evaluations[idx], idx, &evaluations[best], best) {
            best = idx;
        }
    }
    let selected = &evaluations[best];
    Ok(PlanOutcome {
        control: selected.trajectory.control,
        trajectory: selected.trajectory.clone(),
        diagnostics: PlanDiagnostics {
            candidate_count: evaluations.len(),
            feasible_count,
            all_infeasible: false,
            selected: CostBreakdown {
                j_col_dist: selected.j_col_dist,
                j_col_grad: selected.j_col_grad,
                j_ref: selected.j_ref,
                j_vel: selected.j_vel,
                j_tar: selected.j_tar,
                total: selected.total,
            },
            endpoints,
        },
    })
}
