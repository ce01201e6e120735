//! Declarative scenario definitions: maps, robots, references, and planner
//! parameters, loaded from TOML documents and validated into immutable
//! [`Scenario`] values. Bundled fixtures cover the five static scenes and
//! both fleet tests.

use nalgebra::Point2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dwa::{ControlInput, ControlLimits, CostWeights, RobotState, SamplingParams};
use crate::geometry::{point_in_collision, GeometryError, PolygonObstacle};
use crate::gpdf::KernelParams;

/// Reference paths must begin within this distance of the robot start.
const PATH_START_TOLERANCE: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violation at {path}: {message}")]
    Invariant { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    fn invariant(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invariant {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// One robot's task: start pose, goal, reference path, reference speed.
#[derive(Debug, Clone)]
pub struct RobotSpec {
    pub id: String,
    pub start: RobotState,
    pub goal: Point2<f64>,
    pub reference_path: Vec<Point2<f64>>,
    pub v_ref: f64,
}

/// Validated scenario, immutable after load.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub obstacles: Vec<PolygonObstacle>,
    pub robots: Vec<RobotSpec>,
    pub limits: ControlLimits,
    pub weights: CostWeights,
    pub kernel: KernelParams,
    pub sampling: SamplingParams,
    pub horizon: usize,
    pub dt: f64,
    pub step_budget: usize,
    pub goal_tolerance: f64,
    pub robot_radius: f64,
    pub boundary_resolution: f64,
}

/// Horizon-aligned positions marched along the reference path.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    positions: Vec<Point2<f64>>,
}

impl ReferenceTrajectory {
    pub fn positions(&self) -> &[Point2<f64>] {
        &self.positions
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("reference path needs at least 2 vertices")]
pub struct EmptyPath;

/// Projects the current position onto the path (closest point, earliest arc
/// length on ties) and emits `n` positions at arc-length increments of
/// `v_ref * dt`, repeating the final vertex once the path runs out.
pub fn sample_reference(
    path: &[Point2<f64>],
    current: Point2<f64>,
    v_ref: f64,
    dt: f64,
    n: usize,
) -> Result<ReferenceTrajectory, EmptyPath> {
    if path.len() < 2 {
        return Err(EmptyPath);
    }
    let mut best_dist = f64::INFINITY;
    let mut best_arc = 0.0;
    let mut arc_before = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ab = b - a;
        let len = ab.norm();
        let t = if len > 0.0 {
            ((current - a).dot(&ab) / (len * len)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let closest = a + ab * t;
        let d = nalgebra::distance(&current, &closest);
        if d < best_dist {
            best_dist = d;
            best_arc = arc_before + t * len;
        }
        arc_before += len;
    }
    let total_len = arc_before;
    let positions = (1..=n)
        .map(|i| point_at_arc_length(path, best_arc + v_ref * dt * i as f64, total_len))
        .collect();
    Ok(ReferenceTrajectory { positions })
}

fn point_at_arc_length(path: &[Point2<f64>], s: f64, total_len: f64) -> Point2<f64> {
    if s >= total_len {
        return *path.last().unwrap();
    }
    let mut remaining = s.max(0.0);
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = nalgebra::distance(&a, &b);
        if remaining <= len {
            return if len > 0.0 { a + (b - a) * (remaining / len) } else { a };
        }
        remaining -= len;
    }
    *path.last().unwrap()
}

// --- document schema -------------------------------------------------------

fn default_horizon() -> usize {
    20
}
fn default_dt() -> f64 {
    0.2
}
fn default_goal_tolerance() -> f64 {
    0.5
}
fn default_robot_radius() -> f64 {
    0.5
}
fn default_boundary_resolution() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ObstacleDoc {
    vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RobotDoc {
    id: String,
    start: [f64; 3],
    goal: [f64; 2],
    reference_path: Vec<[f64; 2]>,
    v_ref: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct LimitsDoc {
    v_min: f64,
    v_max: f64,
    omega_min: f64,
    omega_max: f64,
    dv_decrease: f64,
    dv_increase: f64,
    domega_decrease: f64,
    domega_increase: f64,
}

impl Default for LimitsDoc {
    fn default() -> Self {
        let l = ControlLimits::default();
        Self {
            v_min: l.min.v,
            v_max: l.max.v,
            omega_min: l.min.omega,
            omega_max: l.max.omega,
            dv_decrease: l.max_decrease.v,
            dv_increase: l.max_increase.v,
            domega_decrease: l.max_decrease.omega,
            domega_increase: l.max_increase.omega,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct WeightsDoc {
    collision: f64,
    collision_distance: f64,
    collision_gradient: f64,
    reference: f64,
    velocity: f64,
    target: f64,
    gradient_rate: f64,
    heading_threshold: f64,
    activation_range: f64,
}

impl Default for WeightsDoc {
    fn default() -> Self {
        let w = CostWeights::default();
        Self {
            collision: w.collision,
            collision_distance: w.collision_distance,
            collision_gradient: w.collision_gradient,
            reference: w.reference,
            velocity: w.velocity,
            target: w.target,
            gradient_rate: w.gradient_rate,
            heading_threshold: w.heading_threshold,
            activation_range: w.activation_range,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct KernelDoc {
    sigma: f64,
    length_scale: f64,
    noise_sigma: f64,
}

impl Default for KernelDoc {
    fn default() -> Self {
        let k = KernelParams::default();
        Self {
            sigma: k.sigma,
            length_scale: k.length_scale,
            noise_sigma: k.noise_sigma,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct SamplingDoc {
    v_resolution: f64,
    omega_resolution: f64,
    max_candidates: usize,
}

impl Default for SamplingDoc {
    fn default() -> Self {
        let s = SamplingParams::default();
        Self {
            v_resolution: s.v_resolution,
            omega_resolution: s.omega_resolution,
            max_candidates: s.max_candidates,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioDoc {
    name: String,
    #[serde(default)]
    obstacles: Vec<ObstacleDoc>,
    robots: Vec<RobotDoc>,
    #[serde(default)]
    limits: LimitsDoc,
    #[serde(default)]
    weights: WeightsDoc,
    #[serde(default)]
    kernel: KernelDoc,
    #[serde(default)]
    sampling: SamplingDoc,
    #[serde(default = "default_horizon")]
    horizon: usize,
    #[serde(default = "default_dt")]
    dt: f64,
    /// Defaults to 200 with several robots, 400 solo.
    step_budget: Option<usize>,
    #[serde(default = "default_goal_tolerance")]
    goal_tolerance: f64,
    #[serde(default = "default_robot_radius")]
    robot_radius: f64,
    #[serde(default = "default_boundary_resolution")]
    boundary_resolution: f64,
}

impl ScenarioDoc {
    fn resolve_defaults(&mut self) {
        if self.step_budget.is_none() {
            self.step_budget = Some(if self.robots.len() > 1 { 200 } else { 400 });
        }
    }
}

// --- loading and validation -------------------------------------------------

/// Parses, expands defaults, and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    load_scenario_with_overrides(document, &[])
}

/// Like [`load_scenario`], with dotted-path `key=value` overrides applied on
/// the defaults-expanded document. Overrides must reference existing fields.
pub fn load_scenario_with_overrides(
    document: &str,
    overrides: &[(String, String)],
) -> Result<Scenario, ScenarioError> {
    let mut doc: ScenarioDoc =
        toml::from_str(document).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    doc.resolve_defaults();
    let doc = if overrides.is_empty() {
        doc
    } else {
        let mut value =
            toml::Value::try_from(&doc).map_err(|e| ScenarioError::Schema(e.to_string()))?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        value
            .try_into()
            .map_err(|e: toml::de::Error| ScenarioError::Schema(e.to_string()))?
    };
    validate(doc)
}

pub fn load_scenario_file(path: impl AsRef<std::path::Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    load_scenario(&text)
}

fn apply_override(root: &mut toml::Value, key: &str, raw: &str) -> Result<(), ScenarioError> {
    let missing = || ScenarioError::Schema(format!("override key `{key}` matches no scenario field"));
    let mut node = &mut *root;
    for segment in key.split('.') {
        node = match node {
            toml::Value::Table(map) => map.get_mut(segment).ok_or_else(missing)?,
            toml::Value::Array(items) => {
                let idx: usize = segment.parse().map_err(|_| missing())?;
                items.get_mut(idx).ok_or_else(missing)?
            }
            _ => return Err(missing()),
        };
    }
    let parsed: toml::Value = format!("v = {raw}")
        .parse::<toml::Table>()
        .map(|t| t["v"].clone())
        .unwrap_or_else(|_| toml::Value::String(raw.to_owned()));
    // keep integer literals usable for float fields
    *node = match (&node, &parsed) {
        (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(*i as f64),
        _ => parsed,
    };
    Ok(())
}

fn finite(value: f64, path: &str) -> Result<f64, ScenarioError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ScenarioError::invariant(path, "must be finite"))
    }
}

fn positive(value: f64, path: &str) -> Result<f64, ScenarioError> {
    if finite(value, path)? > 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::invariant(path, "must be positive"))
    }
}

fn nonnegative(value: f64, path: &str) -> Result<f64, ScenarioError> {
    if finite(value, path)? >= 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::invariant(path, "must be nonnegative"))
    }
}

fn validate(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
    if doc.name.trim().is_empty() {
        return Err(ScenarioError::invariant("name", "must not be empty"));
    }
    let dt = positive(doc.dt, "dt")?;
    if doc.horizon == 0 {
        return Err(ScenarioError::invariant("horizon", "must be at least 1"));
    }
    let robot_radius = positive(doc.robot_radius, "robot_radius")?;
    let goal_tolerance = positive(doc.goal_tolerance, "goal_tolerance")?;
    let boundary_resolution = positive(doc.boundary_resolution, "boundary_resolution")?;
    let step_budget = doc.step_budget.expect("defaults resolved");
    if step_budget == 0 {
        return Err(ScenarioError::invariant("step_budget", "must be at least 1"));
    }

    let mut obstacles = Vec::with_capacity(doc.obstacles.len());
    for (i, o) in doc.obstacles.iter().enumerate() {
        let path = format!("obstacles[{i}]");
        let vertices = o.vertices.iter().map(|[x, y]| Point2::new(*x, *y)).collect();
        let polygon = PolygonObstacle::new(vertices)
            .map_err(|e: GeometryError| ScenarioError::invariant(&path, e.to_string()))?;
        obstacles.push(polygon);
    }
    let inflated: Vec<PolygonObstacle> =
        obstacles.iter().map(|o| o.inflate(robot_radius)).collect();
    for (i, o) in inflated.iter().enumerate() {
        PolygonObstacle::new(o.vertices().to_vec()).map_err(|e| {
            ScenarioError::invariant(
                format!("obstacles[{i}]"),
                format!("inflation by the robot radius degenerates: {e}"),
            )
        })?;
    }

    if doc.robots.is_empty() {
        return Err(ScenarioError::invariant("robots", "at least one robot required"));
    }
    let mut robots = Vec::with_capacity(doc.robots.len());
    for (i, r) in doc.robots.iter().enumerate() {
        let path = format!("robots[{i}]");
        if r.id.trim().is_empty() {
            return Err(ScenarioError::invariant(format!("{path}.id"), "must not be empty"));
        }
        if doc.robots[..i].iter().any(|other| other.id == r.id) {
            return Err(ScenarioError::invariant(
                format!("{path}.id"),
                format!("duplicate robot id `{}`", r.id),
            ));
        }
        for (j, c) in r.start.iter().enumerate() {
            finite(*c, &format!("{path}.start[{j}]"))?;
        }
        let start = RobotState::new(r.start[0], r.start[1], r.start[2]);
        if point_in_collision(start.position(), &inflated) {
            return Err(ScenarioError::invariant(
                format!("{path}.start"),
                format!("robot `{}` starts inside an inflated obstacle", r.id),
            ));
        }
        let goal = Point2::new(finite(r.goal[0], &format!("{path}.goal[0]"))?,
                              finite(r.goal[1], &format!("{path}.goal[1]"))?);
        if point_in_collision(goal, &inflated) {
            return Err(ScenarioError::invariant(
                format!("{path}.goal"),
                format!("robot `{}` goal lies inside an inflated obstacle", r.id),
            ));
        }
        if r.reference_path.len() < 2 {
            return Err(ScenarioError::invariant(
                format!("{path}.reference_path"),
                "needs at least 2 vertices",
            ));
        }
        let reference_path: Vec<Point2<f64>> = r
            .reference_path
            .iter()
            .map(|[x, y]| Point2::new(*x, *y))
            .collect();
        let first = reference_path[0];
        if nalgebra::distance(&first, &start.position()) > PATH_START_TOLERANCE {
            return Err(ScenarioError::invariant(
                format!("{path}.reference_path"),
                format!("must start within {PATH_START_TOLERANCE} m of the robot start"),
            ));
        }
        let last = *reference_path.last().unwrap();
        if nalgebra::distance(&last, &goal) > goal_tolerance {
            return Err(ScenarioError::invariant(
                format!("{path}.reference_path"),
                "must end at the goal (within the goal tolerance)",
            ));
        }
        let v_ref = positive(r.v_ref, &format!("{path}.v_ref"))?;
        robots.push(RobotSpec {
            id: r.id.clone(),
            start,
            goal,
            reference_path,
            v_ref,
        });
    }

    let l = &doc.limits;
    let limits = ControlLimits {
        min: ControlInput::new(finite(l.v_min, "limits.v_min")?, finite(l.omega_min, "limits.omega_min")?),
        max: ControlInput::new(finite(l.v_max, "limits.v_max")?, finite(l.omega_max, "limits.omega_max")?),
        max_decrease: ControlInput::new(
            nonnegative(l.dv_decrease, "limits.dv_decrease")?,
            nonnegative(l.domega_decrease, "limits.domega_decrease")?,
        ),
        max_increase: ControlInput::new(
            nonnegative(l.dv_increase, "limits.dv_increase")?,
            nonnegative(l.domega_increase, "limits.domega_increase")?,
        ),
    };
    if limits.min.v > limits.max.v || limits.min.omega > limits.max.omega {
        return Err(ScenarioError::invariant("limits", "min must not exceed max"));
    }

    let w = &doc.weights;
    let weights = CostWeights {
        collision: nonnegative(w.collision, "weights.collision")?,
        collision_distance: nonnegative(w.collision_distance, "weights.collision_distance")?,
        collision_gradient: nonnegative(w.collision_gradient, "weights.collision_gradient")?,
        reference: nonnegative(w.reference, "weights.reference")?,
        velocity: nonnegative(w.velocity, "weights.velocity")?,
        target: nonnegative(w.target, "weights.target")?,
        gradient_rate: nonnegative(w.gradient_rate, "weights.gradient_rate")?,
        heading_threshold: finite(w.heading_threshold, "weights.heading_threshold")?,
        activation_range: positive(w.activation_range, "weights.activation_range")?,
    };
    if weights.heading_threshold <= std::f64::consts::FRAC_PI_2
        || weights.heading_threshold > std::f64::consts::PI
    {
        return Err(ScenarioError::invariant(
            "weights.heading_threshold",
            "must lie in (pi/2, pi]",
        ));
    }

    let k = &doc.kernel;
    let kernel = KernelParams {
        sigma: positive(k.sigma, "kernel.sigma")?,
        length_scale: positive(k.length_scale, "kernel.length_scale")?,
        noise_sigma: nonnegative(k.noise_sigma, "kernel.noise_sigma")?,
    };

    let s = &doc.sampling;
    let sampling = SamplingParams {
        v_resolution: positive(s.v_resolution, "sampling.v_resolution")?,
        omega_resolution: positive(s.omega_resolution, "sampling.omega_resolution")?,
        max_candidates: s.max_candidates.max(1),
    };
    if s.max_candidates == 0 {
        return Err(ScenarioError::invariant("sampling.max_candidates", "must be at least 1"));
    }

    Ok(Scenario {
        name: doc.name,
        obstacles,
        robots,
        limits,
        weights,
        kernel,
        sampling,
        horizon: doc.horizon,
        dt,
        step_budget,
        goal_tolerance,
        robot_radius,
        boundary_resolution,
    })
}

impl Scenario {
    /// Obstacles inflated by the robot radius, in obstacle order.
    pub fn inflated_obstacles(&self) -> Vec<PolygonObstacle> {
        self.obstacles
            .iter()
            .map(|o| o.inflate(self.robot_radius))
            .collect()
    }
}

// --- bundled fixtures --------------------------------------------------------

/// Names of the scenarios shipped with the crate.
pub const BUNDLED_NAMES: [&str; 7] = ["s1", "s2", "s3", "s4", "s5", "multi1", "multi2"];

/// Source text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "s1" => Some(include_str!("../scenarios/s1.toml")),
        "s2" => Some(include_str!("../scenarios/s2.toml")),
        "s3" => Some(include_str!("../scenarios/s3.toml")),
        "s4" => Some(include_str!("../scenarios/s4.toml")),
        "s5" => Some(include_str!("../scenarios/s5.toml")),
        "multi1" => Some(include_str!("../scenarios/multi1.toml")),
        "multi2" => Some(include_str!("../scenarios/multi2.toml")),
        _ => None,
    }
}

/// Loads a bundled scenario by name.
pub fn load_bundled(name: &str) -> Result<Scenario, ScenarioError> {
    let text = bundled(name)
        .ok_or_else(|| ScenarioError::Schema(format!("no bundled scenario named `{name}`")))?;
    load_scenario(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_sampling_marches_from_the_projection() {
        let path = [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)];
        let sampled = sample_reference(&path, Point2::new(0.0, 0.5), 1.0, 0.2, 3).unwrap();
        assert_eq!(
            sampled.positions(),
            &[
                Point2::new(0.2, 0.0),
                Point2::new(0.4, 0.0),
                Point2::new(0.6000000000000001, 0.0),
            ]
        );
    }

    #[test]
    fn reference_sampling_saturates_at_the_end() {
        let path = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        let sampled = sample_reference(&path, Point2::new(2.0, 0.3), 1.0, 0.2, 4).unwrap();
        assert!(sampled.positions().iter().all(|p| *p == Point2::new(1.0, 0.0)));
    }

    #[test]
    fn reference_sampling_breaks_projection_ties_early() {
        // current point equidistant from two parallel legs
        let path = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let sampled = sample_reference(&path, Point2::new(1.0, 1.0), 1.0, 0.5, 2).unwrap();
        // projection lands on the first leg at arc length 1.0
        assert_abs_diff_eq!(sampled.positions()[0].x, 1.5);
        assert_abs_diff_eq!(sampled.positions()[0].y, 0.0);

        assert_eq!(sample_reference(&path[..1], Point2::origin(), 1.0, 0.2, 3), Err(EmptyPath));
    }

    #[test]
    fn reference_spacing_never_exceeds_the_march_step() {
        let path = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.5),
            Point2::new(-2.0, 1.5),
        ];
        let sampled = sample_reference(&path, Point2::new(0.3, -0.4), 1.3, 0.2, 25).unwrap();
        for w in sampled.positions().windows(2) {
            assert!(nalgebra::distance(&w[0], &w[1]) <= 1.3 * 0.2 + 1e-9);
        }
    }

    #[test]
    fn bundled_scenarios_load_clean() {
        for name in BUNDLED_NAMES {
            let scenario = load_bundled(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(scenario.name, name);
        }
        let s3 = load_bundled("s3").unwrap();
        assert_eq!(s3.obstacles.len(), 1);
        assert_eq!(s3.obstacles[0].vertices().len(), 8);
        assert_eq!(s3.robots.len(), 1);

        let multi1 = load_bundled("multi1").unwrap();
        assert!(multi1.obstacles.is_empty());
        assert_eq!(multi1.robots.len(), 4);
        assert_eq!(multi1.step_budget, 200);

        let s1 = load_bundled("s1").unwrap();
        assert_eq!(s1.step_budget, 400);

        assert!(load_bundled("s99").is_err());
    }

    #[test]
    fn schema_errors() {
        // missing v_ref
        let doc = r#"
name = "broken"
[[robots]]
id = "r0"
start = [0.0, 0.0, 0.0]
goal = [1.0, 0.0]
reference_path = [[0.0, 0.0], [1.0, 0.0]]
"#;
        assert!(matches!(load_scenario(doc), Err(ScenarioError::Schema(_))));
    }

    #[test]
    fn start_inside_an_obstacle_names_the_robot() {
        let doc = r#"
name = "bad-start"
[[obstacles]]
vertices = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
[[robots]]
id = "r7"
start = [0.0, 0.0, 0.0]
goal = [5.0, 0.0]
reference_path = [[0.0, 0.0], [5.0, 0.0]]
v_ref = 1.0
"#;
        match load_scenario(doc) {
            Err(ScenarioError::Invariant { path, message }) => {
                assert_eq!(path, "robots[0].start");
                assert!(message.contains("r7"));
            }
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn overrides_apply_and_reject_unknown_keys() {
        let doc = bundled("s3").unwrap();
        let plain = load_scenario(doc).unwrap();
        assert!(plain.weights.collision_gradient > 0.0);

        let overridden = load_scenario_with_overrides(
            doc,
            &[("weights.collision_gradient".into(), "0".into())],
        )
        .unwrap();
        assert_eq!(overridden.weights.collision_gradient, 0.0);

        let nested = load_scenario_with_overrides(doc, &[("robots.0.v_ref".into(), "0.7".into())])
            .unwrap();
        assert_eq!(nested.robots[0].v_ref, 0.7);

        // defaults are expanded before overrides, so defaulted fields resolve
        let budget =
            load_scenario_with_overrides(doc, &[("step_budget".into(), "12".into())]).unwrap();
        assert_eq!(budget.step_budget, 12);

        let err = load_scenario_with_overrides(doc, &[("weights.typo".into(), "1".into())]);
        assert!(matches!(err, Err(ScenarioError::Schema(_))));
    }
}
