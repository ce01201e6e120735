//! Deterministic stepped simulation: per-round publish/plan/apply cycle,
//! ground-truth collision and goal adjudication, metrics, and trace
//! recording. Robots are processed in id order throughout, so the outcome is
//! independent of their ordering in the scenario file.

use nalgebra::Point2;
use serde::Serialize;
use thiserror::Error;

use crate::dwa::{
    plan, step, CandidateEndpoint, ControlInput, PlanContext, RobotState,
};
use crate::fleet::{build_fleet_field, PredictedTrajectoryBoard, UnifiedField};
use crate::geometry::{point_in_collision, signed_clearance, PolygonObstacle};
use crate::gpdf::{GpField, GpdfError};
use crate::scenario::{sample_reference, RobotSpec, Scenario};
use crate::variant::{CollisionModel, GradientFieldModel};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("static obstacle field: {0}")]
    StaticField(#[source] GpdfError),
    #[error("fleet field for robot `{id}` at step {step}: {source}")]
    FleetField {
        id: String,
        step: usize,
        #[source]
        source: GpdfError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotStatus {
    Reached,
    Collided,
    Timeout,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobotOutcome {
    pub id: String,
    pub status: RobotStatus,
    /// Steps taken to reach the goal; absent unless the robot reached it.
    pub steps_to_goal: Option<usize>,
}

/// One trace line: the state a robot planned from, the control it applied,
/// and the cost breakdown of the selected candidate. Emitted per active
/// robot per step until that robot terminates.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub robot: String,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
    pub feasible_candidates: usize,
    pub all_infeasible: bool,
    pub j_col_dist: f64,
    pub j_col_grad: f64,
    pub j_ref: f64,
    pub j_vel: f64,
    pub j_tar: f64,
    pub total: f64,
}

/// Per-step candidate endpoints for plot exports.
#[derive(Debug, Clone, Serialize)]
pub struct PlotRecord {
    pub step: usize,
    pub robot: String,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub candidates: Vec<CandidateEndpoint>,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub robots: Vec<RobotOutcome>,
    /// Smallest center-to-center distance between any two robots over the
    /// run; absent for a solo robot.
    pub min_inter_robot_distance: Option<f64>,
    /// Smallest signed clearance to the inflated obstacles over the run;
    /// absent when the map has none.
    pub min_obstacle_clearance: Option<f64>,
    pub trace: Vec<TraceRecord>,
    pub plot: Vec<PlotRecord>,
    pub step_budget: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsSummary {
    pub success: bool,
    /// Largest steps-to-goal over the robots; timeouts and collisions count
    /// as the full budget.
    pub max_steps: usize,
    pub robots: Vec<RobotOutcome>,
    pub min_inter_robot_distance: Option<f64>,
    pub min_obstacle_clearance: Option<f64>,
}

/// Success requires every robot to reach its goal.
pub fn metrics(outcome: &SimOutcome) -> MetricsSummary {
    let success = outcome
        .robots
        .iter()
        .all(|r| r.status == RobotStatus::Reached);
    let max_steps = outcome
        .robots
        .iter()
        .map(|r| r.steps_to_goal.unwrap_or(outcome.step_budget))
        .max()
        .unwrap_or(0);
    MetricsSummary {
        success,
        max_steps,
        robots: outcome.robots.clone(),
        min_inter_robot_distance: outcome.min_inter_robot_distance,
        min_obstacle_clearance: outcome.min_obstacle_clearance,
    }
}

/// One JSON record per line, in (step, robot id) order.
pub fn trace_to_jsonl(outcome: &SimOutcome) -> String {
    let mut out = String::new();
    for record in &outcome.trace {
        out.push_str(&serde_json::to_string(record).expect("trace serializes"));
        out.push('\n');
    }
    out
}

pub fn plot_to_jsonl(outcome: &SimOutcome) -> String {
    let mut out = String::new();
    for record in &outcome.plot {
        out.push_str(&serde_json::to_string(record).expect("plot record serializes"));
        out.push('\n');
    }
    out
}

struct SimRobot<'a> {
    spec: &'a RobotSpec,
    state: RobotState,
    prev_u: ControlInput,
    status: Option<RobotStatus>,
    steps_to_goal: Option<usize>,
    /// Positions published at the start of the next round: the previously
    /// selected trajectory while active, a hold at the current pose after
    /// termination (terminated robots still occupy space).
    next_publication: Vec<Point2<f64>>,
}

impl SimRobot<'_> {
    fn active(&self) -> bool {
        self.status.is_none()
    }

    fn hold_positions(&self, horizon: usize) -> Vec<Point2<f64>> {
        vec![self.state.position(); horizon + 1]
    }
}

/// Runs the scenario under the gradient-field collision model.
pub fn run(scenario: &Scenario) -> Result<SimOutcome, SimError> {
    run_with(scenario, &GradientFieldModel)
}

/// Runs the scenario under the given collision-cost strategy.
///
/// Each round: every robot publishes its previous prediction, every active
/// robot plans against the board, all selected controls apply at once, then
/// collisions and goal arrivals are adjudicated on the new poses. Fully
/// deterministic.
pub fn run_with(scenario: &Scenario, model: &dyn CollisionModel) -> Result<SimOutcome, SimError> {
    let inflated = scenario.inflated_obstacles();
    let static_field: Option<GpField> = if scenario.obstacles.is_empty() {
        None
    } else {
        let samples =
            crate::geometry::sample_boundaries(&inflated, scenario.boundary_resolution);
        Some(GpField::fit(samples, scenario.kernel).map_err(SimError::StaticField)?)
    };

    let mut order: Vec<&RobotSpec> = scenario.robots.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));

    let mut robots: Vec<SimRobot> = order
        .iter()
        .map(|spec| SimRobot {
            spec,
            state: spec.start,
            prev_u: ControlInput::new(0.0, 0.0),
            status: None,
            steps_to_goal: None,
            next_publication: vec![spec.start.position(); scenario.horizon + 1],
        })
        .collect();

    let mut min_inter: Option<f64> = None;
    let mut min_clearance: Option<f64> = None;
    let mut trace = Vec::new();
    let mut plot = Vec::new();
    let mut board = PredictedTrajectoryBoard::new();
    let clearance_limit = 2.0 * scenario.robot_radius;

    // adjudicate the initial configuration before any motion
    observe_distances(&robots, &inflated, &mut min_inter, &mut min_clearance);
    for robot in robots.iter_mut() {
        if point_in_collision(robot.state.position(), &inflated) {
            robot.status = Some(RobotStatus::Collided);
        }
    }
    mark_pairwise_collisions(&mut robots, clearance_limit);
    for robot in robots.iter_mut() {
        if robot.active()
            && nalgebra::distance(&robot.state.position(), &robot.spec.goal)
                <= scenario.goal_tolerance
        {
            robot.status = Some(RobotStatus::Reached);
            robot.steps_to_goal = Some(0);
        }
    }

    for step_idx in 0..scenario.step_budget {
        if robots.iter().all(|r| !r.active()) {
            break;
        }

        // publish: previous selections for active robots, holds for the rest
        for robot in robots.iter() {
            let positions = if robot.active() {
                robot.next_publication.clone()
            } else {
                robot.hold_positions(scenario.horizon)
            };
            board.publish(&robot.spec.id, step_idx, positions);
        }

        // plan every active robot against the same board
        let mut plans: Vec<Option<crate::dwa::PlanOutcome>> = Vec::with_capacity(robots.len());
        for robot in robots.iter() {
            if !robot.active() {
                plans.push(None);
                continue;
            }
            let fleet = build_fleet_field(
                &board,
                &robot.spec.id,
                scenario.kernel,
                scenario.robot_radius,
            )
            .map_err(|source| SimError::FleetField {
                id: robot.spec.id.clone(),
                step: step_idx,
                source,
            })?;
            let unified = UnifiedField::new(static_field.as_ref(), fleet.as_ref());
            let reference = sample_reference(
                &robot.spec.reference_path,
                robot.state.position(),
                robot.spec.v_ref,
                scenario.dt,
                scenario.horizon,
            )
            .expect("validated reference path");
            let fleet_points: &[Point2<f64>] =
                fleet.as_ref().map(|f| f.field.points()).unwrap_or(&[]);
            let ctx = PlanContext {
                field: &unified,
                inflated_obstacles: &inflated,
                fleet_points,
                fleet_clearance: clearance_limit,
                reference: reference.positions(),
                target: robot.spec.goal,
                v_ref: robot.spec.v_ref,
                limits: &scenario.limits,
                sampling: &scenario.sampling,
                weights: &scenario.weights,
                horizon: scenario.horizon,
                dt: scenario.dt,
                model,
            };
            let outcome =
                plan(&robot.state, robot.prev_u, &ctx).expect("window always yields candidates");
            plans.push(Some(outcome));
        }

        // apply controls and record the trace from the pre-step poses
        for (robot, planned) in robots.iter_mut().zip(plans) {
            let Some(planned) = planned else { continue };
            let pre = robot.state;
            trace.push(TraceRecord {
                step: step_idx,
                robot: robot.spec.id.clone(),
                x: pre.x,
                y: pre.y,
                theta: pre.theta,
                v: planned.control.v,
                omega: planned.control.omega,
                feasible_candidates: planned.diagnostics.feasible_count,
                all_infeasible: planned.diagnostics.all_infeasible,
                j_col_dist: planned.diagnostics.selected.j_col_dist,
                j_col_grad: planned.diagnostics.selected.j_col_grad,
                j_ref: planned.diagnostics.selected.j_ref,
                j_vel: planned.diagnostics.selected.j_vel,
                j_tar: planned.diagnostics.selected.j_tar,
                total: planned.diagnostics.selected.total,
            });
            plot.push(PlotRecord {
                step: step_idx,
                robot: robot.spec.id.clone(),
                x: pre.x,
                y: pre.y,
                theta: pre.theta,
                candidates: planned.diagnostics.endpoints,
            });
            robot.state = step(&robot.state, planned.control, scenario.dt);
            robot.prev_u = planned.control;
            robot.next_publication = planned
                .trajectory
                .states
                .iter()
                .map(|s| s.position())
                .collect();
        }

        // adjudicate the new configuration
        observe_distances(&robots, &inflated, &mut min_inter, &mut min_clearance);
        for robot in robots.iter_mut() {
            if robot.active() && point_in_collision(robot.state.position(), &inflated) {
                robot.status = Some(RobotStatus::Collided);
            }
        }
        mark_pairwise_collisions(&mut robots, clearance_limit);
        for robot in robots.iter_mut() {
            if robot.active()
                && nalgebra::distance(&robot.state.position(), &robot.spec.goal)
                    <= scenario.goal_tolerance
            {
                robot.status = Some(RobotStatus::Reached);
                robot.steps_to_goal = Some(step_idx + 1);
            }
        }
    }

    let robots = robots
        .into_iter()
        .map(|r| RobotOutcome {
            id: r.spec.id.clone(),
            status: r.status.unwrap_or(RobotStatus::Timeout),
            steps_to_goal: r.steps_to_goal,
        })
        .collect();
    Ok(SimOutcome {
        robots,
        min_inter_robot_distance: min_inter,
        min_obstacle_clearance: min_clearance,
        trace,
        plot,
        step_budget: scenario.step_budget,
    })
}

fn observe_distances(
    robots: &[SimRobot<'_>],
    inflated: &[PolygonObstacle],
    min_inter: &mut Option<f64>,
    min_clearance: &mut Option<f64>,
) {
    for (i, a) in robots.iter().enumerate() {
        if !inflated.is_empty() {
            let c = signed_clearance(a.state.position(), inflated);
            *min_clearance = Some(min_clearance.map_or(c, |m: f64| m.min(c)));
        }
        for b in &robots[i + 1..] {
            let d = nalgebra::distance(&a.state.position(), &b.state.position());
            *min_inter = Some(min_inter.map_or(d, |m: f64| m.min(d)));
        }
    }
}

fn mark_pairwise_collisions(robots: &mut [SimRobot<'_>], clearance_limit: f64) {
    let positions: Vec<Point2<f64>> = robots.iter().map(|r| r.state.position()).collect();
    for i in 0..robots.len() {
        for j in (i + 1)..robots.len() {
            if nalgebra::distance(&positions[i], &positions[j]) < clearance_limit {
                // terminated robots keep their status; they are obstacles now
                if robots[i].active() {
                    robots[i].status = Some(RobotStatus::Collided);
                }
                if robots[j].active() {
                    robots[j].status = Some(RobotStatus::Collided);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_scenario;

    fn open_field_doc() -> &'static str {
        r#"
name = "open"
step_budget = 80
[[robots]]
id = "r0"
start = [0.0, 0.0, 0.0]
goal = [3.0, 0.0]
reference_path = [[0.0, 0.0], [3.0, 0.0]]
v_ref = 1.0
"#
    }

    #[test]
    fn open_field_run_reaches_the_goal() {
        let scenario = load_scenario(open_field_doc()).unwrap();
        let outcome = run(&scenario).unwrap();
        assert_eq!(outcome.robots.len(), 1);
        assert_eq!(outcome.robots[0].status, RobotStatus::Reached);
        let steps = outcome.robots[0].steps_to_goal.unwrap();
        assert!(steps > 5 && steps < 40, "steps {steps}");
        assert_eq!(outcome.trace.len(), steps);
        assert!(outcome.min_inter_robot_distance.is_none());
        assert!(outcome.min_obstacle_clearance.is_none());

        let summary = metrics(&outcome);
        assert!(summary.success);
        assert_eq!(summary.max_steps, steps);
    }

    #[test]
    fn overlapping_starts_collide_immediately() {
        let doc = r#"
name = "overlap"
step_budget = 10
[[robots]]
id = "a"
start = [0.0, 0.0, 0.0]
goal = [3.0, 0.0]
reference_path = [[0.0, 0.0], [3.0, 0.0]]
v_ref = 1.0
[[robots]]
id = "b"
start = [0.9, 0.0, 0.0]
goal = [4.0, 0.0]
reference_path = [[0.9, 0.0], [4.0, 0.0]]
v_ref = 1.0
"#;
        let scenario = load_scenario(doc).unwrap();
        let outcome = run(&scenario).unwrap();
        assert!(outcome
            .robots
            .iter()
            .all(|r| r.status == RobotStatus::Collided));
        assert!(outcome.trace.is_empty());
        assert_eq!(outcome.min_inter_robot_distance, Some(0.9));
        let summary = metrics(&outcome);
        assert!(!summary.success);
        assert_eq!(summary.max_steps, scenario.step_budget);
    }

    #[test]
    fn timeout_counts_the_full_budget() {
        let doc = r#"
name = "too-short"
step_budget = 3
[[robots]]
id = "r0"
start = [0.0, 0.0, 0.0]
goal = [5.0, 0.0]
reference_path = [[0.0, 0.0], [5.0, 0.0]]
v_ref = 1.0
"#;
        let scenario = load_scenario(doc).unwrap();
        let outcome = run(&scenario).unwrap();
        assert_eq!(outcome.robots[0].status, RobotStatus::Timeout);
        assert_eq!(outcome.robots[0].steps_to_goal, None);
        assert_eq!(metrics(&outcome).max_steps, 3);
        assert!(!metrics(&outcome).success);
    }

    #[test]
    fn solo_run_matches_a_fleet_free_planner_loop() {
        use crate::dwa::{plan, PlanContext};
        use crate::fleet::UnifiedField;
        use crate::variant::GradientFieldModel;

        let scenario = load_scenario(open_field_doc()).unwrap();
        let outcome = run(&scenario).unwrap();

        // replay without any fleet machinery; states must match bitwise
        let robot = &scenario.robots[0];
        let mut state = robot.start;
        let mut prev = ControlInput::new(0.0, 0.0);
        let unified = UnifiedField::new(None, None);
        for record in &outcome.trace {
            assert_eq!((record.x, record.y, record.theta), (state.x, state.y, state.theta));
            let reference = sample_reference(
                &robot.reference_path,
                state.position(),
                robot.v_ref,
                scenario.dt,
                scenario.horizon,
            )
            .unwrap();
            let ctx = PlanContext {
                field: &unified,
                inflated_obstacles: &[],
                fleet_points: &[],
                fleet_clearance: 1.0,
                reference: reference.positions(),
                target: robot.goal,
                v_ref: robot.v_ref,
                limits: &scenario.limits,
                sampling: &scenario.sampling,
                weights: &scenario.weights,
                horizon: scenario.horizon,
                dt: scenario.dt,
                model: &GradientFieldModel,
            };
            let planned = plan(&state, prev, &ctx).unwrap();
            assert_eq!((record.v, record.omega), (planned.control.v, planned.control.omega));
            state = step(&state, planned.control, scenario.dt);
            prev = planned.control;
        }
    }

    #[test]
    fn trace_serialization_is_line_per_record() {
        let scenario = load_scenario(open_field_doc()).unwrap();
        let outcome = run(&scenario).unwrap();
        let jsonl = trace_to_jsonl(&outcome);
        assert_eq!(jsonl.lines().count(), outcome.trace.len());
        let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
        assert_eq!(first["step"], 0);
        assert_eq!(first["robot"], "r0");
        assert!(first["total"].is_number());
    }
}
