//! Distributed fleet collision avoidance: each robot publishes its selected
//! trajectory to a shared board, and every planning round builds per-robot
//! fields over the other robots' previous-step predictions, min-composed
//! with the static obstacle field.

use std::collections::BTreeMap;

use nalgebra::Point2;

use crate::gpdf::{DistanceField, FieldQuery, GpField, GpdfError, KernelParams, ObstaclePointSet};

/// One published prediction: the round it was published in and the N+1
/// predicted positions of the selected trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct BoardEntry {
    pub step: usize,
    pub positions: Vec<Point2<f64>>,
}

/// Per-robot predicted trajectories, keyed by robot id.
///
/// Keys are ordered, so any iteration over the board (and therefore any
/// fleet point set built from it) is independent of publication order.
#[derive(Debug, Clone, Default)]
pub struct PredictedTrajectoryBoard {
    entries: BTreeMap<String, BoardEntry>,
}

impl PredictedTrajectoryBoard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the robot's entry; idempotent for identical input.
    pub fn publish(&mut self, robot_id: &str, step: usize, positions: Vec<Point2<f64>>) {
        self.entries
            .insert(robot_id.to_owned(), BoardEntry { step, positions });
    }

    pub fn entry(&self, robot_id: &str) -> Option<&BoardEntry> {
        self.entries.get(robot_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BoardEntry)> {
        self.entries.iter().map(|(id, e)| (id.as_str(), e))
    }
}

/// Field over the other robots' predicted positions, plus the clearance
/// subtracted from its distances so that robot-robot distance reads as
/// center-to-center minus both radii.
#[derive(Debug, Clone)]
pub struct FleetField {
    pub field: GpField,
    pub clearance: f64,
}

/// Fits a field on every position of every other robot's prediction, in id
/// order. Returns `None` when the board holds no other robots.
pub fn build_fleet_field(
    board: &PredictedTrajectoryBoard,
    self_id: &str,
    params: KernelParams,
    robot_radius: f64,
) -> Result<Option<FleetField>, GpdfError> {
    let mut points = Vec::new();
    for (id, entry) in board.iter() {
        if id != self_id {
            points.extend_from_slice(&entry.positions);
        }
    }
    if points.is_empty() {
        return Ok(None);
    }
    let field = GpField::fit(ObstaclePointSet::from_points(points), params)?;
    Ok(Some(FleetField {
        field,
        clearance: 2.0 * robot_radius,
    }))
}

/// Min-composition of the static obstacle field and the fleet field. Fleet
/// distances are reduced by the clearance (clamped at zero) before the min,
/// and exact ties keep the static field.
#[derive(Debug, Clone, Copy)]
pub struct UnifiedField<'a> {
    static_field: Option<&'a GpField>,
    fleet: Option<&'a FleetField>,
}

impl<'a> UnifiedField<'a> {
    pub const fn new(static_field: Option<&'a GpField>, fleet: Option<&'a FleetField>) -> Self {
        Self {
            static_field,
            fleet,
        }
    }

    pub fn fleet(&self) -> Option<&FleetField> {
        self.fleet
    }
}

impl DistanceField for UnifiedField<'_> {
    fn query(&self, p: Point2<f64>) -> FieldQuery {
        let mut best = match self.static_field {
            Some(f) => f.query(p),
            None => FieldQuery {
                distance: f64::INFINITY,
                gradient: nalgebra::Vector2::zeros(),
                latent_variance: None,
            },
        };
        if let Some(fleet) = self.fleet {
            let mut q = fleet.field.query(p);
            q.distance = (q.distance - fleet.clearance).max(0.0);
            if q.distance < best.distance {
                best = q;
            }
        }
        best
    }

    fn distance(&self, p: Point2<f64>) -> f64 {
        let mut best = match self.static_field {
            Some(f) => f.query_distance(p),
            None => f64::INFINITY,
        };
        if let Some(fleet) = self.fleet {
            best = best.min((fleet.field.query_distance(p) - fleet.clearance).max(0.0));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn point_field(x: f64, y: f64) -> GpField {
        let params = KernelParams {
            noise_sigma: 0.0,
            ..KernelParams::default()
        };
        GpField::fit(ObstaclePointSet::from_points([Point2::new(x, y)]), params).unwrap()
    }

    #[test]
    fn publish_replaces_and_keeps_entries_apart() {
        let mut board = PredictedTrajectoryBoard::new();
        board.publish("r0", 3, vec![Point2::new(0.0, 0.0)]);
        assert_eq!(board.len(), 1);

        board.publish("r0", 3, vec![Point2::new(0.0, 0.0)]);
        assert_eq!(board.len(), 1);
        assert_eq!(board.entry("r0").unwrap().positions.len(), 1);

        board.publish("r0", 4, vec![Point2::new(1.0, 0.0), Point2::new(1.2, 0.0)]);
        assert_eq!(board.len(), 1);
        assert_eq!(board.entry("r0").unwrap().step, 4);
        assert_eq!(board.entry("r0").unwrap().positions.len(), 2);

        board.publish("r1", 4, vec![Point2::new(5.0, 0.0)]);
        assert_eq!(board.len(), 2);
    }

    #[test]
    fn solo_board_yields_no_fleet_field() {
        let mut board = PredictedTrajectoryBoard::new();
        board.publish("r0", 0, vec![Point2::new(0.0, 0.0)]);
        let fleet = build_fleet_field(&board, "r0", KernelParams::default(), 0.5).unwrap();
        assert!(fleet.is_none());
    }

    #[test]
    fn one_other_robot_gives_its_prediction_as_points() {
        let mut board = PredictedTrajectoryBoard::new();
        board.publish("r0", 0, vec![Point2::new(0.0, 0.0)]);
        let other: Vec<_> = (0..=20).map(|n| Point2::new(5.0 + 0.2 * n as f64, 0.0)).collect();
        board.publish("r1", 0, other);
        let fleet = build_fleet_field(&board, "r0", KernelParams::default(), 0.5)
            .unwrap()
            .unwrap();
        assert_eq!(fleet.field.points().len(), 21);
        assert_abs_diff_eq!(fleet.clearance, 1.0);
    }

    #[test]
    fn fleet_point_order_is_id_order_not_publish_order() {
        let mut a = PredictedTrajectoryBoard::new();
        a.publish("r1", 0, vec![Point2::new(1.0, 0.0)]);
        a.publish("r2", 0, vec![Point2::new(2.0, 0.0)]);
        let mut b = PredictedTrajectoryBoard::new();
        b.publish("r2", 0, vec![Point2::new(2.0, 0.0)]);
        b.publish("r1", 0, vec![Point2::new(1.0, 0.0)]);
        let fa = build_fleet_field(&a, "r0", KernelParams::default(), 0.5)
            .unwrap()
            .unwrap();
        let fb = build_fleet_field(&b, "r0", KernelParams::default(), 0.5)
            .unwrap()
            .unwrap();
        assert_eq!(fa.field.points(), fb.field.points());
        assert_eq!(fa.field.weights(), fb.field.weights());
    }

    #[test]
    fn unified_query_applies_clearance_then_min() {
        let wall = point_field(0.0, 0.8);
        let fleet = FleetField {
            field: point_field(0.9, 0.0),
            clearance: 1.0,
        };
        let unified = UnifiedField::new(Some(&wall), Some(&fleet));

        // 0.9 m from the predicted path, clearance 1.0: clamps to 0 and wins
        let q = unified.query(Point2::new(0.0, 0.0));
        assert_abs_diff_eq!(q.distance, 0.0);
        assert!(q.gradient.x < -0.99, "gradient should point away from the fleet point");

        // far from the fleet, the static wall wins
        let far_fleet = FleetField {
            field: point_field(10.0, 0.0),
            clearance: 1.0,
        };
        let unified = UnifiedField::new(Some(&wall), Some(&far_fleet));
        let q = unified.query(Point2::new(0.0, 0.0));
        assert_abs_diff_eq!(q.distance, 0.8, epsilon = 1e-9);
        assert!(q.gradient.y < -0.99);

        // no fleet field: identical to the static query
        let solo = UnifiedField::new(Some(&wall), None);
        assert_eq!(solo.query(Point2::new(0.3, 0.1)), wall.query(Point2::new(0.3, 0.1)));

        // nothing at all reads as free space
        let empty = UnifiedField::new(None, None);
        assert_eq!(empty.query(Point2::new(0.0, 0.0)).distance, f64::INFINITY);
    }
}
