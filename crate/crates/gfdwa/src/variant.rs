//! Collision-cost strategies behind a common trait, registered by name and
//! selected at runtime.
//!
//! Two variants ship built in: `gf-dwa` combines the reciprocal-distance
//! term with the gradient-alignment term, while `dwa-ablation` keeps only
//! the distance term (the rest of the objective is shared). Additional
//! strategies can be registered alongside them.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dwa::{cost_col_dist, CostWeights, Trajectory};
use crate::gpdf::DistanceField;

/// Name of the built-in gradient-field variant.
pub const GF_DWA: &str = "gf-dwa";
/// Name of the built-in distance-only ablation.
pub const DWA_ABLATION: &str = "dwa-ablation";

/// Raw (unweighted) values of the two collision terms for one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionCost {
    pub j_col_dist: f64,
    pub j_col_grad: f64,
}

/// Strategy computing the collision terms of a candidate trajectory.
pub trait CollisionModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Evaluates states 1..=N against the field. Both terms are zero while
    /// the whole candidate stays beyond the activation range.
    fn evaluate(
        &self,
        traj: &Trajectory,
        field: &dyn DistanceField,
        weights: &CostWeights,
    ) -> CollisionCost;
}

/// Distance term plus the exponential heading-misalignment penalty against
/// the field gradient, in one query pass per state.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradientFieldModel;

impl CollisionModel for GradientFieldModel {
    fn name(&self) -> &'static str {
        GF_DWA
    }

    fn evaluate(
        &self,
        traj: &Trajectory,
        field: &dyn DistanceField,
        weights: &CostWeights,
    ) -> CollisionCost {
        let mut min_d = f64::INFINITY;
        let mut j_col_grad = 0.0;
        for s in &traj.states[1..] {
            let q = field.query(s.position());
            min_d = min_d.min(q.distance);
            if q.distance > weights.activation_range || q.gradient == nalgebra::Vector2::zeros()
            {
                continue;
            }
            let misalignment =
                crate::dwa::wrap_angle(s.theta - q.gradient.y.atan2(q.gradient.x)).abs();
            if misalignment >= weights.heading_threshold {
                j_col_grad += (weights.gradient_rate * misalignment).exp() - 1.0;
            }
        }
        if min_d > weights.activation_range {
            return CollisionCost {
                j_col_dist: 0.0,
                j_col_grad: 0.0,
            };
        }
        let j_col_dist = if min_d <= 0.0 { f64::INFINITY } else { 1.0 / min_d };
        CollisionCost {
            j_col_dist,
            j_col_grad,
        }
    }
}

/// Distance term only; never queries gradients.
#[derive(Debug, Clone, Copy, Default)]
pub struct DistanceOnlyModel;

impl CollisionModel for DistanceOnlyModel {
    fn name(&self) -> &'static str {
        DWA_ABLATION
    }

    fn evaluate(
        &self,
        traj: &Trajectory,
        field: &dyn DistanceField,
        weights: &CostWeights,
    ) -> CollisionCost {
        CollisionCost {
            j_col_dist: cost_col_dist(traj, field, weights.activation_range),
            j_col_grad: 0.0,
        }
    }
}

type Factory = fn() -> Arc<dyn CollisionModel>;

/// Name-keyed registry of collision-cost strategies.
#[derive(Clone)]
pub struct VariantRegistry {
    factories: BTreeMap<String, Factory>,
}

impl VariantRegistry {
    /// Registry with the two built-in variants.
    pub fn builtin() -> Self {
        let mut registry = Self {
            factories: BTreeMap::new(),
        };
        registry.register(GF_DWA, || Arc::new(GradientFieldModel));
        registry.register(DWA_ABLATION, || Arc::new(DistanceOnlyModel));
        registry
    }

    pub fn register(&mut self, name: &str, factory: Factory) {
        self.factories.insert(name.to_owned(), factory);
    }

    pub fn create(&self, name: &str) -> Option<Arc<dyn CollisionModel>> {
        self.factories.get(name).map(|f| f())
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }
}

impl Default for VariantRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
