//! Gradient-field dynamic window planning for differential-drive robots.
//!
//! The crate builds continuous distance and gradient fields over obstacle
//! point sets by Gaussian process regression, plugs the gradient information
//! into a sampling-based receding-horizon planner as an anticipatory
//! collision cost, and runs deterministic single- and multi-robot
//! simulations driven by declarative scenario files.
//!
//! Modules:
//!
//! - [`gpdf`]: Gaussian process distance fields (fit, distance/gradient/variance queries, composition)
//! - [`geometry`]: polygonal obstacles, boundary sampling, inflation, exact collision predicates
//! - [`dwa`]: dynamic window generation, trajectory rollout, cost terms, candidate selection
//! - [`variant`]: collision-cost strategies behind a common trait, registered by name
//! - [`fleet`]: predicted-trajectory board and unified static + fleet fields
//! - [`scenario`]: scenario files, validation, reference-trajectory sampling
//! - [`sim`]: stepped multi-robot simulation with trace and metrics output

pub mod dwa;
pub mod fleet;
pub mod geometry;
pub mod gpdf;
pub mod scenario;
pub mod sim;
pub mod variant;

pub use dwa::{ControlInput, ControlLimits, CostWeights, RobotState, SamplingParams, Trajectory};
pub use fleet::{PredictedTrajectoryBoard, UnifiedField};
pub use geometry::{PolygonObstacle, RobotShape};
pub use gpdf::{DistanceField, FieldQuery, GpField, KernelParams, ObstaclePointSet};
pub use scenario::Scenario;
pub use sim::{SimOutcome, TraceRecord};
pub use variant::{CollisionModel, VariantRegistry};
