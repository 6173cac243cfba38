//! Multiobjective balanced gradient flows.
//!
//! The flow moves along `-proj_{C_alpha(x,t)}(0)`, the min-norm point of
//! the convex hull of the scaled gradients `grad f_i(x) / alpha_i(x,t)`.
//! Dividing by `alpha_i` balances objectives whose gradients differ by
//! orders of magnitude. The crate provides the hull geometry, a suite of
//! test problems, first-order and accelerated flow integrators, the
//! explicit discrete scheme, merit-function estimation, and verification
//! suites for the convergence-rate bounds.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision.
//!
//! ```
//! use mbgf::{integrate_first_order, FlowConfig, ScalingRule};
//!
//! let p = mbgf::problems::strongly_convex::<f64>();
//! let cfg = FlowConfig::first_order(5.0, 1e-3);
//! let traj = integrate_first_order(&p, &ScalingRule::unit(), &[3.0, 1.0], &cfg).unwrap();
//! assert!(traj.last().crit_scaled < 1e-2);
//! ```

pub mod config;
pub mod discrete;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod merit;
pub mod problems;
pub mod scalar;
pub mod scaling;
pub mod verify;

pub use config::{parse_config, ExperimentConfig, Mode};
pub use discrete::{discrete_monitors, run_discrete, DiscreteConfig, DiscreteRun, StepRule};
pub use error::{Error, Result};
pub use experiment::{run_experiment, Outcome};
pub use flow::{
    integrate_accelerated, integrate_first_order, solve_implicit_acceleration, AccelScheme,
    FlowConfig, FlowMode, Record, Trajectory,
};
pub use geometry::{
    distance_to_hull, excess, hausdorff_hull_distance, min_norm_point, project_onto_hull,
    support_point, HullProjection,
};
pub use merit::{criticality, u0_ascent, u0_certified, MeritEstimate};
pub use problems::{builtin, BoxRegion, Problem, ProblemBuilder, BUILTIN_NAMES};
pub use scalar::Scalar;
pub use scaling::ScalingRule;
pub use verify::{run_suite, Suite, SuiteReport, VerifyOptions};

pub type Problem64 = Problem<f64>;
pub type Problem32 = Problem<f32>;
pub type ScalingRule64 = ScalingRule<f64>;
pub type ScalingRule32 = ScalingRule<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
pub type DiscreteRun64 = DiscreteRun<f64>;
pub type DiscreteRun32 = DiscreteRun<f32>;
pub type HullProjection64 = HullProjection<f64>;
pub type HullProjection32 = HullProjection<f32>;
