//! Wildfire suppression under partial observability.
//!
//! * [`grid`], [`dynamics`], [`sensing`]: the fire model (state, transitions,
//!   observations, reward).
//! * [`belief`], [`planner`]: particle beliefs, the rejection-free filter and
//!   the tree-search planner with the greedy baseline.
//! * [`zonal`]: raster-over-polygon zonal statistics through an intersections
//!   file, plus the polygon neighbor self-join.
//! * [`harness`]: scenario generation, episodes and experiments.
//!
//! Numeric code is generic over [`Scalar`] (`f32`/`f64`); the aliases below fix
//! it to `f64`.

pub mod belief;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod planner;
pub mod rng;
pub mod scalar;
pub mod sensing;
pub mod zonal;

pub use belief::{belief_marginal, initial_belief, update_belief, Belief};
pub use dynamics::{ignition_probability, step, DynamicsParams, SpreadModel, SpreadParams, TableSpread};
pub use error::{Error, Result};
pub use grid::{reward, Action, CellClass, GridState, UtilityMap};
pub use planner::{baseline_policy, plan, rollout, search, PlannerConfig, SearchTree};
pub use scalar::Scalar;
pub use sensing::{observation_likelihood, observe, Observation, SensingParams};

pub type Utilities = UtilityMap<f64>;
pub type Spread = SpreadParams<f64>;
pub type Dynamics = DynamicsParams<f64>;
pub type Sensing = SensingParams<f64>;
pub type Planner = PlannerConfig<f64>;
