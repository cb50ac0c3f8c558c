//! Sampling-based, asymptotically optimal motion planning.
//!
//! Geometric planners ([`geometric`]) connect configurations with straight
//! segments; kinodynamic planners ([`kinodynamic`]) only forward-propagate
//! controls; [`multirobot`] searches a tensor product of per-robot roadmaps.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometric;
pub mod geometry;
pub mod kinodynamic;
pub mod multirobot;
pub mod nn;
pub mod oracles;
pub mod planning;
pub mod sampling;
pub mod tree;

pub use error::{Error, Result};
pub use geometry::{
    edge_valid, load_scenario, path_clearance, path_cost, point_valid, AaBox, Config, GoalRegion, Obstacle, Path,
    Scenario,
};
pub use planning::{AnytimePlanner, Checkpoint, ControlSegment, Counters, PlanOptions, PlanResult};
pub use sampling::{derive_seed, SampleStream};
