//! Planners for kinematic systems where straight segments are feasible motions.

pub mod prm;
pub mod radius;
pub mod rrt;

pub use prm::{prm_star, shortest_path, shortest_path_ids, PrmOutput, Roadmap};
pub use radius::{
    check_deterministic_radius, connection_radius, dispersion_bound, k_connection, rgg_connectivity_radius,
    unit_ball_volume, RadiusRule, RuleKind,
};
pub use rrt::{rrt, rrt_star, steer, RewireParams, RrtParams, RrtPlanner, TreeAudit};
