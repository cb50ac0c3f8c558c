//! Planners for systems without a steering function: they grow trees by
//! forward-propagating random controls.

pub mod ao_meta;
pub mod ao_rrt;
pub mod sst;
pub mod system;

pub use ao_meta::{
    ao_meta, workspace_length, AoMetaParams, AoMetaResult, BoundedSolution, CostBoundedPlanner, GeometricBoundedRrt,
    KinoBoundedRrt,
};
pub use ao_rrt::{ao_rrt, AoRrtParams, AoRrtPlanner};
pub use sst::{sst, Shrink, SstAudit, SstParams, SstPlanner};
pub use system::{monte_carlo_propagate, DynamicalSystem, KinematicCar, Propagation, SingleIntegrator2d, SystemKind};

use crate::geometry::{Config, Path, Scenario};
use crate::planning::ControlSegment;
use crate::tree::SearchTree;

/// Tree payload: the state reached and the control that reached it.
#[derive(Clone, Debug, PartialEq)]
pub struct KinoState {
    pub state: Vec<f64>,
    pub control: Vec<f64>,
    pub duration: f64,
}

impl KinoState {
    pub(crate) fn root(state: Vec<f64>) -> Self {
        KinoState {
            state,
            control: Vec::new(),
            duration: 0.0,
        }
    }
}

/// Best solution seen so far, copied out of the tree so later pruning
/// cannot invalidate it.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Solution {
    pub cost: f64,
    pub path: Path,
    pub controls: Vec<ControlSegment>,
}

/// Waypoints are node states; the path cost is the accumulated duration.
pub(crate) fn trace(tree: &SearchTree<KinoState>, id: usize) -> Solution {
    let ids = tree.path_to(id);
    let waypoints = ids.iter().map(|&v| Config(tree.state(v).state.clone())).collect();
    let controls = ids[1..]
        .iter()
        .map(|&v| {
            let s = tree.state(v);
            ControlSegment {
                control: s.control.clone(),
                duration: s.duration,
            }
        })
        .collect();
    Solution {
        cost: tree.cost(id),
        path: Path {
            waypoints,
            cost: tree.cost(id),
        },
        controls,
    }
}

/// Re-integrates every live edge from its parent and checks that it ends at
/// the stored state and stays in free space at every integration step.
pub fn replay_tree(tree: &SearchTree<KinoState>, system: &dyn DynamicalSystem, scenario: &Scenario) -> bool {
    tree.live_ids().all(|id| {
        let Some(p) = tree.parent(id) else { return true };
        let node = tree.state(id);
        let traj = system.propagate(&tree.state(p).state, &node.control, node.duration);
        let end = traj.last().expect("nonempty trajectory");
        let same = end.iter().zip(&node.state).all(|(a, b)| (a - b).abs() <= 1e-12);
        same && traj[1..].iter().all(|s| scenario.is_free(system.position(s)))
    })
}

/// Re-integrates a solution's controls from its first waypoint, checking
/// every integration step and the final goal-ball membership.
pub fn replay_solution(
    path: &Path,
    controls: &[ControlSegment],
    system: &dyn DynamicalSystem,
    scenario: &Scenario,
) -> bool {
    let mut x = path.waypoints[0].0.clone();
    for seg in controls {
        let traj = system.propagate(&x, &seg.control, seg.duration);
        if !traj[1..].iter().all(|s| scenario.is_free(system.position(s))) {
            return false;
        }
        x = traj.last().expect("nonempty trajectory").clone();
    }
    scenario.goal.contains(system.position(&x))
}
