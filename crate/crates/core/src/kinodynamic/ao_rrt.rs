//! AO-RRT: RRT in the state-cost space with a shrinking cost bound.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{distance, Scenario};
use crate::kinodynamic::system::{check_system, monte_carlo_propagate, trajectory_valid, DynamicalSystem};
use crate::kinodynamic::{trace, KinoState, Solution};
use crate::nn::NeighborIndex;
use crate::planning::{drive, AnytimePlanner, Checker, Counters, PlanOptions, PlanResult};
use crate::sampling::SampleStream;
use crate::tree::SearchTree;

#[derive(Clone, Debug, PartialEq)]
pub struct AoRrtParams {
    /// Weight of the (normalized) cost axis in the augmented metric.
    pub cost_weight: f64,
    /// Cost bound before any solution is known; may be infinite.
    pub initial_bound: f64,
}

impl Default for AoRrtParams {
    fn default() -> Self {
        AoRrtParams {
            cost_weight: 1.0,
            initial_bound: f64::INFINITY,
        }
    }
}

impl AoRrtParams {
    fn validate(&self) -> Result<()> {
        if !(self.cost_weight >= 0.0 && self.cost_weight.is_finite()) {
            return Err(Error::usage("cost_weight must be finite and non-negative"));
        }
        if !(self.initial_bound > 0.0) {
            return Err(Error::usage("initial_bound must be positive or infinite"));
        }
        Ok(())
    }
}

/// Nodes live in `(x, c)`; the distance is `|e(x) - e(x')| + w |c - c'| / scale`
/// where `e` is the system's embedding and `scale` the initial bound (or the
/// domain diagonal when the initial bound is infinite).
pub struct AoRrtPlanner<'a, 's> {
    scenario: &'a Scenario,
    system: &'a dyn DynamicalSystem,
    checker: Checker<'a>,
    stream: &'s mut SampleStream,
    params: AoRrtParams,
    scale: f64,
    bound: f64,
    bounds: Vec<f64>,
    tree: SearchTree<KinoState>,
    index: NeighborIndex,
    best: Option<Solution>,
    iterations: usize,
    counters: Counters,
}

impl<'a, 's> AoRrtPlanner<'a, 's> {
    pub fn new(
        scenario: &'a Scenario,
        system: &'a dyn DynamicalSystem,
        stream: &'s mut SampleStream,
        params: AoRrtParams,
        options: &PlanOptions,
    ) -> Result<Self> {
        params.validate()?;
        scenario.validate()?;
        check_system(system, scenario)?;
        let scale = if params.initial_bound.is_finite() {
            params.initial_bound
        } else {
            scenario.domain.diagonal()
        };
        let x0 = system.start_state(scenario);
        let tree = SearchTree::new(KinoState::root(x0));
        let mut planner = AoRrtPlanner {
            scenario,
            system,
            checker: Checker::new(scenario, options.resolution_for(scenario)),
            stream,
            bound: params.initial_bound,
            params,
            scale,
            bounds: Vec::new(),
            index: NeighborIndex::new(1),
            tree,
            best: None,
            iterations: 0,
            counters: Counters::default(),
        };
        planner.rebuild_index()?;
        if scenario.goal.contains(system.position(&planner.tree.state(0).state)) {
            planner.best = Some(trace(&planner.tree, 0));
            planner.bound = 0.0;
            planner.bounds.push(0.0);
        }
        Ok(planner)
    }

    pub fn tree(&self) -> &SearchTree<KinoState> {
        &self.tree
    }

    pub fn current_bound(&self) -> f64 {
        self.bound
    }

    /// Costs of successive solutions, each strictly below the previous.
    pub fn bound_sequence(&self) -> &[f64] {
        &self.bounds
    }

    /// Largest stored node cost.
    pub fn max_node_cost(&self) -> f64 {
        self.tree.live_ids().map(|id| self.tree.cost(id)).fold(0.0, f64::max)
    }

    fn augment(&self, state: &[f64], cost: f64) -> Vec<f64> {
        let mut e = self.system.embed(state);
        e.push(self.params.cost_weight * cost / self.scale);
        e
    }

    fn rebuild_index(&mut self) -> Result<()> {
        let dim = self.system.embed(&self.tree.state(0).state).len() + 1;
        let mut index = NeighborIndex::new(dim);
        for id in self.tree.live_ids() {
            let s = self.tree.state(id);
            index.insert(id, &self.augment(&s.state, self.tree.cost(id)))?;
        }
        self.index = index;
        Ok(())
    }

    fn nearest(&mut self, target: &[f64]) -> Result<usize> {
        self.counters.nn_queries += 1;
        Ok(self.index.nearest_by(target, block_metric)?.id)
    }

    /// Drops every node costlier than the bound. Costs grow strictly along
    /// branches and no node is ever reparented, so descendants have larger
    /// ids and are gone by the time their ancestors are visited.
    fn prune(&mut self) -> Result<()> {
        let doomed: Vec<usize> = self
            .tree
            .live_ids()
            .filter(|&id| self.tree.cost(id) > self.bound)
            .collect();
        for &id in doomed.iter().rev() {
            self.tree.remove_leaf(id);
        }
        self.rebuild_index()
    }

    fn try_step(&mut self) -> Result<()> {
        self.iterations += 1;
        let x_rand = self.system.sample_state(self.stream, &self.scenario.domain);
        let c_hi = if self.bound.is_finite() { self.bound } else { self.scale };
        let c_rand = self.stream.aux_uniform(0.0, c_hi);
        self.counters.samples += 1;
        let target = self.augment(&x_rand, c_rand);
        let sel = self.nearest(&target)?;

        let prop = monte_carlo_propagate(self.system, &self.tree.state(sel).state, self.stream);
        let cost_new = self.tree.cost(sel) + prop.duration;
        if cost_new >= self.bound {
            return Ok(());
        }
        if !trajectory_valid(&self.checker, self.system, &prop.trajectory) {
            return Ok(());
        }
        let x_new = prop.trajectory.last().expect("nonempty").clone();
        let aug = self.augment(&x_new, cost_new);
        let id = self.tree.add_child(
            sel,
            KinoState {
                state: x_new.clone(),
                control: prop.control,
                duration: prop.duration,
            },
            prop.duration,
        );
        self.index.insert(id, &aug)?;

        if self.scenario.goal.contains(self.system.position(&x_new)) {
            self.best = Some(trace(&self.tree, id));
            self.bound = cost_new;
            self.bounds.push(cost_new);
            self.prune()?;
        }
        Ok(())
    }

    pub fn into_result(
        self,
        checkpoints: Vec<crate::planning::Checkpoint>,
        timed_out: bool,
        t0: Instant,
    ) -> PlanResult {
        let counters = self.counters();
        let (path, controls) = match self.best {
            Some(s) => (Some(s.path), s.controls),
            None => (None, Vec::new()),
        };
        PlanResult {
            best_cost: path.as_ref().map(|p| p.cost),
            path,
            checkpoints,
            counters,
            elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
            controls,
            timed_out,
        }
    }
}

impl AnytimePlanner for AoRrtPlanner<'_, '_> {
    fn step(&mut self) {
        self.try_step().expect("AO-RRT step");
    }

    fn iterations(&self) -> usize {
        self.iterations
    }

    fn best_cost(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.cost)
    }

    fn counters(&self) -> Counters {
        Counters {
            collision_checks: self.checker.count(),
            nodes: self.tree.len() as u64,
            edges: self.tree.len() as u64 - 1,
            ..self.counters
        }
    }
}

/// `|de| + |dc|` over augmented points `(e, w c / scale)`.
fn block_metric(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len() - 1;
    distance(&a[..k], &b[..k]) + (a[k] - b[k]).abs()
}

pub fn ao_rrt(
    scenario: &Scenario,
    system: &dyn DynamicalSystem,
    stream: &mut SampleStream,
    n: usize,
    params: AoRrtParams,
    options: &PlanOptions,
) -> Result<PlanResult> {
    let t0 = Instant::now();
    let mut planner = AoRrtPlanner::new(scenario, system, stream, params, options)?;
    let (cps, timed_out) = drive(&mut planner, n, options);
    Ok(planner.into_result(cps, timed_out, t0))
}
