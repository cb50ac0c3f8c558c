//! RRT and RRT* over kinematic (steerable) configuration spaces.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometric::radius::{connection_radius, RadiusRule, RuleKind};
use crate::geometry::{distance, Config, Path, Scenario};
use crate::nn::NeighborIndex;
use crate::planning::{drive, AnytimePlanner, Checker, Counters, PlanOptions, PlanResult};
use crate::sampling::SampleStream;
use crate::tree::SearchTree;

/// Point at most `eta` from `from` along the segment toward `toward`.
pub fn steer(from: &[f64], toward: &[f64], eta: f64) -> Result<Config> {
    if !(eta > 0.0) {
        return Err(Error::usage("eta must be positive"));
    }
    if from.len() != toward.len() {
        return Err(Error::usage("steer: dimension mismatch"));
    }
    Ok(steer_unchecked(from, toward, eta))
}

fn steer_unchecked(from: &[f64], toward: &[f64], eta: f64) -> Config {
    let d = distance(from, toward);
    if d <= eta {
        return Config(toward.to_vec());
    }
    let s = eta / d;
    Config(from.iter().zip(toward).map(|(a, b)| a + s * (b - a)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RrtParams {
    pub eta: f64,
    pub goal_bias: f64,
}

impl RrtParams {
    /// Steering range of 0.1 domain diagonals and 5% goal bias.
    pub fn for_scenario(scenario: &Scenario) -> Self {
        RrtParams {
            eta: 0.1 * scenario.domain.diagonal(),
            goal_bias: 0.05,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::usage("eta must be positive"));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(Error::usage("goal_bias must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewireParams {
    pub rule: RadiusRule,
    /// Cap on the neighborhood radius.
    pub eta_max: f64,
    /// For the revised RRT* rule: replace the optimal-cost estimate by the
    /// cost of the first solution found.
    pub c_star_from_first_solution: bool,
}

impl RewireParams {
    pub fn for_scenario(scenario: &Scenario, params: &RrtParams) -> Self {
        RewireParams {
            rule: RadiusRule::for_scenario(RuleKind::RrtStarRevised, scenario),
            eta_max: 2.0 * params.eta,
            c_star_from_first_solution: true,
        }
    }
}

/// Largest deviations found by [`RrtPlanner::audit`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TreeAudit {
    pub max_cost_deviation: f64,
    pub max_edge_deviation: f64,
    pub monotonicity_violations: u64,
}

/// Incremental RRT (no rewiring) or RRT* (with `RewireParams`).
pub struct RrtPlanner<'a, 's> {
    scenario: &'a Scenario,
    checker: Checker<'a>,
    stream: &'s mut SampleStream,
    params: RrtParams,
    rewire: Option<RewireParams>,
    tree: SearchTree<Config>,
    index: NeighborIndex,
    goal_nodes: Vec<usize>,
    first_goal: Option<usize>,
    cost_bound: f64,
    iterations: usize,
    counters: Counters,
}

impl<'a, 's> RrtPlanner<'a, 's> {
    pub fn new(
        scenario: &'a Scenario,
        stream: &'s mut SampleStream,
        params: RrtParams,
        rewire: Option<RewireParams>,
        options: &PlanOptions,
    ) -> Result<Self> {
        params.validate()?;
        scenario.validate()?;
        if let Some(rw) = &rewire {
            rw.rule.validate()?;
            if rw.rule.kind == RuleKind::KPrmStar {
                return Err(Error::usage("RRT* needs a radius rule"));
            }
            if !(rw.eta_max > 0.0) {
                return Err(Error::usage("eta_max must be positive"));
            }
        }
        let mut index = NeighborIndex::new(scenario.dimension);
        index.insert(0, &scenario.start)?;
        let mut planner = RrtPlanner {
            scenario,
            checker: Checker::new(scenario, options.resolution_for(scenario)),
            stream,
            params,
            rewire,
            tree: SearchTree::new(scenario.start.clone()),
            index,
            goal_nodes: Vec::new(),
            first_goal: None,
            cost_bound: f64::INFINITY,
            iterations: 0,
            counters: Counters::default(),
        };
        if scenario.goal.contains(&scenario.start) {
            planner.goal_nodes.push(0);
            planner.first_goal = Some(0);
        }
        Ok(planner)
    }

    /// Only accept nodes whose cost plus distance-to-goal is below `bound`.
    pub fn with_cost_bound(mut self, bound: f64) -> Self {
        self.cost_bound = bound;
        self
    }

    pub fn tree(&self) -> &SearchTree<Config> {
        &self.tree
    }

    fn best_goal(&self) -> Option<usize> {
        if self.rewire.is_none() {
            return self.first_goal;
        }
        self.goal_nodes
            .iter()
            .copied()
            .min_by(|a, b| self.tree.cost(*a).total_cmp(&self.tree.cost(*b)).then(a.cmp(b)))
    }

    pub fn best_path(&self) -> Option<Path> {
        self.best_goal().map(|g| {
            let configs = self
                .tree
                .path_to(g)
                .into_iter()
                .map(|id| self.tree.state(id).clone())
                .collect();
            Path::new(configs).expect("nonempty")
        })
    }

    pub fn audit(&self) -> TreeAudit {
        TreeAudit {
            max_cost_deviation: self.tree.max_cost_deviation(),
            max_edge_deviation: self.tree.max_edge_deviation(|a, b| distance(a, b)),
            monotonicity_violations: self.tree.monotonicity_violations(),
        }
    }

    fn neighborhood_radius(&mut self) -> Result<f64> {
        let rw = self.rewire.as_ref().expect("rewiring mode");
        let n = (self.tree.len() + 1).max(2);
        let r = connection_radius(&rw.rule, n)?;
        if r > rw.eta_max {
            self.counters.radius_capped += 1;
            Ok(rw.eta_max)
        } else {
            Ok(r)
        }
    }

    fn try_step(&mut self) -> Result<()> {
        self.iterations += 1;
        let target = if self.stream.aux().random::<f64>() < self.params.goal_bias {
            self.scenario.goal.center.clone()
        } else {
            self.stream.next_sample(&self.scenario.domain)
        };
        self.counters.samples += 1;

        let near = self.index.nearest(&target)?;
        self.counters.nn_queries += 1;
        let near_q = self.tree.state(near.id).clone();
        let v = steer_unchecked(&near_q, &target, self.params.eta);
        if v == near_q || !self.checker.edge(&near_q, &v) {
            return Ok(());
        }

        let mut parent = near.id;
        let mut parent_dist = distance(&near_q, &v);
        let mut neighborhood = Vec::new();
        let mut validity: HashMap<usize, bool> = HashMap::new();
        validity.insert(near.id, true);

        if self.rewire.is_some() {
            let r = self.neighborhood_radius()?;
            neighborhood = self.index.within_radius(&v, r)?;
            self.counters.nn_queries += 1;
            if !neighborhood.iter().any(|nb| nb.id == near.id) {
                neighborhood.push(crate::nn::Neighbor {
                    id: near.id,
                    distance: parent_dist,
                });
            }
            // argmin of cost(u) + |uv| over neighbors with a valid edge
            let mut order: Vec<(f64, usize, f64)> = neighborhood
                .iter()
                .map(|nb| (self.tree.cost(nb.id) + nb.distance, nb.id, nb.distance))
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (_, id, dist) in order {
                let ok = match validity.get(&id) {
                    Some(&ok) => ok,
                    None => {
                        let ok = self.checker.edge(self.tree.state(id), &v);
                        validity.insert(id, ok);
                        ok
                    }
                };
                if ok {
                    parent = id;
                    parent_dist = dist;
                    break;
                }
            }
        }

        let cost_v = self.tree.cost(parent) + parent_dist;
        if cost_v + self.scenario.goal.distance_to(&v) >= self.cost_bound {
            return Ok(());
        }

        let id = self.tree.add_child(parent, v.clone(), parent_dist);
        self.index.insert(id, &v)?;

        if self.rewire.is_some() {
            for nb in &neighborhood {
                let u = nb.id;
                if u == parent {
                    continue;
                }
                let cand = self.tree.cost(id) + nb.distance;
                if cand >= self.tree.cost(u) {
                    continue;
                }
                let ok = match validity.get(&u) {
                    Some(&ok) => ok,
                    None => {
                        let ok = self.checker.edge(&v, self.tree.state(u));
                        validity.insert(u, ok);
                        ok
                    }
                };
                if ok {
                    self.tree.reparent(u, id, nb.distance);
                }
            }
        }

        if self.scenario.goal.contains(&v) {
            self.goal_nodes.push(id);
            if self.first_goal.is_none() {
                self.first_goal = Some(id);
                let cost = self.tree.cost(id);
                if let Some(rw) = self.rewire.as_mut() {
                    if rw.c_star_from_first_solution && rw.rule.kind == RuleKind::RrtStarRevised {
                        rw.rule.c_star_estimate = cost;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn into_result(
        self,
        checkpoints: Vec<crate::planning::Checkpoint>,
        timed_out: bool,
        t0: Instant,
    ) -> PlanResult {
        let path = self.best_path();
        PlanResult {
            best_cost: path.as_ref().map(|p| p.cost),
            path,
            checkpoints,
            counters: self.counters(),
            elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
            controls: Vec::new(),
            timed_out,
        }
    }
}

impl AnytimePlanner for RrtPlanner<'_, '_> {
    fn step(&mut self) {
        // All fallible calls inside are internal invariants (dimension, ids).
        self.try_step().expect("RRT step");
    }

    fn iterations(&self) -> usize {
        self.iterations
    }

    fn best_cost(&self) -> Option<f64> {
        self.best_goal().map(|g| self.tree.cost(g))
    }

    fn counters(&self) -> Counters {
        Counters {
            collision_checks: self.checker.count(),
            rewires: self.tree.rewires(),
            nodes: self.tree.len() as u64,
            edges: self.tree.len() as u64 - 1,
            ..self.counters
        }
    }
}

/// Classic RRT for `n` iterations.
pub fn rrt(
    scenario: &Scenario,
    stream: &mut SampleStream,
    n: usize,
    params: RrtParams,
    options: &PlanOptions,
) -> Result<PlanResult> {
    let t0 = Instant::now();
    let mut planner = RrtPlanner::new(scenario, stream, params, None, options)?;
    let (cps, timed_out) = drive(&mut planner, n, options);
    Ok(planner.into_result(cps, timed_out, t0))
}

/// RRT* for `n` iterations.
pub fn rrt_star(
    scenario: &Scenario,
    stream: &mut SampleStream,
    n: usize,
    params: RrtParams,
    rewire: RewireParams,
    options: &PlanOptions,
) -> Result<PlanResult> {
    let t0 = Instant::now();
    let mut planner = RrtPlanner::new(scenario, stream, params, Some(rewire), options)?;
    let (cps, timed_out) = drive(&mut planner, n, options);
    Ok(planner.into_result(cps, timed_out, t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steer_examples() {
        assert_eq!(steer(&[0.0, 0.0], &[1.0, 0.0], 0.5).unwrap(), Config(vec![0.5, 0.0]));
        assert_eq!(steer(&[0.0, 0.0], &[0.3, 0.0], 0.5).unwrap(), Config(vec![0.3, 0.0]));
        assert_eq!(steer(&[0.2, 0.7], &[0.2, 0.7], 0.5).unwrap(), Config(vec![0.2, 0.7]));
        assert!(steer(&[0.0], &[1.0], 0.0).is_err());
    }
}
