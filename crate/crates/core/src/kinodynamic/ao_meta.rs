//! Asymptotic optimality by restarting a cost-bounded planner with a
//! geometrically shrinking bound.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometric::rrt::{RrtParams, RrtPlanner};
use crate::geometry::{distance, Path, Scenario};
use crate::kinodynamic::system::{check_system, monte_carlo_propagate, trajectory_valid, DynamicalSystem};
use crate::kinodynamic::{trace, KinoState};
use crate::nn::NeighborIndex;
use crate::planning::{AnytimePlanner, Checker, Checkpoint, ControlSegment, Counters, PlanOptions, PlanResult};
use crate::sampling::SampleStream;
use crate::tree::SearchTree;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundedSolution {
    pub cost: f64,
    pub path: Path,
    pub controls: Vec<ControlSegment>,
}

/// A probabilistically complete planner that honors a cost bound.
///
/// Callers are responsible for the planner converging fast enough for the
/// restart scheme to terminate in expected finite time.
pub trait CostBoundedPlanner {
    /// Runs for at most `budget` iterations and returns the first solution
    /// with cost strictly below `bound`, plus the iterations spent.
    fn solve_within(
        &mut self,
        bound: f64,
        budget: usize,
        options: &PlanOptions,
    ) -> Result<(Option<BoundedSolution>, usize)>;

    fn counters(&self) -> Counters {
        Counters::default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AoMetaParams {
    /// Bound shrink: the next bound is `(1 - beta)` times the best cost.
    pub beta: f64,
    pub rounds: usize,
    /// Iterations allowed per round.
    pub budget: usize,
}

impl AoMetaParams {
    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::usage("beta must lie in (0, 1)"));
        }
        if self.rounds == 0 || self.budget == 0 {
            return Err(Error::usage("rounds and budget must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AoMetaResult {
    pub result: PlanResult,
    /// Cost of each round's solution; strictly decreasing.
    pub bounds: Vec<f64>,
}

/// Round 1 runs with an infinite bound; round `k + 1` with
/// `(1 - beta) * best`. Stops after `rounds` rounds or the first round that
/// finds nothing. Checkpoints are in cumulative iterations.
pub fn ao_meta(
    planner: &mut dyn CostBoundedPlanner,
    params: &AoMetaParams,
    options: &PlanOptions,
) -> Result<AoMetaResult> {
    params.validate()?;
    let t0 = Instant::now();
    let mut bounds = Vec::new();
    let mut events: Vec<(usize, f64)> = Vec::new();
    // (cumulative iterations, wall time) at the end of each round
    let mut rounds: Vec<(usize, f64)> = Vec::new();
    let mut best: Option<BoundedSolution> = None;
    let mut spent = 0usize;
    let mut bound = f64::INFINITY;
    let mut timed_out = false;
    for _ in 0..params.rounds {
        if options.expired() {
            timed_out = true;
            break;
        }
        let (found, used) = planner.solve_within(bound, params.budget, options)?;
        spent += used;
        rounds.push((spent, t0.elapsed().as_secs_f64() * 1e3));
        let Some(sol) = found else { break };
        debug_assert!(sol.cost < bound);
        bounds.push(sol.cost);
        events.push((spent, sol.cost));
        bound = (1.0 - params.beta) * sol.cost;
        best = Some(sol);
    }
    let horizon = params.rounds * params.budget;
    let counters = planner.counters();
    let checkpoints = options
        .schedule(horizon)
        .into_iter()
        .map(|n| Checkpoint {
            n,
            best_cost: events.iter().take_while(|(at, _)| *at <= n).last().map(|e| e.1),
            nodes: counters.nodes,
            edges: counters.edges,
            collision_checks: counters.collision_checks,
            elapsed_ms: rounds
                .iter()
                .find(|(at, _)| *at >= n)
                .or(rounds.last())
                .map_or(0.0, |r| r.1),
        })
        .collect();
    let (path, controls) = match best {
        Some(s) => (Some(s.path), s.controls),
        None => (None, Vec::new()),
    };
    Ok(AoMetaResult {
        result: PlanResult {
            best_cost: path.as_ref().map(|p| p.cost),
            path,
            checkpoints,
            counters,
            elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
            controls,
            timed_out,
        },
        bounds,
    })
}

/// Plain RRT restarted each round with a cost cutoff.
pub struct GeometricBoundedRrt<'a> {
    scenario: &'a Scenario,
    stream: SampleStream,
    params: RrtParams,
    counters: Counters,
}

impl<'a> GeometricBoundedRrt<'a> {
    pub fn new(scenario: &'a Scenario, stream: SampleStream, params: RrtParams) -> Self {
        GeometricBoundedRrt {
            scenario,
            stream,
            params,
            counters: Counters::default(),
        }
    }
}

impl CostBoundedPlanner for GeometricBoundedRrt<'_> {
    fn solve_within(
        &mut self,
        bound: f64,
        budget: usize,
        options: &PlanOptions,
    ) -> Result<(Option<BoundedSolution>, usize)> {
        let mut rrt = RrtPlanner::new(self.scenario, &mut self.stream, self.params.clone(), None, options)?
            .with_cost_bound(bound);
        let mut used = 0;
        while used < budget && rrt.best_cost().is_none() && !options.expired() {
            rrt.step();
            used += 1;
        }
        let c = rrt.counters();
        self.counters.samples += c.samples;
        self.counters.collision_checks += c.collision_checks;
        self.counters.nn_queries += c.nn_queries;
        self.counters.nodes = c.nodes;
        self.counters.edges = c.edges;
        let found = rrt.best_path().filter(|p| p.cost < bound).map(|path| BoundedSolution {
            cost: path.cost,
            path,
            controls: Vec::new(),
        });
        Ok((found, used))
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

/// Kinodynamic RRT by Monte Carlo propagation, restarted each round. Nodes
/// whose cost plus an admissible time-to-goal reaches the bound are dropped.
pub struct KinoBoundedRrt<'a> {
    scenario: &'a Scenario,
    system: &'a dyn DynamicalSystem,
    stream: SampleStream,
    goal_bias: f64,
    counters: Counters,
}

impl<'a> KinoBoundedRrt<'a> {
    pub fn new(scenario: &'a Scenario, system: &'a dyn DynamicalSystem, stream: SampleStream) -> Result<Self> {
        scenario.validate()?;
        check_system(system, scenario)?;
        Ok(KinoBoundedRrt {
            scenario,
            system,
            stream,
            goal_bias: 0.05,
            counters: Counters::default(),
        })
    }

    fn heuristic(&self, state: &[f64]) -> f64 {
        self.scenario.goal.distance_to(self.system.position(state)) / self.system.max_speed()
    }
}

impl CostBoundedPlanner for KinoBoundedRrt<'_> {
    fn solve_within(
        &mut self,
        bound: f64,
        budget: usize,
        options: &PlanOptions,
    ) -> Result<(Option<BoundedSolution>, usize)> {
        let checker = Checker::new(self.scenario, options.resolution_for(self.scenario));
        let x0 = self.system.start_state(self.scenario);
        if self.scenario.goal.contains(self.system.position(&x0)) && 0.0 < bound {
            let tree = SearchTree::new(KinoState::root(x0));
            let s = trace(&tree, 0);
            return Ok((
                Some(BoundedSolution {
                    cost: 0.0,
                    path: s.path,
                    controls: s.controls,
                }),
                0,
            ));
        }
        let e0 = self.system.embed(&x0);
        let mut index = NeighborIndex::new(e0.len());
        index.insert(0, &e0)?;
        let mut tree = SearchTree::new(KinoState::root(x0));
        let mut found = None;
        let mut used = 0;
        while used < budget && !options.expired() {
            used += 1;
            self.counters.samples += 1;
            let mut x_rand = self.system.sample_state(&mut self.stream, &self.scenario.domain);
            if self.stream.aux_uniform(0.0, 1.0) < self.goal_bias {
                x_rand[..2].copy_from_slice(&self.scenario.goal.center);
            }
            self.counters.nn_queries += 1;
            let near = index.nearest(&self.system.embed(&x_rand))?.id;
            let prop = monte_carlo_propagate(self.system, &tree.state(near).state, &mut self.stream);
            let x_new = prop.trajectory.last().expect("nonempty").clone();
            let cost = tree.cost(near) + prop.duration;
            if cost + self.heuristic(&x_new) >= bound || !trajectory_valid(&checker, self.system, &prop.trajectory) {
                continue;
            }
            let e_new = self.system.embed(&x_new);
            let in_goal = self.scenario.goal.contains(self.system.position(&x_new));
            let id = tree.add_child(
                near,
                KinoState {
                    state: x_new,
                    control: prop.control,
                    duration: prop.duration,
                },
                prop.duration,
            );
            index.insert(id, &e_new)?;
            if in_goal {
                let s = trace(&tree, id);
                found = Some(BoundedSolution {
                    cost: s.cost,
                    path: s.path,
                    controls: s.controls,
                });
                break;
            }
        }
        self.counters.collision_checks += checker.count();
        self.counters.nodes = tree.len() as u64;
        self.counters.edges = tree.len() as u64 - 1;
        Ok((found, used))
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

/// Euclidean length of a kinodynamic solution's workspace trace, for reports.
pub fn workspace_length(path: &Path, system: &dyn DynamicalSystem) -> f64 {
    path.waypoints
        .windows(2)
        .map(|w| distance(system.position(&w[0]), system.position(&w[1])))
        .sum()
}
