//! Plumbing shared by every planner: run options, counters, checkpoints,
//! results, and an instrumented collision checker.

use std::cell::Cell;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::geometry::{Path, Scenario};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub samples: u64,
    pub collision_checks: u64,
    pub nn_queries: u64,
    pub rewires: u64,
    pub nodes: u64,
    pub edges: u64,
    /// Iterations where the RRT* neighborhood radius was capped.
    pub radius_capped: u64,
}

/// Best cost known after `n` iterations (or samples), with a few counters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub best_cost: Option<f64>,
    pub nodes: u64,
    pub edges: u64,
    pub collision_checks: u64,
    /// Wall time since the planner started stepping. The only
    /// nondeterministic field.
    pub elapsed_ms: f64,
}

/// Control applied over one trajectory segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    pub control: Vec<f64>,
    pub duration: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanResult {
    pub path: Option<Path>,
    pub best_cost: Option<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub counters: Counters,
    pub elapsed_ms: f64,
    /// Per-segment controls for kinodynamic solutions (empty otherwise).
    pub controls: Vec<ControlSegment>,
    /// The deadline expired before the run finished.
    pub timed_out: bool,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.best_cost.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct PlanOptions {
    /// Collision-check resolution; defaults to 1e-3 of the domain diagonal.
    pub resolution: Option<f64>,
    /// Iteration counts at which to record the best cost.
    pub checkpoints: Vec<usize>,
    pub deadline: Option<Instant>,
    /// Attempts allowed per free-space sample.
    pub max_attempts: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            resolution: None,
            checkpoints: Vec::new(),
            deadline: None,
            max_attempts: 10_000,
        }
    }
}

impl PlanOptions {
    pub fn with_checkpoints(mut self, checkpoints: Vec<usize>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn resolution_for(&self, scenario: &Scenario) -> f64 {
        self.resolution.unwrap_or_else(|| scenario.default_resolution())
    }

    pub(crate) fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Sorted, deduplicated checkpoints up to `n`, always ending at `n`.
    pub(crate) fn schedule(&self, n: usize) -> Vec<usize> {
        let mut cps: Vec<usize> = self.checkpoints.iter().copied().filter(|&c| c <= n && c > 0).collect();
        cps.push(n);
        cps.sort_unstable();
        cps.dedup();
        cps
    }
}

/// Collision checker that counts point and edge queries.
pub struct Checker<'a> {
    pub scenario: &'a Scenario,
    pub resolution: f64,
    checks: Cell<u64>,
}

impl<'a> Checker<'a> {
    pub fn new(scenario: &'a Scenario, resolution: f64) -> Self {
        Checker {
            scenario,
            resolution,
            checks: Cell::new(0),
        }
    }

    pub fn point(&self, q: &[f64]) -> bool {
        self.checks.set(self.checks.get() + 1);
        self.scenario.is_free(q)
    }

    pub fn edge(&self, a: &[f64], b: &[f64]) -> bool {
        self.checks.set(self.checks.get() + 1);
        self.scenario.segment_free(a, b, self.resolution)
    }

    pub fn count(&self) -> u64 {
        self.checks.get()
    }
}

/// An incremental planner that can be stepped one iteration at a time.
pub trait AnytimePlanner {
    fn step(&mut self);
    fn iterations(&self) -> usize;
    fn best_cost(&self) -> Option<f64>;
    fn counters(&self) -> Counters;
}

/// Steps `planner` up to `n` iterations, recording checkpoints.
/// Returns the checkpoints and whether the deadline cut the run short.
pub fn drive<P: AnytimePlanner + ?Sized>(planner: &mut P, n: usize, options: &PlanOptions) -> (Vec<Checkpoint>, bool) {
    let t0 = Instant::now();
    let schedule = options.schedule(n);
    let mut out = Vec::with_capacity(schedule.len());
    let mut timed_out = false;
    for &target in &schedule {
        while planner.iterations() < target {
            if options.expired() {
                timed_out = true;
                break;
            }
            planner.step();
        }
        if timed_out {
            break;
        }
        out.push(snapshot(planner, target, t0));
    }
    (out, timed_out)
}

pub(crate) fn snapshot<P: AnytimePlanner + ?Sized>(planner: &P, n: usize, t0: Instant) -> Checkpoint {
    let c = planner.counters();
    Checkpoint {
        n,
        best_cost: planner.best_cost(),
        nodes: c.nodes,
        edges: c.edges,
        collision_checks: c.collision_checks,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}
