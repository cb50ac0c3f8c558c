//! Stable Sparse RRT: best-near selection plus witness-based pruning.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{distance, Scenario};
use crate::kinodynamic::system::{check_system, monte_carlo_propagate, trajectory_valid, DynamicalSystem};
use crate::kinodynamic::{trace, KinoState, Solution};
use crate::nn::NeighborIndex;
use crate::planning::{drive, AnytimePlanner, Checker, Counters, PlanOptions, PlanResult};
use crate::sampling::SampleStream;
use crate::tree::SearchTree;

/// Multiply both radii by `xi` every `period` iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shrink {
    pub xi: f64,
    pub period: usize,
}

impl Default for Shrink {
    fn default() -> Self {
        Shrink { xi: 0.95, period: 5000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SstParams {
    /// Best-near selection radius.
    pub delta_bn: f64,
    /// Witness radius.
    pub delta_s: f64,
    pub shrink: Option<Shrink>,
}

impl SstParams {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let diag = scenario.domain.diagonal();
        SstParams {
            delta_bn: 0.05 * diag,
            delta_s: 0.02 * diag,
            shrink: None,
        }
    }

    pub fn with_shrink(mut self, shrink: Shrink) -> Self {
        self.shrink = Some(shrink);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta_bn > 0.0) {
            return Err(Error::usage("delta_bn must be positive"));
        }
        if !(self.delta_s > 0.0) {
            return Err(Error::usage("delta_s must be positive"));
        }
        if let Some(s) = self.shrink {
            if !(s.xi > 0.0 && s.xi < 1.0) {
                return Err(Error::usage("shrink factor must lie in (0, 1)"));
            }
            if s.period == 0 {
                return Err(Error::usage("shrink period must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Witness {
    center: Vec<f64>,
    radius: f64,
    rep: Option<usize>,
    /// Lowest cost among representatives this witness has dropped.
    min_dropped_cost: f64,
}

/// Outcome of [`SstPlanner::audit`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SstAudit {
    pub active_nodes: usize,
    pub witnesses: usize,
    /// Active nodes that are not the representative of exactly one witness.
    pub orphan_or_shared: usize,
    /// Representatives farther from their witness than its radius.
    pub outside_witness: usize,
    /// Representatives costlier than a node their witness dropped.
    pub domination_violations: usize,
    /// Replacements that did not strictly lower the representative cost.
    pub non_improving_replacements: u64,
}

impl SstAudit {
    pub fn is_ok(&self) -> bool {
        self.orphan_or_shared == 0
            && self.outside_witness == 0
            && self.domination_violations == 0
            && self.non_improving_replacements == 0
    }
}

pub struct SstPlanner<'a, 's> {
    scenario: &'a Scenario,
    system: &'a dyn DynamicalSystem,
    checker: Checker<'a>,
    stream: &'s mut SampleStream,
    params: SstParams,
    tree: SearchTree<KinoState>,
    active: Vec<bool>,
    index: NeighborIndex,
    indexed_inactive: usize,
    witnesses: Vec<Witness>,
    witness_index: NeighborIndex,
    best: Option<Solution>,
    iterations: usize,
    counters: Counters,
    non_improving: u64,
}

impl<'a, 's> SstPlanner<'a, 's> {
    pub fn new(
        scenario: &'a Scenario,
        system: &'a dyn DynamicalSystem,
        stream: &'s mut SampleStream,
        params: SstParams,
        options: &PlanOptions,
    ) -> Result<Self> {
        params.validate()?;
        scenario.validate()?;
        check_system(system, scenario)?;
        let x0 = system.start_state(scenario);
        let e0 = system.embed(&x0);
        let mut index = NeighborIndex::new(e0.len());
        index.insert(0, &e0)?;
        let mut witness_index = NeighborIndex::new(e0.len());
        witness_index.insert(0, &e0)?;
        let mut planner = SstPlanner {
            scenario,
            system,
            checker: Checker::new(scenario, options.resolution_for(scenario)),
            stream,
            witnesses: vec![Witness {
                center: e0,
                radius: params.delta_s,
                rep: Some(0),
                min_dropped_cost: f64::INFINITY,
            }],
            params,
            tree: SearchTree::new(KinoState::root(x0)),
            active: vec![true],
            index,
            indexed_inactive: 0,
            witness_index,
            best: None,
            iterations: 0,
            counters: Counters::default(),
            non_improving: 0,
        };
        if scenario.goal.contains(system.position(&planner.tree.state(0).state)) {
            planner.best = Some(trace(&planner.tree, 0));
        }
        Ok(planner)
    }

    pub fn tree(&self) -> &SearchTree<KinoState> {
        &self.tree
    }

    /// Current `(delta_bn, delta_s)`.
    pub fn radii(&self) -> (f64, f64) {
        (self.params.delta_bn, self.params.delta_s)
    }

    pub fn is_active(&self, id: usize) -> bool {
        self.active[id]
    }

    pub fn audit(&self) -> SstAudit {
        let mut owned = vec![0usize; self.tree.capacity()];
        let mut audit = SstAudit {
            witnesses: self.witnesses.len(),
            non_improving_replacements: self.non_improving,
            ..SstAudit::default()
        };
        for w in &self.witnesses {
            let Some(r) = w.rep else { continue };
            owned[r] += 1;
            if !self.active[r] || !self.tree.is_live(r) {
                audit.orphan_or_shared += 1;
                continue;
            }
            let e = self.system.embed(&self.tree.state(r).state);
            if distance(&e, &w.center) > w.radius * (1.0 + 1e-12) {
                audit.outside_witness += 1;
            }
            if self.tree.cost(r) > w.min_dropped_cost {
                audit.domination_violations += 1;
            }
        }
        for id in self.tree.live_ids() {
            if self.active[id] {
                audit.active_nodes += 1;
                if owned[id] != 1 {
                    audit.orphan_or_shared += 1;
                }
            }
        }
        audit
    }

    fn select(&mut self, e_rand: &[f64]) -> Result<usize> {
        self.counters.nn_queries += 1;
        let near = self.index.within_radius(e_rand, self.params.delta_bn)?;
        let best = near.iter().filter(|nb| self.active[nb.id]).min_by(|a, b| {
            self.tree
                .cost(a.id)
                .total_cmp(&self.tree.cost(b.id))
                .then(a.id.cmp(&b.id))
        });
        if let Some(nb) = best {
            return Ok(nb.id);
        }
        let mut k = 1;
        loop {
            let near = self.index.k_nearest(e_rand, k)?;
            if let Some(nb) = near.iter().find(|nb| self.active[nb.id]) {
                return Ok(nb.id);
            }
            if near.len() < k {
                unreachable!("the root witness always keeps an active node");
            }
            k *= 2;
        }
    }

    fn rebuild_index(&mut self) -> Result<()> {
        let dim = self.index.dim();
        let mut index = NeighborIndex::new(dim);
        for id in self.tree.live_ids() {
            if self.active[id] {
                index.insert(id, &self.system.embed(&self.tree.state(id).state))?;
            }
        }
        self.index = index;
        self.indexed_inactive = 0;
        Ok(())
    }

    fn deactivate(&mut self, old: usize) {
        self.active[old] = false;
        self.indexed_inactive += 1;
        let mut p = old;
        while p != SearchTree::<KinoState>::ROOT
            && !self.active[p]
            && self.tree.is_live(p)
            && self.tree.node(p).children.is_empty()
        {
            let parent = self.tree.parent(p).expect("non-root");
            self.tree.remove_leaf(p);
            p = parent;
        }
    }

    fn try_step(&mut self) -> Result<()> {
        self.iterations += 1;
        if let Some(s) = self.params.shrink {
            if self.iterations.is_multiple_of(s.period) {
                self.params.delta_bn *= s.xi;
                self.params.delta_s *= s.xi;
            }
        }
        let x_rand = self.system.sample_state(self.stream, &self.scenario.domain);
        self.counters.samples += 1;
        let e_rand = self.system.embed(&x_rand);
        let sel = self.select(&e_rand)?;

        let prop = monte_carlo_propagate(self.system, &self.tree.state(sel).state, self.stream);
        if !trajectory_valid(&self.checker, self.system, &prop.trajectory) {
            return Ok(());
        }
        let x_new = prop.trajectory.last().expect("nonempty").clone();
        let cost_new = self.tree.cost(sel) + prop.duration;
        let e_new = self.system.embed(&x_new);

        self.counters.nn_queries += 1;
        let nearest_w = self.witness_index.nearest(&e_new)?;
        let w = if nearest_w.distance > self.params.delta_s {
            let id = self.witnesses.len();
            self.witnesses.push(Witness {
                center: e_new.clone(),
                radius: self.params.delta_s,
                rep: None,
                min_dropped_cost: f64::INFINITY,
            });
            self.witness_index.insert(id, &e_new)?;
            id
        } else {
            nearest_w.id
        };
        let old = self.witnesses[w].rep;
        if let Some(r) = old {
            if self.tree.cost(r) <= cost_new {
                return Ok(());
            }
        }

        let id = self.tree.add_child(
            sel,
            KinoState {
                state: x_new.clone(),
                control: prop.control,
                duration: prop.duration,
            },
            prop.duration,
        );
        self.active.push(true);
        self.index.insert(id, &e_new)?;
        if let Some(r) = old {
            let rc = self.tree.cost(r);
            if rc <= cost_new {
                self.non_improving += 1;
            }
            let wit = &mut self.witnesses[w];
            wit.min_dropped_cost = wit.min_dropped_cost.min(rc);
            self.deactivate(r);
        }
        self.witnesses[w].rep = Some(id);

        if self.scenario.goal.contains(self.system.position(&x_new))
            && self.best.as_ref().is_none_or(|b| cost_new < b.cost)
        {
            self.best = Some(trace(&self.tree, id));
        }
        if self.indexed_inactive > 64 && self.indexed_inactive > self.index.len() / 2 {
            self.rebuild_index()?;
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

impl AnytimePlanner for SstPlanner<'_, '_> {
    fn step(&mut self) {
        self.try_step().expect("SST step");
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

/// SST (or SST* when `params.shrink` is set) for `n` iterations.
pub fn sst(
    scenario: &Scenario,
    system: &dyn DynamicalSystem,
    stream: &mut SampleStream,
    n: usize,
    params: SstParams,
    options: &PlanOptions,
) -> Result<PlanResult> {
    let t0 = Instant::now();
    let mut planner = SstPlanner::new(scenario, system, stream, params, options)?;
    let (cps, timed_out) = drive(&mut planner, n, options);
    Ok(planner.into_result(cps, timed_out, t0))
}
