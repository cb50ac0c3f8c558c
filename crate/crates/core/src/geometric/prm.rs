//! PRM* / k-PRM* roadmaps and A* extraction.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use crate::error::Result;
use crate::geometric::radius::{check_deterministic_radius, connection_radius, k_connection, RadiusRule, RuleKind};
use crate::geometry::{distance, Config, GoalRegion, Path, Scenario};
use crate::nn::NeighborIndex;
use crate::planning::{Checker, Checkpoint, Counters, PlanOptions, PlanResult};
use crate::sampling::{sample_free, SampleStream};

/// Undirected roadmap with Euclidean edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Roadmap {
    pub vertices: Vec<Config>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub start_id: usize,
    pub goal_ids: Vec<usize>,
    pub goal: GoalRegion,
}

impl Roadmap {
    pub fn new(start: Config, goal: GoalRegion) -> Self {
        let mut rm = Roadmap {
            vertices: Vec::new(),
            adjacency: Vec::new(),
            start_id: 0,
            goal_ids: Vec::new(),
            goal,
        };
        rm.start_id = rm.add_vertex(start);
        rm
    }

    /// Adds a vertex; vertices inside the goal ball become goal vertices.
    pub fn add_vertex(&mut self, q: Config) -> usize {
        let id = self.vertices.len();
        if self.goal.contains(&q) {
            self.goal_ids.push(id);
        }
        self.vertices.push(q);
        self.adjacency.push(Vec::new());
        id
    }

    /// Inserts both orientations of `{u, v}`.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        let w = distance(&self.vertices[u], &self.vertices[v]);
        self.adjacency[u].push((v, w));
        self.adjacency[v].push((u, w));
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].iter().any(|&(x, _)| x == v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(u, _)| u)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_goal(&self, v: usize) -> bool {
        self.goal_ids.contains(&v)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    id: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; ties on lower id first
        other.f.total_cmp(&self.f).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost start-to-goal path over the roadmap by A*, with heuristic
/// `max(0, |v - goal.center| - goal.radius)`.
pub fn shortest_path(roadmap: &Roadmap) -> Option<Path> {
    shortest_path_ids(roadmap)
        .map(|ids| Path::new(ids.iter().map(|&i| roadmap.vertices[i].clone()).collect()).expect("nonempty path"))
}

/// Vertex ids of the A* solution.
pub fn shortest_path_ids(roadmap: &Roadmap) -> Option<Vec<usize>> {
    let n = roadmap.vertices.len();
    let is_goal: HashSet<usize> = roadmap.goal_ids.iter().copied().collect();
    let h = |v: usize| roadmap.goal.distance_to(&roadmap.vertices[v]);
    let mut g = vec![f64::INFINITY; n];
    let mut came_from = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let s = roadmap.start_id;
    g[s] = 0.0;
    open.push(Open { f: h(s), g: 0.0, id: s });
    while let Some(Open { g: gv, id: v, .. }) = open.pop() {
        if closed[v] || gv > g[v] {
            continue;
        }
        if is_goal.contains(&v) {
            let mut ids = vec![v];
            let mut cur = v;
            while came_from[cur] != usize::MAX {
                cur = came_from[cur];
                ids.push(cur);
            }
            ids.reverse();
            return Some(ids);
        }
        closed[v] = true;
        for &(u, w) in &roadmap.adjacency[v] {
            if closed[u] {
                continue;
            }
            let cand = g[v] + w;
            if cand < g[u] {
                g[u] = cand;
                came_from[u] = v;
                open.push(Open {
                    f: cand + h(u),
                    g: cand,
                    id: u,
                });
            }
        }
    }
    None
}

/// Roadmap together with the planning result extracted from it.
#[derive(Clone, Debug)]
pub struct PrmOutput {
    pub result: PlanResult,
    pub roadmap: Roadmap,
}

/// PRM* (radius rules) or k-PRM* (`RuleKind::KPrmStar`).
///
/// The vertex set is the start, the goal center (when valid) and `n` free
/// samples; each vertex is connected to its neighborhood through valid edges,
/// and the solution is the A* shortest path to any vertex in the goal ball.
pub fn prm_star(
    scenario: &Scenario,
    stream: &mut SampleStream,
    n: usize,
    rule: &RadiusRule,
    options: &PlanOptions,
) -> Result<PrmOutput> {
    let t0 = Instant::now();
    if n < 2 {
        return Err(crate::error::Error::usage("n must be at least 2"));
    }
    if rule.kind != RuleKind::KPrmStar {
        rule.validate()?;
    }
    let checker = Checker::new(scenario, options.resolution_for(scenario));

    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push(sample_free(stream, scenario, options.max_attempts)?);
    }
    scenario.validate()?;

    let mut roadmap = Roadmap::new(scenario.start.clone(), scenario.goal.clone());
    if scenario.is_free(&scenario.goal.center) && scenario.goal.center != scenario.start {
        roadmap.add_vertex(scenario.goal.center.clone());
    }
    for q in samples {
        roadmap.add_vertex(q);
    }
    let count = roadmap.vertex_count();

    let mut index = NeighborIndex::new(scenario.dimension);
    for (id, q) in roadmap.vertices.iter().enumerate() {
        index.insert(id, q)?;
    }

    let mut counters = Counters {
        samples: n as u64,
        ..Counters::default()
    };

    match rule.kind {
        RuleKind::KPrmStar => {
            let k = k_connection(scenario.dimension, count)?;
            let mut tried: HashSet<(usize, usize)> = HashSet::new();
            for v in 0..count {
                let near = index.k_nearest(&roadmap.vertices[v], k + 1)?;
                counters.nn_queries += 1;
                for nb in near.into_iter().filter(|nb| nb.id != v).take(k) {
                    let key = (v.min(nb.id), v.max(nb.id));
                    if !tried.insert(key) {
                        continue;
                    }
                    if checker.edge(&roadmap.vertices[key.0], &roadmap.vertices[key.1]) {
                        roadmap.add_edge(key.0, key.1);
                    }
                }
            }
        }
        _ => {
            let r = connection_radius(rule, count)?;
            if stream.is_deterministic() {
                check_deterministic_radius(rule, r, count)?;
            }
            for v in 0..count {
                let near = index.within_radius(&roadmap.vertices[v], r)?;
                counters.nn_queries += 1;
                for nb in near {
                    if nb.id <= v {
                        continue;
                    }
                    if checker.edge(&roadmap.vertices[v], &roadmap.vertices[nb.id]) {
                        roadmap.add_edge(v, nb.id);
                    }
                }
            }
        }
    }

    let path = shortest_path(&roadmap);
    counters.collision_checks = checker.count();
    counters.nodes = count as u64;
    counters.edges = roadmap.edge_count() as u64;
    let best_cost = path.as_ref().map(|p| p.cost);
    let elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
    let result = PlanResult {
        best_cost,
        path,
        checkpoints: vec![Checkpoint {
            n,
            best_cost,
            nodes: counters.nodes,
            edges: counters.edges,
            collision_checks: counters.collision_checks,
            elapsed_ms,
        }],
        counters,
        elapsed_ms,
        controls: Vec::new(),
        timed_out: false,
    };
    Ok(PrmOutput { result, roadmap })
}
