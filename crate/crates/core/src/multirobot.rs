//! dRRT*: a tree grown over the implicit tensor product of per-robot
//! roadmaps, for disc robots sharing a workspace.

use std::collections::{HashMap, HashSet, VecDeque};
use std::time::Instant;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometric::prm::{prm_star, Roadmap};
use crate::geometric::radius::RadiusRule;
use crate::geometry::{distance, finish_scenario, subdivisions, AaBox, Config, GoalRegion, Obstacle, Path, Scenario};
use crate::nn::NeighborIndex;
use crate::planning::{drive, AnytimePlanner, Checkpoint, Counters, PlanOptions, PlanResult};
use crate::sampling::SampleStream;
use crate::tree::SearchTree;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Robot {
    pub radius: f64,
    pub start: Config,
    pub goal: GoalRegion,
}

/// A shared workspace plus the robots moving in it.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiRobotScenario {
    pub workspace: Scenario,
    pub robots: Vec<Robot>,
    /// Per-robot view: obstacles grown and domain shrunk by the robot radius.
    pub per_robot: Vec<Scenario>,
}

impl MultiRobotScenario {
    pub fn new(workspace: Scenario, robots: Vec<Robot>) -> Result<Self> {
        if robots.is_empty() {
            return Err(Error::validation("robots", "at least one robot is required"));
        }
        let mut per_robot = Vec::with_capacity(robots.len());
        for (i, r) in robots.iter().enumerate() {
            if !(r.radius >= 0.0 && r.radius.is_finite()) {
                return Err(Error::validation(
                    format!("robots[{i}].radius"),
                    "must be finite and non-negative",
                ));
            }
            if r.start.len() != workspace.dimension {
                return Err(Error::validation(format!("robots[{i}].start"), "wrong dimension"));
            }
            if r.goal.center.len() != workspace.dimension {
                return Err(Error::validation(format!("robots[{i}].goal.center"), "wrong dimension"));
            }
            per_robot.push(workspace.for_robot(r.radius, r.start.clone(), r.goal.clone()));
        }
        Ok(MultiRobotScenario {
            workspace,
            robots,
            per_robot,
        })
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    /// Checks each robot's start and goal against the static obstacles.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.per_robot.iter().enumerate() {
            s.validate().map_err(|e| match e {
                Error::Validation { field, message } => Error::Validation {
                    field: format!("robots[{i}].{field}"),
                    message,
                },
                other => other,
            })?;
        }
        Ok(())
    }

    fn radii(&self) -> Vec<f64> {
        self.robots.iter().map(|r| r.radius).collect()
    }
}

#[derive(Deserialize)]
struct RawDomain {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMulti {
    dimension: usize,
    domain: RawDomain,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
    robots: Vec<Robot>,
}

/// Parses a scenario document whose start/goal are given per robot under
/// `robots: [{radius, start, goal}]`.
pub fn load_multirobot_scenario(text: &str) -> Result<MultiRobotScenario> {
    let raw: RawMulti = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let first = raw
        .robots
        .first()
        .ok_or_else(|| Error::validation("robots", "at least one robot is required"))?;
    let workspace = Scenario::new_unchecked(
        AaBox::new(raw.domain.min, raw.domain.max),
        raw.obstacles,
        first.start.clone(),
        first.goal.clone(),
    );
    let workspace = Scenario {
        dimension: raw.dimension,
        ..workspace
    };
    let workspace = finish_scenario(workspace)?;
    let mr = MultiRobotScenario::new(workspace, raw.robots)?;
    mr.validate()?;
    Ok(mr)
}

/// One PRM* roadmap per robot over that robot's grown-obstacle free space.
pub fn build_per_robot_roadmaps(
    mr: &MultiRobotScenario,
    stream: &mut SampleStream,
    n: usize,
    rule: &RadiusRule,
    options: &PlanOptions,
) -> Result<Vec<Roadmap>> {
    mr.per_robot
        .iter()
        .map(|s| prm_star(s, stream, n, rule, options).map(|out| out.roadmap))
        .collect()
}

/// Index of a vertex in each robot's roadmap.
pub type TensorVertex = Vec<usize>;

pub fn composite_config(roadmaps: &[Roadmap], v: &[usize]) -> Vec<Config> {
    roadmaps.iter().zip(v).map(|(rm, &i)| rm.vertices[i].clone()).collect()
}

/// Sum over robots of the distance each one travels.
pub fn composite_distance(a: &[Config], b: &[Config]) -> f64 {
    a.iter().zip(b).map(|(p, q)| distance(p, q)).sum()
}

/// The adjacent tensor vertex reached by moving each robot to whichever of
/// its current vertex and that vertex's roadmap neighbors lies closest to the
/// robot's component of `target` (ties on the lowest id). `None` when no
/// robot would move.
pub fn adjacent_toward(roadmaps: &[Roadmap], from: &[usize], target: &[Config]) -> Option<TensorVertex> {
    let mut out = Vec::with_capacity(from.len());
    for ((rm, &v), q) in roadmaps.iter().zip(from).zip(target) {
        let mut best = (distance(&rm.vertices[v], q), v);
        for u in rm.neighbors(v) {
            let d = distance(&rm.vertices[u], q);
            if d < best.0 || (d == best.0 && u < best.1) {
                best = (d, u);
            }
        }
        out.push(best.1);
    }
    (out != from).then_some(out)
}

/// Smallest distance between two points moving linearly over `t` in `[0, 1]`.
fn closest_approach(a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64]) -> f64 {
    let p: Vec<f64> = a0.iter().zip(b0).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = a1
        .iter()
        .zip(b1)
        .zip(a0.iter().zip(b0))
        .map(|((a1, b1), (a0, b0))| (a1 - b1) - (a0 - b0))
        .collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let t = if vv > 0.0 {
        (-p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / vv).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.iter().zip(&v).map(|(a, b)| (a + t * b).powi(2)).sum::<f64>().sqrt()
}

/// Synchronized straight-line motion of all robots from `from` to `to`:
/// each robot's segment must be valid at resolution `resolution` in its own
/// grown-obstacle space, and every pair must keep a separation of at least the
/// sum of their radii for the whole motion.
pub fn composite_edge_valid(mr: &MultiRobotScenario, from: &[Config], to: &[Config], resolution: f64) -> Result<bool> {
    let r = mr.len();
    if from.len() != r || to.len() != r {
        return Err(Error::usage(format!(
            "composite configurations must have {r} components, got {} and {}",
            from.len(),
            to.len()
        )));
    }
    if !(resolution > 0.0) {
        return Err(Error::usage("resolution must be positive"));
    }
    Ok(composite_edge_free(mr, &mr.radii(), from, to, resolution))
}

fn composite_edge_free(
    mr: &MultiRobotScenario,
    radii: &[f64],
    from: &[Config],
    to: &[Config],
    resolution: f64,
) -> bool {
    let r = from.len();
    for i in 0..r {
        for j in i + 1..r {
            if closest_approach(&from[i], &to[i], &from[j], &to[j]) < radii[i] + radii[j] {
                return false;
            }
        }
    }
    (0..r).all(|i| mr.per_robot[i].segment_free(&from[i], &to[i], resolution))
}

/// Separation violations along a composite path, sampled at `resolution`
/// of the longest single-robot move per segment.
pub fn separation_violations(mr: &MultiRobotScenario, waypoints: &[Vec<Config>], resolution: f64) -> usize {
    let radii = mr.radii();
    let mut bad = 0;
    for w in waypoints.windows(2) {
        let longest = w[0].iter().zip(&w[1]).map(|(a, b)| distance(a, b)).fold(0.0, f64::max);
        let m = subdivisions(longest, resolution);
        for k in 0..=m {
            let t = k as f64 / m as f64;
            let pos: Vec<Vec<f64>> = w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x + t * (y - x)).collect())
                .collect();
            for i in 0..pos.len() {
                for j in i + 1..pos.len() {
                    if distance(&pos[i], &pos[j]) < radii[i] + radii[j] {
                        bad += 1;
                    }
                }
            }
        }
    }
    bad
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrrtParams {
    /// Probability of steering every robot toward its goal center.
    pub goal_bias: f64,
    /// Skip choose-parent/rewire neighborhoods larger than this.
    pub max_neighborhood: usize,
}

impl Default for DrrtParams {
    fn default() -> Self {
        DrrtParams {
            goal_bias: 0.05,
            max_neighborhood: 4096,
        }
    }
}

/// dRRT* result: the composite solution plus each robot's path.
#[derive(Clone, Debug)]
pub struct DrrtOutput {
    pub result: PlanResult,
    /// One path per robot; all have the same number of waypoints.
    pub robot_paths: Vec<Path>,
    /// Composite waypoints (one configuration per robot at each step).
    pub composite_waypoints: Vec<Vec<Config>>,
    pub roadmaps: Vec<Roadmap>,
}

pub struct DrrtPlanner<'a> {
    mr: &'a MultiRobotScenario,
    roadmaps: &'a [Roadmap],
    stream: &'a mut SampleStream,
    params: DrrtParams,
    radii: Vec<f64>,
    resolution: f64,
    tree: SearchTree<TensorVertex>,
    lookup: HashMap<TensorVertex, usize>,
    index: NeighborIndex,
    edge_memo: HashMap<(usize, usize), bool>,
    goal_nodes: Vec<usize>,
    iterations: usize,
    counters: Counters,
}

impl<'a> DrrtPlanner<'a> {
    pub fn new(
        mr: &'a MultiRobotScenario,
        roadmaps: &'a [Roadmap],
        stream: &'a mut SampleStream,
        params: DrrtParams,
        options: &PlanOptions,
    ) -> Result<Self> {
        if roadmaps.len() != mr.len() {
            return Err(Error::usage("one roadmap per robot is required"));
        }
        let root: TensorVertex = roadmaps.iter().map(|rm| rm.start_id).collect();
        let q0 = composite_config(roadmaps, &root);
        let radii = mr.radii();
        let mut planner = DrrtPlanner {
            mr,
            roadmaps,
            stream,
            params,
            resolution: options.resolution_for(&mr.workspace),
            index: NeighborIndex::new(mr.workspace.dimension * mr.len()),
            tree: SearchTree::new(root.clone()),
            lookup: HashMap::from([(root.clone(), 0)]),
            edge_memo: HashMap::new(),
            goal_nodes: Vec::new(),
            iterations: 0,
            counters: Counters::default(),
            radii,
        };
        planner.index.insert(0, &flatten(&q0))?;
        if planner.is_goal(&root) {
            planner.goal_nodes.push(0);
        }
        Ok(planner)
    }

    pub fn tree(&self) -> &SearchTree<TensorVertex> {
        &self.tree
    }

    fn is_goal(&self, v: &[usize]) -> bool {
        self.roadmaps.iter().zip(v).all(|(rm, &i)| rm.is_goal(i))
    }

    fn config(&self, id: usize) -> Vec<Config> {
        composite_config(self.roadmaps, self.tree.state(id))
    }

    fn edge_ok(&mut self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        if let Some(&ok) = self.edge_memo.get(&key) {
            return ok;
        }
        self.counters.collision_checks += 1;
        let ok = composite_edge_free(
            self.mr,
            &self.radii,
            &self.config(key.0),
            &self.config(key.1),
            self.resolution,
        );
        self.edge_memo.insert(key, ok);
        ok
    }

    fn edge_cost(&self, a: usize, b: usize) -> f64 {
        composite_distance(&self.config(a), &self.config(b))
    }

    /// Tree vertex nearest to `target` under the summed per-robot distance.
    fn nearest(&mut self, target: &[Config]) -> Result<usize> {
        self.counters.nn_queries += 1;
        let dim = self.mr.workspace.dimension;
        let summed = |a: &[f64], b: &[f64]| a.chunks(dim).zip(b.chunks(dim)).map(|(p, q)| distance(p, q)).sum();
        Ok(self.index.nearest_by(&flatten(target), summed)?.id)
    }

    /// Discovered tree vertices adjacent to `v` in the tensor roadmap.
    fn discovered_neighbors(&self, v: &[usize]) -> Vec<usize> {
        let options: Vec<Vec<usize>> = self
            .roadmaps
            .iter()
            .zip(v)
            .map(|(rm, &i)| std::iter::once(i).chain(rm.neighbors(i)).collect())
            .collect();
        let total: usize = options.iter().map(Vec::len).product();
        if total > self.params.max_neighborhood {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut digits = vec![0usize; v.len()];
        let mut cand = v.to_vec();
        loop {
            for (c, (o, &d)) in cand.iter_mut().zip(options.iter().zip(&digits)) {
                *c = o[d];
            }
            if cand != v {
                if let Some(&id) = self.lookup.get(&cand) {
                    out.push(id);
                }
            }
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < options[k].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    /// Propagates cost decreases through discovered adjacent vertices until
    /// no reparent lowers any cost. A reparent lowers the cost of the whole
    /// subtree, so every node in it is revisited.
    fn cascade(&mut self, seed: usize) {
        let mut queue: VecDeque<usize> = self.tree.subtree(seed).into();
        let mut queued: HashSet<usize> = queue.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            queued.remove(&v);
            let v_state = self.tree.state(v).clone();
            for u in self.discovered_neighbors(&v_state) {
                if u == SearchTree::<TensorVertex>::ROOT || self.tree.parent(v) == Some(u) {
                    continue;
                }
                let c = self.edge_cost(v, u);
                if self.tree.cost(v) + c < self.tree.cost(u)
                    && !self.tree.is_ancestor(u, v)
                    && self.edge_ok(v, u)
                    && self.tree.reparent(u, v, c)
                {
                    for w in self.tree.subtree(u) {
                        if queued.insert(w) {
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
    }

    fn try_step(&mut self) -> Result<()> {
        self.iterations += 1;
        self.counters.samples += 1;
        let goal_bias = self.stream.aux_uniform(0.0, 1.0) < self.params.goal_bias;
        let target: Vec<Config> = if goal_bias {
            self.mr.robots.iter().map(|r| r.goal.center.clone()).collect()
        } else {
            (0..self.mr.len())
                .map(|_| self.stream.next_sample(&self.mr.workspace.domain))
                .collect()
        };
        let near = self.nearest(&target)?;
        let Some(v) = adjacent_toward(self.roadmaps, self.tree.state(near), &target) else {
            return Ok(());
        };

        if let Some(&existing) = self.lookup.get(&v) {
            let c = self.edge_cost(near, existing);
            if existing != SearchTree::<TensorVertex>::ROOT
                && self.tree.cost(near) + c < self.tree.cost(existing)
                && !self.tree.is_ancestor(existing, near)
                && self.edge_ok(near, existing)
                && self.tree.reparent(existing, near, c)
            {
                self.cascade(existing);
            }
            return Ok(());
        }

        let q_v = composite_config(self.roadmaps, &v);
        self.counters.collision_checks += 1;
        if !composite_edge_free(self.mr, &self.radii, &self.config(near), &q_v, self.resolution) {
            return Ok(());
        }
        let mut neighbors = self.discovered_neighbors(&v);
        if !neighbors.contains(&near) {
            neighbors.push(near);
        }
        let mut order: Vec<(f64, usize, f64)> = neighbors
            .iter()
            .map(|&u| {
                let c = composite_distance(&self.config(u), &q_v);
                (self.tree.cost(u) + c, u, c)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let id = self.tree.capacity();
        self.lookup.insert(v.clone(), id);
        let mut chosen = None;
        for &(_, u, c) in &order {
            let ok = u == near || {
                let key = (u.min(id), u.max(id));
                self.counters.collision_checks += 1;
                let ok = composite_edge_free(self.mr, &self.radii, &self.config(u), &q_v, self.resolution);
                self.edge_memo.insert(key, ok);
                ok
            };
            if ok {
                chosen = Some((u, c));
                break;
            }
        }
        self.edge_memo.insert((near.min(id), near.max(id)), true);
        let (parent, c) = chosen.expect("near is always a valid parent");
        let added = self.tree.add_child(parent, v.clone(), c);
        debug_assert_eq!(added, id);
        self.index.insert(id, &flatten(&q_v))?;
        if self.is_goal(&v) {
            self.goal_nodes.push(id);
        }
        self.cascade(id);
        Ok(())
    }

    fn best_goal(&self) -> Option<usize> {
        self.goal_nodes
            .iter()
            .copied()
            .min_by(|a, b| self.tree.cost(*a).total_cmp(&self.tree.cost(*b)).then(a.cmp(b)))
    }

    /// Composite waypoints of the best solution.
    pub fn best_waypoints(&self) -> Option<Vec<Vec<Config>>> {
        self.best_goal()
            .map(|g| self.tree.path_to(g).into_iter().map(|id| self.config(id)).collect())
    }

    pub fn into_output(self, checkpoints: Vec<Checkpoint>, timed_out: bool, t0: Instant) -> DrrtOutput {
        let counters = self.counters();
        let best_cost = self.best_cost();
        let composite = self.best_waypoints().unwrap_or_default();
        let robot_paths: Vec<Path> = if composite.is_empty() {
            Vec::new()
        } else {
            (0..self.mr.len())
                .map(|i| Path::new(composite.iter().map(|c| c[i].clone()).collect()).expect("nonempty"))
                .collect()
        };
        let path = best_cost.map(|cost| Path {
            waypoints: composite.iter().map(|c| Config(flatten(c))).collect(),
            cost,
        });
        DrrtOutput {
            result: PlanResult {
                path,
                best_cost,
                checkpoints,
                counters,
                elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
                controls: Vec::new(),
                timed_out,
            },
            robot_paths,
            composite_waypoints: composite,
            roadmaps: self.roadmaps.to_vec(),
        }
    }
}

impl AnytimePlanner for DrrtPlanner<'_> {
    fn step(&mut self) {
        self.try_step().expect("dRRT* step");
    }

    fn iterations(&self) -> usize {
        self.iterations
    }

    fn best_cost(&self) -> Option<f64> {
        self.best_goal().map(|g| self.tree.cost(g))
    }

    fn counters(&self) -> Counters {
        Counters {
            rewires: self.tree.rewires(),
            nodes: self.tree.len() as u64,
            edges: self.tree.len() as u64 - 1,
            ..self.counters
        }
    }
}

fn flatten(configs: &[Config]) -> Vec<f64> {
    configs.iter().flat_map(|c| c.iter().copied()).collect()
}

/// Builds per-robot PRM* roadmaps with `n_roadmap` samples each, then runs
/// dRRT* for `iterations` over their tensor product.
#[allow(clippy::too_many_arguments)]
pub fn drrt_star(
    mr: &MultiRobotScenario,
    stream: &mut SampleStream,
    n_roadmap: usize,
    iterations: usize,
    rule: &RadiusRule,
    params: DrrtParams,
    options: &PlanOptions,
) -> Result<DrrtOutput> {
    let t0 = Instant::now();
    mr.validate()?;
    let roadmaps = build_per_robot_roadmaps(mr, stream, n_roadmap, rule, options)?;
    drrt_on_roadmaps(mr, &roadmaps, stream, iterations, params, options, t0)
}

/// dRRT* over roadmaps built elsewhere.
pub fn drrt_on_roadmaps(
    mr: &MultiRobotScenario,
    roadmaps: &[Roadmap],
    stream: &mut SampleStream,
    iterations: usize,
    params: DrrtParams,
    options: &PlanOptions,
    t0: Instant,
) -> Result<DrrtOutput> {
    let mut planner = DrrtPlanner::new(mr, roadmaps, stream, params, options)?;
    let (cps, timed_out) = drive(&mut planner, iterations, options);
    Ok(planner.into_output(cps, timed_out, t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_pair(radius: f64) -> MultiRobotScenario {
        let ws = Scenario::new(
            AaBox::unit(2),
            vec![],
            Config(vec![0.1, 0.1]),
            GoalRegion {
                center: Config(vec![0.9, 0.9]),
                radius: 0.05,
            },
        )
        .unwrap();
        let robots = vec![
            Robot {
                radius,
                start: Config(vec![0.1, 0.5]),
                goal: GoalRegion {
                    center: Config(vec![0.9, 0.5]),
                    radius: 0.05,
                },
            },
            Robot {
                radius,
                start: Config(vec![0.9, 0.5]),
                goal: GoalRegion {
                    center: Config(vec![0.1, 0.5]),
                    radius: 0.05,
                },
            },
        ];
        MultiRobotScenario::new(ws, robots).unwrap()
    }

    #[test]
    fn parallel_and_swapping_motions() {
        let mr = square_pair(0.05);
        let parallel_from = vec![Config(vec![0.2, 0.2]), Config(vec![0.2, 0.8])];
        let parallel_to = vec![Config(vec![0.8, 0.2]), Config(vec![0.8, 0.8])];
        assert!(composite_edge_valid(&mr, &parallel_from, &parallel_to, 1e-3).unwrap());
        let swap_from = vec![Config(vec![0.2, 0.5]), Config(vec![0.8, 0.5])];
        let swap_to = vec![Config(vec![0.8, 0.5]), Config(vec![0.2, 0.5])];
        assert!(!composite_edge_valid(&mr, &swap_from, &swap_to, 1e-3).unwrap());
        assert!(matches!(
            composite_edge_valid(&mr, &swap_from[..1], &swap_to, 1e-3),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn closest_approach_is_exact() {
        // crossing paths meet at the midpoint
        assert!(closest_approach(&[0.0, 0.0], &[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]) < 1e-15);
        // parallel motion keeps the gap
        assert!((closest_approach(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.3], &[1.0, 0.3]) - 0.3).abs() < 1e-15);
        // separating motion: closest at t = 0
        assert!((closest_approach(&[0.0, 0.0], &[-1.0, 0.0], &[0.5, 0.0], &[1.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stay_put_is_rejected() {
        let mr = square_pair(0.05);
        let mut rm = Roadmap::new(Config(vec![0.1, 0.5]), mr.robots[0].goal.clone());
        rm.add_vertex(Config(vec![0.3, 0.5]));
        rm.add_edge(0, 1);
        let at = vec![rm.vertices[0].clone()];
        assert_eq!(adjacent_toward(std::slice::from_ref(&rm), &[0], &at), None);
        let toward = vec![Config(vec![0.6, 0.5])];
        assert_eq!(adjacent_toward(std::slice::from_ref(&rm), &[0], &toward), Some(vec![1]));
    }
}
