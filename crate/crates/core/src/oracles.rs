//! Brute-force references: exact shortest paths among 2-D boxes and a
//! tiling certificate for returned paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{distance, Obstacle, Path, Scenario};

/// Corner inflation used by [`optimal_cost_2d_boxes`].
pub const EPS_VG: f64 = 1e-6;

/// True when the closed segment `[a, b]` meets the closed box.
pub fn segment_hits_box(a: &[f64], b: &[f64], min: &[f64], max: &[f64]) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..a.len() {
        let d = b[k] - a[k];
        if d == 0.0 {
            if a[k] < min[k] || a[k] > max[k] {
                return false;
            }
            continue;
        }
        let (mut lo, mut hi) = ((min[k] - a[k]) / d, (max[k] - a[k]) / d);
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        t0 = t0.max(lo);
        t1 = t1.min(hi);
        if t0 > t1 {
            return false;
        }
    }
    true
}

/// Visibility graph over start, goal center and the box corners pushed
/// outward diagonally by `eps`, with exact segment tests.
#[derive(Clone, Debug, PartialEq)]
pub struct VisibilityGraph {
    pub vertices: Vec<[f64; 2]>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
}

impl VisibilityGraph {
    pub const START: usize = 0;
    pub const GOAL: usize = 1;

    pub fn build(scenario: &Scenario, eps: f64) -> Result<Self> {
        let boxes = boxes_2d(scenario)?;
        let free = |p: &[f64; 2]| scenario.domain.contains(p) && !boxes.iter().any(|(lo, hi)| inside(p, lo, hi));
        let mut vertices = vec![
            [scenario.start[0], scenario.start[1]],
            [scenario.goal.center[0], scenario.goal.center[1]],
        ];
        for (lo, hi) in &boxes {
            for (x, sx) in [(lo[0], -1.0), (hi[0], 1.0)] {
                for (y, sy) in [(lo[1], -1.0), (hi[1], 1.0)] {
                    let p = [x + sx * eps, y + sy * eps];
                    if free(&p) {
                        vertices.push(p);
                    }
                }
            }
        }
        let n = vertices.len();
        let mut adjacency = vec![Vec::new(); n];
        if free(&vertices[Self::START]) && free(&vertices[Self::GOAL]) {
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (&vertices[i], &vertices[j]);
                    if !boxes.iter().any(|(lo, hi)| segment_hits_box(a, b, lo, hi)) {
                        let w = distance(a, b);
                        adjacency[i].push((j, w));
                        adjacency[j].push((i, w));
                    }
                }
            }
        }
        Ok(VisibilityGraph { vertices, adjacency })
    }

    /// Dijkstra distance from start to goal; `None` when disconnected.
    pub fn shortest(&self) -> Option<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        let mut heap = BinaryHeap::from([Item(0.0, Self::START)]);
        dist[Self::START] = 0.0;
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if v == Self::GOAL {
                return Some(d);
            }
            for &(u, w) in &self.adjacency[v] {
                if d + w < dist[u] {
                    dist[u] = d + w;
                    heap.push(Item(d + w, u));
                }
            }
        }
        None
    }
}

fn inside(p: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    p.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| a <= x && x <= b)
}

fn boxes_2d(scenario: &Scenario) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if scenario.dimension != 2 {
        return Err(Error::usage("the visibility-graph oracle handles 2-D scenes only"));
    }
    if scenario.robot_radius != 0.0 {
        return Err(Error::usage("the visibility-graph oracle handles point robots only"));
    }
    scenario
        .obstacles
        .iter()
        .map(|o| match o {
            Obstacle::Box { min, max } => Ok((min.0.clone(), max.0.clone())),
            Obstacle::Ball { .. } => Err(Error::usage("the visibility-graph oracle handles box obstacles only")),
        })
        .collect()
}

/// Shortest collision-free path length from the start to the goal center
/// among axis-aligned boxes, exact up to the `EPS_VG` corner inflation.
/// `Ok(None)` when the goal is unreachable.
pub fn optimal_cost_2d_boxes(scenario: &Scenario) -> Result<Option<f64>> {
    optimal_cost_2d_boxes_eps(scenario, EPS_VG)
}

pub fn optimal_cost_2d_boxes_eps(scenario: &Scenario, eps: f64) -> Result<Option<f64>> {
    if !(eps > 0.0) {
        return Err(Error::usage("corner inflation must be positive"));
    }
    if scenario.start.0 == scenario.goal.center.0 {
        return Ok(Some(0.0));
    }
    Ok(VisibilityGraph::build(scenario, eps)?.shortest())
}

/// Checks that `path` is covered by a chain of obstacle-free balls of radius
/// `ball_radius`: the path is resampled so consecutive ball centers are at
/// most `ball_radius` apart, and every ball must clear all obstacles and
/// domain faces.
pub fn tiling_cover_check(scenario: &Scenario, path: &Path, ball_radius: f64) -> Result<bool> {
    if !(ball_radius > 0.0) {
        return Err(Error::usage("ball radius must be positive"));
    }
    Ok(path
        .densify(ball_radius)
        .iter()
        .all(|c| scenario.is_free(c) && scenario.clearance(c) > ball_radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AaBox, Config, GoalRegion};

    fn scene(obstacles: Vec<Obstacle>, start: [f64; 2], goal: [f64; 2]) -> Scenario {
        Scenario::new(
            AaBox::unit(2),
            obstacles,
            Config(start.to_vec()),
            GoalRegion {
                center: Config(goal.to_vec()),
                radius: 0.02,
            },
        )
        .unwrap()
    }

    #[test]
    fn segment_box_cases() {
        let (lo, hi) = ([0.4, 0.4], [0.6, 0.6]);
        assert!(segment_hits_box(&[0.0, 0.5], &[1.0, 0.5], &lo, &hi));
        assert!(!segment_hits_box(&[0.0, 0.3], &[1.0, 0.3], &lo, &hi));
        // touching a face counts
        assert!(segment_hits_box(&[0.0, 0.4], &[1.0, 0.4], &lo, &hi));
        // grazing a corner counts
        let (lo2, hi2) = ([0.25, 0.25], [0.75, 0.75]);
        assert!(segment_hits_box(&[0.0, 0.5], &[0.5, 1.0], &lo2, &hi2));
        assert!(!segment_hits_box(&[0.0, 0.5 + 1e-9], &[0.5, 1.0 + 1e-9], &lo2, &hi2));
    }

    #[test]
    fn oracle_examples() {
        let empty = scene(vec![], [0.1, 0.1], [0.9, 0.9]);
        let c = optimal_cost_2d_boxes(&empty).unwrap().unwrap();
        assert!((c - 0.8 * 2f64.sqrt()).abs() < 1e-12);

        let boxed = scene(
            vec![Obstacle::aabox(vec![0.4, 0.4], vec![0.6, 0.6])],
            [0.1, 0.5],
            [0.9, 0.5],
        );
        let c = optimal_cost_2d_boxes(&boxed).unwrap().unwrap();
        assert!((c - 0.832_455_532_033_675_8).abs() < 1e-5, "{c}");

        let same = scene(vec![], [0.3, 0.3], [0.3, 0.3]);
        assert_eq!(optimal_cost_2d_boxes(&same).unwrap(), Some(0.0));
    }

    #[test]
    fn oracle_rejects_balls_and_walls_disconnect() {
        let balls = scene(vec![Obstacle::ball(vec![0.5, 0.5], 0.1)], [0.1, 0.1], [0.9, 0.9]);
        assert!(optimal_cost_2d_boxes(&balls).is_err());
        let wall = scene(
            vec![Obstacle::aabox(vec![0.45, 0.0], vec![0.55, 1.0])],
            [0.1, 0.5],
            [0.9, 0.5],
        );
        assert_eq!(optimal_cost_2d_boxes(&wall).unwrap(), None);
    }

    #[test]
    fn tiling_examples() {
        let empty = scene(vec![], [0.1, 0.1], [0.9, 0.9]);
        let straight = Path::new(vec![Config(vec![0.2, 0.2]), Config(vec![0.8, 0.8])]).unwrap();
        assert!(tiling_cover_check(&empty, &straight, 0.1).unwrap());
        let boxed = scene(
            vec![Obstacle::aabox(vec![0.4, 0.4], vec![0.6, 0.6])],
            [0.1, 0.5],
            [0.9, 0.5],
        );
        let hugging = Path::new(vec![Config(vec![0.2, 0.38]), Config(vec![0.8, 0.38])]).unwrap();
        assert!(!tiling_cover_check(&boxed, &hugging, 0.05).unwrap());
        assert!(tiling_cover_check(&boxed, &hugging, 0.01).unwrap());
        assert!(tiling_cover_check(&boxed, &hugging, 0.0).is_err());
    }
}
