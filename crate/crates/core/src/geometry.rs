//! Configuration-space model: scenarios, obstacles, validity and clearance
//! predicates, and arc-length path costs.
//!
//! Obstacles are closed sets, so touching an obstacle boundary counts as a
//! collision. Segment validity is decided by fixed-resolution subdivision;
//! the subdivision count is always a power of two so that halving the
//! resolution only ever adds sample points.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the configuration space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Config(pub Vec<f64>);

impl Config {
    pub fn new(coords: Vec<f64>) -> Self {
        Config(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for Config {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Config {
    fn from(v: Vec<f64>) -> Self {
        Config(v)
    }
}

impl From<&[f64]> for Config {
    fn from(v: &[f64]) -> Self {
        Config(v.to_vec())
    }
}

/// Euclidean distance between two coordinate slices of equal length.
#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Linear interpolation `a + t (b - a)` written into `out`.
#[inline]
pub fn lerp_into(a: &[f64], b: &[f64], t: f64, out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + t * (y - x);
    }
}

/// Number of subdivision intervals used for a segment of length `len` at
/// spacing `resolution`: the smallest power of two `m` with `len / m <= resolution`.
pub fn subdivisions(len: f64, resolution: f64) -> usize {
    let mut m = 1usize;
    while len / (m as f64) > resolution {
        m *= 2;
    }
    m
}

/// Closed axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaBox {
    pub min: Config,
    pub max: Config,
}

impl AaBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        AaBox {
            min: Config(min),
            max: Config(max),
        }
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit(d: usize) -> Self {
        AaBox::new(vec![0.0; d], vec![1.0; d])
    }

    pub fn dim(&self) -> usize {
        self.min.dim()
    }

    pub fn volume(&self) -> f64 {
        self.min.iter().zip(self.max.iter()).map(|(lo, hi)| hi - lo).product()
    }

    pub fn diagonal(&self) -> f64 {
        distance(&self.min, &self.max)
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.iter()
            .zip(self.min.iter().zip(self.max.iter()))
            .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Distance from `q` to the box; zero when `q` is inside.
    pub fn distance_to(&self, q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (x, (lo, hi)) in q.iter().zip(self.min.iter().zip(self.max.iter())) {
            let d = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Distance from an interior point to the nearest face.
    pub fn depth(&self, q: &[f64]) -> f64 {
        q.iter()
            .zip(self.min.iter().zip(self.max.iter()))
            .map(|(x, (lo, hi))| (x - lo).min(hi - x))
            .fold(f64::INFINITY, f64::min)
    }

    fn well_formed(&self) -> bool {
        self.min.len() == self.max.len()
            && self
                .min
                .iter()
                .zip(self.max.iter())
                .all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo <= hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Obstacle {
    Box { min: Config, max: Config },
    Ball { center: Config, radius: f64 },
}

impl Obstacle {
    pub fn aabox(min: Vec<f64>, max: Vec<f64>) -> Self {
        Obstacle::Box {
            min: Config(min),
            max: Config(max),
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Obstacle::Ball {
            center: Config(center),
            radius,
        }
    }

    /// Signed-free distance from `q` to the obstacle set (zero inside).
    pub fn distance_to(&self, q: &[f64]) -> f64 {
        match self {
            Obstacle::Box { min, max } => {
                let mut acc = 0.0;
                for (x, (lo, hi)) in q.iter().zip(min.iter().zip(max.iter())) {
                    let d = if x < lo {
                        lo - x
                    } else if x > hi {
                        x - hi
                    } else {
                        0.0
                    };
                    acc += d * d;
                }
                acc.sqrt()
            }
            Obstacle::Ball { center, radius } => (distance(q, center) - radius).max(0.0),
        }
    }

    /// True when `q` lies within `inflate` of the (closed) obstacle.
    #[inline]
    pub fn hits(&self, q: &[f64], inflate: f64) -> bool {
        match self {
            Obstacle::Box { min, max } => {
                if inflate == 0.0 {
                    q.iter()
                        .zip(min.iter().zip(max.iter()))
                        .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
                } else {
                    self.distance_to(q) <= inflate
                }
            }
            Obstacle::Ball { center, radius } => distance(q, center) <= radius + inflate,
        }
    }

    /// Axis-aligned bounds of the obstacle grown by `inflate`.
    fn bounds(&self, inflate: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Obstacle::Box { min, max } => (
                min.iter().map(|v| v - inflate).collect(),
                max.iter().map(|v| v + inflate).collect(),
            ),
            Obstacle::Ball { center, radius } => (
                center.iter().map(|v| v - radius - inflate).collect(),
                center.iter().map(|v| v + radius + inflate).collect(),
            ),
        }
    }
}

/// Goal set: a closed ball; radius zero means a single configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: Config,
    pub radius: f64,
}

impl GoalRegion {
    pub fn contains(&self, q: &[f64]) -> bool {
        distance(q, &self.center) <= self.radius
    }

    /// Admissible lower bound on the remaining path length to the goal set.
    pub fn distance_to(&self, q: &[f64]) -> f64 {
        (distance(q, &self.center) - self.radius).max(0.0)
    }
}

/// A motion-planning problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub dimension: usize,
    pub domain: AaBox,
    pub obstacles: Vec<Obstacle>,
    pub start: Config,
    pub goal: GoalRegion,
    pub optimal_cost: Option<f64>,
    /// Upper bound on the free-space measure: the domain volume.
    pub measure_upper: f64,
    /// Disc/ball robot radius; obstacles are grown and the domain shrunk by it.
    pub robot_radius: f64,
}

impl Scenario {
    /// Builds and validates a scenario.
    pub fn new(domain: AaBox, obstacles: Vec<Obstacle>, start: Config, goal: GoalRegion) -> Result<Self> {
        let scenario = Scenario::new_unchecked(domain, obstacles, start, goal);
        scenario.validate()?;
        Ok(scenario)
    }

    /// Builds a scenario without checking start and goal validity.
    pub(crate) fn new_unchecked(domain: AaBox, obstacles: Vec<Obstacle>, start: Config, goal: GoalRegion) -> Self {
        Scenario {
            dimension: domain.dim(),
            measure_upper: domain.volume(),
            domain,
            obstacles,
            start,
            goal,
            optimal_cost: None,
            robot_radius: 0.0,
        }
    }

    pub fn with_optimal_cost(mut self, cost: f64) -> Self {
        self.optimal_cost = Some(cost);
        self
    }

    /// Copy of this scenario for a disc robot of the given radius.
    pub fn for_robot(&self, radius: f64, start: Config, goal: GoalRegion) -> Self {
        Scenario {
            start,
            goal,
            robot_radius: radius,
            optimal_cost: None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::validation("dimension", "must be positive"));
        }
        check_len("domain.min", &self.domain.min, d)?;
        check_len("domain.max", &self.domain.max, d)?;
        if !self.domain.well_formed() {
            return Err(Error::validation("domain", "min must be <= max and finite"));
        }
        if !(self.measure_upper > 0.0) {
            return Err(Error::validation("domain", "domain volume must be positive"));
        }
        for (i, obs) in self.obstacles.iter().enumerate() {
            match obs {
                Obstacle::Box { min, max } => {
                    check_len(&format!("obstacles[{i}].min"), min, d)?;
                    check_len(&format!("obstacles[{i}].max"), max, d)?;
                    let b = AaBox {
                        min: min.clone(),
                        max: max.clone(),
                    };
                    if !b.well_formed() {
                        return Err(Error::validation(
                            format!("obstacles[{i}]"),
                            "box min must be <= max componentwise",
                        ));
                    }
                }
                Obstacle::Ball { center, radius } => {
                    check_len(&format!("obstacles[{i}].center"), center, d)?;
                    if !(*radius > 0.0) || !radius.is_finite() {
                        return Err(Error::validation(format!("obstacles[{i}].radius"), "must be positive"));
                    }
                }
            }
        }
        check_len("start", &self.start, d)?;
        check_len("goal.center", &self.goal.center, d)?;
        if !(self.goal.radius >= 0.0) || !self.goal.radius.is_finite() {
            return Err(Error::validation("goal.radius", "must be >= 0"));
        }
        if !self.domain.contains(&self.start) {
            return Err(Error::validation("start", "outside the domain"));
        }
        if !self.domain.contains(&self.goal.center) {
            return Err(Error::validation("goal.center", "outside the domain"));
        }
        if !self.is_free(&self.start) {
            return Err(Error::validation("start", "in collision"));
        }
        if let Some(c) = self.optimal_cost {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::validation("optimal_cost", "must be positive"));
            }
        }
        Ok(())
    }

    /// Point validity without the dimension check.
    #[inline]
    pub fn is_free(&self, q: &[f64]) -> bool {
        let c = self.robot_radius;
        let inside = q
            .iter()
            .zip(self.domain.min.iter().zip(self.domain.max.iter()))
            .all(|(x, (lo, hi))| lo + c <= *x && *x <= hi - c);
        inside && !self.obstacles.iter().any(|o| o.hits(q, c))
    }

    /// Segment validity by subdivision at spacing `<= resolution`.
    ///
    /// Obstacles whose inflated bounds cannot meet the segment are skipped,
    /// which gives the same answer as checking them at every sample.
    pub fn segment_free(&self, a: &[f64], b: &[f64], resolution: f64) -> bool {
        // Canonical orientation makes the sample set independent of argument order.
        let (a, b) = if lex_less(b, a) { (b, a) } else { (a, b) };
        let c = self.robot_radius;
        let scale = 1.0 + a.iter().chain(b.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let eps = 1e-9 * scale;

        let seg_lo: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.min(*y) - eps).collect();
        let seg_hi: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.max(*y) + eps).collect();

        let domain_safe = seg_lo
            .iter()
            .zip(seg_hi.iter())
            .zip(self.domain.min.iter().zip(self.domain.max.iter()))
            .all(|((slo, shi), (lo, hi))| lo + c <= *slo && *shi <= hi - c);

        let relevant: Vec<&Obstacle> = self
            .obstacles
            .iter()
            .filter(|o| {
                let (lo, hi) = o.bounds(c);
                (0..a.len()).all(|i| lo[i] <= seg_hi[i] && seg_lo[i] <= hi[i])
            })
            .collect();

        if domain_safe && relevant.is_empty() {
            return true;
        }

        let len = distance(a, b);
        let m = subdivisions(len, resolution);
        let mut p = vec![0.0; a.len()];
        for i in 0..=m {
            let t = i as f64 / m as f64;
            lerp_into(a, b, t, &mut p);
            if !domain_safe {
                let inside = p
                    .iter()
                    .zip(self.domain.min.iter().zip(self.domain.max.iter()))
                    .all(|(x, (lo, hi))| lo + c <= *x && *x <= hi - c);
                if !inside {
                    return false;
                }
            }
            if relevant.iter().any(|o| o.hits(&p, c)) {
                return false;
            }
            if len == 0.0 {
                break;
            }
        }
        true
    }

    /// Distance from a valid point to the nearest obstacle surface or domain
    /// face (reduced by the robot radius); zero for invalid points.
    pub fn clearance(&self, q: &[f64]) -> f64 {
        if !self.is_free(q) {
            return 0.0;
        }
        let c = self.robot_radius;
        let wall = self.domain.depth(q) - c;
        self.obstacles
            .iter()
            .map(|o| o.distance_to(q) - c)
            .fold(wall, f64::min)
            .max(0.0)
    }

    /// Default subdivision resolution: 1e-3 of the domain diagonal.
    pub fn default_resolution(&self) -> f64 {
        1e-3 * self.domain.diagonal()
    }

    fn check_dim(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dimension {
            return Err(Error::usage(format!(
                "configuration has {} coordinates, scenario dimension is {}",
                q.len(),
                self.dimension
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("configuration has non-finite coordinates"));
        }
        Ok(())
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn check_len(field: &str, v: &[f64], d: usize) -> Result<()> {
    if v.len() != d {
        return Err(Error::validation(
            field,
            format!("expected {d} coordinates, found {}", v.len()),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation(field, "coordinates must be finite"));
    }
    Ok(())
}

/// True iff `q` lies in the domain and outside every (closed) obstacle.
pub fn point_valid(scenario: &Scenario, q: &[f64]) -> Result<bool> {
    scenario.check_dim(q)?;
    Ok(scenario.is_free(q))
}

/// True iff every sample at spacing `<= resolution` along `ab`, endpoints
/// included, is valid.
pub fn edge_valid(scenario: &Scenario, a: &[f64], b: &[f64], resolution: f64) -> Result<bool> {
    if !(resolution > 0.0) {
        return Err(Error::usage("resolution must be positive"));
    }
    scenario.check_dim(a)?;
    scenario.check_dim(b)?;
    Ok(scenario.segment_free(a, b, resolution))
}

/// Sum of Euclidean segment lengths.
pub fn path_cost<C: AsRef<[f64]>>(waypoints: &[C]) -> Result<f64> {
    if waypoints.is_empty() {
        return Err(Error::usage("path needs at least one waypoint"));
    }
    Ok(polyline_length(waypoints))
}

pub(crate) fn polyline_length<C: AsRef<[f64]>>(waypoints: &[C]) -> f64 {
    waypoints
        .windows(2)
        .map(|w| distance(w[0].as_ref(), w[1].as_ref()))
        .sum()
}

impl AsRef<[f64]> for Config {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A polyline solution with its arc-length cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Config>,
    pub cost: f64,
}

impl Path {
    pub fn new(waypoints: Vec<Config>) -> Result<Self> {
        let cost = path_cost(&waypoints)?;
        Ok(Path { waypoints, cost })
    }

    pub fn start(&self) -> &Config {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &Config {
        self.waypoints.last().expect("path is nonempty")
    }

    /// Points along the path at spacing `<= resolution`, waypoints included.
    pub fn densify(&self, resolution: f64) -> Vec<Config> {
        let mut out = vec![self.waypoints[0].clone()];
        for w in self.waypoints.windows(2) {
            let m = subdivisions(distance(&w[0], &w[1]), resolution);
            for i in 1..=m {
                let mut p = vec![0.0; w[0].len()];
                lerp_into(&w[0], &w[1], i as f64 / m as f64, &mut p);
                out.push(Config(p));
            }
        }
        out
    }
}

/// Minimum clearance over points sampled along the path; zero if any sampled
/// point is invalid.
pub fn path_clearance(scenario: &Scenario, path: &Path, resolution: f64) -> f64 {
    let mut best = f64::INFINITY;
    for p in path.densify(resolution) {
        if !scenario.is_free(&p) {
            return 0.0;
        }
        best = best.min(scenario.clearance(&p));
    }
    best
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGoal {
    center: Vec<f64>,
    radius: f64,
}

#[derive(Deserialize)]
struct RawDomain {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Deserialize)]
struct RawScenario {
    dimension: usize,
    domain: RawDomain,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
    start: Vec<f64>,
    goal: RawGoal,
    #[serde(default)]
    optimal_cost: Option<f64>,
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let scenario = Scenario {
        dimension: raw.dimension,
        measure_upper: 0.0,
        domain: AaBox::new(raw.domain.min, raw.domain.max),
        obstacles: raw.obstacles,
        start: Config(raw.start),
        goal: GoalRegion {
            center: Config(raw.goal.center),
            radius: raw.goal.radius,
        },
        optimal_cost: raw.optimal_cost,
        robot_radius: 0.0,
    };
    finish_scenario(scenario)
}

pub(crate) fn finish_scenario(mut scenario: Scenario) -> Result<Scenario> {
    let d = scenario.dimension;
    check_len("domain.min", &scenario.domain.min, d)?;
    check_len("domain.max", &scenario.domain.max, d)?;
    scenario.measure_upper = scenario.domain.volume();
    scenario.validate()?;
    Ok(scenario)
}
