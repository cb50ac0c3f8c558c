//! Planner registry: maps a name plus a string parameter map onto the core
//! planners, so the CLI and run specs share one code path.

use std::collections::BTreeMap;
use std::str::FromStr;

use aoplan::geometric::{prm_star, rrt, rrt_star, RadiusRule, RewireParams, RrtParams, RuleKind};
use aoplan::kinodynamic::{
    ao_meta, ao_rrt, sst, AoMetaParams, AoRrtParams, GeometricBoundedRrt, KinoBoundedRrt, Shrink, SstParams, SystemKind,
};
use aoplan::multirobot::{drrt_star, DrrtParams, MultiRobotScenario};
use aoplan::{Config, Path, PlanOptions, PlanResult, SampleStream, Scenario};

use crate::error::{BenchError, Result};

pub const PLANNERS: &[&str] = &[
    "prm-star",
    "k-prm-star",
    "rrt",
    "rrt-star",
    "sst",
    "ao-rrt",
    "ao-meta",
    "drrt-star",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlannerKind {
    PrmStar,
    KPrmStar,
    Rrt,
    RrtStar,
    Sst,
    AoRrt,
    AoMeta,
    DrrtStar,
}

impl PlannerKind {
    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::PrmStar => "prm-star",
            PlannerKind::KPrmStar => "k-prm-star",
            PlannerKind::Rrt => "rrt",
            PlannerKind::RrtStar => "rrt-star",
            PlannerKind::Sst => "sst",
            PlannerKind::AoRrt => "ao-rrt",
            PlannerKind::AoMeta => "ao-meta",
            PlannerKind::DrrtStar => "drrt-star",
        }
    }

    /// Parameter names the planner understands.
    pub fn accepted_params(self) -> &'static [&'static str] {
        match self {
            PlannerKind::PrmStar => &["radius_rule", "safety", "sampler"],
            PlannerKind::KPrmStar => &["sampler"],
            PlannerKind::Rrt => &["eta", "goal_bias"],
            PlannerKind::RrtStar => &["eta", "goal_bias", "radius_rule", "safety"],
            PlannerKind::Sst => &["system", "delta_bn", "delta_s", "shrink"],
            PlannerKind::AoRrt => &["system", "cost_weight"],
            PlannerKind::AoMeta => &["system", "beta", "rounds", "eta", "goal_bias"],
            PlannerKind::DrrtStar => &["n_roadmap", "radius_rule", "safety", "goal_bias"],
        }
    }

    pub fn is_kinodynamic(self) -> bool {
        matches!(self, PlannerKind::Sst | PlannerKind::AoRrt | PlannerKind::AoMeta)
    }

    pub fn is_multirobot(self) -> bool {
        self == PlannerKind::DrrtStar
    }

    /// PRM* variants build a fresh roadmap for every n rather than growing one.
    pub fn is_batch(self) -> bool {
        matches!(self, PlannerKind::PrmStar | PlannerKind::KPrmStar)
    }
}

impl FromStr for PlannerKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "prm-star" => PlannerKind::PrmStar,
            "k-prm-star" => PlannerKind::KPrmStar,
            "rrt" => PlannerKind::Rrt,
            "rrt-star" => PlannerKind::RrtStar,
            "sst" => PlannerKind::Sst,
            "ao-rrt" => PlannerKind::AoRrt,
            "ao-meta" => PlannerKind::AoMeta,
            "drrt-star" => PlannerKind::DrrtStar,
            other => {
                return Err(BenchError::usage(format!(
                    "unknown planner `{other}` (known: {})",
                    PLANNERS.join(", ")
                )))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerSpec {
    pub kind: PlannerKind,
    pub params: BTreeMap<String, String>,
}

impl PlannerSpec {
    pub fn new(name: &str, params: BTreeMap<String, String>) -> Result<Self> {
        let kind: PlannerKind = name.parse()?;
        for key in params.keys() {
            if !kind.accepted_params().contains(&key.as_str()) {
                return Err(BenchError::usage(format!(
                    "planner {} does not take parameter `{key}` (accepted: {})",
                    kind.name(),
                    kind.accepted_params().join(", ")
                )));
            }
        }
        Ok(PlannerSpec { kind, params })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| BenchError::usage(format!("cannot parse {key} = `{v}`"))),
        }
    }

    fn rule(&self, default: RuleKind, scenario: &Scenario) -> Result<RadiusRule> {
        let kind = match self.params.get("radius_rule") {
            Some(v) => v.parse::<RuleKind>()?,
            None => default,
        };
        let mut rule = RadiusRule::for_scenario(kind, scenario);
        if let Some(s) = self.parsed::<f64>("safety")? {
            rule = rule.with_safety(s);
        }
        Ok(rule)
    }

    fn rrt_params(&self, scenario: &Scenario) -> Result<RrtParams> {
        let mut p = RrtParams::for_scenario(scenario);
        if let Some(eta) = self.parsed("eta")? {
            p.eta = eta;
        }
        if let Some(b) = self.parsed("goal_bias")? {
            p.goal_bias = b;
        }
        Ok(p)
    }

    fn system(&self) -> Result<SystemKind> {
        match self.params.get("system") {
            None => Ok(SystemKind::Integrator2d),
            Some(v) => Ok(v.parse()?),
        }
    }

    fn stream(&self, dim: usize, seed: u64) -> Result<SampleStream> {
        match self.params.get("sampler").map(String::as_str) {
            None | Some("uniform") => Ok(SampleStream::uniform(dim, seed)),
            Some("halton") => Ok(SampleStream::halton(dim)),
            Some(other) => Err(BenchError::usage(format!("unknown sampler `{other}`"))),
        }
    }
}

/// Parses `XI` or `XI:PERIOD`; an empty string selects the default schedule.
pub fn parse_shrink(s: &str) -> Result<Shrink> {
    let bad = || BenchError::usage(format!("cannot parse shrink `{s}` (expected XI or XI:PERIOD)"));
    if s.is_empty() {
        return Ok(Shrink::default());
    }
    let mut shrink = Shrink::default();
    let (xi, period) = match s.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    shrink.xi = xi.parse().map_err(|_| bad())?;
    if let Some(p) = period {
        shrink.period = p.parse().map_err(|_| bad())?;
    }
    Ok(shrink)
}

#[derive(Clone, Debug)]
pub enum Problem {
    Single(Scenario),
    Multi(MultiRobotScenario),
}

impl Problem {
    /// Loads either document kind; a `robots` list marks a multi-robot scenario.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| BenchError::Core(aoplan::Error::Parse(e.to_string())))?;
        if value.get("robots").is_some() {
            Ok(Problem::Multi(aoplan::multirobot::load_multirobot_scenario(text)?))
        } else {
            Ok(Problem::Single(aoplan::load_scenario(text)?))
        }
    }

    pub fn scenario(&self) -> &Scenario {
        match self {
            Problem::Single(s) => s,
            Problem::Multi(m) => &m.workspace,
        }
    }
}

/// Everything a single planner invocation produced.
#[derive(Clone, Debug)]
pub struct Execution {
    pub result: PlanResult,
    /// Per-robot paths (multi-robot planners only).
    pub robot_paths: Vec<Path>,
}

/// Runs one planner invocation of `n` iterations (or samples) with `seed`.
pub fn execute(problem: &Problem, spec: &PlannerSpec, n: usize, seed: u64, options: &PlanOptions) -> Result<Execution> {
    let single = |p: &Problem| match p {
        Problem::Single(s) => Ok(s.clone()),
        Problem::Multi(_) => Err(BenchError::usage(format!(
            "planner {} needs a single-robot scenario",
            spec.name()
        ))),
    };
    let plain = |result| Execution {
        result,
        robot_paths: Vec::new(),
    };
    match spec.kind {
        PlannerKind::PrmStar | PlannerKind::KPrmStar => {
            let s = single(problem)?;
            let default = if spec.kind == PlannerKind::KPrmStar {
                RuleKind::KPrmStar
            } else {
                RuleKind::PrmStar
            };
            let rule = spec.rule(default, &s)?;
            let mut stream = spec.stream(s.dimension, seed)?;
            Ok(plain(prm_star(&s, &mut stream, n, &rule, options)?.result))
        }
        PlannerKind::Rrt => {
            let s = single(problem)?;
            let params = spec.rrt_params(&s)?;
            Ok(plain(rrt(
                &s,
                &mut SampleStream::uniform(s.dimension, seed),
                n,
                params,
                options,
            )?))
        }
        PlannerKind::RrtStar => {
            let s = single(problem)?;
            let params = spec.rrt_params(&s)?;
            let mut rewire = RewireParams::for_scenario(&s, &params);
            if spec.params.contains_key("radius_rule") || spec.params.contains_key("safety") {
                rewire.rule = spec.rule(rewire.rule.kind, &s)?;
            }
            let mut stream = SampleStream::uniform(s.dimension, seed);
            Ok(plain(rrt_star(&s, &mut stream, n, params, rewire, options)?))
        }
        PlannerKind::Sst => {
            let s = single(problem)?;
            let system = spec.system()?.build();
            let mut params = SstParams::for_scenario(&s);
            if let Some(v) = spec.parsed("delta_bn")? {
                params.delta_bn = v;
            }
            if let Some(v) = spec.parsed("delta_s")? {
                params.delta_s = v;
            }
            if let Some(v) = spec.params.get("shrink") {
                params.shrink = Some(parse_shrink(v)?);
            }
            let mut stream = SampleStream::uniform(s.dimension, seed);
            Ok(plain(sst(&s, system.as_ref(), &mut stream, n, params, options)?))
        }
        PlannerKind::AoRrt => {
            let s = single(problem)?;
            let system = spec.system()?.build();
            let mut params = AoRrtParams::default();
            if let Some(w) = spec.parsed("cost_weight")? {
                params.cost_weight = w;
            }
            let mut stream = SampleStream::uniform(s.dimension, seed);
            Ok(plain(ao_rrt(&s, system.as_ref(), &mut stream, n, params, options)?))
        }
        PlannerKind::AoMeta => {
            let s = single(problem)?;
            let rounds: usize = spec.parsed("rounds")?.unwrap_or(10);
            if rounds == 0 {
                return Err(BenchError::usage("rounds must be positive"));
            }
            let params = AoMetaParams {
                beta: spec.parsed("beta")?.unwrap_or(0.05),
                rounds,
                budget: n.div_ceil(rounds),
            };
            let stream = SampleStream::uniform(s.dimension, seed);
            // checkpoints count cumulative inner iterations
            let out = if spec.params.get("system").map(String::as_str) == Some("geometric") {
                let mut inner = GeometricBoundedRrt::new(&s, stream, spec.rrt_params(&s)?);
                ao_meta(&mut inner, &params, options)?
            } else {
                let system = spec.system()?.build();
                let mut inner = KinoBoundedRrt::new(&s, system.as_ref(), stream)?;
                ao_meta(&mut inner, &params, options)?
            };
            Ok(plain(out.result))
        }
        PlannerKind::DrrtStar => {
            let Problem::Multi(mr) = problem else {
                return Err(BenchError::usage(
                    "drrt-star needs a multi-robot scenario (with a `robots` list)",
                ));
            };
            let n_roadmap: usize = spec.parsed("n_roadmap")?.unwrap_or(500);
            let rule = spec.rule(RuleKind::PrmStar, &mr.workspace)?;
            let mut params = DrrtParams::default();
            if let Some(b) = spec.parsed("goal_bias")? {
                params.goal_bias = b;
            }
            let mut stream = SampleStream::uniform(2, seed);
            let out = drrt_star(mr, &mut stream, n_roadmap, n, &rule, params, options)?;
            Ok(Execution {
                result: out.result,
                robot_paths: out.robot_paths,
            })
        }
    }
}

/// Waypoints of a solution as plain coordinate lists.
pub fn waypoint_lists(path: &Path) -> Vec<Vec<f64>> {
    path.waypoints.iter().map(|c: &Config| c.0.clone()).collect()
}
