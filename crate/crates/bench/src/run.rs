use std::io::{Read, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use aoplan::{derive_seed, Checkpoint, PlanOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::planners::{execute, PlannerSpec, Problem};

pub const CSV_COLUMNS: [&str; 10] = [
    "scenario",
    "planner",
    "seed",
    "checkpoint_n",
    "best_cost",
    "success",
    "time_ms",
    "nodes",
    "edges",
    "collision_checks",
];

/// One observation: trial `seed` of `planner` at checkpoint `checkpoint_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub checkpoint_n: usize,
    pub best_cost: Option<f64>,
    pub success: bool,
    pub time_ms: Option<f64>,
    pub nodes: u64,
    pub edges: u64,
    pub collision_checks: u64,
}

#[derive(Clone, Debug)]
pub struct RunSpec {
    /// Label written to the `scenario` column (the file stem by default).
    pub scenario_name: String,
    pub problem: Problem,
    pub planner: PlannerSpec,
    pub trials: usize,
    pub base_seed: u64,
    pub checkpoints: Vec<usize>,
    /// Wall-clock limit per trial.
    pub time_budget: Option<Duration>,
    /// Worker threads; results do not depend on it.
    pub workers: usize,
    /// Fill the `time_ms` column. Off by default because wall time would
    /// break byte-identical reruns.
    pub timing: bool,
    pub options: PlanOptions,
}

impl RunSpec {
    pub fn new(
        scenario_name: impl Into<String>,
        problem: Problem,
        planner: PlannerSpec,
        trials: usize,
        base_seed: u64,
        checkpoints: Vec<usize>,
    ) -> Result<Self> {
        let spec = RunSpec {
            scenario_name: scenario_name.into(),
            problem,
            planner,
            trials,
            base_seed,
            checkpoints,
            time_budget: None,
            workers: 1,
            timing: false,
            options: PlanOptions::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Loads the scenario document at `path`; the file stem names the scenario.
    pub fn from_file(
        path: &Path,
        planner: PlannerSpec,
        trials: usize,
        base_seed: u64,
        checkpoints: Vec<usize>,
    ) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let name = path
            .file_stem()
            .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
        RunSpec::new(
            name,
            Problem::from_json(&text)?,
            planner,
            trials,
            base_seed,
            checkpoints,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BenchError::usage("trials must be at least 1"));
        }
        if self.checkpoints.is_empty() {
            return Err(BenchError::usage("at least one checkpoint is required"));
        }
        if self.checkpoints[0] == 0 || self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BenchError::usage("checkpoints must be positive and strictly ascending"));
        }
        if self.planner.kind.is_multirobot() != matches!(self.problem, Problem::Multi(_)) {
            return Err(BenchError::usage(format!(
                "planner {} does not match the scenario kind",
                self.planner.name()
            )));
        }
        Ok(())
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }

    pub fn with_timing(mut self, timing: bool) -> Self {
        self.timing = timing;
        self
    }

    pub fn max_n(&self) -> usize {
        *self.checkpoints.last().expect("validated")
    }

    fn row(&self, seed: u64, n: usize, cp: Option<&Checkpoint>) -> ResultRow {
        let cost = cp.and_then(|c| c.best_cost);
        ResultRow {
            scenario: self.scenario_name.clone(),
            planner: self.planner.name().to_string(),
            seed,
            checkpoint_n: n,
            best_cost: cost,
            success: cost.is_some(),
            time_ms: cp.filter(|_| self.timing).map(|c| c.elapsed_ms),
            nodes: cp.map_or(0, |c| c.nodes),
            edges: cp.map_or(0, |c| c.edges),
            collision_checks: cp.map_or(0, |c| c.collision_checks),
        }
    }

    fn run_trial(&self, trial: usize) -> Result<Vec<ResultRow>> {
        let seed = derive_seed(self.base_seed, trial as u64);
        let deadline = self.time_budget.map(|b| Instant::now() + b);
        let mut options = self.options.clone();
        options.deadline = deadline;
        if self.planner.kind.is_batch() {
            let mut rows = Vec::with_capacity(self.checkpoints.len());
            for &n in &self.checkpoints {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    rows.push(self.row(seed, n, None));
                    continue;
                }
                let out = execute(&self.problem, &self.planner, n, seed, &options)?;
                rows.push(self.row(seed, n, out.result.checkpoints.last()));
            }
            Ok(rows)
        } else {
            options.checkpoints = self.checkpoints.clone();
            let out = execute(&self.problem, &self.planner, self.max_n(), seed, &options)?;
            let cps = &out.result.checkpoints;
            Ok(self
                .checkpoints
                .iter()
                .map(|&n| self.row(seed, n, cps.iter().find(|c| c.n == n)))
                .collect())
        }
    }
}

/// Runs every trial and returns rows in (trial, checkpoint) order.
///
/// Trials are independent and run on a pool of `spec.workers` threads; the
/// output is the same for any pool size.
pub fn run_benchmark(spec: &RunSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| BenchError::usage(format!("cannot start worker pool: {e}")))?;
    let per_trial: Vec<Result<Vec<ResultRow>>> =
        pool.install(|| (0..spec.trials).into_par_iter().map(|t| spec.run_trial(t)).collect());
    let mut rows = Vec::with_capacity(spec.trials * spec.checkpoints.len());
    for trial in per_trial {
        rows.extend(trial?);
    }
    Ok(rows)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| BenchError::Csv(e.into()))?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(BenchError::Core(aoplan::Error::Parse(format!(
            "unexpected CSV header `{}` (expected `{}`)",
            header.join(","),
            CSV_COLUMNS.join(",")
        ))));
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        let row: ResultRow = rec?;
        if row.success != row.best_cost.is_some() {
            return Err(BenchError::Core(aoplan::Error::Validation {
                field: "best_cost".into(),
                message: format!(
                    "seed {} at n = {}: best_cost must be empty exactly when success is false",
                    row.seed, row.checkpoint_n
                ),
            }));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_rows_file(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_rows(rows, std::io::BufWriter::new(file)).map_err(|e| match e {
        BenchError::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => match c.into_kind() {
            csv::ErrorKind::Io(io) => BenchError::io(path, io),
            _ => unreachable!(),
        },
        other => other,
    })
}

pub fn read_rows_file(path: &Path) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    read_rows(std::io::BufReader::new(file))
}
