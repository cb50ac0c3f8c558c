use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use aoplan::geometric::{connection_radius, k_connection, rgg_connectivity_radius, RadiusRule, RuleKind};
use aoplan::oracles::optimal_cost_2d_boxes;
use aoplan::sampling::measure_dispersion;
use aoplan::{AaBox, Config, PlanOptions, SampleStream};
use aoplan_bench::planners::waypoint_lists;
use aoplan_bench::{
    convergence_report, execute, format_significant, read_rows_file, run_benchmark, write_rows_file, BenchError,
    PlannerSpec, Problem, Result, RunSpec,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "aoplan",
    version,
    about = "Asymptotically optimal sampling-based motion planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write the solution as JSON.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        planner: String,
        /// Samples (PRM*) or iterations (everything else).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: PlannerFlags,
    },
    /// Run seeded trials and write one CSV row per (trial, checkpoint).
    Benchmark {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        planner: String,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        checkpoints: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Wall-clock seconds allowed per trial.
        #[arg(long)]
        time_budget: Option<f64>,
        /// Record wall time in the time_ms column (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        flags: PlannerFlags,
    },
    /// Summarize benchmark rows and draw the cost-versus-n chart.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        optimal: Option<f64>,
        /// SVG chart.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Print a connection radius (or k for k-prm-star).
    Radius {
        /// prm-star, fmt-star, rrt-star, k-prm-star or rgg.
        #[arg(long)]
        rule: String,
        #[arg(long)]
        d: usize,
        /// Free-space measure.
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        safety: Option<f64>,
    },
    /// Measure the dispersion of a sample stream over the unit cube.
    Dispersion {
        /// uniform or halton.
        #[arg(long)]
        sampler: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0 / 256.0)]
        grid: f64,
    },
    /// Exact optimal cost of a 2-D box scenario.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args, Default)]
struct PlannerFlags {
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    goal_bias: Option<f64>,
    #[arg(long)]
    radius_rule: Option<String>,
    #[arg(long)]
    safety: Option<f64>,
    /// PRM* sample source: uniform or halton.
    #[arg(long)]
    sampler: Option<String>,
    /// integrator2d or car (ao-meta also accepts geometric).
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    delta_bn: Option<f64>,
    #[arg(long)]
    delta_s: Option<f64>,
    /// Enable the shrinking SST schedule: XI[:PERIOD], defaults 0.95:5000.
    #[arg(long, num_args = 0..=1, default_missing_value = "")]
    shrink: Option<String>,
    #[arg(long)]
    cost_weight: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    n_roadmap: Option<usize>,
    /// Collision-check resolution (default: 1e-3 of the domain diagonal).
    #[arg(long)]
    resolution: Option<f64>,
}

impl PlannerFlags {
    fn spec(&self, planner: &str) -> Result<PlannerSpec> {
        let mut params = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                params.insert(k.to_string(), v);
            }
        };
        put("eta", self.eta.map(|v| v.to_string()));
        put("goal_bias", self.goal_bias.map(|v| v.to_string()));
        put("radius_rule", self.radius_rule.clone());
        put("safety", self.safety.map(|v| v.to_string()));
        put("sampler", self.sampler.clone());
        put("system", self.system.clone());
        put("delta_bn", self.delta_bn.map(|v| v.to_string()));
        put("delta_s", self.delta_s.map(|v| v.to_string()));
        put("shrink", self.shrink.clone());
        put("cost_weight", self.cost_weight.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("rounds", self.rounds.map(|v| v.to_string()));
        put("n_roadmap", self.n_roadmap.map(|v| v.to_string()));
        PlannerSpec::new(planner, params)
    }

    fn options(&self) -> PlanOptions {
        PlanOptions {
            resolution: self.resolution,
            ..PlanOptions::default()
        }
    }
}

fn read_problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    Problem::from_json(&text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

/// Returns the process exit code on success (1 when no path was found).
fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Plan {
            scenario,
            planner,
            n,
            seed,
            out,
            flags,
        } => {
            let problem = read_problem(&scenario)?;
            let spec = flags.spec(&planner)?;
            let exec = execute(&problem, &spec, n, seed, &flags.options())?;
            let r = &exec.result;
            let mut doc = json!({
                "planner": spec.name(),
                "seed": seed,
                "n": n,
                "cost": r.best_cost,
                "waypoints": r.path.as_ref().map(waypoint_lists).unwrap_or_default(),
                "counters": r.counters,
            });
            if spec.kind.is_kinodynamic() {
                doc["segments"] = serde_json::to_value(&r.controls)?;
            }
            if spec.kind.is_multirobot() {
                doc["robots"] = exec
                    .robot_paths
                    .iter()
                    .map(|p| json!({"cost": p.cost, "waypoints": waypoint_lists(p)}))
                    .collect();
            }
            write_text(&out, &serde_json::to_string_pretty(&doc)?)?;
            match r.best_cost {
                Some(c) => {
                    println!("cost {}", format_significant(c, 9));
                    Ok(0)
                }
                None => {
                    eprintln!("no path found after n = {n}");
                    Ok(1)
                }
            }
        }
        Command::Benchmark {
            scenario,
            planner,
            trials,
            seed,
            checkpoints,
            out,
            workers,
            time_budget,
            timing,
            flags,
        } => {
            let mut spec = RunSpec::from_file(&scenario, flags.spec(&planner)?, trials, seed, checkpoints)?
                .with_workers(workers)
                .with_timing(timing);
            spec.options = flags.options();
            if let Some(t) = time_budget {
                let budget = Duration::try_from_secs_f64(t)
                    .ok()
                    .filter(|d| !d.is_zero())
                    .ok_or_else(|| BenchError::usage("time budget must be a positive number of seconds"))?;
                spec = spec.with_time_budget(budget);
            }
            let rows = run_benchmark(&spec)?;
            write_rows_file(&rows, &out)?;
            let solved = rows.iter().filter(|r| r.success).count();
            eprintln!(
                "{} rows ({solved} with a solution) written to {}",
                rows.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Report {
            input,
            optimal,
            out,
            summary,
        } => {
            let rows = read_rows_file(&input)?;
            let report = convergence_report(&rows, optimal)?;
            write_text(&out, &report.svg)?;
            if let Some(path) = summary {
                write_text(&path, &report.summary_csv()?)?;
            }
            Ok(0)
        }
        Command::Radius { rule, d, mu, n, safety } => {
            if rule == "rgg" {
                let r = rgg_connectivity_radius(d, n)? * safety.unwrap_or(1.0);
                println!("{}", format_significant(r, 12));
                return Ok(0);
            }
            let kind: RuleKind = rule.parse()?;
            if kind == RuleKind::KPrmStar {
                println!("{}", k_connection(d, n)?);
                return Ok(0);
            }
            let mut rule = RadiusRule::new(kind, d, mu);
            if let Some(s) = safety {
                rule = rule.with_safety(s);
            }
            println!("{}", format_significant(connection_radius(&rule, n)?, 12));
            Ok(0)
        }
        Command::Dispersion {
            sampler,
            d,
            n,
            seed,
            grid,
        } => {
            if d == 0 || n == 0 {
                return Err(BenchError::usage("d and n must be positive"));
            }
            let cells = (1.0 / grid).ceil().powi(d as i32);
            if cells.is_nan() || cells > 1e8 {
                return Err(BenchError::usage(format!(
                    "grid {grid} in {d} dimensions needs {cells:.3e} points; use a coarser --grid"
                )));
            }
            let mut stream = match sampler.as_str() {
                "uniform" => SampleStream::uniform(d, seed),
                "halton" => SampleStream::halton(d),
                other => {
                    return Err(BenchError::usage(format!(
                        "unknown sampler `{other}` (uniform or halton)"
                    )))
                }
            };
            let domain = AaBox::unit(d);
            let samples: Vec<Config> = (0..n).map(|_| stream.next_sample(&domain)).collect();
            println!("{}", measure_dispersion(&samples, &domain, grid)?.to_csv_line());
            Ok(0)
        }
        Command::Oracle { scenario } => {
            let Problem::Single(s) = read_problem(&scenario)? else {
                return Err(BenchError::usage("the oracle takes a single-robot scenario"));
            };
            match optimal_cost_2d_boxes(&s)? {
                Some(c) => {
                    println!("{}", format_significant(c, 9));
                    Ok(0)
                }
                None => {
                    eprintln!("goal unreachable");
                    Ok(1)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
