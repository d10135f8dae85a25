//! Command-line driver: configured multi-seed solves, predefined benchmark
//! suites, the self-check battery, and reference-solution generation.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on configuration or
//! usage errors.

use clap::{Parser, Subcommand, ValueEnum};
use purecd::harness::{self, BenchRun, BenchSuite, ExperimentConfig};
use purecd::problems::ProblemSpec;
use purecd::solvers::CheckpointPlan;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "purecd", version, about = "Randomized primal-dual coordinate solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckpointArg {
    Geometric,
    Linear,
}

impl From<CheckpointArg> for CheckpointPlan {
    fn from(v: CheckpointArg) -> Self {
        match v {
            CheckpointArg::Geometric => CheckpointPlan::Geometric,
            CheckpointArg::Linear => CheckpointPlan::Linear,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config over its seeds.
    Solve {
        /// Path to the experiment config.
        config: PathBuf,
        /// Seed range `a..b` (half-open) or a single seed, overriding the
        /// config's seed list.
        #[arg(long)]
        seed_range: Option<String>,
        /// Directory for per-seed CSV traces and the JSON summary.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Checkpoint spacing override.
        #[arg(long)]
        checkpoints: Option<CheckpointArg>,
        /// Print the fully resolved config (all defaults explicit) and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Run a comparison suite (a JSON suite file, or one of the built-in
    /// names qp, lasso, hinge, scsc) and print cost-to-accuracy tables.
    Bench {
        /// Suite file path or built-in suite name.
        suite: String,
        #[arg(long)]
        seed_range: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        checkpoints: Option<CheckpointArg>,
    },
    /// Run the quick self-check battery.
    Validate,
    /// Compute a reference solution for a problem spec file.
    Oracle {
        /// Path to a JSON problem spec.
        problem: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn parse_seed_range(s: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = s.split_once("..") {
        let lo: u64 = a.trim().parse().map_err(|_| format!("bad seed range {s:?}"))?;
        let hi: u64 = b.trim().parse().map_err(|_| format!("bad seed range {s:?}"))?;
        if lo >= hi {
            return Err(format!("empty seed range {s:?}"));
        }
        Ok((lo..hi).collect())
    } else {
        let one: u64 = s.trim().parse().map_err(|_| format!("bad seed {s:?}"))?;
        Ok(vec![one])
    }
}

fn apply_overrides(
    cfg: &mut ExperimentConfig,
    seed_range: &Option<String>,
    checkpoints: &Option<CheckpointArg>,
) -> Result<(), String> {
    if let Some(sr) = seed_range {
        cfg.seeds = Some(parse_seed_range(sr)?);
    }
    if let Some(cp) = checkpoints {
        cfg.checkpoints = Some((*cp).into());
    }
    Ok(())
}

/// Result classification: Ok(true) all checks passed, Ok(false) a check
/// failed, Err is a configuration problem.
fn dispatch(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Solve { config, seed_range, out_dir, checkpoints, print_config } => {
            let base = config.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            let mut cfg = ExperimentConfig::from_file(&config).map_err(|e| e.to_string())?;
            apply_overrides(&mut cfg, &seed_range, &checkpoints)?;
            if print_config {
                // Make every default explicit before printing.
                cfg.seeds = Some(cfg.seed_list());
                cfg.checkpoints = Some(cfg.checkpoints.unwrap_or(CheckpointPlan::Geometric));
                println!("{}", serde_json::to_string_pretty(&cfg).map_err(|e| e.to_string())?);
                return Ok(true);
            }
            let res = harness::run_experiment(&cfg, &base).map_err(|e| e.to_string())?;
            if let Some(dir) = out_dir {
                harness::write_outputs(&cfg, &res, &dir).map_err(|e| e.to_string())?;
            }
            let last = res.mean_records.last().expect("at least the initial record");
            println!(
                "k={} cost={} dist_x_sq={:?} feas={:?} gap={:?}",
                last.k, last.cost, last.dist_x_sq, last.feas_dist, last.gap_restricted
            );
            if let (Some(eom), Some(moe)) =
                (res.gap_expectation_of_max, res.gap_max_of_expectation)
            {
                println!("gap expectation_of_max={eom:.6e} max_of_expectation={moe:.6e}");
            }
            match harness::check_acceptance(&cfg, &res) {
                Some((ok, detail)) => {
                    println!("acceptance: {} ({detail})", if ok { "PASS" } else { "FAIL" });
                    Ok(ok)
                }
                None => Ok(true),
            }
        }
        Command::Bench { suite, seed_range, out_dir, checkpoints } => {
            let path = PathBuf::from(&suite);
            let (mut bench, base) = if path.is_file() {
                let base =
                    path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
                (harness::BenchSuite::from_file(&path).map_err(|e| e.to_string())?, base)
            } else {
                (builtin_suite(&suite)?, PathBuf::from("."))
            };
            for run in &mut bench.runs {
                apply_overrides(&mut run.config, &seed_range, &checkpoints)?;
            }
            let tables = harness::run_bench_suite(&bench, &base, out_dir.as_deref())
                .map_err(|e| e.to_string())?;
            for table in &tables {
                println!("{}", table.to_text());
                if let Some(dir) = &out_dir {
                    std::fs::write(
                        dir.join(format!("cost_to_eps_{}.csv", table.metric.label())),
                        table.to_csv(),
                    )
                    .map_err(|e| e.to_string())?;
                }
            }
            Ok(!tables.is_empty())
        }
        Command::Validate => {
            let mut ok = true;
            for (name, passed, detail) in harness::validate_battery() {
                println!("{}: {name} ({detail})", if passed { "PASS" } else { "FAIL" });
                ok &= passed;
            }
            Ok(ok)
        }
        Command::Oracle { problem, out_dir } => {
            let base = problem.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
            let body = std::fs::read_to_string(&problem).map_err(|e| e.to_string())?;
            let spec: ProblemSpec = serde_json::from_str(&body).map_err(|e| e.to_string())?;
            let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let out = dir.join(format!("reference_{}.json", spec.hash()));
            harness::compute_reference(&spec, &base, &out).map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
            Ok(true)
        }
    }
}

/// Predefined benchmark suites: coordinate solver variants against the full-sweep
/// PDHG baseline on each catalog family.
fn builtin_suite(suite: &str) -> Result<BenchSuite, String> {
    use purecd::schedules::{Regime, DEFAULT_GAMMA};
    use purecd::solvers::{Method, OutputRule};
    let mk = |problem: ProblemSpec, regime, method, output_rule, k_max| ExperimentConfig {
        problem,
        regime,
        method,
        output_rule,
        k_max,
        gamma: DEFAULT_GAMMA,
        seeds: Some((0..10).collect()),
        checkpoints: None,
        z_radius: None,
        reference_file: None,
        acceptance: None,
    };
    let run = |name: &str, config: ExperimentConfig| BenchRun { name: name.into(), config };
    let qp = ProblemSpec::ConstrainedQp { n: 20, d: 40, seed: 0, density: 1.0 };
    let lasso = ProblemSpec::Lasso { n: 30, d: 60, seed: 0, lambda: 0.1, density: 0.2 };
    let hinge = ProblemSpec::ErmHinge { n: 50, d: 30, seed: 0, reg: 0.0 };
    let scsc =
        ProblemSpec::ScscQuadratic { n: 50, d: 50, seed: 0, density: 0.1, mu_g: 1.0, mu_h: 1.0 };
    let (epsilons, runs) = match suite {
        "qp" => (
            vec![1e-1, 1e-2, 1e-3],
            vec![
                run(
                    "purecd_importance",
                    mk(
                        qp.clone(),
                        Regime::DenseImportance,
                        Method::PurecdDense,
                        OutputRule::Ergodic,
                        20_000,
                    ),
                ),
                run("pdhg", mk(qp, Regime::PdhgBaseline, Method::Pdhg, OutputRule::Ergodic, 20_000)),
            ],
        ),
        "lasso" => (
            vec![1e-2, 1e-4, 1e-6],
            vec![
                run(
                    "purecd_csc",
                    mk(
                        lasso.clone(),
                        Regime::Csc,
                        Method::PurecdSparse,
                        OutputRule::LastIterate,
                        50_000,
                    ),
                ),
                run(
                    "pdhg",
                    mk(lasso, Regime::PdhgBaseline, Method::Pdhg, OutputRule::LastIterate, 5_000),
                ),
            ],
        ),
        "hinge" => (
            vec![1e-1, 1e-2],
            vec![
                run(
                    "purecd_sparse",
                    mk(
                        hinge.clone(),
                        Regime::SparseConvex,
                        Method::PurecdSparse,
                        OutputRule::LastIterate,
                        50_000,
                    ),
                ),
                run(
                    "pdhg",
                    mk(hinge, Regime::PdhgBaseline, Method::Pdhg, OutputRule::LastIterate, 5_000),
                ),
            ],
        ),
        "scsc" => (
            vec![1e-4, 1e-8],
            vec![
                run(
                    "purecd_scsc",
                    mk(
                        scsc.clone(),
                        Regime::Scsc,
                        Method::PurecdSparse,
                        OutputRule::LastIterate,
                        50_000,
                    ),
                ),
                run(
                    "pdhg",
                    mk(scsc, Regime::PdhgBaseline, Method::Pdhg, OutputRule::LastIterate, 5_000),
                ),
            ],
        ),
        other => return Err(format!("unknown suite {other:?}; try qp, lasso, hinge, scsc")),
    };
    Ok(BenchSuite { name: Some(suite.to_string()), epsilons, metrics: None, runs })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_range_parsing() {
        assert_eq!(parse_seed_range("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seed_range("7").unwrap(), vec![7]);
        assert!(parse_seed_range("5..5").is_err());
        assert!(parse_seed_range("x..y").is_err());
    }

    #[test]
    fn print_config_resolves_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("exp.json");
        std::fs::write(
            &cfg_path,
            r#"{"problem": {"generator": "constrained_qp", "n": 4, "d": 8, "seed": 0,
                "density": 1.0}, "regime": "dense_importance", "method": "purecd_dense",
                "output_rule": "ergodic"}"#,
        )
        .unwrap();
        let cli = Cli {
            command: Command::Solve {
                config: cfg_path,
                seed_range: Some("0..2".into()),
                out_dir: None,
                checkpoints: None,
                print_config: true,
            },
        };
        assert!(dispatch(cli).unwrap());
    }

    #[test]
    fn bench_accepts_suite_file() {
        let dir = tempfile::tempdir().unwrap();
        let suite_path = dir.path().join("suite.json");
        let problem = r#"{"generator": "constrained_qp", "n": 4, "d": 8, "seed": 0, "density": 1.0}"#;
        let cfg = format!(
            r#"{{"problem": {problem}, "regime": "dense_importance", "method": "purecd_dense",
                "output_rule": "ergodic", "k_max": 200, "seeds": [0, 1]}}"#
        );
        std::fs::write(
            &suite_path,
            format!(
                r#"{{"epsilons": [100.0, 1e-30], "metrics": ["feas_dist"],
                    "runs": [{{"name": "a", "config": {cfg}}}, {{"name": "b", "config": {cfg}}}]}}"#
            ),
        )
        .unwrap();
        let out = dir.path().join("out");
        let cli = Cli {
            command: Command::Bench {
                suite: suite_path.to_string_lossy().into_owned(),
                seed_range: None,
                out_dir: Some(out.clone()),
                checkpoints: None,
            },
        };
        assert!(dispatch(cli).unwrap());
        let csv = std::fs::read_to_string(out.join("cost_to_eps_feas_dist.csv")).unwrap();
        assert!(csv.contains("not reached"));
        assert!(out.join("a/summary.json").is_file());
    }

    #[test]
    fn suites_are_wellformed() {
        for s in ["qp", "lasso", "hinge", "scsc"] {
            let suite = builtin_suite(s).unwrap();
            assert!(suite.runs.len() >= 2);
            assert!(!suite.epsilons.is_empty());
        }
        assert!(builtin_suite("nope").is_err());
    }
}
