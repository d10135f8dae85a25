//! Experiment orchestration: JSON-configured multi-seed runs executed in
//! parallel, per-seed CSV traces, aggregated summaries, and the quick
//! self-check battery behind the `validate` command.

use crate::error::{Error, Result};
use crate::metrics::{self, MetricName, MetricsRecord};
use crate::oracle;
use crate::problems::{CompactSet, ProblemSpec, Reference, SaddleProblem};
use crate::schedules::{lambda_sequence, Regime, StepSchedule, DEFAULT_GAMMA};
use crate::solvers::{self, CheckpointPlan, Method, OutputRule, RunConfig, Trace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable controlling the worker-thread count.
pub const WORKERS_ENV: &str = "PURECD_WORKERS";

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

fn default_k_max() -> usize {
    10_000
}

/// A complete experiment description, loadable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub regime: Regime,
    pub method: Method,
    pub output_rule: OutputRule,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Explicit seed list; defaults to 0..=19.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub checkpoints: Option<CheckpointPlan>,
    /// Half-width override for the compact gap box; when absent a default
    /// box around the start and reference points is used.
    #[serde(default)]
    pub z_radius: Option<f64>,
    /// Optional externally computed reference solution.
    #[serde(default)]
    pub reference_file: Option<PathBuf>,
    /// Optional rate-acceptance check evaluated on the mean curve.
    #[serde(default)]
    pub acceptance: Option<AcceptanceSpec>,
}

/// A pass/fail condition on the across-seed mean curve of one metric:
/// either a log-log slope window or a per-iteration linear contraction
/// ceiling, fitted over `k_range`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceSpec {
    pub metric: MetricName,
    #[serde(default)]
    pub expected_slope: Option<f64>,
    #[serde(default)]
    pub expected_linear_factor: Option<f64>,
    pub tolerance: f64,
    pub k_range: (usize, usize),
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        serde_json::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| (0..20).collect())
    }
}

/// Builds the schedule a regime prescribes for the given problem.
pub fn build_schedule(
    regime: Regime,
    problem: &SaddleProblem,
    gamma: f64,
) -> Result<StepSchedule> {
    match regime {
        Regime::DenseImportance => StepSchedule::dense_importance(&problem.a, gamma),
        Regime::LambdaRestart => StepSchedule::lambda_restart(&problem.a, gamma),
        Regime::SparseConvex => StepSchedule::sparse_convex(&problem.a),
        Regime::Scsc => {
            if problem.mu_g <= 0.0 || problem.mu_h <= 0.0 {
                return Err(Error::ScheduleRequirement {
                    what: "strong convexity on both sides".into(),
                });
            }
            StepSchedule::scsc(&problem.a, problem.mu_g, problem.mu_h)
        }
        Regime::Scc => {
            if problem.mu_g <= 0.0 {
                return Err(Error::ScheduleRequirement { what: "strongly convex g".into() });
            }
            StepSchedule::scc(&problem.a, problem.mu_g)
        }
        Regime::Csc => {
            if problem.mu_h <= 0.0 {
                return Err(Error::ScheduleRequirement { what: "strongly convex h".into() });
            }
            StepSchedule::csc(&problem.a, problem.mu_h)
        }
        Regime::PdhgBaseline => StepSchedule::pdhg_baseline(&problem.a, gamma),
    }
}

/// Runs all seeds of an experiment in parallel. Determinism is per seed,
/// so the thread count does not affect results.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentResult> {
    let mut problem = config.problem.build(base_dir)?;
    if let Some(ref_path) = &config.reference_file {
        let hash = config.problem.hash();
        let r = oracle::ReferenceFile::load_checked(&resolve(base_dir, ref_path), &hash)?;
        problem.reference = Some(Reference {
            x_star: r.x_star,
            y_star: r.y_star,
            f_star: r.f_star,
        });
    }
    let schedule = build_schedule(config.regime, &problem, config.gamma)?;
    let z = gap_box(&problem, config.z_radius)?;
    let plan = config.checkpoints.unwrap_or(CheckpointPlan::Geometric);
    let seeds = config.seed_list();

    let traces: Result<Vec<Trace>> = with_pool(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let rc = RunConfig {
                    method: config.method,
                    k_max: config.k_max,
                    seed,
                    checkpoints: plan,
                    output_rule: config.output_rule,
                };
                solvers::run(&problem, &schedule, &rc, z.as_ref())
            })
            .collect()
    });
    let traces = traces?;
    let mean_records = mean_curves(&traces);
    // Both aggregation orders of the randomized gap are reported for the
    // sparse convex regime: mean-of-gaps and gap-of-means (Jensen:
    // the latter is ≤ the former).
    let (gap_expectation_of_max, gap_max_of_expectation) =
        if config.regime == Regime::SparseConvex {
            match &z {
                Some(zz) => {
                    let outputs: Vec<(Vec<f64>, Vec<f64>)> =
                        traces.iter().map(|t| (t.x_out.clone(), t.y_out.clone())).collect();
                    (
                        metrics::mean_gap(&problem, zz, &outputs).ok(),
                        metrics::max_of_expectation(&problem, zz, &outputs).ok(),
                    )
                }
                None => (None, None),
            }
        } else {
            (None, None)
        };
    Ok(ExperimentResult {
        problem,
        z,
        traces,
        mean_records,
        gap_expectation_of_max,
        gap_max_of_expectation,
    })
}

/// Evaluates the config's acceptance condition against the mean curve.
/// Returns None when the config carries no acceptance block.
pub fn check_acceptance(
    config: &ExperimentConfig,
    result: &ExperimentResult,
) -> Option<(bool, String)> {
    let spec = config.acceptance.as_ref()?;
    let (k_lo, k_hi) = spec.k_range;
    let points: Vec<(usize, f64)> = result
        .mean_records
        .iter()
        .filter_map(|r| spec.metric.get(r).map(|v| (r.k, v)))
        .collect();
    let usable = points
        .iter()
        .filter(|(k, v)| *k >= k_lo.max(1) && *k <= k_hi && *v > 0.0)
        .count();
    if usable < 2 {
        return Some((
            false,
            format!("metric {} has {usable} usable points in k_range", spec.metric.label()),
        ));
    }
    if let Some(expected) = spec.expected_slope {
        let slope = metrics::fit_rate(&points, k_lo.max(1), k_hi);
        let ok = (slope - expected).abs() <= spec.tolerance;
        return Some((ok, format!("fitted slope {slope:.4}, expected {expected} ± {}", spec.tolerance)));
    }
    if let Some(ceiling) = spec.expected_linear_factor {
        let (ks, logs): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|(k, v)| *k >= k_lo.max(1) && *k <= k_hi && *v > 0.0)
            .map(|&(k, v)| (k as f64, v.ln()))
            .unzip();
        let factor = metrics::fit_slope(&ks, &logs).exp();
        let ok = factor <= ceiling + spec.tolerance;
        return Some((ok, format!("fitted per-iteration factor {factor:.8}, ceiling {ceiling}")));
    }
    Some((false, "acceptance block lacks expected_slope and expected_linear_factor".into()))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// The gap box: explicit radius when configured, otherwise the default
/// construction around the start and reference points (when a reference is
/// known; a gap box is meaningless without one for unbounded problems).
fn gap_box(problem: &SaddleProblem, z_radius: Option<f64>) -> Result<Option<CompactSet>> {
    match z_radius {
        Some(r) => Ok(Some(CompactSet::centered_box(problem.d(), problem.n(), r))),
        None => match &problem.reference {
            Some(r) => Ok(Some(CompactSet::default_for(problem, &r.x_star, &r.y_star)?)),
            None => Ok(None),
        },
    }
}

/// Aggregated outcome of a multi-seed experiment.
#[derive(Debug)]
pub struct ExperimentResult {
    pub problem: SaddleProblem,
    pub z: Option<CompactSet>,
    pub traces: Vec<Trace>,
    /// Per-checkpoint across-seed means (None where any seed lacks the
    /// metric).
    pub mean_records: Vec<MetricsRecord>,
    /// Mean over seeds of the per-seed restricted gap at the output pair
    /// (sparse convex runs with a gap box only).
    pub gap_expectation_of_max: Option<f64>,
    /// Restricted gap of the seed-averaged output (same runs).
    pub gap_max_of_expectation: Option<f64>,
}

/// Across-seed mean of every metric at every checkpoint. All traces share
/// the same checkpoint grid, so records align by position.
pub fn mean_curves(traces: &[Trace]) -> Vec<MetricsRecord> {
    if traces.is_empty() {
        return Vec::new();
    }
    let m = traces[0].records.len();
    let s = traces.len() as f64;
    (0..m)
        .map(|r| {
            let mean_of = |f: fn(&MetricsRecord) -> Option<f64>| -> Option<f64> {
                let mut acc = 0.0;
                for t in traces {
                    acc += f(&t.records[r])?;
                }
                Some(acc / s)
            };
            MetricsRecord {
                k: traces[0].records[r].k,
                cost: (traces.iter().map(|t| t.records[r].cost).sum::<u64>() as f64 / s) as u64,
                gap_restricted: mean_of(|x| x.gap_restricted),
                f_subopt: mean_of(|x| x.f_subopt),
                g_gap_abs: mean_of(|x| x.g_gap_abs),
                feas_dist: mean_of(|x| x.feas_dist),
                dist_x_sq: mean_of(|x| x.dist_x_sq),
                dist_y_sq: mean_of(|x| x.dist_y_sq),
            }
        })
        .collect()
}

/// Runs `f` on a rayon pool sized by PURECD_WORKERS when set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(nw) if nw > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(nw)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    problem_hash: String,
    seeds: Vec<u64>,
    mean_records: &'a [MetricsRecord],
    /// Log-log slope of each available metric's mean curve over the later
    /// checkpoints (k ≥ k_max/100).
    fitted_slopes: BTreeMap<&'static str, f64>,
    /// Theoretical gap bound 6·n·max‖A_i‖·D_Z / (Λ_K γ(1−γ)) at each
    /// checkpoint, for restart-weighted runs with a gap box.
    bound_curve: Option<Vec<(usize, f64)>>,
    gap_expectation_of_max: Option<f64>,
    gap_max_of_expectation: Option<f64>,
}

/// Log-log slopes of every metric with at least two positive checkpoints
/// in [k_max/100, k_max].
fn fitted_slopes(records: &[MetricsRecord], k_max: usize) -> BTreeMap<&'static str, f64> {
    let k_lo = (k_max / 100).max(1);
    let mut out = BTreeMap::new();
    for m in MetricName::ALL {
        let points: Vec<(usize, f64)> =
            records.iter().filter_map(|r| m.get(r).map(|v| (r.k, v))).collect();
        if points.iter().filter(|(k, v)| *k >= k_lo && *v > 0.0).count() >= 2 {
            out.insert(m.label(), metrics::fit_rate(&points, k_lo, k_max));
        }
    }
    out
}

/// The restart-weighted ergodic gap bound evaluated on the checkpoint grid.
fn lambda_bound_curve(
    problem: &SaddleProblem,
    z: &CompactSet,
    gamma: f64,
    records: &[MetricsRecord],
) -> Vec<(usize, f64)> {
    let n = problem.n();
    let d_z = z.d_z(&vec![0.0; problem.d()], &vec![0.0; n]);
    let k_max = records.iter().map(|r| r.k).max().unwrap_or(0);
    let lambdas = lambda_sequence(n, k_max);
    let mut prefix = vec![0.0; k_max + 1];
    for k in 0..k_max {
        prefix[k + 1] = prefix[k] + lambdas[k];
    }
    let scale = 6.0 * n as f64 * problem.a.max_row_norm() * d_z / (gamma * (1.0 - gamma));
    records.iter().filter(|r| r.k >= 1).map(|r| (r.k, scale / prefix[r.k])).collect()
}

/// Writes per-seed CSV traces and a JSON summary into `out_dir`.
pub fn write_outputs(
    config: &ExperimentConfig,
    result: &ExperimentResult,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for trace in &result.traces {
        let mut body = String::from(MetricsRecord::CSV_HEADER);
        body.push('\n');
        for rec in &trace.records {
            body.push_str(&rec.to_csv_row());
            body.push('\n');
        }
        std::fs::write(out_dir.join(format!("seed_{}.csv", trace.seed)), body)?;
    }
    let mut mean_body = String::from(MetricsRecord::CSV_HEADER);
    mean_body.push('\n');
    for rec in &result.mean_records {
        mean_body.push_str(&rec.to_csv_row());
        mean_body.push('\n');
    }
    std::fs::write(out_dir.join("mean.csv"), mean_body)?;
    let bound_curve = match (&result.z, config.regime) {
        (Some(z), Regime::LambdaRestart) => {
            Some(lambda_bound_curve(&result.problem, z, config.gamma, &result.mean_records))
        }
        _ => None,
    };
    let summary = Summary {
        config,
        problem_hash: config.problem.hash(),
        seeds: config.seed_list(),
        mean_records: &result.mean_records,
        fitted_slopes: fitted_slopes(&result.mean_records, config.k_max),
        bound_curve,
        gap_expectation_of_max: result.gap_expectation_of_max,
        gap_max_of_expectation: result.gap_max_of_expectation,
    };
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

/// A comparison suite: several named method configs on the same problem
/// set, scored by touched-nnz cost to reach each target accuracy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    #[serde(default)]
    pub name: Option<String>,
    /// Target accuracies, one table row each.
    pub epsilons: Vec<f64>,
    /// Metrics to tabulate; defaults to every metric available in all runs.
    #[serde(default)]
    pub metrics: Option<Vec<MetricName>>,
    pub runs: Vec<BenchRun>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRun {
    pub name: String,
    pub config: ExperimentConfig,
}

impl BenchSuite {
    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        serde_json::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Cost-to-ε table for one metric: `cells[row][col]` is the cumulative
/// touched-nnz cost at the first checkpoint where the mean curve of
/// `columns[col]` drops to `epsilons[row]`, or None when never reached.
#[derive(Debug, Clone, Serialize)]
pub struct BenchTable {
    pub metric: MetricName,
    pub epsilons: Vec<f64>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<u64>>>,
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (eps, row) in self.epsilons.iter().zip(&self.cells) {
            out.push_str(&format!("{eps:.16e}"));
            for cell in row {
                out.push(',');
                match cell {
                    Some(c) => out.push_str(&c.to_string()),
                    None => out.push_str("not reached"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut cols: Vec<Vec<String>> = Vec::new();
        let mut head = vec![format!("eps ({})", self.metric.label())];
        head.extend(self.epsilons.iter().map(|e| format!("{e:.3e}")));
        cols.push(head);
        for (j, name) in self.columns.iter().enumerate() {
            let mut col = vec![name.clone()];
            for row in &self.cells {
                col.push(match row[j] {
                    Some(c) => c.to_string(),
                    None => "not reached".to_string(),
                });
            }
            cols.push(col);
        }
        let widths: Vec<usize> =
            cols.iter().map(|c| c.iter().map(String::len).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for r in 0..=self.epsilons.len() {
            for (c, col) in cols.iter().enumerate() {
                if c > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{:>w$}", col[r], w = widths[c]));
            }
            out.push('\n');
        }
        out
    }
}

fn cost_to_eps(records: &[MetricsRecord], metric: MetricName, eps: f64) -> Option<u64> {
    records.iter().find(|r| metric.get(r).is_some_and(|v| v <= eps)).map(|r| r.cost)
}

/// Runs every member config of a suite and builds one cost-to-ε table per
/// tabulated metric. When `out_dir` is given, each run's traces land in a
/// subdirectory named after it.
pub fn run_bench_suite(
    suite: &BenchSuite,
    base_dir: &Path,
    out_dir: Option<&Path>,
) -> Result<Vec<BenchTable>> {
    if suite.runs.len() < 2 {
        return Err(Error::Config("a bench suite needs at least two method configs".into()));
    }
    if suite.epsilons.is_empty() {
        return Err(Error::Config("a bench suite needs at least one epsilon".into()));
    }
    let mut results = Vec::new();
    for run in &suite.runs {
        let res = run_experiment(&run.config, base_dir)
            .map_err(|e| Error::Config(format!("{}: {e}", run.name)))?;
        if let Some(dir) = out_dir {
            write_outputs(&run.config, &res, &dir.join(&run.name))?;
        }
        results.push(res);
    }
    let metrics_list: Vec<MetricName> = match &suite.metrics {
        Some(m) => m.clone(),
        None => MetricName::ALL
            .into_iter()
            .filter(|m| {
                results.iter().all(|r| r.mean_records.iter().any(|rec| m.get(rec).is_some()))
            })
            .collect(),
    };
    let columns: Vec<String> = suite.runs.iter().map(|r| r.name.clone()).collect();
    Ok(metrics_list
        .into_iter()
        .map(|metric| BenchTable {
            metric,
            epsilons: suite.epsilons.clone(),
            columns: columns.clone(),
            cells: suite
                .epsilons
                .iter()
                .map(|&eps| {
                    results.iter().map(|r| cost_to_eps(&r.mean_records, metric, eps)).collect()
                })
                .collect(),
        })
        .collect())
}

/// Computes (or polishes) a reference solution for a problem spec and
/// writes it next to the problem hash.
pub fn compute_reference(spec: &ProblemSpec, base_dir: &Path, out: &Path) -> Result<()> {
    let problem = spec.build(base_dir)?;
    let hash = spec.hash();
    let file = match &problem.reference {
        Some(r) => oracle::ReferenceFile {
            problem_hash: hash,
            x_star: r.x_star.clone(),
            y_star: r.y_star.clone(),
            f_star: r.f_star,
            method: "kkt".into(),
            achieved_gap: 0.0,
        },
        None => {
            let (x, y, res) = oracle::solve_reference_pdhg(&problem, 0.9, 5_000_000, 1e-12)?;
            let f_star = metrics::primal_value(&problem, &x);
            oracle::ReferenceFile {
                problem_hash: hash,
                x_star: x,
                y_star: y,
                f_star,
                method: "pdhg_polish".into(),
                achieved_gap: res,
            }
        }
    };
    file.save(out)
}

/// One named self-check: (name, passed, detail).
pub type CheckOutcome = (String, bool, String);

/// Quick self-check battery behind `validate`: schedule invariants,
/// prox/enumeration identities, and a short dense/sparse agreement run.
pub fn validate_battery() -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut check = |name: &str, r: std::result::Result<(), String>| match r {
        Ok(()) => out.push((name.to_string(), true, "ok".to_string())),
        Err(d) => out.push((name.to_string(), false, d)),
    };

    check("schedule_invariants", (|| {
        let p = crate::problems::gen_constrained_qp(8, 12, 0, 0.8).map_err(|e| e.to_string())?;
        let s = StepSchedule::dense_importance(&p.a, DEFAULT_GAMMA).map_err(|e| e.to_string())?;
        for i in 0..8 {
            let lhs = s.sigma(i) * s.tau(0) / s.p[i] * p.a.row_norms[i].powi(2);
            if lhs > DEFAULT_GAMMA * (1.0 + 1e-12) {
                return Err(format!("importance step condition violated at row {i}: {lhs}"));
            }
        }
        StepSchedule::sparse_convex(&p.a).map_err(|e| e.to_string())?;
        StepSchedule::lambda_restart(&p.a, DEFAULT_GAMMA).map_err(|e| e.to_string())?;
        Ok(())
    })());

    check("prox_optimality", (|| {
        use crate::prox::ScalarConvexFn;
        let fns = [
            ScalarConvexFn::Quadratic { a: 1.0, b: 0.5 },
            ScalarConvexFn::Abs { lambda: 0.7 },
            ScalarConvexFn::IntervalInd { lo: -1.0, hi: 2.0 },
            ScalarConvexFn::Hinge { label: 1.0, scale: 0.25 },
        ];
        for f in &fns {
            for t in 0..40 {
                let v = -2.0 + 0.1 * t as f64;
                let tau = 0.3;
                let p = f.prox(tau, v).map_err(|e| e.to_string())?;
                let obj = |u: f64| f.eval(u).map(|fv| fv + (u - v) * (u - v) / (2.0 * tau));
                let base = obj(p).ok_or("prox left the domain")?;
                for du in [-1e-4, 1e-4] {
                    if let Some(o) = obj(p + du) {
                        if o < base - 1e-9 {
                            return Err(format!("{f:?}: prox({tau}, {v}) not a minimizer"));
                        }
                    }
                }
            }
        }
        Ok(())
    })());

    check("expectation_identities", (|| {
        let p = crate::problems::gen_lasso(6, 10, 2, 0.1, 0.5).map_err(|e| e.to_string())?;
        let s = StepSchedule::sparse_convex(&p.a).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..10).map(|j| 0.1 * (j as f64 + 1.0)).collect();
        let y: Vec<f64> = (0..6).map(|i| 0.2 - 0.05 * i as f64).collect();
        let beta = vec![1.0; 10];
        let (lhs, rhs) = oracle::primal_identity_sides(&p, &s, &x, &y, &vec![0.0; 10], &beta)
            .map_err(|e| e.to_string())?;
        if (lhs - rhs).abs() > 1e-12 * (1.0 + lhs.abs()) {
            return Err(format!("primal identity mismatch: {lhs} vs {rhs}"));
        }
        let (lhs, rhs) = oracle::dual_identity_sides(&p, &s, &x, &y, &vec![0.0; 6], &vec![1.0; 6])
            .map_err(|e| e.to_string())?;
        if (lhs - rhs).abs() > 1e-12 * (1.0 + lhs.abs()) {
            return Err(format!("dual identity mismatch: {lhs} vs {rhs}"));
        }
        Ok(())
    })());

    check("dense_sparse_agreement", (|| {
        let p = crate::problems::gen_constrained_qp(6, 6, 1, 1.0).map_err(|e| e.to_string())?;
        let s = StepSchedule::sparse_convex(&p.a).map_err(|e| e.to_string())?;
        let mut dense = crate::solvers::IterateState::new(&p, 5).map_err(|e| e.to_string())?;
        let mut sparse = crate::solvers::IterateState::new(&p, 5).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            crate::solvers::purecd_dense_step(&mut dense, &s, &p, false, None);
            crate::solvers::purecd_sparse_step(&mut sparse, &s, &p);
        }
        let dx = dense
            .x
            .iter()
            .zip(&sparse.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if dx > 1e-12 {
            return Err(format!("dense/sparse drift {dx}"));
        }
        Ok(())
    })());

    check("perturbed_theta_negative_control", (|| {
        // A deliberately wrong extrapolation weight must break the
        // dense/sparse agreement; if both trajectories still coincide the
        // agreement check has no teeth.
        let p = crate::problems::gen_constrained_qp(6, 6, 1, 1.0).map_err(|e| e.to_string())?;
        let s = StepSchedule::sparse_convex(&p.a).map_err(|e| e.to_string())?;
        let bad = s.with_perturbed_theta(0, 1.05);
        let mut dense = crate::solvers::IterateState::new(&p, 5).map_err(|e| e.to_string())?;
        let mut sparse = crate::solvers::IterateState::new(&p, 5).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            crate::solvers::purecd_dense_step(&mut dense, &bad, &p, false, None);
            crate::solvers::purecd_sparse_step(&mut sparse, &s, &p);
        }
        let dx = dense
            .x
            .iter()
            .zip(&sparse.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if dx <= 1e-12 {
            return Err("perturbed θ left the trajectories identical".to_string());
        }
        Ok(())
    })());

    check("reference_consistency", (|| {
        let p = crate::problems::gen_constrained_qp(5, 9, 3, 0.9).map_err(|e| e.to_string())?;
        let r = p.reference.as_ref().ok_or("missing reference")?;
        let feas = metrics::feasibility_distance(&p, &r.x_star).ok_or("no constraint set")?;
        if feas > 1e-9 {
            return Err(format!("reference infeasible: {feas}"));
        }
        Ok(())
    })());

    out
}
