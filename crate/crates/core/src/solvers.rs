//! Iteration engines: the randomized coordinate primal-dual methods (dense
//! and sparse variants), the deterministic initialization for the restarted
//! λ schedule, PDHG and GDA baselines, and the averaging/output rules.
//!
//! Sampling is counter-based: the row drawn at iteration k is a pure
//! function of (seed, k). This makes runs bit-reproducible and lets the
//! dense and sparse variants share an identical i_k stream for the
//! equivalence tests.

use crate::error::{Error, Result};
use crate::metrics::{self, MetricsRecord};
use crate::problems::{CompactSet, SaddleProblem};
use crate::schedules::{Regime, StepSchedule};
use crate::sparse::DualCache;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PurecdDense,
    PurecdSparse,
    Pdhg,
    Gda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputRule {
    Ergodic,
    LambdaWeighted,
    RandomIterate,
    LastIterate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckpointPlan {
    /// k ∈ {1, 2, 4, 8, ...} ∪ {K}.
    Geometric,
    /// 20 evenly spaced checkpoints plus K.
    Linear,
}

impl CheckpointPlan {
    /// Sorted checkpoint step counts in (0, K].
    pub fn points(&self, k_max: usize) -> Vec<usize> {
        let mut pts = Vec::new();
        match self {
            CheckpointPlan::Geometric => {
                let mut k = 1usize;
                while k < k_max {
                    pts.push(k);
                    k = k.saturating_mul(2);
                }
            }
            CheckpointPlan::Linear => {
                let step = (k_max / 20).max(1);
                let mut k = step;
                while k < k_max {
                    pts.push(k);
                    k += step;
                }
            }
        }
        if k_max > 0 {
            pts.push(k_max);
        }
        pts
    }
}

/// Run parameters for a single seeded solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub k_max: usize,
    pub seed: u64,
    pub checkpoints: CheckpointPlan,
    pub output_rule: OutputRule,
}

/// Counter-based sample stream: uniform(k) depends only on (seed, k).
#[derive(Debug, Clone, Copy)]
pub struct SampleStream {
    pub seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl SampleStream {
    /// Uniform in [0, 1) for counter k.
    pub fn uniform(&self, k: u64) -> f64 {
        let z = splitmix64(self.seed ^ splitmix64(k.wrapping_add(0x517cc1b727220a95)));
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Independent tagged substream (used for the up-front k̂ draw).
    pub fn uniform_tagged(&self, tag: u64, k: u64) -> f64 {
        SampleStream { seed: splitmix64(self.seed ^ tag) }.uniform(k)
    }
}

/// Lazily maintained weighted sum of a piecewise-constant vector: supports
/// O(1) weight accumulation per step and O(changed coords) bookkeeping,
/// which keeps running dual averages within the sparse cost model.
#[derive(Debug, Clone)]
struct WeightedSum {
    acc: Vec<f64>,
    last_w: Vec<f64>,
    cum_w: f64,
}

impl WeightedSum {
    fn new(len: usize) -> Self {
        WeightedSum { acc: vec![0.0; len], last_w: vec![0.0; len], cum_w: 0.0 }
    }

    /// All weight added from now on applies to the vector's current values.
    fn add_weight(&mut self, w: f64) {
        self.cum_w += w;
    }

    /// Must be called with the coordinate's current value right before that
    /// coordinate is mutated.
    fn settle(&mut self, idx: usize, value: f64) {
        self.acc[idx] += (self.cum_w - self.last_w[idx]) * value;
        self.last_w[idx] = self.cum_w;
    }

    /// Materializes the weighted sum against the current vector.
    fn snapshot(&self, current: &[f64]) -> Vec<f64> {
        self.acc
            .iter()
            .zip(self.last_w.iter().zip(current))
            .map(|(&a, (&lw, &v))| a + (self.cum_w - lw) * v)
            .collect()
    }
}

/// Mutable solver state for one run.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Scratch for the proximal point; sparse steps touch only J(i_k).
    pub xbar: Vec<f64>,
    pub cache: DualCache,
    /// Completed steps.
    pub k: usize,
    pub stream: SampleStream,
    /// Cumulative touched-nnz cost counter.
    pub cost: u64,
    // Running primal weighted average: sum of w_k·x̄ and total weight.
    avg_x: Vec<f64>,
    avg_x_w: f64,
    // Lazy dual weighted sum (ergodic or λ-weighted).
    y_sum: WeightedSum,
    /// Σ_{k=0}^{steps-1} λ_k for the λ-weighted output.
    pub lambda_total: f64,
    /// Step index k̂−1 at which to capture the full-prox pair.
    capture_at: Option<usize>,
    captured: Option<(Vec<f64>, Vec<f64>)>,
}

impl IterateState {
    pub fn new(problem: &SaddleProblem, seed: u64) -> Result<Self> {
        let d = problem.d();
        let n = problem.n();
        let x = vec![0.0; d];
        let y = vec![0.0; n];
        let cache = DualCache::new(&problem.a, &y)?;
        Ok(IterateState {
            x,
            y,
            xbar: vec![0.0; d],
            cache,
            k: 0,
            stream: SampleStream { seed },
            cost: 0,
            avg_x: vec![0.0; d],
            avg_x_w: 0.0,
            y_sum: WeightedSum::new(n),
            lambda_total: 0.0,
            capture_at: None,
            captured: None,
        })
    }

    /// The captured (x̄_k̂, ȳ_k̂) pair, if the run materialized one.
    pub fn captured_pair(&self) -> Option<&(Vec<f64>, Vec<f64>)> {
        self.captured.as_ref()
    }
}

/// Materializes the full proximal pair (x̄_{k+1}, ȳ_{k+1}) from the current
/// state without advancing it. This is the only place a full dual prox is
/// computed during a run; normal iterations never pay this cost.
fn full_prox_pair(
    state: &IterateState,
    schedule: &StepSchedule,
    problem: &SaddleProblem,
) -> (Vec<f64>, Vec<f64>) {
    let d = problem.d();
    let n = problem.n();
    let mut xbar = vec![0.0; d];
    for j in 0..d {
        let tau = schedule.tau(j);
        xbar[j] = problem.g.components[j].prox_raw(tau, state.x[j] - tau * state.cache.aty[j]);
    }
    let ax = problem.a.matvec(&xbar).expect("state dimensions match problem");
    let mut ybar = vec![0.0; n];
    for i in 0..n {
        let sigma = schedule.sigma(i);
        ybar[i] =
            problem.h_conj.components[i].prox_raw(sigma, state.y[i] + sigma * ax[i]);
    }
    (xbar, ybar)
}

/// One iteration of the dense algorithm: full primal prox against the
/// cached A^T y, one sampled dual coordinate prox, and an extrapolation
/// that touches only row i_k (y_{k+1} − y_k is one-sparse).
pub fn purecd_dense_step(
    state: &mut IterateState,
    schedule: &StepSchedule,
    problem: &SaddleProblem,
    track_ergodic: bool,
    lambda_weight: Option<f64>,
) {
    let d = problem.d();
    for j in 0..d {
        let tau = schedule.tau(j);
        state.xbar[j] =
            problem.g.components[j].prox_raw(tau, state.x[j] - tau * state.cache.aty[j]);
    }

    let u = state.stream.uniform(state.k as u64);
    let i = schedule.sample_row(u);
    let a = &problem.a;
    let axbar = a.row_dot(i, &state.xbar);
    let sigma = schedule.sigma(i);
    let y_new = problem.h_conj.components[i].prox_raw(sigma, state.y[i] + sigma * axbar);
    let delta = y_new - state.y[i];

    // λ-weighted dual bookkeeping: the weight for the previous step's
    // vector y_k is added before this step mutates coordinate i.
    if let Some(w_prev) = lambda_weight {
        state.y_sum.add_weight(w_prev);
    }
    state.y_sum.settle(i, state.y[i]);

    state.x.copy_from_slice(&state.xbar);
    for (&j, &v) in a.row_cols(i).iter().zip(a.row_vals(i)) {
        state.x[j] = state.xbar[j] - schedule.dense_extrap(j, i) * v * delta;
    }
    state.cache.apply_dual_delta(a, i, delta);
    state.y[i] = y_new;

    if track_ergodic {
        state.y_sum.add_weight(1.0);
    }
    state.cost += (d + a.row_cols(i).len()) as u64;
    state.k += 1;
}

/// One iteration of the sparse algorithm: everything is restricted to
/// J(i_k). Primal prox, dual coordinate prox, extrapolation, and the
/// rank-one cache update each touch exactly |J(i_k)| entries.
pub fn purecd_sparse_step(
    state: &mut IterateState,
    schedule: &StepSchedule,
    problem: &SaddleProblem,
) {
    if state.capture_at == Some(state.k) {
        state.captured = Some(full_prox_pair(state, schedule, problem));
    }

    let u = state.stream.uniform(state.k as u64);
    let i = schedule.sample_row(u);
    let a = &problem.a;
    let cols = a.row_cols(i);
    let vals = a.row_vals(i);

    let mut axbar = 0.0;
    for (&j, &v) in cols.iter().zip(vals) {
        let tau = schedule.tau(j);
        let xb = problem.g.components[j].prox_raw(tau, state.x[j] - tau * state.cache.aty[j]);
        state.xbar[j] = xb;
        axbar += v * xb;
    }
    let sigma = schedule.sigma(i);
    let y_new = problem.h_conj.components[i].prox_raw(sigma, state.y[i] + sigma * axbar);
    let delta = y_new - state.y[i];

    state.y_sum.settle(i, state.y[i]);
    for (&j, &v) in cols.iter().zip(vals) {
        state.x[j] = state.xbar[j] - schedule.tau(j) * schedule.theta(j) * v * delta;
    }
    state.cache.apply_dual_delta(a, i, delta);
    state.y[i] = y_new;

    state.cost += cols.len() as u64;
    state.k += 1;
}

/// Deterministic first step of the restarted-λ schedule:
/// x_1 = prox_{τ,g}(x_0 − τA'y_0), then a full dual update with σ̲.
pub fn init_step(state: &mut IterateState, schedule: &StepSchedule, problem: &SaddleProblem) {
    debug_assert_eq!(schedule.regime, Regime::LambdaRestart);
    let d = problem.d();
    for j in 0..d {
        let tau = schedule.tau(j);
        state.xbar[j] =
            problem.g.components[j].prox_raw(tau, state.x[j] - tau * state.cache.aty[j]);
    }
    state.x.copy_from_slice(&state.xbar);
    let ax = problem.a.matvec(&state.x).expect("dimensions match");
    let sigma = schedule.sigma_init;
    for i in 0..problem.n() {
        let y_new = problem.h_conj.components[i].prox_raw(sigma, state.y[i] + sigma * ax[i]);
        state.y_sum.settle(i, state.y[i]);
        let delta = y_new - state.y[i];
        state.cache.apply_dual_delta(&problem.a, i, delta);
        state.y[i] = y_new;
    }
    state.cost += problem.a.nnz() as u64 + d as u64;
    state.k += 1;
}

/// PDHG state: primal/dual iterates plus the extrapolated primal point.
#[derive(Debug, Clone)]
pub struct PdhgState {
    pub x_hat: Vec<f64>,
    pub x_bar: Vec<f64>,
    pub y: Vec<f64>,
    pub k: usize,
    pub cost: u64,
    pub avg_x: Vec<f64>,
    pub avg_y: Vec<f64>,
}

impl PdhgState {
    pub fn new(d: usize, n: usize) -> Self {
        PdhgState {
            x_hat: vec![0.0; d],
            x_bar: vec![0.0; d],
            y: vec![0.0; n],
            k: 0,
            cost: 0,
            avg_x: vec![0.0; d],
            avg_y: vec![0.0; n],
        }
    }
}

/// One deterministic PDHG iteration in the three-line form:
/// x̄ ← prox_{τ,g}(x̂ − τA'ȳ); ȳ ← prox_{σ,h*}(ȳ + σAx̄);
/// x̂ ← x̄ − τA'(ȳ_new − ȳ).
pub fn pdhg_step(state: &mut PdhgState, schedule: &StepSchedule, problem: &SaddleProblem) {
    let a = &problem.a;
    let aty = a.matvec_t(&state.y).expect("dimensions match");
    for j in 0..problem.d() {
        let tau = schedule.tau(j);
        state.x_bar[j] =
            problem.g.components[j].prox_raw(tau, state.x_hat[j] - tau * aty[j]);
    }
    let ax = a.matvec(&state.x_bar).expect("dimensions match");
    let mut dy = vec![0.0; problem.n()];
    for i in 0..problem.n() {
        let sigma = schedule.sigma(i);
        let y_new = problem.h_conj.components[i].prox_raw(sigma, state.y[i] + sigma * ax[i]);
        dy[i] = y_new - state.y[i];
        state.y[i] = y_new;
    }
    let at_dy = a.matvec_t(&dy).expect("dimensions match");
    for j in 0..problem.d() {
        state.x_hat[j] = state.x_bar[j] - schedule.tau(j) * at_dy[j];
    }
    for j in 0..problem.d() {
        state.avg_x[j] += state.x_bar[j];
    }
    for i in 0..problem.n() {
        state.avg_y[i] += state.y[i];
    }
    state.cost += 2 * a.nnz() as u64;
    state.k += 1;
}

/// One simultaneous gradient-descent-ascent step (no extrapolation);
/// diverges on purely bilinear problems, which is what makes it a useful
/// negative baseline.
pub fn gda_step(state: &mut PdhgState, schedule: &StepSchedule, problem: &SaddleProblem) {
    let a = &problem.a;
    let aty = a.matvec_t(&state.y).expect("dimensions match");
    let ax = a.matvec(&state.x_hat).expect("dimensions match");
    for j in 0..problem.d() {
        let tau = schedule.tau(j);
        state.x_bar[j] = problem.g.components[j].prox_raw(tau, state.x_hat[j] - tau * aty[j]);
    }
    for i in 0..problem.n() {
        let sigma = schedule.sigma(i);
        state.y[i] = problem.h_conj.components[i].prox_raw(sigma, state.y[i] + sigma * ax[i]);
    }
    state.x_hat.copy_from_slice(&state.x_bar);
    for j in 0..problem.d() {
        state.avg_x[j] += state.x_bar[j];
    }
    for i in 0..problem.n() {
        state.avg_y[i] += state.y[i];
    }
    state.cost += 2 * a.nnz() as u64;
    state.k += 1;
}

/// Checkpointed metric records of one run, plus the run's output pair.
#[derive(Debug, Clone)]
pub struct Trace {
    pub seed: u64,
    pub records: Vec<MetricsRecord>,
    pub x_out: Vec<f64>,
    pub y_out: Vec<f64>,
}

fn validate_config(problem: &SaddleProblem, schedule: &StepSchedule, config: &RunConfig) -> Result<()> {
    problem.validate()?;
    let regime_ok = match config.method {
        Method::PurecdDense => {
            matches!(schedule.regime, Regime::DenseImportance | Regime::LambdaRestart)
        }
        Method::PurecdSparse => matches!(
            schedule.regime,
            Regime::SparseConvex | Regime::Scsc | Regime::Scc | Regime::Csc
        ),
        Method::Pdhg | Method::Gda => schedule.regime == Regime::PdhgBaseline,
    };
    if !regime_ok {
        return Err(Error::Config(format!(
            "method {:?} is incompatible with regime {:?}",
            config.method, schedule.regime
        )));
    }
    if config.method == Method::PurecdSparse {
        if let Some(&j) = problem.a.empty_columns().first() {
            return Err(Error::EmptyColumn(j));
        }
    }
    let rule_ok = match config.output_rule {
        OutputRule::Ergodic => matches!(config.method, Method::PurecdDense | Method::Pdhg | Method::Gda),
        OutputRule::LambdaWeighted => {
            config.method == Method::PurecdDense && schedule.regime == Regime::LambdaRestart
        }
        OutputRule::RandomIterate => {
            config.method == Method::PurecdSparse && schedule.regime == Regime::SparseConvex
        }
        OutputRule::LastIterate => true,
    };
    if !rule_ok {
        return Err(Error::OutputRule(format!(
            "output rule {:?} is incompatible with method {:?} / regime {:?}",
            config.output_rule, config.method, schedule.regime
        )));
    }
    Ok(())
}

fn check_finite(v: &[f64], what: &str, k: usize) -> Result<()> {
    if v.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite { what: what.into(), k });
    }
    Ok(())
}

/// Executes a full run: optional deterministic init, K steps, metric
/// evaluation at checkpoints on the rule's output pair. Deterministic
/// given the seed.
pub fn run(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    config: &RunConfig,
    z: Option<&CompactSet>,
) -> Result<Trace> {
    validate_config(problem, schedule, config)?;
    let mut schedule = schedule.clone();
    let checkpoints = config.checkpoints.points(config.k_max);
    let mut records = Vec::with_capacity(checkpoints.len() + 1);

    match config.method {
        Method::Pdhg | Method::Gda => {
            let mut state = PdhgState::new(problem.d(), problem.n());
            records.push(metrics::evaluate(problem, z, &state.x_bar, &state.y, 0, 0));
            let mut next_cp = 0usize;
            for _ in 0..config.k_max {
                if config.method == Method::Pdhg {
                    pdhg_step(&mut state, &schedule, problem);
                } else {
                    gda_step(&mut state, &schedule, problem);
                }
                if next_cp < checkpoints.len() && state.k == checkpoints[next_cp] {
                    let (xo, yo) = pdhg_output(&state, config.output_rule);
                    check_finite(&xo, "x", state.k)?;
                    check_finite(&yo, "y", state.k)?;
                    records.push(metrics::evaluate(problem, z, &xo, &yo, state.k, state.cost));
                    next_cp += 1;
                }
            }
            let (x_out, y_out) = pdhg_output(&state, config.output_rule);
            Ok(Trace { seed: config.seed, records, x_out, y_out })
        }
        Method::PurecdDense | Method::PurecdSparse => {
            let mut state = IterateState::new(problem, config.seed)?;
            records.push(metrics::evaluate(problem, z, &state.x, &state.y, 0, 0));

            let lambda_rule = config.output_rule == OutputRule::LambdaWeighted;
            let ergodic = config.output_rule == OutputRule::Ergodic;
            if config.output_rule == OutputRule::RandomIterate && config.k_max > 0 {
                // k̂ uniform in {1..K}, drawn from an independent substream;
                // the pair (x̄_k̂, ȳ_k̂) is materialized at step index k̂−1.
                let u = state.stream.uniform_tagged(0x6b68_6174, 0);
                let k_hat = 1 + ((u * config.k_max as f64) as usize).min(config.k_max - 1);
                state.capture_at = Some(k_hat - 1);
            }

            if schedule.regime == Regime::LambdaRestart {
                init_step(&mut state, &schedule, problem);
                state.avg_x_w += schedule.lambda_k; // λ_0 = 1 weights x̄_1
                for j in 0..problem.d() {
                    state.avg_x[j] += schedule.lambda_k * state.xbar[j];
                }
                state.lambda_total += schedule.lambda_k;
                if ergodic {
                    state.y_sum.add_weight(1.0);
                }
                schedule.advance()?;
            }

            // λ_{t−1}, tracked incrementally so each step stays O(1).
            let mut lam_prev = schedule.lambda_k;
            let mut next_cp = checkpoints.iter().position(|&c| c > state.k).unwrap_or(checkpoints.len());
            // Records for checkpoints already passed by the init step.
            for &cp in &checkpoints[..next_cp] {
                if cp == state.k {
                    let (xo, yo) = purecd_output(&state, &schedule, config.output_rule)?;
                    records.push(metrics::evaluate(problem, z, &xo, &yo, state.k, state.cost));
                }
            }

            while state.k < config.k_max {
                let lam_cur = schedule.lambda_k;
                match config.method {
                    Method::PurecdDense => {
                        // The λ-weight for the previous step's dual iterate:
                        // n·λ_{t−1} − (n−1)·λ_t, available once λ_t is current.
                        let w_prev = if lambda_rule && state.k >= 2 {
                            let nf = schedule.n as f64;
                            Some(nf * lam_prev - (nf - 1.0) * schedule.lambda_k)
                        } else {
                            None
                        };
                        purecd_dense_step(&mut state, &schedule, problem, ergodic, w_prev);
                        let w = if schedule.regime == Regime::LambdaRestart {
                            schedule.lambda_k
                        } else {
                            1.0
                        };
                        state.avg_x_w += w;
                        for j in 0..problem.d() {
                            state.avg_x[j] += w * state.xbar[j];
                        }
                        state.lambda_total += schedule.lambda_k;
                    }
                    Method::PurecdSparse => {
                        purecd_sparse_step(&mut state, &schedule, problem);
                    }
                    _ => unreachable!(),
                }
                let at_checkpoint =
                    next_cp < checkpoints.len() && state.k == checkpoints[next_cp];
                if at_checkpoint {
                    // Before the random-iterate pair is materialized the rule
                    // has no output yet; checkpoints record the current full
                    // proximal pair as a stand-in.
                    let (xo, yo) = if config.output_rule == OutputRule::RandomIterate
                        && state.captured_pair().is_none()
                    {
                        full_prox_pair(&state, &schedule, problem)
                    } else {
                        purecd_output(&state, &schedule, config.output_rule)?
                    };
                    check_finite(&xo, "x", state.k)?;
                    check_finite(&yo, "y", state.k)?;
                    records.push(metrics::evaluate(problem, z, &xo, &yo, state.k, state.cost));
                    next_cp += 1;
                }
                schedule.advance()?;
                lam_prev = lam_cur;
            }

            let (x_out, y_out) = purecd_output(&state, &schedule, config.output_rule)?;
            check_finite(&x_out, "x", state.k)?;
            check_finite(&y_out, "y", state.k)?;
            Ok(Trace { seed: config.seed, records, x_out, y_out })
        }
    }
}

fn pdhg_output(state: &PdhgState, rule: OutputRule) -> (Vec<f64>, Vec<f64>) {
    match rule {
        OutputRule::Ergodic if state.k > 0 => {
            let kf = state.k as f64;
            (
                state.avg_x.iter().map(|&t| t / kf).collect(),
                state.avg_y.iter().map(|&t| t / kf).collect(),
            )
        }
        _ => (state.x_bar.clone(), state.y.clone()),
    }
}

/// Resolves the output pair for the coordinate methods.
pub fn purecd_output(
    state: &IterateState,
    schedule: &StepSchedule,
    rule: OutputRule,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match rule {
        OutputRule::LastIterate => Ok((state.x.clone(), state.y.clone())),
        OutputRule::Ergodic => {
            if state.k == 0 {
                return Ok((state.x.clone(), state.y.clone()));
            }
            let w = state.avg_x_w;
            let x = state.avg_x.iter().map(|&t| t / w).collect();
            let ysum = state.y_sum.snapshot(&state.y);
            let y = ysum.iter().map(|&t| t / w).collect();
            Ok((x, y))
        }
        OutputRule::LambdaWeighted => {
            if state.k == 0 {
                return Ok((state.x.clone(), state.y.clone()));
            }
            let lam = state.lambda_total;
            let x = state.avg_x.iter().map(|&t| t / lam).collect();
            // y^K = (n·λ_{K−1}·y_K + Σ_{k=1}^{K−2} w_k·y_{k+1}) / Λ_K; the
            // running sum holds exactly the inner terms.
            let nf = schedule.n as f64;
            let ysum = state.y_sum.snapshot(&state.y);
            let y = ysum
                .iter()
                .zip(&state.y)
                .map(|(&s, &yk)| (s + nf * schedule.lambda_k * yk) / lam)
                .collect();
            Ok((x, y))
        }
        OutputRule::RandomIterate => match &state.captured {
            Some((x, y)) => Ok((x.clone(), y.clone())),
            None if state.k == 0 => Ok((state.x.clone(), state.y.clone())),
            None => Err(Error::OutputRule("random-iterate pair was not captured".into())),
        },
    }
}
