//! Step-size schedules for each parameter regime.
//!
//! A schedule produces, for every iteration k, the primal steps τ_k^(j),
//! dual steps σ_k^(i), extrapolation weights θ_k^(j), and the row-sampling
//! distribution p. Constant regimes precompute vectors; the evolving
//! regimes (SCC, CSC, LambdaRestart) keep scalar state and derive the
//! per-coordinate values lazily so touched-coordinate cost stays
//! O(|J(i_k)|) per iteration.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};

/// Default γ for the convex-concave regimes.
pub const DEFAULT_GAMMA: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DenseImportance,
    LambdaRestart,
    SparseConvex,
    Scsc,
    Scc,
    Csc,
    PdhgBaseline,
}

/// Regime-tagged step-size generator.
#[derive(Debug, Clone)]
pub struct StepSchedule {
    pub regime: Regime,
    pub gamma: f64,
    pub n: usize,
    pub d: usize,
    /// Row-sampling probabilities.
    pub p: Vec<f64>,
    p_cdf: Vec<f64>,
    pi: Vec<f64>,
    pub max_row_norm: f64,
    pub sum_row_norms: f64,
    pub mu_g: f64,
    pub mu_h: f64,
    /// Per-row σ^(i) for the constant-σ regimes.
    sigma_vec: Vec<f64>,
    /// Per-column τ^(j) for the constant-τ regimes (base value for
    /// LambdaRestart, scaled by λ_k).
    tau_vec: Vec<f64>,
    /// Per-column θ^(j) for the constant-θ regimes.
    theta_vec: Vec<f64>,
    /// Iteration counter (number of advances so far).
    pub k: usize,
    // Evolving scalars (SCC / CSC).
    tau_tilde: f64,
    sigma_tilde: f64,
    sigma_scalar: f64,
    tau_sigma_0: f64,
    // LambdaRestart state.
    pub lambda_k: f64,
    /// σ̲ used by the deterministic initialization step.
    pub sigma_init: f64,
    /// Predicted per-iteration contraction c (SCSC regime).
    pub contraction: Option<f64>,
    /// Spectral norm (PDHG baseline).
    pub norm_a: f64,
}

fn base(regime: Regime, a: &SparseMatrix, gamma: f64) -> StepSchedule {
    let n = a.n_rows;
    StepSchedule {
        regime,
        gamma,
        n,
        d: a.n_cols,
        p: vec![1.0 / n as f64; n],
        p_cdf: Vec::new(),
        pi: a.pi.clone(),
        max_row_norm: a.max_row_norm(),
        sum_row_norms: a.row_norms.iter().sum(),
        mu_g: 0.0,
        mu_h: 0.0,
        sigma_vec: Vec::new(),
        tau_vec: Vec::new(),
        theta_vec: Vec::new(),
        k: 0,
        tau_tilde: 0.0,
        sigma_tilde: 0.0,
        sigma_scalar: 0.0,
        tau_sigma_0: 0.0,
        lambda_k: 1.0,
        sigma_init: 0.0,
        contraction: None,
        norm_a: 0.0,
    }
}

fn require_nonzero_rows(a: &SparseMatrix) -> Result<()> {
    for (i, &r) in a.row_norms.iter().enumerate() {
        if r == 0.0 {
            return Err(Error::ZeroRow(i));
        }
    }
    Ok(())
}

fn require_nonempty_columns(a: &SparseMatrix) -> Result<()> {
    if let Some(&j) = a.empty_columns().first() {
        return Err(Error::EmptyColumn(j));
    }
    Ok(())
}

fn require_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("gamma must lie in (0,1), got {gamma}")));
    }
    Ok(())
}

impl StepSchedule {
    /// Importance sampling for dense data: τ = 1/Σ‖A_i‖, p^(i) ∝ ‖A_i‖,
    /// σ^(i) = γ/‖A_i‖, θ = 1.
    pub fn dense_importance(a: &SparseMatrix, gamma: f64) -> Result<Self> {
        require_gamma(gamma)?;
        require_nonzero_rows(a)?;
        let mut s = base(Regime::DenseImportance, a, gamma);
        let tau = 1.0 / s.sum_row_norms;
        s.p = a.row_norms.iter().map(|&r| r / s.sum_row_norms).collect();
        s.sigma_vec = a.row_norms.iter().map(|&r| gamma / r).collect();
        s.tau_vec = vec![tau; s.d];
        s.theta_vec = vec![1.0; s.d];
        // σ^(i)·τ·(p^(i))⁻¹·‖A_i‖² ≤ γ, checked for every row.
        for i in 0..s.n {
            let lhs = s.sigma_vec[i] * tau / s.p[i] * a.row_norms[i].powi(2);
            if lhs > gamma * (1.0 + 1e-12) {
                return Err(Error::StepCondition {
                    row: i,
                    detail: format!("sigma*tau/p*||A_i||^2 = {lhs} > gamma = {gamma}"),
                });
            }
        }
        s.build_cdf();
        Ok(s)
    }

    /// The restarted-λ schedule: uniform p, τ = 1/(n·max‖A_i‖),
    /// σ^(i) = γ/‖A_i‖, T_k = τλ_k·I, Σ_k = λ_kΣ, θ = 1, with
    /// λ_0 = 1, λ_1 = 1/(n−1), λ_{k+1} = min(1, n/(n−1)·λ_k),
    /// and the deterministic first step using σ̲ = γ/(n·max‖A_i‖).
    pub fn lambda_restart(a: &SparseMatrix, gamma: f64) -> Result<Self> {
        require_gamma(gamma)?;
        require_nonzero_rows(a)?;
        if a.n_rows < 2 {
            return Err(Error::ScheduleRequirement { what: "n >= 2 for the λ schedule".into() });
        }
        let mut s = base(Regime::LambdaRestart, a, gamma);
        let tau = 1.0 / (s.n as f64 * s.max_row_norm);
        s.tau_vec = vec![tau; s.d];
        s.sigma_vec = a.row_norms.iter().map(|&r| gamma / r).collect();
        s.theta_vec = vec![1.0; s.d];
        s.sigma_init = gamma / (s.n as f64 * s.max_row_norm);
        s.lambda_k = 1.0; // λ_0; the init step uses index 0.
        s.build_cdf();
        Ok(s)
    }

    /// Sparse convex-concave regime: σ^(i) = 1/‖A_i‖,
    /// τ^(j) = 1/(π^(j)·n·max‖A_i‖), θ^(j) = n·π^(j), uniform p.
    pub fn sparse_convex(a: &SparseMatrix) -> Result<Self> {
        require_nonzero_rows(a)?;
        require_nonempty_columns(a)?;
        let mut s = base(Regime::SparseConvex, a, 1.0);
        let nf = s.n as f64;
        s.sigma_vec = a.row_norms.iter().map(|&r| 1.0 / r).collect();
        s.tau_vec = s.pi.iter().map(|&pj| 1.0 / (pj * nf * s.max_row_norm)).collect();
        s.theta_vec = s.pi.iter().map(|&pj| nf * pj).collect();
        s.validate_row_condition(a)?;
        s.build_cdf();
        Ok(s)
    }

    /// Strongly convex-strongly concave regime with predicted linear
    /// contraction c = 1 + 1/(n − 1 + n·max κ^(i)), κ^(i) = ‖A_i‖/√(μ_gμ_h).
    pub fn scsc(a: &SparseMatrix, mu_g: f64, mu_h: f64) -> Result<Self> {
        if mu_g <= 0.0 || mu_h <= 0.0 {
            return Err(Error::ScheduleRequirement {
                what: format!("positive moduli for SCSC, got ({mu_g}, {mu_h})"),
            });
        }
        require_nonzero_rows(a)?;
        require_nonempty_columns(a)?;
        let mut s = base(Regime::Scsc, a, 1.0);
        let nf = s.n as f64;
        s.mu_g = mu_g;
        s.mu_h = mu_h;
        let ratio = mu_h.sqrt() / mu_g.sqrt();
        s.tau_vec = s.pi.iter().map(|&pj| ratio / (s.max_row_norm * pj * nf)).collect();
        s.sigma_vec = a.row_norms.iter().map(|&r| 1.0 / (ratio * r)).collect();
        s.theta_vec = s
            .pi
            .iter()
            .zip(&s.tau_vec)
            .map(|(&pj, &tj)| pj * nf / (1.0 + mu_g * tj))
            .collect();
        let max_kappa = s.max_row_norm / (mu_g * mu_h).sqrt();
        s.contraction = Some(1.0 + 1.0 / (nf - 1.0 + nf * max_kappa));
        s.validate_row_condition(a)?;
        s.build_cdf();
        Ok(s)
    }

    /// Strongly convex-concave accelerated regime (evolving):
    /// τ̃_0 = min(1/n, μ_g/(n·max‖A_i‖)), σ_0 = 1/max‖A_i‖,
    /// τ̃_{k+1} = τ̃_k/√(1+τ̃_k), σ_{k+1} = σ_k√(1+τ̃_k).
    pub fn scc(a: &SparseMatrix, mu_g: f64) -> Result<Self> {
        if mu_g <= 0.0 {
            return Err(Error::ScheduleRequirement { what: format!("mu_g > 0 for SCC, got {mu_g}") });
        }
        require_nonzero_rows(a)?;
        require_nonempty_columns(a)?;
        let mut s = base(Regime::Scc, a, 1.0);
        let nf = s.n as f64;
        s.mu_g = mu_g;
        s.tau_tilde = (1.0 / nf).min(mu_g / (nf * s.max_row_norm));
        s.sigma_scalar = 1.0 / s.max_row_norm;
        s.tau_sigma_0 = s.tau_tilde * s.sigma_scalar;
        s.build_cdf();
        s.validate_evolving()?;
        Ok(s)
    }

    /// Convex-strongly concave accelerated regime (evolving):
    /// σ̃_0 = 1/(2n−1), τ̃_0 = μ_h/(n·max‖A_i‖²),
    /// τ̃_{k+1} = τ̃_k√(1+σ̃_k), σ̃_{k+1} = σ̃_k/√(1+σ̃_k),
    /// σ_k = n·σ̃_k/(μ_h(1 − (n−1)σ̃_k)), θ^(j) = n·π^(j).
    pub fn csc(a: &SparseMatrix, mu_h: f64) -> Result<Self> {
        if mu_h <= 0.0 {
            return Err(Error::ScheduleRequirement { what: format!("mu_h > 0 for CSC, got {mu_h}") });
        }
        require_nonzero_rows(a)?;
        require_nonempty_columns(a)?;
        let mut s = base(Regime::Csc, a, 1.0);
        let nf = s.n as f64;
        s.mu_h = mu_h;
        s.sigma_tilde = 1.0 / (2.0 * nf - 1.0);
        s.tau_tilde = mu_h / (nf * s.max_row_norm.powi(2));
        s.sigma_scalar = nf * s.sigma_tilde / (mu_h * (1.0 - (nf - 1.0) * s.sigma_tilde));
        s.tau_sigma_0 = s.tau_tilde * s.sigma_scalar;
        s.theta_vec = s.pi.iter().map(|&pj| nf * pj).collect();
        // Proof condition σ_0·τ̃_0·n·‖A_i‖² ≤ 1 for every row.
        for (i, &r) in a.row_norms.iter().enumerate() {
            let lhs = s.sigma_scalar * s.tau_tilde * nf * r * r;
            if lhs > 1.0 + 1e-12 {
                return Err(Error::StepCondition {
                    row: i,
                    detail: format!("sigma_0*tau_0*n*||A_i||^2 = {lhs} > 1"),
                });
            }
        }
        s.build_cdf();
        Ok(s)
    }

    /// Deterministic PDHG baseline: τ = σ = √γ/‖A‖, ‖A‖ by power iteration.
    pub fn pdhg_baseline(a: &SparseMatrix, gamma: f64) -> Result<Self> {
        require_gamma(gamma)?;
        let mut s = base(Regime::PdhgBaseline, a, gamma);
        s.norm_a = a.spectral_norm();
        if s.norm_a == 0.0 {
            return Err(Error::ZeroRow(0));
        }
        let step = gamma.sqrt() / s.norm_a;
        s.tau_vec = vec![step; s.d];
        s.sigma_vec = vec![step; s.n];
        s.theta_vec = vec![1.0; s.d];
        s.build_cdf();
        Ok(s)
    }

    fn build_cdf(&mut self) {
        let mut acc = 0.0;
        self.p_cdf = self
            .p
            .iter()
            .map(|&pi| {
                acc += pi;
                acc
            })
            .collect();
        if let Some(last) = self.p_cdf.last_mut() {
            *last = 1.0;
        }
    }

    /// Checks 1/σ^(i) − Σ_j n·π^(j)·τ^(j)·A_{i,j}² ≥ 0 for every row
    /// (the sparse-regime sufficient condition).
    fn validate_row_condition(&self, a: &SparseMatrix) -> Result<()> {
        let nf = self.n as f64;
        for i in 0..self.n {
            let mut rhs = 0.0;
            for (&j, &v) in a.row_cols(i).iter().zip(a.row_vals(i)) {
                rhs += nf * self.pi[j] * self.tau_vec[j] * v * v;
            }
            let lhs = 1.0 / self.sigma_vec[i];
            if lhs - rhs < -1e-9 * lhs.max(1.0) {
                return Err(Error::StepCondition {
                    row: i,
                    detail: format!("1/sigma = {lhs} < sum n*pi*tau*A^2 = {rhs}"),
                });
            }
        }
        Ok(())
    }

    /// Scalar conditions re-checked on every advance of an evolving regime.
    fn validate_evolving(&self) -> Result<()> {
        match self.regime {
            Regime::Scc => {
                let prod = self.tau_tilde * self.sigma_scalar;
                if (prod - self.tau_sigma_0).abs() > 1e-12 * self.tau_sigma_0 {
                    return Err(Error::StepCondition {
                        row: 0,
                        detail: format!("tau_tilde*sigma drifted: {prod} vs {}", self.tau_sigma_0),
                    });
                }
                // Denominator of τ_k^(j) must stay positive for the least
                // frequent column.
                let pi_min = self.pi.iter().cloned().fold(f64::INFINITY, f64::min);
                let denom = self.mu_g * pi_min - self.mu_g * (1.0 - pi_min) * self.tau_tilde;
                if denom <= 0.0 {
                    return Err(Error::StepCondition {
                        row: 0,
                        detail: format!("tau denominator nonpositive: {denom}"),
                    });
                }
                Ok(())
            }
            Regime::Csc => {
                let prod = self.tau_tilde * self.sigma_scalar;
                if prod > self.tau_sigma_0 * (1.0 + 1e-12) {
                    return Err(Error::StepCondition {
                        row: 0,
                        detail: format!("tau_tilde*sigma grew: {prod} > {}", self.tau_sigma_0),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Primal step τ_k^(j) at the current iteration.
    pub fn tau(&self, j: usize) -> f64 {
        match self.regime {
            Regime::LambdaRestart => self.tau_vec[j] * self.lambda_k,
            Regime::Scc => {
                self.tau_tilde
                    / (self.mu_g * self.pi[j] - self.mu_g * (1.0 - self.pi[j]) * self.tau_tilde)
            }
            Regime::Csc => self.tau_tilde / self.pi[j],
            _ => self.tau_vec[j],
        }
    }

    /// Dual step σ_k^(i) at the current iteration.
    pub fn sigma(&self, i: usize) -> f64 {
        match self.regime {
            Regime::LambdaRestart => self.sigma_vec[i] * self.lambda_k,
            Regime::Scc | Regime::Csc => self.sigma_scalar,
            _ => self.sigma_vec[i],
        }
    }

    /// Extrapolation weight θ_k^(j) in the sparse-step convention
    /// (x^(j) ← x̄^(j) − τ^(j)θ^(j)A_{i,j}Δ).
    pub fn theta(&self, j: usize) -> f64 {
        match self.regime {
            Regime::Scc => {
                self.pi[j] * self.n as f64 / (1.0 + self.mu_g * self.tau(j))
            }
            Regime::DenseImportance | Regime::LambdaRestart | Regime::PdhgBaseline => 1.0,
            _ => self.theta_vec[j],
        }
    }

    /// Coefficient multiplying A_{i,j}·(y_{k+1}^(i) − y_k^(i)) in the dense
    /// step's extrapolation. For the dense regimes this is τ^(j)·θ/p^(i)
    /// (θ = 1); for the sparse regimes run densely (uniform p), θ^(j)
    /// already carries the n·π^(j) factor and the coefficient is τ^(j)θ^(j),
    /// matching the sparse step exactly.
    pub fn dense_extrap(&self, j: usize, i: usize) -> f64 {
        match self.regime {
            Regime::DenseImportance | Regime::LambdaRestart | Regime::PdhgBaseline => {
                self.tau(j) / self.p[i]
            }
            _ => self.tau(j) * self.theta(j),
        }
    }

    /// Copy with θ^(j) scaled by `factor`. Only used as a deliberately
    /// broken fixture: the self-check battery's negative control verifies
    /// that the dense/sparse agreement check detects a wrong extrapolation
    /// weight.
    pub fn with_perturbed_theta(&self, j: usize, factor: f64) -> Self {
        let mut s = self.clone();
        if !s.theta_vec.is_empty() {
            s.theta_vec[j] *= factor;
        }
        s
    }

    /// λ_{k+1} from λ_k per the restart recursion.
    pub fn next_lambda(&self) -> f64 {
        let nf = self.n as f64;
        if self.k == 0 {
            1.0 / (nf - 1.0)
        } else {
            (nf / (nf - 1.0) * self.lambda_k).min(1.0)
        }
    }

    /// Moves to the next iteration, updating evolving scalars and
    /// re-validating the scalar step conditions.
    pub fn advance(&mut self) -> Result<()> {
        match self.regime {
            Regime::LambdaRestart => {
                self.lambda_k = self.next_lambda();
            }
            Regime::Scc => {
                self.tau_tilde /= (1.0 + self.tau_tilde).sqrt();
                // σ_k = τ̃_0σ_0/τ̃_k keeps the product invariant exact.
                self.sigma_scalar = self.tau_sigma_0 / self.tau_tilde;
            }
            Regime::Csc => {
                let st = self.sigma_tilde;
                self.tau_tilde *= (1.0 + st).sqrt();
                self.sigma_tilde = st / (1.0 + st).sqrt();
                let nf = self.n as f64;
                self.sigma_scalar =
                    nf * self.sigma_tilde / (self.mu_h * (1.0 - (nf - 1.0) * self.sigma_tilde));
            }
            _ => {}
        }
        self.k += 1;
        self.validate_evolving()
    }

    /// Draws a row index from p via inverse CDF of a uniform in [0,1).
    pub fn sample_row(&self, u: f64) -> usize {
        match self.p_cdf.binary_search_by(|c| c.partial_cmp(&u).expect("finite cdf")) {
            Ok(idx) => (idx + 1).min(self.n - 1),
            Err(idx) => idx.min(self.n - 1),
        }
    }

    /// First iteration index at which λ reaches 1 is k0() + 1; k0 is the
    /// count of iterations k ≥ 1 with λ_k < 1 (closed form
    /// λ_k = (1/(n−1))·(n/(n−1))^{k−1}).
    pub fn k0(n: usize) -> usize {
        if n <= 2 {
            return 0;
        }
        let nf = n as f64;
        let bound = 1.0 + (nf - 1.0).ln() / (nf / (nf - 1.0)).ln();
        (bound.ceil() as usize).saturating_sub(1)
    }
}

/// λ_0..λ_{k_max} of the restart schedule for a given n.
pub fn lambda_sequence(n: usize, k_max: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut seq = Vec::with_capacity(k_max + 1);
    seq.push(1.0);
    if k_max == 0 {
        return seq;
    }
    seq.push(1.0 / (nf - 1.0));
    for k in 1..k_max {
        let next = (nf / (nf - 1.0) * seq[k]).min(1.0);
        seq.push(next);
    }
    seq
}
