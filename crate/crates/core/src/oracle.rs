//! Independent reference computations used to validate the solvers: dense
//! linear algebra for closed-form saddle points, a long deterministic PDHG
//! polish for problems without closed forms, exhaustive enumeration of the
//! one-step conditional expectation, and reference-file I/O.
//!
//! Nothing in this module shares code with the iteration engines beyond the
//! problem/schedule data types, so agreement between the two is meaningful.

use crate::error::{Error, Result};
use crate::problems::SaddleProblem;
use crate::schedules::StepSchedule;
use crate::solvers::{pdhg_step, PdhgState};
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Solves the dense square system M t = rhs by Gaussian elimination with
/// partial pivoting. M is given in row-major form and is consumed by value.
pub fn solve_dense(m: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.len();
    if rhs.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SingularSystem(col));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

/// Closed-form saddle point of min_x ½Σ_j a_j x_j² + c'x s.t. Ax = b via
/// the KKT system [diag(a) A'; A 0][x; y] = [−c; b]. Returns (x★, y★).
pub fn solve_kkt_qp(
    a: &SparseMatrix,
    diag: &[f64],
    c: &[f64],
    b: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.n_rows;
    let d = a.n_cols;
    if diag.len() != d || c.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: diag.len().max(c.len()) });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let m = d + n;
    let mut kkt = vec![vec![0.0; m]; m];
    for j in 0..d {
        kkt[j][j] = diag[j];
    }
    for i in 0..n {
        for (&j, &v) in a.row_cols(i).iter().zip(a.row_vals(i)) {
            kkt[d + i][j] = v;
            kkt[j][d + i] = v;
        }
    }
    let mut rhs = vec![0.0; m];
    for j in 0..d {
        rhs[j] = -c[j];
    }
    for i in 0..n {
        rhs[d + i] = b[i];
    }
    let sol = solve_dense(&kkt, &rhs)?;
    Ok((sol[..d].to_vec(), sol[d..].to_vec()))
}

/// Runs deterministic PDHG until the fixed-point residual
/// ‖(x̄_{k+1}, y_{k+1}) − (x̄_k, y_k)‖∞ drops below `tol`, up to `k_max`
/// iterations. Returns (x★, y★, achieved residual).
pub fn solve_reference_pdhg(
    problem: &SaddleProblem,
    gamma: f64,
    k_max: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let schedule = StepSchedule::pdhg_baseline(&problem.a, gamma)?;
    let mut state = PdhgState::new(problem.d(), problem.n());
    let mut residual = f64::INFINITY;
    for _ in 0..k_max {
        let x_prev = state.x_bar.clone();
        let y_prev = state.y.clone();
        pdhg_step(&mut state, &schedule, problem);
        residual = state
            .x_bar
            .iter()
            .zip(&x_prev)
            .chain(state.y.iter().zip(&y_prev))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if residual < tol {
            return Ok((state.x_bar, state.y, residual));
        }
    }
    Err(Error::BudgetExhausted { achieved: residual, target: tol })
}

/// Full proximal pair (x̄, ȳ) at an arbitrary point (x, y): every primal
/// coordinate proxed against A'y, then every dual coordinate proxed against
/// Ax̄. This is the reference computation the randomized steps subsample.
pub fn full_prox_pair(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    x: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let aty = problem.a.matvec_t(y)?;
    let mut xbar = vec![0.0; problem.d()];
    for j in 0..problem.d() {
        let tau = schedule.tau(j);
        xbar[j] = problem.g.components[j].prox_raw(tau, x[j] - tau * aty[j]);
    }
    let ax = problem.a.matvec(&xbar)?;
    let mut ybar = vec![0.0; problem.n()];
    for i in 0..problem.n() {
        let sigma = schedule.sigma(i);
        ybar[i] = problem.h_conj.components[i].prox_raw(sigma, y[i] + sigma * ax[i]);
    }
    Ok((xbar, ybar))
}

/// The next iterate pair when row i is drawn: the dual moves to ȳ at
/// coordinate i only, and the primal applies the coordinate extrapolation
/// over J(i), with all other primal coordinates left at x.
pub fn sparse_outcome(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    x: &[f64],
    y: &[f64],
    xbar: &[f64],
    ybar: &[f64],
    i: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut x_next = x.to_vec();
    let mut y_next = y.to_vec();
    let delta = ybar[i] - y[i];
    for (&j, &v) in problem.a.row_cols(i).iter().zip(problem.a.row_vals(i)) {
        x_next[j] = xbar[j] - schedule.tau(j) * schedule.theta(j) * v * delta;
    }
    y_next[i] = ybar[i];
    (x_next, y_next)
}

/// As `sparse_outcome`, but with the dense rule: all primal coordinates
/// move to x̄ and the extrapolation on J(i) uses τ_j/p_i.
pub fn dense_outcome(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    y: &[f64],
    xbar: &[f64],
    ybar: &[f64],
    i: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut x_next = xbar.to_vec();
    let mut y_next = y.to_vec();
    let delta = ybar[i] - y[i];
    for (&j, &v) in problem.a.row_cols(i).iter().zip(problem.a.row_vals(i)) {
        x_next[j] = xbar[j] - schedule.dense_extrap(j, i) * v * delta;
    }
    y_next[i] = ybar[i];
    (x_next, y_next)
}

/// E_k[f(x_{k+1}, y_{k+1})] by enumerating all n outcomes of one sparse
/// step with their sampling probabilities.
pub fn enumerate_expectation<F>(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    x: &[f64],
    y: &[f64],
    f: F,
) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let (xbar, ybar) = full_prox_pair(problem, schedule, x, y)?;
    let mut acc = 0.0;
    for i in 0..problem.n() {
        let (xn, yn) = sparse_outcome(problem, schedule, x, y, &xbar, &ybar, i);
        acc += schedule.p[i] * f(&xn, &yn);
    }
    Ok(acc)
}

fn weighted_sq_dist(u: &[f64], v: &[f64], w: &[f64]) -> f64 {
    u.iter().zip(v).zip(w).map(|((&a, &b), &wi)| wi * (a - b) * (a - b)).sum()
}

/// Both sides of the conditional primal-distance identity for the sparse
/// step under uniform sampling, against an arbitrary comparison point and
/// an arbitrary positive diagonal weight β:
///
///   E_k ‖x_{k+1} − x‖²_B = ‖x̄ − x‖²_{BΠ} − ‖x_k − x‖²_{BΠ} + ‖x_k − x‖²_B
///       − (2/n)·Σ_j β_j τ_j θ_j (A'(ȳ − y_k))_j (x̄_j − x_j)
///       + Σ_i n⁻¹ (ȳ_i − y_i)² Σ_{j∈J(i)} β_j τ_j² θ_j² A_{i,j}²
///
/// Returns (lhs, rhs).
pub fn primal_identity_sides(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    x_k: &[f64],
    y_k: &[f64],
    x_ref: &[f64],
    beta: &[f64],
) -> Result<(f64, f64)> {
    let n = problem.n() as f64;
    let (xbar, ybar) = full_prox_pair(problem, schedule, x_k, y_k)?;
    let lhs = enumerate_expectation(problem, schedule, x_k, y_k, |xn, _| {
        weighted_sq_dist(xn, x_ref, beta)
    })?;

    let a = &problem.a;
    let pi = &a.pi;
    let b_pi: Vec<f64> = beta.iter().zip(pi).map(|(&b, &p)| b * p).collect();
    let dy: Vec<f64> = ybar.iter().zip(y_k).map(|(&u, &v)| u - v).collect();
    let at_dy = a.matvec_t(&dy)?;
    let mut cross = 0.0;
    for j in 0..problem.d() {
        cross += beta[j] * schedule.tau(j) * schedule.theta(j) * at_dy[j] * (xbar[j] - x_ref[j]);
    }
    let mut noise = 0.0;
    for i in 0..problem.n() {
        let mut row_mass = 0.0;
        for (&j, &v) in a.row_cols(i).iter().zip(a.row_vals(i)) {
            let t = schedule.tau(j) * schedule.theta(j);
            row_mass += beta[j] * t * t * v * v;
        }
        noise += dy[i] * dy[i] * row_mass / n;
    }
    let rhs = weighted_sq_dist(&xbar, x_ref, &b_pi) - weighted_sq_dist(x_k, x_ref, &b_pi)
        + weighted_sq_dist(x_k, x_ref, beta)
        - (2.0 / n) * cross
        + noise;
    Ok((lhs, rhs))
}

/// Both sides of the conditional dual-distance identity,
///   E_k ‖y_{k+1} − y‖²_Φ = ‖ȳ − y‖²_{ΦP} + ‖y_k − y‖²_{Φ(I−P)},
/// against an arbitrary comparison point and positive diagonal Φ.
pub fn dual_identity_sides(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    x_k: &[f64],
    y_k: &[f64],
    y_ref: &[f64],
    phi: &[f64],
) -> Result<(f64, f64)> {
    let (xbar, ybar) = full_prox_pair(problem, schedule, x_k, y_k)?;
    let mut lhs = 0.0;
    for i in 0..problem.n() {
        let (_, yn) = sparse_outcome(problem, schedule, x_k, y_k, &xbar, &ybar, i);
        lhs += schedule.p[i] * weighted_sq_dist(&yn, y_ref, phi);
    }
    let phi_p: Vec<f64> = phi.iter().zip(&schedule.p).map(|(&f, &p)| f * p).collect();
    let phi_q: Vec<f64> = phi.iter().zip(&schedule.p).map(|(&f, &p)| f * (1.0 - p)).collect();
    let rhs = weighted_sq_dist(&ybar, y_ref, &phi_p) + weighted_sq_dist(y_k, y_ref, &phi_q);
    Ok((lhs, rhs))
}

/// Both sides of E_k h*(y_{k+1}) = Σ_i p_i h*_i(ȳ_i) + (1 − p_i) h*_i(y_k,i).
/// Returns None if any term is outside the conjugate's domain.
pub fn hstar_identity_sides(
    problem: &SaddleProblem,
    schedule: &StepSchedule,
    x_k: &[f64],
    y_k: &[f64],
) -> Result<Option<(f64, f64)>> {
    let (xbar, ybar) = full_prox_pair(problem, schedule, x_k, y_k)?;
    let mut lhs = 0.0;
    for i in 0..problem.n() {
        let (_, yn) = sparse_outcome(problem, schedule, x_k, y_k, &xbar, &ybar, i);
        match problem.h_conj.eval(&yn) {
            Some(v) => lhs += schedule.p[i] * v,
            None => return Ok(None),
        }
    }
    let mut rhs = 0.0;
    for i in 0..problem.n() {
        let hb = problem.h_conj.components[i].eval(ybar[i]);
        let hk = problem.h_conj.components[i].eval(y_k[i]);
        match (hb, hk) {
            (Some(a), Some(b)) => rhs += schedule.p[i] * a + (1.0 - schedule.p[i]) * b,
            _ => return Ok(None),
        }
    }
    Ok(Some((lhs, rhs)))
}

/// On-disk reference solution tied to a problem hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceFile {
    pub problem_hash: String,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub f_star: Option<f64>,
    /// Provenance: "kkt" or "pdhg_polish".
    pub method: String,
    /// Fixed-point residual (or 0 for exact solves).
    pub achieved_gap: f64,
}

impl ReferenceFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        let s = serde_json::to_string_pretty(self)?;
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&s)?)
    }

    /// Loads only if the stored hash matches the problem at hand.
    pub fn load_checked(path: &Path, expect_hash: &str) -> Result<Self> {
        let r = Self::load(path)?;
        if r.problem_hash != expect_hash {
            return Err(Error::Config(format!(
                "reference file {} was computed for problem {}, expected {}",
                path.display(),
                r.problem_hash,
                expect_hash
            )));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_constrained_qp, gen_lasso, gen_scsc_quadratic};
    use crate::prox::{ScalarConvexFn, SeparableFunction};
    use crate::schedules::StepSchedule;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_solver_identity_and_known_system() {
        // 2x + y = 5, x + 3y = 10 → x = 1, y = 3.
        let m = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let s = solve_dense(&m, &[5.0, 10.0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12 && (s[1] - 3.0).abs() < 1e-12);

        // Random SPD-ish system round-trips: solve then multiply back.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 12;
        let mut m = vec![vec![0.0; n]; n];
        for r in 0..n {
            for c in 0..n {
                m[r][c] = rng.random::<f64>() - 0.5;
            }
            m[r][r] += n as f64; // diagonal dominance
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let x = solve_dense(&m, &rhs).unwrap();
        for r in 0..n {
            let mut s = 0.0;
            for c in 0..n {
                s += m[r][c] * x[c];
            }
            assert!((s - rhs[r]).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_system_rejected() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(&m, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn kkt_solution_satisfies_stationarity_and_feasibility() {
        let p = gen_constrained_qp(6, 12, 4, 0.8).unwrap();
        let r = p.reference.as_ref().unwrap();
        // Feasibility Ax★ = b and stationarity diag(a)x★ + c + A'y★ = 0 are
        // asserted inside the generator tests; here check the saddle
        // inequality L(x★, y) ≤ L(x★, y★) ≤ L(x, y★) directly.
        let l_star = p.lagrangian(&r.x_star, &r.y_star).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let x: Vec<f64> = r.x_star.iter().map(|&v| v + rng.random::<f64>() - 0.5).collect();
            let y: Vec<f64> = r.y_star.iter().map(|&v| v + rng.random::<f64>() - 0.5).collect();
            assert!(p.lagrangian(&x, &r.y_star).unwrap() >= l_star - 1e-9);
            assert!(p.lagrangian(&r.x_star, &y).unwrap() <= l_star + 1e-9);
        }
    }

    #[test]
    fn pdhg_polish_agrees_with_kkt_reference() {
        let p = gen_constrained_qp(5, 10, 7, 0.9).unwrap();
        let r = p.reference.clone().unwrap();
        let (x, y, res) = solve_reference_pdhg(&p, 0.9, 2_000_000, 1e-13).unwrap();
        assert!(res < 1e-13);
        for (a, b) in x.iter().zip(&r.x_star) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        for (a, b) in y.iter().zip(&r.y_star) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn pdhg_polish_budget_exhaustion_is_reported() {
        let p = gen_constrained_qp(5, 10, 7, 0.9).unwrap();
        let e = solve_reference_pdhg(&p, 0.9, 3, 1e-14).unwrap_err();
        assert!(matches!(e, Error::BudgetExhausted { .. }));
    }

    fn random_point(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..d).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect()
    }

    #[test]
    fn primal_identity_holds_by_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..5u64 {
            let p = gen_lasso(6, 10, seed, 0.1, 0.5).unwrap();
            let s = StepSchedule::sparse_convex(&p.a).unwrap();
            let x_k = random_point(10, &mut rng);
            let y_k = random_point(6, &mut rng);
            let x_ref = random_point(10, &mut rng);
            let beta: Vec<f64> = (0..10).map(|_| 0.5 + rng.random::<f64>()).collect();
            let (lhs, rhs) =
                primal_identity_sides(&p, &s, &x_k, &y_k, &x_ref, &beta).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
                "seed {seed}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn dual_identity_holds_by_enumeration_and_worked_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for seed in 0..5u64 {
            let p = gen_scsc_quadratic(7, 9, seed, 0.6, 1.0, 1.0).unwrap();
            let s = StepSchedule::scsc(&p.a, 1.0, 1.0).unwrap();
            let x_k = random_point(9, &mut rng);
            let y_k = random_point(7, &mut rng);
            let y_ref = random_point(7, &mut rng);
            let phi: Vec<f64> = (0..7).map(|_| 0.5 + rng.random::<f64>()).collect();
            let (lhs, rhs) = dual_identity_sides(&p, &s, &x_k, &y_k, &y_ref, &phi).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
                "seed {seed}: {lhs} vs {rhs}"
            );
        }

        // Worked two-row case: p = (½, ½), Φ = I, ȳ = (3, 1), y_k = (1, 2),
        // y = (0, 0): E‖y₊ − y‖² = ½(9+4) + ½(1+1) = 7.5, and the split
        // form gives ½·9 + ½·1 + ½·1 + ½·4 = 7.5.
        let ybar = [3.0, 1.0];
        let yk = [1.0, 2.0];
        let lhs = 0.5 * (ybar[0] * ybar[0] + yk[1] * yk[1])
            + 0.5 * (yk[0] * yk[0] + ybar[1] * ybar[1]);
        let rhs = 0.5 * (ybar[0] * ybar[0] + ybar[1] * ybar[1])
            + 0.5 * (yk[0] * yk[0] + yk[1] * yk[1]);
        assert_eq!(lhs, 7.5);
        assert_eq!(rhs, 7.5);
    }

    #[test]
    fn hstar_identity_holds_by_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for seed in 0..5u64 {
            // Square-loss conjugates have full domain, so no None cases.
            let p = gen_lasso(6, 10, seed, 0.1, 0.7).unwrap();
            let s = StepSchedule::csc(&p.a, 1.0).unwrap();
            let x_k = random_point(10, &mut rng);
            let y_k = random_point(6, &mut rng);
            let (lhs, rhs) = hstar_identity_sides(&p, &s, &x_k, &y_k).unwrap().unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
                "seed {seed}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn expectation_of_constant_is_constant() {
        let p = gen_lasso(5, 8, 1, 0.1, 0.6).unwrap();
        let s = StepSchedule::sparse_convex(&p.a).unwrap();
        let e = enumerate_expectation(&p, &s, &vec![0.1; 8], &vec![0.2; 5], |_, _| 4.25).unwrap();
        assert!((e - 4.25).abs() < 1e-15);
    }

    #[test]
    fn outcomes_agree_with_solver_steps() {
        // The enumerated outcome for the drawn row must equal the state the
        // actual solver step produces.
        use crate::solvers::{purecd_sparse_step, IterateState, SampleStream};
        let p = gen_lasso(6, 9, 3, 0.1, 0.5).unwrap();
        let s = StepSchedule::sparse_convex(&p.a).unwrap();
        let mut st = IterateState::new(&p, 17).unwrap();
        for k in 0..100u64 {
            let u = SampleStream { seed: 17 }.uniform(k);
            let i = s.sample_row(u);
            let (xbar, ybar) = full_prox_pair(&p, &s, &st.x, &st.y).unwrap();
            let (x_exp, y_exp) = sparse_outcome(&p, &s, &st.x, &st.y, &xbar, &ybar, i);
            purecd_sparse_step(&mut st, &s, &p);
            for (a, b) in st.x.iter().zip(&x_exp) {
                assert!((a - b).abs() <= 1e-14, "iteration {k}");
            }
            for (a, b) in st.y.iter().zip(&y_exp) {
                assert!((a - b).abs() <= 1e-14, "iteration {k}");
            }
        }
    }

    #[test]
    fn dense_outcome_moves_all_primal_coordinates() {
        let p = gen_constrained_qp(4, 6, 2, 1.0).unwrap();
        let s = StepSchedule::dense_importance(&p.a, 0.99).unwrap();
        let x = vec![0.3; 6];
        let y = vec![0.1; 4];
        let (xbar, ybar) = full_prox_pair(&p, &s, &x, &y).unwrap();
        let (xn, yn) = dense_outcome(&p, &s, &y, &xbar, &ybar, 2);
        // Dual changed only at row 2.
        for (i, (&a, &b)) in yn.iter().zip(&y).enumerate() {
            if i != 2 {
                assert_eq!(a, b);
            }
        }
        // Coordinates outside J(2) sit exactly at x̄.
        for j in 0..6 {
            if !p.a.row_cols(2).contains(&j) {
                assert_eq!(xn[j], xbar[j]);
            }
        }
    }

    #[test]
    fn reference_file_roundtrip_and_hash_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.json");
        let r = ReferenceFile {
            problem_hash: "abc123".into(),
            x_star: vec![1.0, 2.0],
            y_star: vec![-0.5],
            f_star: Some(3.25),
            method: "kkt".into(),
            achieved_gap: 0.0,
        };
        r.save(&path).unwrap();
        let back = ReferenceFile::load_checked(&path, "abc123").unwrap();
        assert_eq!(back.x_star, r.x_star);
        assert_eq!(back.f_star, Some(3.25));
        assert!(ReferenceFile::load_checked(&path, "zzz").is_err());
    }

    #[test]
    fn identity_with_point_mass_sampling() {
        // A single-row problem makes the expectation trivial: both identity
        // sides reduce to the deterministic update.
        let p = crate::problems::SaddleProblem {
            a: SparseMatrix::build(&[(0, 0, 2.0), (0, 1, 1.0)], 1, 2).unwrap(),
            g: SeparableFunction::uniform(ScalarConvexFn::Quadratic { a: 1.0, b: 0.0 }, 2)
                .unwrap(),
            h_conj: SeparableFunction::uniform(ScalarConvexFn::Quadratic { a: 1.0, b: 0.0 }, 1)
                .unwrap(),
            h_primal: None,
            constraint_set: None,
            mu_g: 1.0,
            mu_h: 1.0,
            reference: None,
        };
        let s = StepSchedule::sparse_convex(&p.a).unwrap();
        let (lhs, rhs) =
            dual_identity_sides(&p, &s, &[0.5, -0.5], &[0.25], &[0.0], &[1.0]).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
