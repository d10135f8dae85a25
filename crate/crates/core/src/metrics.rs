//! Error measures evaluated at checkpoints: distance to a reference saddle
//! point, primal suboptimality and feasibility for the constrained case,
//! and the restricted primal-dual gap over a compact box.
//!
//! The restricted gap for a separable problem splits into d + n independent
//! one-dimensional concave maximizations, each solved by ternary search on
//! the intersection of the box interval with the function's domain.

use crate::error::{Error, Result};
use crate::problems::{CompactSet, RowConstraint, SaddleProblem};
use serde::{Deserialize, Serialize};

/// Metrics at a single checkpoint. Fields are None when the ingredient
/// needed to compute them (reference point, primal h, box) is absent or
/// the value is not finite at this iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Completed steps.
    pub k: usize,
    /// Cumulative touched-nnz cost.
    pub cost: u64,
    /// Restricted gap sup_{(x',y') ∈ Z} L(x, y') − L(x', y).
    pub gap_restricted: Option<f64>,
    /// F(x) − F★ with F = g + h∘A (signed; nonnegative up to reference
    /// accuracy).
    pub f_subopt: Option<f64>,
    /// |g(x) − g(x★)| (objective error in the constrained formulation).
    pub g_gap_abs: Option<f64>,
    /// dist(Ax, C) for the row-wise constraint set.
    pub feas_dist: Option<f64>,
    /// ‖x − x★‖².
    pub dist_x_sq: Option<f64>,
    /// ‖y − y★‖².
    pub dist_y_sq: Option<f64>,
}

impl MetricsRecord {
    pub const CSV_HEADER: &'static str =
        "k,cost,gap_restricted,f_subopt,g_gap_abs,feas_dist,dist_x_sq,dist_y_sq";

    /// One CSV row; floats carry 17 significant digits, absent values are
    /// written as nan.
    pub fn to_csv_row(&self) -> String {
        fn fmt(v: Option<f64>) -> String {
            match v {
                Some(t) => format!("{t:.16e}"),
                None => "nan".to_string(),
            }
        }
        format!(
            "{},{},{},{},{},{},{},{}",
            self.k,
            self.cost,
            fmt(self.gap_restricted),
            fmt(self.f_subopt),
            fmt(self.g_gap_abs),
            fmt(self.feas_dist),
            fmt(self.dist_x_sq),
            fmt(self.dist_y_sq)
        )
    }
}

/// Names of the per-checkpoint metric columns, for config files and table
/// headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    GapRestricted,
    FSubopt,
    GGapAbs,
    FeasDist,
    DistXSq,
    DistYSq,
}

impl MetricName {
    pub const ALL: [MetricName; 6] = [
        MetricName::GapRestricted,
        MetricName::FSubopt,
        MetricName::GGapAbs,
        MetricName::FeasDist,
        MetricName::DistXSq,
        MetricName::DistYSq,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MetricName::GapRestricted => "gap_restricted",
            MetricName::FSubopt => "f_subopt",
            MetricName::GGapAbs => "g_gap_abs",
            MetricName::FeasDist => "feas_dist",
            MetricName::DistXSq => "dist_x_sq",
            MetricName::DistYSq => "dist_y_sq",
        }
    }

    pub fn get(self, r: &MetricsRecord) -> Option<f64> {
        match self {
            MetricName::GapRestricted => r.gap_restricted,
            MetricName::FSubopt => r.f_subopt,
            MetricName::GGapAbs => r.g_gap_abs,
            MetricName::FeasDist => r.feas_dist,
            MetricName::DistXSq => r.dist_x_sq,
            MetricName::DistYSq => r.dist_y_sq,
        }
    }
}

fn norm2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|t| t * t).sum::<f64>().sqrt()
}

fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

/// The four-point gap kernel G(x', y', x, y) = L(x', y) − L(x, y').
/// None when any Lagrangian term leaves its domain.
pub fn g_value(
    problem: &SaddleProblem,
    x_p: &[f64],
    y_p: &[f64],
    x: &[f64],
    y: &[f64],
) -> Option<f64> {
    Some(problem.lagrangian(x_p, y)? - problem.lagrangian(x, y_p)?)
}

/// g(x), None outside the domain.
pub fn g_objective(problem: &SaddleProblem, x: &[f64]) -> Option<f64> {
    problem.g.eval(x)
}

/// F(x) = g(x) + h(Ax) when the primal h is known.
pub fn primal_value(problem: &SaddleProblem, x: &[f64]) -> Option<f64> {
    let h = problem.h_primal.as_ref()?;
    let ax = problem.a.matvec(x).ok()?;
    Some(problem.g.eval(x)? + h.eval(&ax)?)
}

/// Euclidean distance of Ax to the row-wise constraint set.
pub fn feasibility_distance(problem: &SaddleProblem, x: &[f64]) -> Option<f64> {
    let cons = problem.constraint_set.as_ref()?;
    let ax = problem.a.matvec(x).ok()?;
    Some(norm2(ax.iter().zip(cons).map(|(&v, c)| v - c.project(v))))
}

/// Maximizes the concave map t ↦ c·t − f(t) over [lo, hi] ∩ dom f by
/// ternary search (200 shrink steps), comparing the interior optimum with
/// both endpoints.
fn concave_max(c: f64, f: &crate::prox::ScalarConvexFn, lo: f64, hi: f64) -> Result<f64> {
    let (dlo, dhi) = f.domain();
    let mut lo = lo.max(dlo);
    let mut hi = hi.min(dhi);
    if lo > hi {
        return Err(Error::EmptyDomain { lo, hi });
    }
    let obj = |t: f64| -> f64 {
        match f.eval(t) {
            Some(v) => c * t - v,
            None => f64::NEG_INFINITY,
        }
    };
    let (elo, ehi) = (obj(lo), obj(hi));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if obj(m1) < obj(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    Ok(obj(0.5 * (lo + hi)).max(elo).max(ehi))
}

/// Restricted gap G_Z(x, y) = sup_{(x', y') ∈ Z} L(x, y') − L(x', y).
/// Separates into g(x) + h*(y) plus per-coordinate maxima driven by the
/// coupling vectors Ax and A'y. None when (x, y) is outside the domains.
pub fn restricted_gap(
    problem: &SaddleProblem,
    z: &CompactSet,
    x: &[f64],
    y: &[f64],
) -> Result<Option<f64>> {
    let gx = match problem.g.eval(x) {
        Some(v) => v,
        None => return Ok(None),
    };
    let hy = match problem.h_conj.eval(y) {
        Some(v) => v,
        None => return Ok(None),
    };
    let ax = problem.a.matvec(x)?;
    let aty = problem.a.matvec_t(y)?;
    let mut total = gx + hy;
    for (i, comp) in problem.h_conj.components.iter().enumerate() {
        let (lo, hi) = z.y_intervals[i];
        total += concave_max(ax[i], comp, lo, hi)?;
    }
    for (j, comp) in problem.g.components.iter().enumerate() {
        let (lo, hi) = z.x_intervals[j];
        total += concave_max(-aty[j], comp, lo, hi)?;
    }
    Ok(Some(total))
}

/// Evaluates all available metrics for the pair (x, y) at step k.
pub fn evaluate(
    problem: &SaddleProblem,
    z: Option<&CompactSet>,
    x: &[f64],
    y: &[f64],
    k: usize,
    cost: u64,
) -> MetricsRecord {
    let finite = |v: f64| if v.is_finite() { Some(v) } else { None };
    let (dist_x_sq, dist_y_sq, g_gap_abs, f_subopt) = match &problem.reference {
        Some(r) => {
            let dx2 = sq_dist(x, &r.x_star);
            let dy2 = sq_dist(y, &r.y_star);
            let g_gap = problem.g.eval(x).and_then(|gx| {
                problem.g.eval(&r.x_star).map(|gs| (gx - gs).abs())
            });
            let f_subopt = match r.f_star {
                Some(fs) => primal_value(problem, x).map(|f| f - fs),
                None => None,
            };
            (finite(dx2), finite(dy2), g_gap.and_then(finite), f_subopt.and_then(finite))
        }
        None => (None, None, None, None),
    };
    let feas_dist = feasibility_distance(problem, x).and_then(finite);
    let gap_restricted = match z {
        Some(zz) => restricted_gap(problem, zz, x, y).ok().flatten().and_then(finite),
        None => None,
    };
    MetricsRecord { k, cost, gap_restricted, f_subopt, g_gap_abs, feas_dist, dist_x_sq, dist_y_sq }
}

/// Mean of per-seed restricted gaps (expectation of the max).
pub fn mean_gap(
    problem: &SaddleProblem,
    z: &CompactSet,
    outputs: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let mut acc = 0.0;
    for (x, y) in outputs {
        match restricted_gap(problem, z, x, y)? {
            Some(g) => acc += g,
            None => return Err(Error::Config("iterate outside domain in gap".into())),
        }
    }
    Ok(acc / outputs.len() as f64)
}

/// sup_{(x', y') ∈ Z} E[L(x^K, y') − L(x', y^K)] where the expectation runs
/// over the given per-seed outputs. Linearity lets the sup act on the
/// averaged coupling vectors E[Ax^K], E[A'y^K] and the averaged values
/// E[g(x^K)], E[h*(y^K)].
pub fn max_of_expectation(
    problem: &SaddleProblem,
    z: &CompactSet,
    outputs: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    if outputs.is_empty() {
        return Err(Error::Config("no outputs".into()));
    }
    let s = outputs.len() as f64;
    let mut mean_g = 0.0;
    let mut mean_h = 0.0;
    let mut mean_ax = vec![0.0; problem.n()];
    let mut mean_aty = vec![0.0; problem.d()];
    for (x, y) in outputs {
        mean_g += problem
            .g
            .eval(x)
            .ok_or_else(|| Error::Config("primal iterate outside dom g".into()))?;
        mean_h += problem
            .h_conj
            .eval(y)
            .ok_or_else(|| Error::Config("dual iterate outside dom h*".into()))?;
        for (acc, v) in mean_ax.iter_mut().zip(problem.a.matvec(x)?) {
            *acc += v;
        }
        for (acc, v) in mean_aty.iter_mut().zip(problem.a.matvec_t(y)?) {
            *acc += v;
        }
    }
    mean_g /= s;
    mean_h /= s;
    for v in mean_ax.iter_mut() {
        *v /= s;
    }
    for v in mean_aty.iter_mut() {
        *v /= s;
    }
    let mut total = mean_g + mean_h;
    for (i, comp) in problem.h_conj.components.iter().enumerate() {
        let (lo, hi) = z.y_intervals[i];
        total += concave_max(mean_ax[i], comp, lo, hi)?;
    }
    for (j, comp) in problem.g.components.iter().enumerate() {
        let (lo, hi) = z.x_intervals[j];
        total += concave_max(-mean_aty[j], comp, lo, hi)?;
    }
    Ok(total)
}

/// Least-squares slope of vals against ks (both already transformed by the
/// caller, e.g. log-log for power-law rates).
pub fn fit_slope(ks: &[f64], vals: &[f64]) -> f64 {
    assert_eq!(ks.len(), vals.len());
    assert!(ks.len() >= 2, "need at least two points for a slope");
    let n = ks.len() as f64;
    let mx = ks.iter().sum::<f64>() / n;
    let my = vals.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &b) in ks.iter().zip(vals) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

/// Power-law exponent of metric(k) ∼ k^s over records with k in
/// [k_lo, k_hi]: slope of log10(val) vs log10(k).
pub fn fit_rate(points: &[(usize, f64)], k_lo: usize, k_hi: usize) -> f64 {
    let (ks, vals): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(k, v)| *k >= k_lo && *k <= k_hi && *v > 0.0)
        .map(|&(k, v)| ((k as f64).log10(), v.log10()))
        .unzip();
    fit_slope(&ks, &vals)
}

impl RowConstraint {
    /// Distance contribution helper re-exported for tests.
    pub fn distance(&self, v: f64) -> f64 {
        (v - self.project(v)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_bilinear_toy, gen_constrained_qp, CompactSet};
    use crate::prox::ScalarConvexFn;

    #[test]
    fn concave_max_against_grid() {
        // Frozen cases computed on a 10⁻⁶-step grid:
        //  c = 1,  f = ½t², [−2, 2]: max at t = 1, value ½.
        //  c = 0.3, f = |t| (λ = 1), [−2, 2]: slope < 1, max at 0, value 0.
        //  c = 2,  f = δ_{[−1,1]}, [−3, 3]: max at t = 1, value 2.
        //  c = −2, f = ½t², [0, 3]: max at boundary t = 0, value 0.
        let q = ScalarConvexFn::Quadratic { a: 1.0, b: 0.0 };
        assert!((concave_max(1.0, &q, -2.0, 2.0).unwrap() - 0.5).abs() < 1e-9);
        let ab = ScalarConvexFn::Abs { lambda: 1.0 };
        assert!(concave_max(0.3, &ab, -2.0, 2.0).unwrap().abs() < 1e-9);
        let ind = ScalarConvexFn::IntervalInd { lo: -1.0, hi: 1.0 };
        assert!((concave_max(2.0, &ind, -3.0, 3.0).unwrap() - 2.0).abs() < 1e-9);
        assert!(concave_max(-2.0, &q, 0.0, 3.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn concave_max_empty_intersection_rejected() {
        let ind = ScalarConvexFn::IntervalInd { lo: 5.0, hi: 6.0 };
        assert!(concave_max(1.0, &ind, -1.0, 1.0).is_err());
    }

    /// min_x |x| in saddle form: A = [1], g = 0, h* = δ_{[−1,1]}.
    fn abs_toy() -> crate::problems::SaddleProblem {
        crate::problems::SaddleProblem {
            a: crate::sparse::SparseMatrix::build(&[(0, 0, 1.0)], 1, 1).unwrap(),
            g: crate::prox::SeparableFunction::uniform(ScalarConvexFn::Zero, 1).unwrap(),
            h_conj: crate::prox::SeparableFunction::uniform(
                ScalarConvexFn::IntervalInd { lo: -1.0, hi: 1.0 },
                1,
            )
            .unwrap(),
            h_primal: Some(
                crate::prox::SeparableFunction::uniform(ScalarConvexFn::Abs { lambda: 1.0 }, 1)
                    .unwrap(),
            ),
            constraint_set: None,
            mu_g: 0.0,
            mu_h: 0.0,
            reference: None,
        }
    }

    #[test]
    fn gap_zero_at_saddle_positive_elsewhere() {
        let p = abs_toy();
        let z = CompactSet::centered_box(1, 1, 2.0);
        // Saddle of |x| at (0, 0): gap 0 there, positive away from it.
        let g0 = restricted_gap(&p, &z, &[0.0], &[0.0]).unwrap().unwrap();
        assert!(g0.abs() < 1e-9, "gap at saddle: {g0}");
        let g1 = restricted_gap(&p, &z, &[1.0], &[0.5]).unwrap().unwrap();
        assert!(g1 > 0.1, "gap away from saddle: {g1}");
        // The point-constrained toy has its saddle at the origin too.
        let p2 = gen_bilinear_toy();
        let g2 = restricted_gap(&p2, &z, &[0.0], &[0.0]).unwrap().unwrap();
        assert!(g2.abs() < 1e-9, "toy gap at saddle: {g2}");
    }

    #[test]
    fn gap_nonnegative_when_saddle_in_box() {
        let p = gen_constrained_qp(4, 7, 3, 0.9).unwrap();
        let r = p.reference.clone().unwrap();
        let radius = 2.0
            + r.x_star.iter().chain(&r.y_star).fold(0.0f64, |m, &v| m.max(v.abs()));
        let z = CompactSet::centered_box(7, 4, radius);
        for trial in 0..20 {
            let x: Vec<f64> = (0..7).map(|j| 0.1 * ((trial * 7 + j) as f64).sin()).collect();
            let y: Vec<f64> = (0..4).map(|i| 0.1 * ((trial * 4 + i) as f64).cos()).collect();
            let g = restricted_gap(&p, &z, &x, &y).unwrap().unwrap();
            assert!(g >= -1e-9, "trial {trial}: gap {g}");
        }
        let gs = restricted_gap(&p, &z, &r.x_star, &r.y_star).unwrap().unwrap();
        assert!(gs.abs() < 1e-7, "gap at reference: {gs}");
    }

    #[test]
    fn hand_computed_gap_on_toy() {
        // |x| toy with box radius 2:
        // G(x, y) = max_{y'∈[−1,1]}(x·y') + max_{x'∈[−2,2]}(−x'·y)
        //         = |x| + 2|y|.
        let p = abs_toy();
        let z = CompactSet::centered_box(1, 1, 2.0);
        let g = restricted_gap(&p, &z, &[0.7], &[0.5]).unwrap().unwrap();
        assert!((g - 1.7).abs() < 1e-9, "expected |0.7| + 2·|0.5| = 1.7, got {g}");
    }

    #[test]
    fn max_of_expectation_matches_single_seed_gap() {
        let p = abs_toy();
        let z = CompactSet::centered_box(1, 1, 2.0);
        let outputs = vec![(vec![0.7], vec![0.5])];
        let a = max_of_expectation(&p, &z, &outputs).unwrap();
        let b = restricted_gap(&p, &z, &[0.7], &[0.5]).unwrap().unwrap();
        assert!((a - b).abs() < 1e-12);
        // And is dominated by the mean of per-seed gaps (Jensen).
        let outputs2 = vec![(vec![0.7], vec![0.5]), (vec![-0.7], vec![-0.5])];
        let moe = max_of_expectation(&p, &z, &outputs2).unwrap();
        let eom = mean_gap(&p, &z, &outputs2).unwrap();
        assert!(moe <= eom + 1e-12, "{moe} vs {eom}");
    }

    #[test]
    fn gap_matches_two_dimensional_grid_on_toy() {
        // L(x, y) = x·y: the restricted gap over [−1,1]² at (1,1) is 2 by
        // direct 2-D maximization, and scaling the box doubles it.
        let p = gen_bilinear_toy();
        let z = CompactSet::centered_box(1, 1, 1.0);
        let g = restricted_gap(&p, &z, &[1.0], &[1.0]).unwrap().unwrap();
        // Grid-search oracle at resolution 1e-4 on [−1,1]².
        let mut grid_best = f64::NEG_INFINITY;
        let steps = 20_000;
        for t in 0..=steps {
            let u = -1.0 + 2.0 * t as f64 / steps as f64;
            // Separable: max over (x, y) of (1·y − x·1) splits; scan both.
            grid_best = grid_best.max(u);
        }
        let grid = 2.0 * grid_best;
        assert!((g - 2.0).abs() < 1e-9, "gap {g}");
        assert!((g - grid).abs() < 1e-3);
        let z2 = CompactSet::centered_box(1, 1, 2.0);
        let g2 = restricted_gap(&p, &z2, &[1.0], &[1.0]).unwrap().unwrap();
        assert!((g2 - 4.0).abs() < 1e-9, "gap {g2}");
    }

    #[test]
    fn four_point_gap_kernel() {
        let p = gen_bilinear_toy();
        // G((1,1),(1,−1)) = 1·(−1) − 1·1 = −2.
        assert_eq!(g_value(&p, &[1.0], &[1.0], &[1.0], &[-1.0]).unwrap(), -2.0);
        // Antisymmetry on the diagonal.
        assert_eq!(g_value(&p, &[0.3], &[0.7], &[0.3], &[0.7]).unwrap(), 0.0);
        // Against the saddle: G((x★,y★), (x,y)) ≤ 0 for any (x, y).
        for t in 0..20 {
            let x = [(t as f64 * 0.37).sin()];
            let y = [(t as f64 * 0.53).cos()];
            assert!(g_value(&p, &[0.0], &[0.0], &x, &y).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn gap_dominates_saddle_kernel() {
        // gap_restricted(x', y') ≥ max(0, G(x', y', x★, y★)) when the
        // saddle lies inside Z.
        let p = gen_constrained_qp(4, 7, 5, 1.0).unwrap();
        let r = p.reference.clone().unwrap();
        let radius = 2.0
            + r.x_star.iter().chain(&r.y_star).fold(0.0f64, |m, &v| m.max(v.abs()));
        let z = CompactSet::centered_box(7, 4, radius);
        for trial in 0..100 {
            let x: Vec<f64> = (0..7).map(|j| 0.3 * ((trial * 7 + j) as f64).sin()).collect();
            let y: Vec<f64> = (0..4).map(|i| 0.3 * ((trial * 4 + i) as f64).cos()).collect();
            let gap = restricted_gap(&p, &z, &x, &y).unwrap().unwrap();
            let kernel = g_value(&p, &x, &y, &r.x_star, &r.y_star).unwrap();
            assert!(gap >= kernel.max(0.0) - 1e-9, "trial {trial}: {gap} < {kernel}");
        }
    }

    #[test]
    fn jensen_gap_of_average_below_average_gap() {
        // Convexity-concavity of L: the gap at an average of iterates is at
        // most the average of per-iterate gaps.
        let p = gen_constrained_qp(4, 7, 9, 1.0).unwrap();
        let r = p.reference.clone().unwrap();
        let radius = 3.0
            + r.x_star.iter().chain(&r.y_star).fold(0.0f64, |m, &v| m.max(v.abs()));
        let z = CompactSet::centered_box(7, 4, radius);
        for trial in 0..20u64 {
            let pts: Vec<(Vec<f64>, Vec<f64>)> = (0..4)
                .map(|s| {
                    let x = (0..7)
                        .map(|j| 0.4 * ((trial * 31 + s * 7 + j) as f64).sin())
                        .collect();
                    let y = (0..4)
                        .map(|i| 0.4 * ((trial * 17 + s * 5 + i) as f64).cos())
                        .collect();
                    (x, y)
                })
                .collect();
            let mut mean_gap_v = 0.0;
            let mut mx = vec![0.0; 7];
            let mut my = vec![0.0; 4];
            for (x, y) in &pts {
                mean_gap_v += restricted_gap(&p, &z, x, y).unwrap().unwrap() / 4.0;
                for (a, b) in mx.iter_mut().zip(x) {
                    *a += b / 4.0;
                }
                for (a, b) in my.iter_mut().zip(y) {
                    *a += b / 4.0;
                }
            }
            let avg_gap = restricted_gap(&p, &z, &mx, &my).unwrap().unwrap();
            assert!(avg_gap <= mean_gap_v + 1e-9, "trial {trial}: {avg_gap} > {mean_gap_v}");
        }
    }

    #[test]
    fn feasibility_and_objective_metrics() {
        let p = gen_constrained_qp(3, 6, 1, 1.0).unwrap();
        let r = p.reference.clone().unwrap();
        // At the reference: feasible and zero objective error.
        let f = feasibility_distance(&p, &r.x_star).unwrap();
        assert!(f < 1e-9);
        let rec = evaluate(&p, None, &r.x_star, &r.y_star, 5, 123);
        assert_eq!(rec.k, 5);
        assert_eq!(rec.cost, 123);
        assert!(rec.dist_x_sq.unwrap() + rec.dist_y_sq.unwrap() < 1e-12);
        assert!(rec.g_gap_abs.unwrap() < 1e-12);
        assert!(rec.feas_dist.unwrap() < 1e-9);
    }

    #[test]
    fn slope_fit_recovers_exact_power_law() {
        // val = 7·k⁻¹ has log-log slope −1 exactly.
        let pts: Vec<(usize, f64)> = (1..=100).map(|k| (k, 7.0 / k as f64)).collect();
        let s = fit_rate(&pts, 1, 100);
        assert!((s + 1.0).abs() < 1e-12, "slope {s}");
        // val = 3·k⁻² → slope −2.
        let pts: Vec<(usize, f64)> = (1..=100).map(|k| (k, 3.0 / (k * k) as f64)).collect();
        let s = fit_rate(&pts, 1, 100);
        assert!((s + 2.0).abs() < 1e-12, "slope {s}");
        // Window restriction ignores out-of-range points.
        let mut pts: Vec<(usize, f64)> = (10..=100).map(|k| (k, 7.0 / k as f64)).collect();
        pts.push((1, 1e9));
        let s = fit_rate(&pts, 10, 100);
        assert!((s + 1.0).abs() < 1e-12, "slope {s}");
    }

    #[test]
    fn csv_row_has_full_precision() {
        let rec = MetricsRecord {
            k: 3,
            cost: 9,
            gap_restricted: Some(1.0 / 3.0),
            f_subopt: None,
            g_gap_abs: None,
            feas_dist: Some(2.0),
            dist_x_sq: None,
            dist_y_sq: None,
        };
        let row = rec.to_csv_row();
        assert!(row.starts_with("3,9,3.3333333333333331e-1,nan"));
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), MetricsRecord::CSV_HEADER.split(',').count());
        let back: f64 = fields[2].parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }
}
