//! Saddle-problem assembly and synthetic instance generators.
//!
//! A problem is the triple (A, g, h*) of
//!
//! ```text
//!     min_x max_y  g(x) + <Ax, y> - h*(y)
//! ```
//!
//! optionally carrying the primal counterpart h (to evaluate the composite
//! objective F(x) = h(Ax) + g(x)), a separable constraint set C (for
//! linearly constrained instances), and a reference solution.

use crate::error::{Error, Result};
use crate::oracle;
use crate::prox::{conjugate_pair, ConjugateFamily, FnSpec, ScalarConvexFn, SeparableFunction};
use crate::sparse::SparseMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One row's constraint component of a separable set C = C_1 x ... x C_n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowConstraint {
    Point(f64),
    Interval(f64, f64),
}

impl RowConstraint {
    /// Euclidean projection of a scalar onto the component.
    pub fn project(&self, z: f64) -> f64 {
        match *self {
            RowConstraint::Point(b) => b,
            RowConstraint::Interval(lo, hi) => z.clamp(lo, hi),
        }
    }
}

/// Known (or high-accuracy) solution of a problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reference {
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub f_star: Option<f64>,
}

/// A bilinearly coupled convex-concave saddle problem.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub a: SparseMatrix,
    /// Separable primal regularizer, length d.
    pub g: SeparableFunction,
    /// Separable conjugate h*, length n (this is what the dual prox uses).
    pub h_conj: SeparableFunction,
    /// Separable primal h, length n, when representable (for F(x)).
    pub h_primal: Option<SeparableFunction>,
    /// Separable constraint set C for linearly constrained instances.
    pub constraint_set: Option<Vec<RowConstraint>>,
    pub mu_g: f64,
    pub mu_h: f64,
    pub reference: Option<Reference>,
}

impl SaddleProblem {
    pub fn n(&self) -> usize {
        self.a.n_rows
    }

    pub fn d(&self) -> usize {
        self.a.n_cols
    }

    /// Checks structural consistency (lengths, moduli metadata).
    pub fn validate(&self) -> Result<()> {
        if self.g.len() != self.d() {
            return Err(Error::DimensionMismatch { expected: self.d(), got: self.g.len() });
        }
        if self.h_conj.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: self.h_conj.len() });
        }
        if (self.mu_g - self.g.mu()).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "mu_g {} does not match g.mu() {}",
                self.mu_g,
                self.g.mu()
            )));
        }
        if (self.mu_h - self.h_conj.mu()).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "mu_h {} does not match h_conj.mu() {}",
                self.mu_h,
                self.h_conj.mu()
            )));
        }
        Ok(())
    }

    /// L(x, y) = g(x) + <Ax, y> - h*(y); `None` when either separable part
    /// is +infinity at its argument.
    pub fn lagrangian(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        let gx = self.g.eval(x)?;
        let hy = self.h_conj.eval(y)?;
        let ax = self.a.matvec(x).ok()?;
        let coupling: f64 = ax.iter().zip(y).map(|(&a, &b)| a * b).sum();
        Some(gx + coupling - hy)
    }

    /// F(x) = sum_i h_i((Ax)_i) + g(x); requires h_primal.
    pub fn primal_objective(&self, x: &[f64]) -> Result<Option<f64>> {
        let h = self
            .h_primal
            .as_ref()
            .ok_or_else(|| Error::Config("primal objective needs h_primal".into()))?;
        let ax = self.a.matvec(x)?;
        Ok(match (h.eval(&ax), self.g.eval(x)) {
            (Some(hv), Some(gv)) => Some(hv + gv),
            _ => None,
        })
    }
}

/// Compact coordinate-product set Z = X x Y over which the restricted gap
/// is maximized; per-coordinate closed intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactSet {
    pub x_intervals: Vec<(f64, f64)>,
    pub y_intervals: Vec<(f64, f64)>,
}

impl CompactSet {
    /// Box of radius `r` around the origin in both blocks.
    pub fn centered_box(d: usize, n: usize, r: f64) -> Self {
        CompactSet { x_intervals: vec![(-r, r); d], y_intervals: vec![(-r, r); n] }
    }

    /// Default radius rule: R = 2·(1 + ||x0 - x*||_inf + ||y0 - y*||_inf)
    /// around the origin; guarantees the reference saddle lies inside when
    /// starting from x0 = y0 = 0.
    pub fn default_for(problem: &SaddleProblem, x0: &[f64], y0: &[f64]) -> Result<Self> {
        let reference = problem
            .reference
            .as_ref()
            .ok_or_else(|| Error::Config("default compact set needs a reference solution".into()))?;
        let inf_norm = |a: &[f64], b: &[f64]| {
            a.iter().zip(b).map(|(&u, &v)| (u - v).abs()).fold(0.0, f64::max)
        };
        let r = 2.0 * (1.0 + inf_norm(x0, &reference.x_star) + inf_norm(y0, &reference.y_star));
        // Shift so the start point is also well inside.
        let center_r = r + x0.iter().chain(y0).map(|t| t.abs()).fold(0.0, f64::max);
        Ok(Self::centered_box(problem.d(), problem.n(), center_r))
    }

    /// D_Z = max over Z of ||x - x0||^2 + ||y - y0||^2 (attained at a
    /// corner of the box).
    pub fn d_z(&self, x0: &[f64], y0: &[f64]) -> f64 {
        let corner = |ivs: &[(f64, f64)], c: &[f64]| -> f64 {
            ivs.iter()
                .zip(c)
                .map(|(&(lo, hi), &t)| {
                    let a = (lo - t).abs();
                    let b = (hi - t).abs();
                    a.max(b).powi(2)
                })
                .sum::<f64>()
        };
        corner(&self.x_intervals, x0) + corner(&self.y_intervals, y0)
    }

    pub fn contains(&self, x: &[f64], y: &[f64]) -> bool {
        let inside = |ivs: &[(f64, f64)], v: &[f64]| {
            ivs.iter().zip(v).all(|(&(lo, hi), &t)| t >= lo && t <= hi)
        };
        inside(&self.x_intervals, x) && inside(&self.y_intervals, y)
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms from the counter stream.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random sparse matrix with the given density, patched so that every row
/// and every column has at least one structural nonzero.
fn random_sparse(rng: &mut ChaCha8Rng, n: usize, d: usize, density: f64) -> SparseMatrix {
    let mut entries = std::collections::BTreeSet::new();
    for i in 0..n {
        for j in 0..d {
            if rng.random::<f64>() < density {
                entries.insert((i, j));
            }
        }
    }
    for i in 0..n {
        if !(0..d).any(|j| entries.contains(&(i, j))) {
            entries.insert((i, rng.random_range(0..d)));
        }
    }
    for j in 0..d {
        if !(0..n).any(|i| entries.contains(&(i, j))) {
            entries.insert((rng.random_range(0..n), j));
        }
    }
    let triplets: Vec<(usize, usize, f64)> = entries
        .into_iter()
        .map(|(i, j)| {
            let mut v = standard_normal(rng);
            if v == 0.0 {
                v = 1.0;
            }
            (i, j, v)
        })
        .collect();
    SparseMatrix::build(&triplets, n, d).expect("generated triplets are unique and in range")
}

/// Linearly constrained diagonal QP: min ½x'diag(a)x + c'x  s.t.  Ax = b,
/// written as a saddle problem with h_i* = b_i·v. The reference solution
/// comes from the KKT system, solved by Gaussian elimination.
pub fn gen_constrained_qp(n: usize, d: usize, seed: u64, density: f64) -> Result<SaddleProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51_u64.rotate_left(17));
    let a = random_sparse(&mut rng, n, d, density);
    let diag: Vec<f64> = (0..d).map(|_| 0.5 + rng.random::<f64>()).collect();
    let c: Vec<f64> = (0..d).map(|_| 0.5 * standard_normal(&mut rng)).collect();
    let x_feas: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
    let b = a.matvec(&x_feas)?;

    let g = SeparableFunction::new(
        diag.iter().zip(&c).map(|(&aj, &cj)| ScalarConvexFn::Quadratic { a: aj, b: cj }).collect(),
    )?;
    let h_conj = SeparableFunction::new(
        b.iter().map(|&bi| ScalarConvexFn::Quadratic { a: 0.0, b: bi }).collect(),
    )?;
    let h_primal = SeparableFunction::new(
        b.iter().map(|&bi| ScalarConvexFn::PointInd { b: bi }).collect(),
    )?;
    let constraint_set = b.iter().map(|&bi| RowConstraint::Point(bi)).collect();

    let (x_star, y_star) = oracle::solve_kkt_qp(&a, &diag, &c, &b)?;
    let f_star = g.eval(&x_star);

    let mu_g = g.mu();
    Ok(SaddleProblem {
        a,
        g,
        h_conj,
        h_primal: Some(h_primal),
        constraint_set: Some(constraint_set),
        mu_g,
        mu_h: 0.0,
        reference: Some(Reference { x_star, y_star, f_star }),
    })
}

/// Hinge-loss ERM: F(x) = (1/n)·sum_i max(0, 1 - b_i <a_i, x>) + (reg/2)||x||².
/// Rows are standard normal, normalized to unit norm; labels come from a
/// planted separator with 10% flips. Conjugate domains are the bounded
/// intervals of length 1/n dictated by the labels. No closed-form
/// reference; the oracle module produces one on demand.
pub fn gen_erm_hinge(n: usize, d: usize, seed: u64, reg: f64) -> Result<SaddleProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe7_u64.rotate_left(29));
    let mut triplets = Vec::with_capacity(n * d);
    let mut rows = vec![vec![0.0; d]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for t in row.iter_mut() {
            *t = standard_normal(&mut rng);
        }
        let norm = row.iter().map(|t| t * t).sum::<f64>().sqrt().max(1e-12);
        for (j, t) in row.iter_mut().enumerate() {
            *t /= norm;
            triplets.push((i, j, *t));
        }
    }
    let a = SparseMatrix::build(&triplets, n, d)?;
    let w: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
    let labels: Vec<f64> = rows
        .iter()
        .map(|row| {
            let margin: f64 = row.iter().zip(&w).map(|(&u, &v)| u * v).sum();
            let label = if margin >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < 0.1 {
                -label
            } else {
                label
            }
        })
        .collect();

    let scale = 1.0 / n as f64;
    let mut h_primal = Vec::with_capacity(n);
    let mut h_conj = Vec::with_capacity(n);
    for &label in &labels {
        let (h, hc) = conjugate_pair(ConjugateFamily::Hinge { label, scale })?;
        h_primal.push(h);
        h_conj.push(hc);
    }
    let g = if reg > 0.0 {
        SeparableFunction::uniform(ScalarConvexFn::Quadratic { a: reg, b: 0.0 }, d)?
    } else {
        SeparableFunction::uniform(ScalarConvexFn::Zero, d)?
    };

    let mu_g = g.mu();
    Ok(SaddleProblem {
        a,
        g,
        h_conj: SeparableFunction::new(h_conj)?,
        h_primal: Some(SeparableFunction::new(h_primal)?),
        constraint_set: None,
        mu_g,
        mu_h: 0.0,
        reference: None,
    })
}

/// Lasso: min_x ½||Ax - b||² + λ||x||_1, with h_i*(v) = ½v² + b_i·v
/// (strongly concave dual, mu_h = 1) and g_j = λ|·|.
pub fn gen_lasso(n: usize, d: usize, seed: u64, lambda: f64, density: f64) -> Result<SaddleProblem> {
    if lambda <= 0.0 {
        return Err(Error::Config(format!("lasso needs lambda > 0, got {lambda}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a_u64.rotate_left(41));
    let a = random_sparse(&mut rng, n, d, density);
    // Planted sparse signal plus small noise.
    let x_plant: Vec<f64> = (0..d)
        .map(|_| if rng.random::<f64>() < 0.2 { standard_normal(&mut rng) } else { 0.0 })
        .collect();
    let mut b = a.matvec(&x_plant)?;
    for t in b.iter_mut() {
        *t += 0.1 * standard_normal(&mut rng);
    }

    let g = SeparableFunction::uniform(ScalarConvexFn::Abs { lambda }, d)?;
    let h_conj = SeparableFunction::new(
        b.iter().map(|&bi| ScalarConvexFn::Quadratic { a: 1.0, b: bi }).collect(),
    )?;
    let h_primal = SeparableFunction::new(
        b.iter().map(|&bi| ScalarConvexFn::ShiftedSquare { b: bi }).collect(),
    )?;

    Ok(SaddleProblem {
        a,
        g,
        h_conj,
        h_primal: Some(h_primal),
        constraint_set: None,
        mu_g: 0.0,
        mu_h: 1.0,
        reference: None,
    })
}

/// Quadratic instance that is strongly convex in x and strongly concave in
/// y: g_j = μ_g/2·t² + c_j·t, h_i* = μ_h/2·v² + b_i·v. The saddle point
/// solves a linear system, so the reference is exact.
pub fn gen_scsc_quadratic(
    n: usize,
    d: usize,
    seed: u64,
    density: f64,
    mu_g: f64,
    mu_h: f64,
) -> Result<SaddleProblem> {
    if mu_g <= 0.0 || mu_h <= 0.0 {
        return Err(Error::Config(format!("need positive moduli, got ({mu_g}, {mu_h})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c_u64.rotate_left(7));
    let a = random_sparse(&mut rng, n, d, density);
    let c: Vec<f64> = (0..d).map(|_| 0.3 * standard_normal(&mut rng)).collect();
    let b: Vec<f64> = (0..n).map(|_| 0.3 * standard_normal(&mut rng)).collect();

    let g = SeparableFunction::new(
        c.iter().map(|&cj| ScalarConvexFn::Quadratic { a: mu_g, b: cj }).collect(),
    )?;
    let h_conj = SeparableFunction::new(
        b.iter().map(|&bi| ScalarConvexFn::Quadratic { a: mu_h, b: bi }).collect(),
    )?;
    // h(z) = (z - b)²/(2 μ_h); representable in the catalog when μ_h = 1.
    let h_primal = if mu_h == 1.0 {
        Some(SeparableFunction::new(
            b.iter().map(|&bi| ScalarConvexFn::ShiftedSquare { b: bi }).collect(),
        )?)
    } else {
        None
    };

    // Saddle: diag(μ_g)x + c + A'y = 0 and Ax - (μ_h y + b) = 0
    // => (μ_g I + A'A/μ_h) x = -c + A'b/μ_h, then y = (Ax - b)/μ_h.
    let atb = a.matvec_t(&b)?;
    let rhs: Vec<f64> = (0..d).map(|j| -c[j] + atb[j] / mu_h).collect();
    let mut m = vec![vec![0.0; d]; d];
    for i in 0..n {
        let cols = a.row_cols(i);
        let vals = a.row_vals(i);
        for (p, &jp) in cols.iter().enumerate() {
            for (q, &jq) in cols.iter().enumerate() {
                m[jp][jq] += vals[p] * vals[q] / mu_h;
            }
        }
    }
    for (j, row) in m.iter_mut().enumerate() {
        row[j] += mu_g;
    }
    let x_star = oracle::solve_dense(&m, &rhs)?;
    let ax = a.matvec(&x_star)?;
    let y_star: Vec<f64> = ax.iter().zip(&b).map(|(&z, &bi)| (z - bi) / mu_h).collect();
    let f_star = {
        let gx = g.eval(&x_star).expect("quadratic g is finite");
        let hx: f64 = ax.iter().zip(&b).map(|(&z, &bi)| (z - bi).powi(2) / (2.0 * mu_h)).sum();
        Some(gx + hx)
    };

    Ok(SaddleProblem {
        a,
        g,
        h_conj,
        h_primal,
        constraint_set: None,
        mu_g,
        mu_h,
        reference: Some(Reference { x_star, y_star, f_star }),
    })
}

/// The 1x1 purely bilinear toy L(x, y) = x·y with unique saddle (0, 0);
/// used for gap-measure demonstrations.
pub fn gen_bilinear_toy() -> SaddleProblem {
    let a = SparseMatrix::build(&[(0, 0, 1.0)], 1, 1).expect("static triplets");
    SaddleProblem {
        a,
        g: SeparableFunction::uniform(ScalarConvexFn::Zero, 1).expect("valid"),
        h_conj: SeparableFunction::uniform(ScalarConvexFn::Zero, 1).expect("valid"),
        // h = (0)* = indicator of {0}.
        h_primal: Some(
            SeparableFunction::uniform(ScalarConvexFn::PointInd { b: 0.0 }, 1).expect("valid"),
        ),
        constraint_set: Some(vec![RowConstraint::Point(0.0)]),
        mu_g: 0.0,
        mu_h: 0.0,
        reference: Some(Reference { x_star: vec![0.0], y_star: vec![0.0], f_star: Some(0.0) }),
    }
}

/// Serialized problem descriptor: either a named generator with its
/// parameters, or an explicit matrix file with per-coordinate function
/// specs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum ProblemSpec {
    ConstrainedQp { n: usize, d: usize, seed: u64, density: f64 },
    ErmHinge { n: usize, d: usize, seed: u64, reg: f64 },
    Lasso {
        n: usize,
        d: usize,
        seed: u64,
        lambda: f64,
        #[serde(default = "default_density")]
        density: f64,
    },
    ScscQuadratic { n: usize, d: usize, seed: u64, density: f64, mu_g: f64, mu_h: f64 },
    BilinearToy,
    Matrix {
        matrix_file: String,
        g: Vec<FnSpec>,
        h_conj: Vec<FnSpec>,
        #[serde(default)]
        h_primal: Option<Vec<FnSpec>>,
    },
}

fn default_density() -> f64 {
    1.0
}

impl ProblemSpec {
    /// Builds the problem; relative matrix paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<SaddleProblem> {
        match self {
            ProblemSpec::ConstrainedQp { n, d, seed, density } => {
                gen_constrained_qp(*n, *d, *seed, *density)
            }
            ProblemSpec::ErmHinge { n, d, seed, reg } => gen_erm_hinge(*n, *d, *seed, *reg),
            ProblemSpec::Lasso { n, d, seed, lambda, density } => {
                gen_lasso(*n, *d, *seed, *lambda, *density)
            }
            ProblemSpec::ScscQuadratic { n, d, seed, density, mu_g, mu_h } => {
                gen_scsc_quadratic(*n, *d, *seed, *density, *mu_g, *mu_h)
            }
            ProblemSpec::BilinearToy => Ok(gen_bilinear_toy()),
            ProblemSpec::Matrix { matrix_file, g, h_conj, h_primal } => {
                let path = base_dir.join(matrix_file);
                let a = SparseMatrix::read_file(&path)?;
                let g = SeparableFunction::new(
                    g.iter().map(FnSpec::to_fn).collect::<Result<Vec<_>>>()?,
                )?;
                let h_conj = SeparableFunction::new(
                    h_conj.iter().map(FnSpec::to_fn).collect::<Result<Vec<_>>>()?,
                )?;
                let h_primal = match h_primal {
                    Some(specs) => Some(SeparableFunction::new(
                        specs.iter().map(FnSpec::to_fn).collect::<Result<Vec<_>>>()?,
                    )?),
                    None => None,
                };
                let (mu_g, mu_h) = (g.mu(), h_conj.mu());
                let p = SaddleProblem {
                    a,
                    g,
                    h_conj,
                    h_primal,
                    constraint_set: None,
                    mu_g,
                    mu_h,
                    reference: None,
                };
                p.validate()?;
                Ok(p)
            }
        }
    }

    /// Stable hash of the canonical descriptor JSON; identifies cached
    /// reference files.
    pub fn hash(&self) -> String {
        use std::hash::{Hash, Hasher};
        let json = serde_json::to_string(self).expect("descriptor serializes");
        let mut h = std::collections::hash_map::DefaultHasher::new();
        json.hash(&mut h);
        format!("{:016x}", h.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constrained_qp_hand_instance() {
        // min ½||x||² s.t. x1 + x2 = 2 has x* = (1,1), y* = -1.
        let a = SparseMatrix::build(&[(0, 0, 1.0), (0, 1, 1.0)], 1, 2).unwrap();
        let (x, y) = oracle::solve_kkt_qp(&a, &[1.0, 1.0], &[0.0, 0.0], &[2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((y[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constrained_qp_origin_case() {
        // b = A·0, c = 0: the unconstrained optimum 0 is feasible.
        let a = SparseMatrix::build(&[(0, 0, 1.0), (0, 1, 1.0)], 1, 2).unwrap();
        let (x, y) = oracle::solve_kkt_qp(&a, &[1.0, 1.0], &[0.0, 0.0], &[0.0]).unwrap();
        assert!(x.iter().all(|&t| t.abs() < 1e-12));
        assert!(y.iter().all(|&t| t.abs() < 1e-12));
    }

    #[test]
    fn constrained_qp_generated_instances_satisfy_kkt() {
        for seed in 0..5 {
            let p = gen_constrained_qp(6, 10, seed, 0.5).unwrap();
            p.validate().unwrap();
            let r = p.reference.as_ref().unwrap();
            let ax = p.a.matvec(&r.x_star).unwrap();
            let b: Vec<f64> = p
                .constraint_set
                .as_ref()
                .unwrap()
                .iter()
                .map(|c| match c {
                    RowConstraint::Point(b) => *b,
                    _ => unreachable!(),
                })
                .collect();
            let feas: f64 =
                ax.iter().zip(&b).map(|(&u, &v)| (u - v) * (u - v)).sum::<f64>().sqrt();
            assert!(feas <= 1e-10, "seed {seed}: ||Ax* - b|| = {feas}");
        }
    }

    #[test]
    fn erm_hinge_properties() {
        let p = gen_erm_hinge(2, 3, 7, 1.0).unwrap();
        p.validate().unwrap();
        assert_eq!(p.mu_g, 1.0);
        // Every conjugate domain is an interval of length 1/n = 1/2
        // touching zero.
        for c in &p.h_conj.components {
            let (lo, hi) = c.domain();
            assert!((hi - lo - 0.5).abs() < 1e-15);
            assert!(lo == 0.0 || hi == 0.0);
        }
        // A large-margin x with reg = 0 has F(x) = 0.
        let p0 = gen_erm_hinge(3, 4, 11, 0.0).unwrap();
        // Find such an x by scaling: margins b_i<a_i, x> grow linearly in
        // the scale when all signs agree with some direction; use the
        // planted structure indirectly by certifying F >= 0 and F(t·x) -> 0
        // for a feasible direction if one exists. Direct check: x solving
        // b_i <a_i, x> >= 1 via least squares on the labeled rows.
        let labels: Vec<f64> = p0
            .h_primal
            .as_ref()
            .unwrap()
            .components
            .iter()
            .map(|c| match c {
                ScalarConvexFn::Hinge { label, .. } => *label,
                _ => unreachable!(),
            })
            .collect();
        // x = t * A' labels gives margins t * sum over rows; pick t large if
        // all Gram-row sums are positive, else skip (depends on seed; this
        // seed has been checked to work).
        let at_labels = p0.a.matvec_t(&labels).unwrap();
        let margins: Vec<f64> = p0
            .a
            .matvec(&at_labels)
            .unwrap()
            .iter()
            .zip(&labels)
            .map(|(&m, &l)| l * m)
            .collect();
        let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_margin > 0.0, "seed 11 must give a separable Gram direction");
        let t = 1.0 / min_margin;
        let x: Vec<f64> = at_labels.iter().map(|&v| t * v).collect();
        let f = p0.primal_objective(&x).unwrap().unwrap();
        assert!(f.abs() <= 1e-12, "all hinges inactive should give F = 0, got {f}");
    }

    #[test]
    fn lasso_properties() {
        let p = gen_lasso(5, 8, 3, 0.7, 0.6).unwrap();
        p.validate().unwrap();
        assert_eq!(p.mu_h, 1.0);
        assert_eq!(p.mu_g, 0.0);
        assert!(p.a.empty_columns().is_empty());
    }

    #[test]
    fn bilinear_toy_reference() {
        let p = gen_bilinear_toy();
        let r = p.reference.as_ref().unwrap();
        assert_eq!(r.x_star, vec![0.0]);
        assert_eq!(r.y_star, vec![0.0]);
        assert_eq!(p.lagrangian(&[2.0], &[3.0]), Some(6.0));
    }

    #[test]
    fn scsc_reference_is_a_saddle() {
        let p = gen_scsc_quadratic(6, 9, 5, 0.5, 1.0, 1.0).unwrap();
        p.validate().unwrap();
        let r = p.reference.as_ref().unwrap();
        // Stationarity: diag(mu_g)x + c + A'y = 0, Ax - (mu_h y + b) = 0.
        let aty = p.a.matvec_t(&r.y_star).unwrap();
        for (j, comp) in p.g.components.iter().enumerate() {
            let (mu, c) = match comp {
                ScalarConvexFn::Quadratic { a, b } => (*a, *b),
                _ => unreachable!(),
            };
            let grad = mu * r.x_star[j] + c + aty[j];
            assert!(grad.abs() < 1e-9, "x-stationarity residual {grad}");
        }
        let ax = p.a.matvec(&r.x_star).unwrap();
        for (i, comp) in p.h_conj.components.iter().enumerate() {
            let (mu, b) = match comp {
                ScalarConvexFn::Quadratic { a, b } => (*a, *b),
                _ => unreachable!(),
            };
            let grad = ax[i] - (mu * r.y_star[i] + b);
            assert!(grad.abs() < 1e-9, "y-stationarity residual {grad}");
        }
    }

    #[test]
    fn saddle_inequality_on_random_samples() {
        // L(x, y*) >= L(x*, y*) >= L(x*, y) for problems with references.
        let problems =
            [gen_constrained_qp(4, 6, 2, 0.7).unwrap(), gen_scsc_quadratic(5, 7, 9, 0.6, 1.0, 1.0).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for p in &problems {
            let r = p.reference.as_ref().unwrap();
            let l_star = p.lagrangian(&r.x_star, &r.y_star).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> =
                    r.x_star.iter().map(|&t| t + standard_normal(&mut rng)).collect();
                let y: Vec<f64> =
                    r.y_star.iter().map(|&t| t + standard_normal(&mut rng)).collect();
                if let Some(lxy) = p.lagrangian(&x, &r.y_star) {
                    assert!(lxy >= l_star - 1e-8);
                }
                if let Some(lyx) = p.lagrangian(&r.x_star, &y) {
                    assert!(l_star >= lyx - 1e-8);
                }
            }
        }
    }

    #[test]
    fn norm_relations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..10 {
            let n = rng.random_range(2..12);
            let d = rng.random_range(2..12);
            let a = random_sparse(&mut rng, n, d, 0.4);
            let spec = a.spectral_norm();
            let fro = a.frobenius_norm();
            let sum_rows: f64 = a.row_norms.iter().sum();
            let max_row = a.max_row_norm();
            let sn = (n as f64).sqrt();
            assert!(spec <= fro + 1e-10);
            assert!(fro <= sum_rows + 1e-10);
            assert!(sum_rows <= sn * fro + 1e-10);
            assert!(fro / sn <= max_row + 1e-10);
            assert!(max_row <= fro + 1e-10);
        }
    }

    #[test]
    fn compact_set_geometry() {
        let z = CompactSet::centered_box(2, 1, 2.0);
        assert!((z.d_z(&[0.0, 0.0], &[0.0]) - 12.0).abs() < 1e-12);
        assert!(z.contains(&[1.0, -2.0], &[0.0]));
        assert!(!z.contains(&[3.0, 0.0], &[0.0]));
    }

    #[test]
    fn problem_spec_roundtrip_and_hash() {
        let spec = ProblemSpec::Lasso { n: 3, d: 5, seed: 1, lambda: 0.5, density: 0.8 };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec.hash(), back.hash());
        let p = back.build(Path::new(".")).unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.d(), 5);
    }
}
