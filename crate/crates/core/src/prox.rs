//! Scalar and separable proximal operators.
//!
//! Every family here has a closed-form prox; there is no iterative inner
//! solver, which keeps the per-coordinate cost of the solvers O(1).
//! Extended values (+inf outside an indicator's domain) are reported by
//! `eval` returning `None`; the prox formulas themselves never do
//! floating-point arithmetic with infinities.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A scalar convex function from the catalog, with strong-convexity
/// metadata. Conventions:
///
/// - `Quadratic { a, b }` is `a/2·t² + b·t` with `a ≥ 0` (modulus `a`).
/// - `Abs { lambda }` is `λ|t|`; prox is soft thresholding, ties at the
///   kink resolve to 0.
/// - `IntervalInd { lo, hi }` is the indicator of `[lo, hi]`; prox clamps.
/// - `PointInd { b }` is the indicator of `{b}`.
/// - `LinearInterval { c, lo, hi }` is `c·t + δ_[lo,hi](t)`.
/// - `ShiftedSquare { b }` is `½(t−b)²` (modulus 1).
/// - `Hinge { label, scale }` is `scale·max(0, 1 − label·t)`, `label = ±1`;
///   it represents the primal counterpart of the hinge conjugate.
/// - `SupportInterval { lo, hi }` is `max(lo·t, hi·t)`, the support
///   function of `[lo, hi]` (conjugate of the interval indicator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarConvexFn {
    Zero,
    Quadratic { a: f64, b: f64 },
    Abs { lambda: f64 },
    IntervalInd { lo: f64, hi: f64 },
    PointInd { b: f64 },
    LinearInterval { c: f64, lo: f64, hi: f64 },
    ShiftedSquare { b: f64 },
    Hinge { label: f64, scale: f64 },
    SupportInterval { lo: f64, hi: f64 },
}

use ScalarConvexFn::*;

impl ScalarConvexFn {
    /// Checks parameter validity (nonempty domains, nonnegative curvature).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Quadratic { a, .. } if a < 0.0 => {
                Err(Error::Config(format!("quadratic with negative curvature a={a}")))
            }
            Abs { lambda } if lambda < 0.0 => {
                Err(Error::Config(format!("absolute value with negative weight {lambda}")))
            }
            IntervalInd { lo, hi } | LinearInterval { lo, hi, .. } | SupportInterval { lo, hi }
                if lo > hi =>
            {
                Err(Error::EmptyDomain { lo, hi })
            }
            Hinge { label, scale } => {
                if label != 1.0 && label != -1.0 {
                    return Err(Error::Config(format!("hinge label must be ±1, got {label}")));
                }
                if scale < 0.0 {
                    return Err(Error::Config(format!("hinge with negative scale {scale}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Strong-convexity modulus.
    pub fn mu(&self) -> f64 {
        match *self {
            Quadratic { a, .. } => a,
            ShiftedSquare { .. } => 1.0,
            _ => 0.0,
        }
    }

    /// When this function is a conjugate `h_i*` with bounded domain, the
    /// primal counterpart `h_i` is Lipschitz with this constant
    /// (`sup{|v| : v ∈ dom h_i*}`); `None` otherwise.
    pub fn lipschitz(&self) -> Option<f64> {
        match *self {
            IntervalInd { lo, hi } | LinearInterval { lo, hi, .. } => Some(lo.abs().max(hi.abs())),
            PointInd { b } => Some(b.abs()),
            _ => None,
        }
    }

    /// Effective domain as `(lo, hi)`; infinite endpoints mean unbounded.
    pub fn domain(&self) -> (f64, f64) {
        match *self {
            IntervalInd { lo, hi } | LinearInterval { lo, hi, .. } => (lo, hi),
            PointInd { b } => (b, b),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Function value; `None` encodes +infinity (outside an indicator's
    /// domain). Membership uses a tiny absolute tolerance so that iterates
    /// produced by clamping proxes evaluate finitely.
    pub fn eval(&self, t: f64) -> Option<f64> {
        const DOMAIN_TOL: f64 = 1e-12;
        match *self {
            Zero => Some(0.0),
            Quadratic { a, b } => Some(0.5 * a * t * t + b * t),
            Abs { lambda } => Some(lambda * t.abs()),
            IntervalInd { lo, hi } => {
                if t >= lo - DOMAIN_TOL && t <= hi + DOMAIN_TOL {
                    Some(0.0)
                } else {
                    None
                }
            }
            PointInd { b } => {
                if (t - b).abs() <= DOMAIN_TOL * (1.0 + b.abs()) {
                    Some(0.0)
                } else {
                    None
                }
            }
            LinearInterval { c, lo, hi } => {
                if t >= lo - DOMAIN_TOL && t <= hi + DOMAIN_TOL {
                    Some(c * t)
                } else {
                    None
                }
            }
            ShiftedSquare { b } => Some(0.5 * (t - b) * (t - b)),
            Hinge { label, scale } => Some(scale * (1.0 - label * t).max(0.0)),
            SupportInterval { lo, hi } => Some((lo * t).max(hi * t)),
        }
    }

    /// `argmin_u f(u) + (u − v)² / (2τ)`, `τ > 0`.
    pub fn prox(&self, tau: f64, v: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::NonpositiveStep { tau });
        }
        self.validate()?;
        Ok(self.prox_raw(tau, v))
    }

    /// Prox without revalidating parameters; callers must have validated.
    pub(crate) fn prox_raw(&self, tau: f64, v: f64) -> f64 {
        match *self {
            Zero => v,
            Quadratic { a, b } => (v - tau * b) / (1.0 + a * tau),
            Abs { lambda } => {
                let shrunk = v.abs() - tau * lambda;
                if shrunk <= 0.0 {
                    0.0
                } else {
                    shrunk * v.signum()
                }
            }
            IntervalInd { lo, hi } => v.clamp(lo, hi),
            PointInd { b } => b,
            LinearInterval { c, lo, hi } => (v - c * tau).clamp(lo, hi),
            ShiftedSquare { b } => (v + tau * b) / (1.0 + tau),
            Hinge { label, scale } => {
                // Piecewise: inactive (bv ≥ 1), linear part, or the kink.
                let b = label;
                if b * v >= 1.0 {
                    v
                } else if b * v <= 1.0 - scale * tau {
                    v + scale * tau * b
                } else {
                    b
                }
            }
            SupportInterval { lo, hi } => v - tau * (v / tau).clamp(lo, hi),
        }
    }
}

/// Coordinatewise sum of scalar convex functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableFunction {
    pub components: Vec<ScalarConvexFn>,
}

impl SeparableFunction {
    pub fn new(components: Vec<ScalarConvexFn>) -> Result<Self> {
        for c in &components {
            c.validate()?;
        }
        Ok(SeparableFunction { components })
    }

    /// Constant function family across all coordinates.
    pub fn uniform(f: ScalarConvexFn, len: usize) -> Result<Self> {
        Self::new(vec![f; len])
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Minimum strong-convexity modulus over components.
    pub fn mu(&self) -> f64 {
        self.components.iter().map(|c| c.mu()).fold(f64::INFINITY, f64::min).min(f64::INFINITY)
    }

    /// Sum of component values; `None` if any coordinate is outside its
    /// domain (+infinity).
    pub fn eval(&self, v: &[f64]) -> Option<f64> {
        debug_assert_eq!(v.len(), self.components.len());
        let mut acc = 0.0;
        for (c, &t) in self.components.iter().zip(v) {
            acc += c.eval(t)?;
        }
        Some(acc)
    }

    /// Coordinatewise prox with per-coordinate steps.
    pub fn prox_diag(&self, taus: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if taus.len() != self.components.len() || v.len() != self.components.len() {
            return Err(Error::DimensionMismatch { expected: self.components.len(), got: v.len() });
        }
        for &t in taus {
            if t <= 0.0 {
                return Err(Error::NonpositiveStep { tau: t });
            }
        }
        Ok(self
            .components
            .iter()
            .zip(taus.iter().zip(v))
            .map(|(c, (&tau, &t))| c.prox_raw(tau, t))
            .collect())
    }

    /// Prox restricted to a coordinate subset: `out[j]` is overwritten for
    /// `j ∈ subset`, every other coordinate of `out` is left untouched.
    pub fn prox_subset(&self, subset: &[usize], taus: &[f64], v: &[f64], out: &mut [f64]) {
        for &j in subset {
            out[j] = self.components[j].prox_raw(taus[j], v[j]);
        }
    }
}

/// A named conjugate pair from the supported catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateFamily {
    /// `h(z) = ½(z − b)²` ↔ `h*(v) = ½v² + b·v`.
    SquareLoss { b: f64 },
    /// `h(z) = δ_{b}(z)` ↔ `h*(v) = b·v`.
    PointConstraint { b: f64 },
    /// `h(z) = δ_[lo,hi](z)` ↔ `h*(v) = max(lo·v, hi·v)`.
    IntervalConstraint { lo: f64, hi: f64 },
    /// `h(z) = scale·max(0, 1 − label·z)` ↔ `h*(v) = v/label` on the
    /// sign-appropriate interval of length `scale` touching 0.
    Hinge { label: f64, scale: f64 },
    /// `h(z) = λ|z|` ↔ `h*(v) = δ_[−λ,λ](v)`.
    AbsValue { lambda: f64 },
}

/// Returns `(h_i, h_i*)` for a catalog family. Both directions evaluate
/// and have closed-form proxes.
pub fn conjugate_pair(family: ConjugateFamily) -> Result<(ScalarConvexFn, ScalarConvexFn)> {
    let pair = match family {
        ConjugateFamily::SquareLoss { b } => (ShiftedSquare { b }, Quadratic { a: 1.0, b }),
        ConjugateFamily::PointConstraint { b } => (PointInd { b }, Quadratic { a: 0.0, b }),
        ConjugateFamily::IntervalConstraint { lo, hi } => {
            if lo > hi {
                return Err(Error::EmptyDomain { lo, hi });
            }
            (IntervalInd { lo, hi }, SupportInterval { lo, hi })
        }
        ConjugateFamily::Hinge { label, scale } => {
            if label != 1.0 && label != -1.0 {
                return Err(Error::UnsupportedFamily(format!("hinge label {label}")));
            }
            if scale <= 0.0 {
                return Err(Error::UnsupportedFamily(format!("hinge scale {scale}")));
            }
            // h*(v) = v/label, finite on [−scale, 0] for label=+1 and on
            // [0, scale] for label=−1.
            let (lo, hi) = if label > 0.0 { (-scale, 0.0) } else { (0.0, scale) };
            (Hinge { label, scale }, LinearInterval { c: 1.0 / label, lo, hi })
        }
        ConjugateFamily::AbsValue { lambda } => {
            if lambda < 0.0 {
                return Err(Error::UnsupportedFamily(format!("abs weight {lambda}")));
            }
            (Abs { lambda }, IntervalInd { lo: -lambda, hi: lambda })
        }
    };
    Ok(pair)
}

/// Serialized form of a scalar function: `{family, params, scale}`.
/// `scale` multiplies the function and is folded into the parameters where
/// the family permits (indicators ignore positive scaling).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FnSpec {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

impl FnSpec {
    fn param(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("family '{}' missing param '{key}'", self.family)))
    }

    pub fn to_fn(&self) -> Result<ScalarConvexFn> {
        let s = self.scale;
        if s <= 0.0 {
            return Err(Error::Config(format!("scale must be positive, got {s}")));
        }
        let f = match self.family.as_str() {
            "zero" => Zero,
            "quadratic" => Quadratic { a: s * self.param("a")?, b: s * self.param("b")? },
            "abs" => Abs { lambda: s * self.param("lambda")? },
            "interval" => IntervalInd { lo: self.param("lo")?, hi: self.param("hi")? },
            "point" => PointInd { b: self.param("b")? },
            "linear_interval" => LinearInterval {
                c: s * self.param("c")?,
                lo: self.param("lo")?,
                hi: self.param("hi")?,
            },
            "shifted_square" => {
                if s != 1.0 {
                    return Err(Error::Config(
                        "shifted_square does not support scale != 1 (constant offset)".into(),
                    ));
                }
                ShiftedSquare { b: self.param("b")? }
            }
            "hinge" => Hinge { label: self.param("label")?, scale: s * self.param("scale").unwrap_or(1.0) },
            "support_interval" => {
                SupportInterval { lo: s * self.param("lo")?, hi: s * self.param("hi")? }
            }
            other => return Err(Error::UnsupportedFamily(other.to_string())),
        };
        f.validate()?;
        Ok(f)
    }
}
