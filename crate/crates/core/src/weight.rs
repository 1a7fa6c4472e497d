//! State-dependent interaction weight families and their integrals.
//!
//! A weight function maps the squared distance `s = ||x_i - x_j||^2` between
//! two agents to a nonnegative interaction strength `alpha(s)`. Every family
//! here is nonincreasing with `alpha(0)` finite. Families split into two
//! groups:
//!
//! - positive everywhere (`CuckerSmale`, `Constant`): the link set never
//!   changes, only its strength,
//! - compact support (`SmoothedConfidence`, `StepConfidence`, `LinearDecay`):
//!   `alpha(s) > 0` exactly when `s < R^2`, so links appear and disappear as
//!   agents move.
//!
//! The module also provides the staircase function `w(z)` built on a grid of
//! width `r`: a piecewise-linear under-approximation of the integral of
//! `alpha` used by the discrete-time energy functions. `r = 0` means the
//! exact integral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit for [`WeightFunction::integral`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpperLimit {
    Value(f64),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightFunction {
    /// `alpha(s) = h / (1 + s)^beta` with `h > 0`, `beta >= 0`.
    CuckerSmale { h: f64, beta: f64 },
    /// Bounded confidence with a Lipschitz fade-out band of width `eps`:
    /// `alpha = c` on `[0, (radius - eps)^2)`, then `(c/eps)(radius - sqrt(s))`
    /// down to zero at `radius^2`.
    SmoothedConfidence { c: f64, radius: f64, eps: f64 },
    /// Sharp bounded confidence: 1 below `radius^2`, 0 from `radius^2` on.
    StepConfidence { radius: f64 },
    /// `alpha(s) = max(intercept - slope * s, 0)`; support ends at
    /// `intercept / slope`.
    LinearDecay { intercept: f64, slope: f64 },
    /// `alpha(s) = c` everywhere.
    Constant { c: f64 },
}

impl WeightFunction {
    pub fn cucker_smale(h: f64, beta: f64) -> Result<Self> {
        let w = WeightFunction::CuckerSmale { h, beta };
        w.validate()?;
        Ok(w)
    }

    pub fn smoothed_confidence(c: f64, radius: f64, eps: f64) -> Result<Self> {
        let w = WeightFunction::SmoothedConfidence { c, radius, eps };
        w.validate()?;
        Ok(w)
    }

    pub fn step_confidence(radius: f64) -> Result<Self> {
        let w = WeightFunction::StepConfidence { radius };
        w.validate()?;
        Ok(w)
    }

    pub fn linear_decay(intercept: f64, slope: f64) -> Result<Self> {
        let w = WeightFunction::LinearDecay { intercept, slope };
        w.validate()?;
        Ok(w)
    }

    pub fn constant(c: f64) -> Result<Self> {
        let w = WeightFunction::Constant { c };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| {
            Err(Error::InvalidParameter {
                what: "weight function",
                why: why.to_string(),
            })
        };
        match *self {
            WeightFunction::CuckerSmale { h, beta } => {
                if !(h > 0.0) {
                    return bad("h must be positive");
                }
                if !(beta >= 0.0) {
                    return bad("beta must be nonnegative");
                }
            }
            WeightFunction::SmoothedConfidence { c, radius, eps } => {
                if !(c > 0.0) {
                    return bad("c must be positive");
                }
                if !(radius > 0.0) {
                    return bad("radius must be positive");
                }
                if !(eps > 0.0 && eps < radius) {
                    return bad("eps must lie in (0, radius)");
                }
            }
            WeightFunction::StepConfidence { radius } => {
                if !(radius > 0.0) {
                    return bad("radius must be positive");
                }
            }
            WeightFunction::LinearDecay { intercept, slope } => {
                if !(intercept > 0.0) {
                    return bad("intercept must be positive");
                }
                if !(slope > 0.0) {
                    return bad("slope must be positive");
                }
            }
            WeightFunction::Constant { c } => {
                if !(c > 0.0) {
                    return bad("c must be positive");
                }
            }
        }
        Ok(())
    }

    /// Evaluate `alpha(s)` at a squared distance `s >= 0`.
    ///
    /// Compact-support families are exactly zero for `s >= R^2` and positive
    /// strictly below it; the boundary itself maps to zero.
    pub fn evaluate(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(Error::NegativeInput {
                what: "squared distance",
                value: s,
            });
        }
        Ok(match *self {
            WeightFunction::CuckerSmale { h, beta } => h / (1.0 + s).powf(beta),
            WeightFunction::SmoothedConfidence { c, radius, eps } => {
                let inner = (radius - eps) * (radius - eps);
                let outer = radius * radius;
                if s < inner {
                    c
                } else if s < outer {
                    (c / eps) * (radius - s.sqrt())
                } else {
                    0.0
                }
            }
            WeightFunction::StepConfidence { radius } => {
                if s < radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            WeightFunction::LinearDecay { intercept, slope } => (intercept - slope * s).max(0.0),
            WeightFunction::Constant { c } => c,
        })
    }

    /// `alpha(0)`.
    pub fn alpha_zero(&self) -> f64 {
        match *self {
            WeightFunction::CuckerSmale { h, .. } => h,
            WeightFunction::SmoothedConfidence { c, .. } => c,
            WeightFunction::StepConfidence { .. } => 1.0,
            WeightFunction::LinearDecay { intercept, .. } => intercept,
            WeightFunction::Constant { c } => c,
        }
    }

    /// End of the support in squared-distance units (`R^2`), or `None` for
    /// families that are positive everywhere.
    pub fn support_bound_sq(&self) -> Option<f64> {
        match *self {
            WeightFunction::CuckerSmale { .. } | WeightFunction::Constant { .. } => None,
            WeightFunction::SmoothedConfidence { radius, .. }
            | WeightFunction::StepConfidence { radius } => Some(radius * radius),
            WeightFunction::LinearDecay { intercept, slope } => Some(intercept / slope),
        }
    }

    pub fn has_compact_support(&self) -> bool {
        self.support_bound_sq().is_some()
    }

    /// True when `alpha` has a jump (only the sharp step family does); such
    /// weights are restricted to discrete-time laws.
    pub fn is_discontinuous(&self) -> bool {
        matches!(self, WeightFunction::StepConfidence { .. })
    }

    /// Definite integral of `alpha` from 0 to `z` (or to infinity).
    ///
    /// Closed forms everywhere except the smoothed-confidence fade-out band,
    /// which is integrated by adaptive quadrature to absolute tolerance 1e-10
    /// so that a different Lipschitz fade-out can be swapped in without
    /// touching callers. Divergent integrals return `f64::INFINITY`.
    pub fn integral(&self, upper: UpperLimit) -> f64 {
        match upper {
            UpperLimit::Value(z) => {
                debug_assert!(z >= 0.0, "integral upper limit must be nonnegative");
                let z = z.max(0.0);
                match *self {
                    WeightFunction::CuckerSmale { h, beta } => {
                        if (beta - 1.0).abs() < 1e-15 {
                            h * (1.0 + z).ln()
                        } else {
                            h * ((1.0 + z).powf(1.0 - beta) - 1.0) / (1.0 - beta)
                        }
                    }
                    WeightFunction::SmoothedConfidence { c, radius, eps } => {
                        let inner = (radius - eps) * (radius - eps);
                        let outer = radius * radius;
                        let top = z.min(outer);
                        let flat = c * top.min(inner);
                        let band = if top > inner {
                            let f = |s: f64| (c / eps) * (radius - s.sqrt());
                            adaptive_simpson(&f, inner, top, 1e-10)
                        } else {
                            0.0
                        };
                        flat + band
                    }
                    WeightFunction::StepConfidence { radius } => z.min(radius * radius),
                    WeightFunction::LinearDecay { intercept, slope } => {
                        let top = z.min(intercept / slope);
                        intercept * top - 0.5 * slope * top * top
                    }
                    WeightFunction::Constant { c } => c * z,
                }
            }
            UpperLimit::Infinite => match *self {
                WeightFunction::CuckerSmale { h, beta } => {
                    if beta <= 1.0 {
                        f64::INFINITY
                    } else {
                        h / (beta - 1.0)
                    }
                }
                WeightFunction::Constant { .. } => f64::INFINITY,
                // Compact support: the whole mass sits below R^2.
                _ => {
                    let bound = self.support_bound_sq().expect("compact support");
                    self.integral(UpperLimit::Value(bound))
                }
            },
        }
    }
}

/// Grid width for the staircase function; `r = 0` selects the exact integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaircaseParams {
    pub r: f64,
}

impl StaircaseParams {
    pub fn new(r: f64) -> Result<Self> {
        if r < 0.0 {
            return Err(Error::NegativeInput {
                what: "staircase grid width",
                value: r,
            });
        }
        Ok(StaircaseParams { r })
    }

    pub fn exact() -> Self {
        StaircaseParams { r: 0.0 }
    }
}

/// The staircase function
///
/// ```text
/// w(z) = alpha(r) z                                             0 <= z < r
/// w(z) = sum_{s=1..floor(z/r)} alpha(s r) r
///        + alpha(ceil(z/r) r) (z - floor(z/r) r)                z >= r
/// ```
///
/// For `r = 0` this is the exact integral of `alpha` over `[0, z]`. Because
/// `alpha` is sampled at the right end of each cell, `w` under-approximates
/// the integral: `int_r^z alpha <= w(z) <= int_0^z alpha`.
pub fn staircase_w(weight: &WeightFunction, params: StaircaseParams, z: f64) -> Result<f64> {
    if z < 0.0 {
        return Err(Error::NegativeInput {
            what: "staircase argument",
            value: z,
        });
    }
    let r = params.r;
    if r == 0.0 {
        return Ok(weight.integral(UpperLimit::Value(z)));
    }
    if z < r {
        return Ok(weight.evaluate(r)? * z);
    }
    // Integer-safe floor of z / r: the quotient is nudged so that exact grid
    // multiples land on the cell boundary instead of one cell early or late.
    let mut q = (z / r).floor();
    while (q + 1.0) * r <= z {
        q += 1.0;
    }
    while q >= 1.0 && q * r > z {
        q -= 1.0;
    }
    let cells = q as u64;
    let mut sum = 0.0;
    let support = weight.support_bound_sq();
    for s in 1..=cells {
        let grid = s as f64 * r;
        if let Some(bound) = support {
            if grid >= bound {
                // alpha vanishes from this grid point on.
                break;
            }
        }
        sum += weight.evaluate(grid)? * r;
    }
    let frac = z - q * r;
    if frac > 0.0 {
        sum += weight.evaluate((q + 1.0) * r)? * frac;
    }
    Ok(sum)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 48)
}
