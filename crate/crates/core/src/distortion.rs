//! Concave distortion functions `g: [0,1] -> [0,1]` with `g(0)=0`, `g(1)=1`,
//! their right-sided derivatives, and the envelope/derivative bound checks
//! used to sanity-test finite Kusuoka families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A concave, nondecreasing distortion function with closed-form evaluation
/// and right-sided derivative. Values are immutable after construction and
/// safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Distortion {
    /// `g(t) = (t/alpha) ∧ 1`; Average Value at Risk at level `alpha`.
    AvatR { alpha: f64 },
    /// `g(t) = t`; the negative-mean functional.
    Identity,
    /// `g(t) = t + a (1-t) t^{1/p}`; distortion associated with the
    /// one-sided p-th moment risk measure.
    OneSidedMoment { a: f64, p: f64 },
    /// `g(t) = alpha t / (1 - alpha + t (2 alpha - 1))`; distortion
    /// associated with the expectile-based risk measure.
    Expectile { alpha: f64 },
    /// `g(t) = t^beta`, proportional hazard transform.
    ProportionalHazard { beta: f64 },
    /// Piecewise-linear concave interpolant through `(t_i, g_i)` knots.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl Distortion {
    pub fn avatr(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("must be in (0,1], got {alpha}")));
        }
        Ok(Distortion::AvatR { alpha })
    }

    pub fn identity() -> Self {
        Distortion::Identity
    }

    pub fn one_sided_moment(a: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::invalid("a", format!("must be in (0,1], got {a}")));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid("p", format!("must be in [1,inf), got {p}")));
        }
        Ok(Distortion::OneSidedMoment { a, p })
    }

    pub fn expectile(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.5 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("must be in [1/2,1), got {alpha}")));
        }
        Ok(Distortion::Expectile { alpha })
    }

    pub fn proportional_hazard(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta", format!("must be in (0,1], got {beta}")));
        }
        Ok(Distortion::ProportionalHazard { beta })
    }

    /// Breakpoint representation with linear interpolation. Knots must run
    /// from `(0,0)` to `(1,1)` with strictly increasing `t`, nondecreasing
    /// `g`, and nonincreasing slopes; violations reject the input.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("knots", "need at least two knots"));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::invalid(
                "knots",
                format!("must run from (0,0) to (1,1), got {first:?} .. {last:?}"),
            ));
        }
        let mut prev_slope = f64::INFINITY;
        for w in knots.windows(2) {
            let (t0, g0) = w[0];
            let (t1, g1) = w[1];
            if !(t1 > t0) {
                return Err(Error::invalid("knots", format!("t not strictly increasing at {t1}")));
            }
            let slope = (g1 - g0) / (t1 - t0);
            if slope < 0.0 {
                return Err(Error::invalid("knots", format!("g decreasing on [{t0},{t1}]")));
            }
            if slope > prev_slope + 1e-12 {
                return Err(Error::invalid(
                    "knots",
                    format!("not concave: slope increases at t={t0}"),
                ));
            }
            prev_slope = slope;
        }
        Ok(Distortion::Tabulated { knots })
    }

    /// `g(t)` for `t` in `[0,1]` (tiny numeric overshoot is clamped).
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Distortion::AvatR { alpha } => (t / alpha).min(1.0),
            Distortion::Identity => t,
            Distortion::OneSidedMoment { a, p } => t + a * (1.0 - t) * t.powf(1.0 / p),
            Distortion::Expectile { alpha } => {
                alpha * t / (1.0 - alpha + t * (2.0 * alpha - 1.0))
            }
            Distortion::ProportionalHazard { beta } => t.powf(*beta),
            Distortion::Tabulated { knots } => {
                let i = match knots.binary_search_by(|k| k.0.partial_cmp(&t).unwrap()) {
                    Ok(i) => return knots[i].1,
                    Err(i) => i,
                };
                let (t0, g0) = knots[i - 1];
                let (t1, g1) = knots[i];
                g0 + (g1 - g0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Right-sided derivative `g'(t)` for `t` in `[0,1)`. May be `+inf`
    /// (e.g. `t^{1/p}`-type families at 0).
    pub fn rderiv(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!(
                "right derivative defined on [0,1), got t={t}"
            )));
        }
        Ok(match self {
            Distortion::AvatR { alpha } => {
                if t < *alpha {
                    1.0 / alpha
                } else {
                    0.0
                }
            }
            Distortion::Identity => 1.0,
            Distortion::OneSidedMoment { a, p } => {
                // d/dt [t + a(1-t)t^{1/p}] = 1 - a t^{1/p} + (a(1-t)/p) t^{1/p-1}
                if t == 0.0 {
                    if *p > 1.0 {
                        f64::INFINITY
                    } else {
                        1.0 + a
                    }
                } else {
                    1.0 - a * t.powf(1.0 / p) + a * (1.0 - t) / p * t.powf(1.0 / p - 1.0)
                }
            }
            Distortion::Expectile { alpha } => {
                let d = 1.0 - alpha + t * (2.0 * alpha - 1.0);
                alpha * (1.0 - alpha) / (d * d)
            }
            Distortion::ProportionalHazard { beta } => {
                if t == 0.0 && *beta < 1.0 {
                    f64::INFINITY
                } else {
                    beta * t.powf(beta - 1.0)
                }
            }
            Distortion::Tabulated { knots } => {
                // exact slope of the segment to the right of t; equals the
                // limit of the forward difference quotient
                let i = knots.partition_point(|k| k.0 <= t);
                let (t0, g0) = knots[i - 1];
                let (t1, g1) = knots[i];
                (g1 - g0) / (t1 - t0)
            }
        })
    }

    /// Interior `t`-values where `g'` jumps; quadrature in `t` or `x` domain
    /// splits there.
    pub fn derivative_kinks(&self) -> Vec<f64> {
        match self {
            Distortion::AvatR { alpha } if *alpha < 1.0 => vec![*alpha],
            Distortion::Tabulated { knots } => {
                knots[1..knots.len() - 1].iter().map(|k| k.0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Smallest interval `(lo, hi) ⊆ (0,1)` outside of which `g' = 0`.
    pub fn derivative_support(&self) -> (f64, f64) {
        match self {
            Distortion::AvatR { alpha } => (0.0, *alpha),
            Distortion::Tabulated { knots } => {
                let mut hi = 1.0;
                for w in knots.windows(2).rev() {
                    if (w[1].1 - w[0].1) / (w[1].0 - w[0].0) > 0.0 {
                        hi = w[1].0;
                        break;
                    }
                }
                (0.0, hi)
            }
            _ => (0.0, 1.0),
        }
    }

    /// Exponent `beta` with `g(t) ≍ t^beta` as `t -> 0+`, used by the
    /// symbolic integrability diagnostics.
    pub fn small_t_exponent(&self) -> f64 {
        match self {
            Distortion::AvatR { .. } | Distortion::Identity | Distortion::Expectile { .. } => 1.0,
            Distortion::OneSidedMoment { p, .. } => 1.0 / p,
            Distortion::ProportionalHazard { beta } => *beta,
            Distortion::Tabulated { .. } => 1.0,
        }
    }
}

/// Result of checking a finite family against its claimed upper envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionBoundReport {
    pub gamma: f64,
    /// `max_t [ sup_g g'(t) - g_rho(gamma t)/(gamma t) ]`; nonpositive when
    /// the derivative bound holds on the grid.
    pub max_derivative_violation: f64,
    /// grid point attaining the worst derivative violation
    pub worst_t: f64,
    /// `max_t | sup_g g(t) - g_rho(t) |` for families claimed exhaustive.
    pub max_envelope_gap: f64,
}

/// Checks, on a grid in `(0,1)`, that `sup_g g'(t) <= g_rho(gamma t)/(gamma t)`
/// and measures how far `sup_g g` sits from `g_rho`.
pub fn check_distortion_bound(
    family: &[Distortion],
    g_rho: &Distortion,
    gamma: f64,
    grid: &[f64],
) -> Result<DistortionBoundReport> {
    if family.is_empty() {
        return Err(Error::Domain("distortion family must be nonempty".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("must be in (0,1), got {gamma}")));
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_t = f64::NAN;
    let mut max_gap: f64 = 0.0;
    for &t in grid {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(format!("grid point {t} outside (0,1)")));
        }
        let mut sup_deriv = f64::NEG_INFINITY;
        let mut sup_val = f64::NEG_INFINITY;
        for g in family {
            sup_deriv = sup_deriv.max(g.rderiv(t)?);
            sup_val = sup_val.max(g.eval(t));
        }
        let bound = g_rho.eval(gamma * t) / (gamma * t);
        let violation = sup_deriv - bound;
        if violation > max_violation {
            max_violation = violation;
            worst_t = t;
        }
        max_gap = max_gap.max((sup_val - g_rho.eval(t)).abs());
    }
    Ok(DistortionBoundReport {
        gamma,
        max_derivative_violation: max_violation,
        worst_t,
        max_envelope_gap: max_gap,
    })
}
