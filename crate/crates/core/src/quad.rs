//! Adaptive quadrature for the improper integrals that show up throughout the
//! crate: quantile-domain risk integrals, integrability probes, and derivative
//! integrals with unbounded integrands at the support endpoints.
//!
//! Improper pieces are handled by truncation monitoring: infinite tails are
//! extended over doubling windows, endpoint singularities are approached over
//! halving shells, and in both cases integration stops once the increments
//! fall below [`TAIL_TOL`]. If [`MAX_DOUBLINGS`] steps do not reach that
//! point the integral is reported as divergent (or too slow to decide).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Increment threshold for truncation monitoring.
pub const TAIL_TOL: f64 = 1e-10;

/// Maximum number of doubling/halving steps before flagging divergence.
pub const MAX_DOUBLINGS: u32 = 60;

const MAX_SIMPSON_DEPTH: u32 = 40;
const SIMPSON_NODE_BUDGET: u64 = 1 << 16;

/// One step of a truncation monitor: the window integrated, the increment it
/// contributed, and the running total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub lo: f64,
    pub hi: f64,
    pub increment: f64,
    pub partial_sum: f64,
}

/// Audit record of a truncation-monitored integration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut u64,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    *budget = budget.saturating_sub(1);
    if depth == 0 || *budget == 0 || delta.abs() <= 15.0 * tol {
        // Richardson extrapolation of the two halves.
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, budget)
            + simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, budget)
    }
}

/// Adaptive Simpson quadrature on a finite interval with a bounded integrand.
///
/// Non-finite integrand values poison the result with NaN; callers that may
/// hit singularities should use [`integrate_open`] instead. Work is bounded
/// by an internal node budget; when exhausted the current estimate is
/// returned unrefined.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    let mut budget = SIMPSON_NODE_BUDGET;
    simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, MAX_SIMPSON_DEPTH, &mut budget)
}

const MAX_HALVINGS: u32 = 1100;

/// Sums shrinking shells from `from` toward the endpoint `toward`, where each
/// shell halves the remaining gap. Stops when consecutive increments are
/// below [`TAIL_TOL`], or when the increments decay geometrically and the
/// extrapolated remainder is below it; the remainder estimate is added.
/// Non-decaying increments are reported as divergence.
fn endpoint_shells<F: Fn(f64) -> f64>(f: &F, toward: f64, from: f64, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut gap = from - toward; // signed
    let mut outer = from;
    let mut small_streak = 0u32;
    let mut prev_shell = f64::NAN;
    let mut ratios: Vec<f64> = Vec::new();
    let finish = |total: f64, ratios: &[f64], last_shell: f64| -> Result<f64> {
        // floating point cannot halve the gap further; extrapolate the
        // remainder from the observed decay ratio
        let tail = ratios.iter().rev().take(4).copied().collect::<Vec<_>>();
        let r = if tail.is_empty() {
            1.0
        } else {
            let mut t = tail.clone();
            t.sort_by(|a, b| a.partial_cmp(b).unwrap());
            t[t.len() / 2]
        };
        if r > 0.0 && r <= 0.995 && last_shell.is_finite() {
            Ok(total + last_shell * r / (1.0 - r))
        } else {
            Err(Error::Divergent(format!(
                "endpoint contribution near {toward} not Cauchy (increment ratio {r:.4})"
            )))
        }
    };
    for _ in 0..MAX_HALVINGS {
        let next_gap = gap * 0.5;
        let inner = toward + next_gap;
        if inner == outer || inner == toward || next_gap.abs() < 1e-305 {
            return finish(total, &ratios, prev_shell);
        }
        gap = next_gap;
        let shell = adaptive_simpson(f, inner.min(outer), inner.max(outer), tol);
        if !shell.is_finite() {
            return Err(Error::Numeric(format!(
                "integrand non-finite on shell near {toward}"
            )));
        }
        total += shell;
        outer = inner;
        if shell.abs() < TAIL_TOL {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(total);
            }
        } else {
            small_streak = 0;
        }
        if prev_shell.is_finite() && prev_shell != 0.0 {
            let ratio = shell / prev_shell;
            if ratio > 1.05 && ratios.iter().rev().take(8).filter(|r| **r > 1.05).count() >= 7 {
                return Err(Error::Divergent(format!(
                    "integrand grows toward {toward} (increment ratio {ratio:.3})"
                )));
            }
            let stable = ratios
                .last()
                .map(|prev| (ratio - prev).abs() < 0.05)
                .unwrap_or(false);
            if stable && ratio > 0.0 && ratio < 0.99 {
                let remainder = shell * ratio / (1.0 - ratio);
                if remainder.abs() < TAIL_TOL {
                    return Ok(total + remainder);
                }
            }
            ratios.push(ratio);
        }
        prev_shell = shell;
    }
    Err(Error::Divergent(format!(
        "endpoint contribution near {toward} not Cauchy after {MAX_HALVINGS} halvings"
    )))
}

/// Integral over the open interval `(a, b)`; the integrand may be unbounded
/// at either endpoint as long as it stays integrable.
pub fn integrate_open<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric("integrate_open requires finite bounds".into()));
    }
    if a >= b {
        return Ok(0.0);
    }
    let d = 0.25 * (b - a);
    let core = adaptive_simpson(f, a + d, b - d, tol);
    if !core.is_finite() {
        return Err(Error::Numeric(format!(
            "integrand non-finite on [{}, {}]",
            a + d,
            b - d
        )));
    }
    let left = endpoint_shells(f, a, a + d, tol)?;
    let right = endpoint_shells(f, b, b - d, tol)?;
    Ok(core + left + right)
}

fn tail_windows<F: Fn(f64) -> f64>(
    f: &F,
    start: f64,
    direction: f64, // +1.0 for a right tail, -1.0 for a left tail
    tol: f64,
) -> Result<(f64, Trace)> {
    let mut trace = Trace::default();
    let mut total = 0.0;
    let mut prev = start;
    let mut width = 1.0f64.max(start.abs() * f64::EPSILON);
    let mut small_streak = 0u32;
    let mut prev_window = f64::NAN;
    let mut prev_ratio = f64::NAN;
    for k in 0..MAX_DOUBLINGS {
        let next = prev + direction * width;
        let (lo, hi) = if direction > 0.0 { (prev, next) } else { (next, prev) };
        let window = if k == 0 {
            // the integrand may be singular at the finite end of the tail
            integrate_open(f, lo, hi, tol)?
        } else {
            let w = adaptive_simpson(f, lo, hi, tol);
            if !w.is_finite() {
                return Err(Error::Numeric(format!(
                    "integrand non-finite on tail window [{lo}, {hi}]"
                )));
            }
            w
        };
        total += window;
        trace.steps.push(TraceStep {
            lo,
            hi,
            increment: window,
            partial_sum: total,
        });
        if window.abs() < TAIL_TOL {
            small_streak += 1;
            if small_streak >= 2 {
                trace.converged = true;
                return Ok((total, trace));
            }
        } else {
            small_streak = 0;
        }
        // geometric acceleration: stable decay lets the remainder be
        // extrapolated; non-decaying windows keep running into the cap
        if prev_window.is_finite() && prev_window != 0.0 {
            let ratio = window / prev_window;
            if prev_ratio.is_finite()
                && ratio > 0.0
                && ratio < 0.99
                && (ratio - prev_ratio).abs() < 0.02
            {
                let remainder = window * ratio / (1.0 - ratio);
                if remainder.abs() < TAIL_TOL {
                    trace.converged = true;
                    return Ok((total + remainder, trace));
                }
            }
            prev_ratio = ratio;
        }
        prev_window = window;
        prev = next;
        width *= 2.0;
    }
    Err(Error::Divergent(format!(
        "tail toward {} not Cauchy after {MAX_DOUBLINGS} doublings (last increment {:.3e})",
        if direction > 0.0 { "+inf" } else { "-inf" },
        trace.steps.last().map(|s| s.increment).unwrap_or(f64::NAN),
    )))
}

/// `∫_a^∞ f` over doubling windows with a Cauchy increment monitor.
pub fn integrate_right_tail<F: Fn(f64) -> f64>(f: &F, a: f64, tol: f64) -> Result<(f64, Trace)> {
    tail_windows(f, a, 1.0, tol)
}

/// `∫_{-∞}^b f` over doubling windows with a Cauchy increment monitor.
pub fn integrate_left_tail<F: Fn(f64) -> f64>(f: &F, b: f64, tol: f64) -> Result<(f64, Trace)> {
    tail_windows(f, b, -1.0, tol)
}

/// General integral of `f` over `(lo, hi)` where either bound may be
/// infinite. The interior is split at the given points (breakpoints of the
/// integrand), each finite piece is handled by [`integrate_open`], and
/// infinite tails by doubling windows.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    splits: &[f64],
    tol: f64,
) -> Result<f64> {
    if lo >= hi {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("split points must not be NaN"));
    pts.dedup();

    let mut total = 0.0;
    let mut cursor = lo;
    if !lo.is_finite() {
        let first_finite = pts.first().copied().unwrap_or_else(|| {
            if hi.is_finite() {
                hi
            } else {
                0.0
            }
        });
        let (tail, _) = integrate_left_tail(f, first_finite, tol)?;
        total += tail;
        cursor = first_finite;
        if !pts.is_empty() {
            pts.remove(0);
        }
    }
    for p in pts {
        total += integrate_open(f, cursor, p, tol)?;
        cursor = p;
    }
    if hi.is_finite() {
        total += integrate_open(f, cursor, hi, tol)?;
    } else {
        let (tail, _) = integrate_right_tail(f, cursor, tol)?;
        total += tail;
    }
    Ok(total)
}
