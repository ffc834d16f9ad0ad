//! Law-invariant coherent risk measures: distortion risk measures, finite
//! Kusuoka suprema, one-sided moment, expectile, and Haezendonck-Goovaerts
//! evaluators, each usable on raw samples and on distribution functions.
//!
//! The distribution-level distortion value is the quantile-domain integral
//! `-∫_0^1 F^{<-}(t) dg(t)`; on finite discrete laws (including empirical
//! distributions) it reduces to an exact L-statistic with no quadrature
//! error. The x-domain Choquet form is kept as an independent cross-check.

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::quad;

const QUAD_TOL: f64 = 1e-11;
const ROOT_ITERS: u32 = 200;

/// Young function for the Haezendonck-Goovaerts premium: nondecreasing,
/// unbounded, convex on `[0,inf)` with `psi(0+)=0` and `psi(1)=1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum YoungFn {
    /// `psi(u) = u`
    Identity,
    /// `psi(u) = u^p`, `p >= 1`
    Power { p: f64 },
}

impl YoungFn {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid("p", format!("Young exponent must be >= 1, got {p}")));
        }
        Ok(if p == 1.0 { YoungFn::Identity } else { YoungFn::Power { p } })
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            YoungFn::Identity => u,
            YoungFn::Power { p } => u.powf(*p),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            YoungFn::Identity => y,
            YoungFn::Power { p } => y.powf(1.0 / p),
        }
    }
}

/// A law-invariant coherent risk measure with sample-level and
/// distribution-level evaluation rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RiskEvaluator {
    /// Distortion risk measure `rho_g`.
    Distortion(Distortion),
    /// Supremum over a finite family of distortion risk measures.
    KusuokaSup { family: Vec<Distortion> },
    /// `-E[X] + a || (X - E[X])^- ||_p`.
    OneSidedMoment { a: f64, p: f64 },
    /// Minimizer of the asymmetric squared loss at level `alpha in [1/2, 1)`.
    Expectile { alpha: f64 },
    /// `inf_x pi_alpha^psi(-X, x)` over `x` with `P[-X > x] > 0`.
    Haezendonck { psi: YoungFn, alpha: f64 },
}

impl RiskEvaluator {
    /// Distribution-level evaluation `R_rho(F)`.
    pub fn eval_dist(&self, f: &Dist) -> Result<f64> {
        match self {
            RiskEvaluator::Distortion(g) => eval_distortion_risk(g, f),
            RiskEvaluator::KusuokaSup { family } => {
                Ok(kusuoka_sup(family, f, DEFAULT_EPS_ACTIVE)?.value)
            }
            RiskEvaluator::OneSidedMoment { a, p } => one_sided_moment_risk_dist(*a, *p, f),
            RiskEvaluator::Expectile { alpha } => expectile_risk_dist(*alpha, f),
            RiskEvaluator::Haezendonck { psi, alpha } => {
                let atoms = f.atoms().ok_or_else(|| {
                    Error::Domain(
                        "Haezendonck evaluation on distributions requires a discrete law".into(),
                    )
                })?;
                let losses: Vec<(f64, f64)> = atoms.iter().rev().map(|&(x, p)| (-x, p)).collect();
                haezendonck_core(&losses, psi, *alpha)
            }
        }
    }

    /// Sample-level evaluation `rho(X)` on a finite sample. Law-invariance
    /// ties the two rules together: this equals `eval_dist` on the empirical
    /// distribution of the sample.
    pub fn eval_samples(&self, xs: &[f64]) -> Result<f64> {
        if xs.is_empty() {
            return Err(Error::Domain("risk evaluation needs a nonempty sample".into()));
        }
        match self {
            RiskEvaluator::Distortion(g) => eval_empirical_l(g, xs),
            RiskEvaluator::KusuokaSup { family } => {
                if family.is_empty() {
                    return Err(Error::Domain("Kusuoka family must be nonempty".into()));
                }
                let mut best = f64::NEG_INFINITY;
                for g in family {
                    best = best.max(eval_empirical_l(g, xs)?);
                }
                Ok(best)
            }
            RiskEvaluator::OneSidedMoment { a, p } => one_sided_moment_risk_samples(*a, *p, xs),
            RiskEvaluator::Expectile { alpha } => expectile_risk_samples(*alpha, xs),
            RiskEvaluator::Haezendonck { psi, alpha } => haezendonck_risk(psi, *alpha, xs),
        }
    }

    /// The distortion function associated with the measure,
    /// `g_rho(t) = rho(-B_{1,t})`, evaluated through the risk measure itself
    /// on the two-point law (exact, no quadrature).
    pub fn g_rho(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("g_rho defined on [0,1], got {t}")));
        }
        let v = self.eval_dist(&Dist::two_point(t)?)?;
        // root finders can land on negative zero
        Ok(if v == 0.0 { 0.0 } else { v })
    }
}

/// Distortion risk of a distribution: `-∫_0^1 F^{<-}(t) dg(t)`, exact on
/// discrete laws, adaptive quantile-domain quadrature otherwise. Divergent
/// tails surface as an integrability error.
pub fn eval_distortion_risk(g: &Distortion, f: &Dist) -> Result<f64> {
    if let Some(atoms) = f.atoms() {
        let mut cum = 0.0;
        let mut total = 0.0;
        for (x, p) in atoms {
            let lo = g.eval(cum);
            cum += p;
            total += x * (g.eval(cum) - lo);
        }
        return Ok(-total);
    }
    let integrand = |t: f64| f.left_inv(t) * g.rderiv(t).unwrap_or(f64::NAN);
    let splits = g.derivative_kinks();
    let v = quad::integrate(&integrand, 0.0, 1.0, &splits, QUAD_TOL).map_err(|e| match e {
        Error::Divergent(msg) => {
            Error::Divergent(format!("distortion risk integral not convergent: {msg}"))
        }
        other => other,
    })?;
    Ok(-v)
}

/// The x-domain Choquet form
/// `∫_{-inf}^0 g(F(x)) dx - ∫_0^inf (1 - g(F(x))) dx`,
/// retained as an independent cross-check of the quantile-domain path.
pub fn eval_distortion_risk_xdomain(g: &Distortion, f: &Dist) -> Result<f64> {
    let lower = f.lower();
    let upper = f.upper();
    let mut splits: Vec<f64> = f.discontinuity_points();
    splits.extend_from_slice(f.nonsmooth_points());
    for t in g.derivative_kinks() {
        if t > 0.0 && t < 1.0 {
            splits.push(f.left_inv(t));
        }
    }
    let left = if lower >= 0.0 {
        0.0
    } else {
        let h = |x: f64| g.eval(f.cdf(x));
        quad::integrate(&h, lower.max(f64::NEG_INFINITY), 0.0f64.min(upper), &splits, QUAD_TOL)?
    };
    let right = if upper <= 0.0 {
        0.0
    } else {
        let h = |x: f64| 1.0 - g.eval(f.cdf(x));
        quad::integrate(&h, 0.0f64.max(lower), upper, &splits, QUAD_TOL)?
    };
    Ok(left - right)
}

/// Exact L-statistic for the distortion risk of a finite sample:
/// `-sum_i X_(i) [g(i/n) - g((i-1)/n)]`.
pub fn eval_empirical_l(g: &Distortion, xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Domain("empirical L-statistic needs a nonempty sample".into()));
    }
    let mut sorted = xs.to_vec();
    crate::stats::sort_in_place(&mut sorted);
    Ok(eval_empirical_l_sorted(g, &sorted))
}

/// As [`eval_empirical_l`] on an already ascending sample.
pub fn eval_empirical_l_sorted(g: &Distortion, sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut total = 0.0;
    let mut prev = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cur = g.eval((i + 1) as f64 / n);
        total += x * (cur - prev);
        prev = cur;
    }
    -total
}

/// Average Value at Risk at level `alpha in (0,1]`.
pub fn avatr(alpha: f64, f: &Dist) -> Result<f64> {
    eval_distortion_risk(&Distortion::avatr(alpha)?, f)
}

const DEFAULT_EPS_ACTIVE: f64 = 1e-9;

/// Value of a finite Kusuoka supremum together with the member values and
/// the argmax set (members within `eps_active` of the supremum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KusuokaEval {
    pub value: f64,
    pub member_values: Vec<f64>,
    pub argmax: Vec<usize>,
}

/// `sup_g rho_g(F)` over a finite family; a divergent member is reported by
/// index.
pub fn kusuoka_sup(family: &[Distortion], f: &Dist, eps_active: f64) -> Result<KusuokaEval> {
    if family.is_empty() {
        return Err(Error::Domain("Kusuoka family must be nonempty".into()));
    }
    let mut member_values = Vec::with_capacity(family.len());
    for (i, g) in family.iter().enumerate() {
        let v = eval_distortion_risk(g, f)
            .map_err(|e| Error::Divergent(format!("family member {i}: {e}")))?;
        member_values.push(v);
    }
    let value = member_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let argmax = member_values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= value - eps_active)
        .map(|(i, _)| i)
        .collect();
    Ok(KusuokaEval { value, member_values, argmax })
}

// ---- expectile ----------------------------------------------------------

fn validate_expectile_level(alpha: f64) -> Result<()> {
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("expectile level must be in [1/2,1), got {alpha}")));
    }
    Ok(())
}

/// Expectile-based risk of a sample: the root of the first-order condition
/// `alpha E[(Y-x)^+] = (1-alpha) E[(Y-x)^-]` for the loss `Y = -X`.
pub fn expectile_risk_samples(alpha: f64, xs: &[f64]) -> Result<f64> {
    validate_expectile_level(alpha)?;
    if xs.is_empty() {
        return Err(Error::Domain("expectile needs a nonempty sample".into()));
    }
    let losses: Vec<f64> = xs.iter().map(|x| -x).collect();
    let foc = |x: f64| {
        let mut plus = 0.0;
        let mut minus = 0.0;
        for &y in &losses {
            plus += (y - x).max(0.0);
            minus += (x - y).max(0.0);
        }
        let n = losses.len() as f64;
        alpha * plus / n - (1.0 - alpha) * minus / n
    };
    let lo = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    solve_decreasing(foc, lo, hi)
}

/// Expectile-based risk of a distribution, via the cdf integrals
/// `E[(c - X)^+] = ∫_{-inf}^c F` and `E[(X - c)^+] = ∫_c^inf (1 - F)`.
pub fn expectile_risk_dist(alpha: f64, f: &Dist) -> Result<f64> {
    validate_expectile_level(alpha)?;
    if let Some(atoms) = f.atoms() {
        let losses: Vec<f64> = atoms.iter().map(|&(x, _)| -x).collect();
        let weights: Vec<f64> = atoms.iter().map(|&(_, p)| p).collect();
        let foc = move |x: f64| {
            let mut acc = 0.0;
            for (y, w) in losses.iter().zip(&weights) {
                acc += alpha * w * (y - x).max(0.0) - (1.0 - alpha) * w * (x - y).max(0.0);
            }
            acc
        };
        let lo = -f.upper();
        let hi = -f.lower();
        return solve_decreasing(foc, lo, hi);
    }
    // E[((-X) - x)^+] = ∫_{-inf}^{-x} F(u) du, E[((-X) - x)^-] = ∫_{-x}^{inf} (1-F(u)) du
    let plus = |x: f64| -> Result<f64> {
        let h = |u: f64| f.cdf(u);
        quad::integrate(&h, f.lower(), (-x).min(f.upper()), &[], QUAD_TOL)
    };
    let minus = |x: f64| -> Result<f64> {
        let h = |u: f64| 1.0 - f.cdf(u);
        quad::integrate(&h, (-x).max(f.lower()), f.upper(), &[], QUAD_TOL)
    };
    let foc = |x: f64| -> Result<f64> { Ok(alpha * plus(x)? - (1.0 - alpha) * minus(x)?) };
    // expand a bracket around the negated median
    let mut lo = -f.left_inv(0.75);
    let mut hi = -f.left_inv(0.25);
    let mut step = (hi - lo).max(1.0);
    for _ in 0..80 {
        if foc(lo)? > 0.0 {
            break;
        }
        lo -= step;
        step *= 2.0;
    }
    step = (hi - lo).max(1.0);
    for _ in 0..80 {
        if foc(hi)? < 0.0 {
            break;
        }
        hi += step;
        step *= 2.0;
    }
    let g = |x: f64| foc(x).unwrap_or(f64::NAN);
    solve_decreasing(g, lo, hi)
}

/// Bisection for a continuous nonincreasing function with a root in
/// `[lo, hi]`.
fn solve_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    if lo == hi {
        return Ok(lo);
    }
    let scale = 1.0 + lo.abs().max(hi.abs());
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) {
        return Err(Error::Numeric("objective non-finite at the bracket".into()));
    }
    if flo < 0.0 {
        return Ok(lo);
    }
    if fhi > 0.0 {
        return Ok(hi);
    }
    for _ in 0..ROOT_ITERS {
        if hi - lo <= 1e-15 * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(Error::Numeric(format!("objective non-finite at {mid}")));
        }
        if fm >= 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let x = 0.5 * (lo + hi);
    let residual = flo.abs().min(fhi.abs());
    if residual.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numeric(format!("root-find stalled, residual {residual:.3e}")))
    }
}

// ---- one-sided p-th moment ----------------------------------------------

fn validate_osm(a: f64, p: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::invalid("a", format!("must be in (0,1], got {a}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid("p", format!("must be in [1,inf), got {p}")));
    }
    Ok(())
}

/// `-mean + a * (mean of ((x - mean)^-)^p)^{1/p}` on a sample.
pub fn one_sided_moment_risk_samples(a: f64, p: f64, xs: &[f64]) -> Result<f64> {
    validate_osm(a, p)?;
    if xs.is_empty() {
        return Err(Error::Domain("one-sided moment needs a nonempty sample".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let pen: f64 = xs.iter().map(|x| (mean - x).max(0.0).powf(p)).sum::<f64>() / n;
    Ok(-mean + a * pen.powf(1.0 / p))
}

/// Distribution version via quantile quadrature (exact on discrete laws).
pub fn one_sided_moment_risk_dist(a: f64, p: f64, f: &Dist) -> Result<f64> {
    validate_osm(a, p)?;
    if let Some(atoms) = f.atoms() {
        let mean: f64 = atoms.iter().map(|&(x, w)| w * x).sum();
        let pen: f64 = atoms
            .iter()
            .map(|&(x, w)| w * (mean - x).max(0.0).powf(p))
            .sum();
        return Ok(-mean + a * pen.powf(1.0 / p));
    }
    let mean = -eval_distortion_risk(&Distortion::Identity, f)?;
    let integrand = |t: f64| (mean - f.left_inv(t)).max(0.0).powf(p);
    let pen = quad::integrate(&integrand, 0.0, 1.0, &[], QUAD_TOL).map_err(|e| match e {
        Error::Divergent(msg) => Error::Divergent(format!(
            "one-sided moment of order {p} not integrable: {msg}"
        )),
        other => other,
    })?;
    Ok(-mean + a * pen.powf(1.0 / p))
}

// ---- Haezendonck-Goovaerts ----------------------------------------------

/// Haezendonck-Goovaerts risk of a sample: inner Orlicz-premium root, outer
/// golden-section minimization over the candidate threshold with a 64-point
/// grid restart.
pub fn haezendonck_risk(psi: &YoungFn, alpha: f64, xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Domain("Haezendonck risk needs a nonempty sample".into()));
    }
    let n = xs.len() as f64;
    let mut losses: Vec<(f64, f64)> = xs.iter().map(|x| (-x, 1.0 / n)).collect();
    losses.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (y, w) in losses {
        match merged.last_mut() {
            Some(last) if last.0 == y => last.1 += w,
            _ => merged.push((y, w)),
        }
    }
    haezendonck_core(&merged, psi, alpha)
}

/// Weighted-atom core shared by the sample and discrete-distribution paths.
/// `losses` are `(y, w)` pairs for the loss `Y = -X`, ascending in `y`.
fn haezendonck_core(losses: &[(f64, f64)], psi: &YoungFn, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("must be in [0,1), got {alpha}")));
    }
    if losses.is_empty() {
        return Err(Error::Domain("no feasible threshold: empty loss support".into()));
    }
    let y_min = losses[0].0;
    let y_max = losses[losses.len() - 1].0;
    let w_max = losses[losses.len() - 1].1;
    let level = 1.0 - alpha;

    // unique pi > x with  sum_i w_i psi((y_i - x)^+ / (pi - x)) = level
    let premium = |x: f64| -> f64 {
        let excess = y_max - x; // > 0 for feasible x
        let h = |pi: f64| -> f64 {
            losses
                .iter()
                .map(|&(y, w)| {
                    let e = (y - x).max(0.0);
                    if e == 0.0 {
                        0.0
                    } else {
                        w * psi.eval(e / (pi - x))
                    }
                })
                .sum::<f64>()
                - level
        };
        // h is strictly decreasing in pi; bracket from psi bounds
        let hi = x + excess / psi.inverse(level);
        let lo = x + excess / psi.inverse(level / w_max);
        if hi <= lo {
            return hi.max(lo);
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..ROOT_ITERS {
            if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            let mid = 0.5 * (a + b);
            if h(mid) >= 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };

    // outer minimization over x in [y_min - range, y_max)
    let range = (y_max - y_min).max(1.0);
    let lo = y_min - range;
    let hi = y_max - 1e-11 * (1.0 + y_max.abs());
    if hi <= lo {
        return Ok(premium(hi.min(lo)));
    }
    const GRID: usize = 64;
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    let at = |i: usize| lo + (hi - lo) * i as f64 / (GRID - 1) as f64;
    for i in 0..GRID {
        let v = premium(at(i));
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    // golden-section refinement inside the best grid bracket
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(GRID - 1));
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = premium(c);
    let mut fd = premium(d);
    for _ in 0..ROOT_ITERS {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = premium(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = premium(d);
        }
    }
    Ok(best_v.min(fc).min(fd))
}

/// `g_rho(t) = rho(-B_{1,t})` for any evaluator (see
/// [`RiskEvaluator::g_rho`]).
pub fn g_rho_from_measure(ev: &RiskEvaluator, t: f64) -> Result<f64> {
    ev.g_rho(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn distortion_risk_closed_forms() {
        let u = Dist::uniform(0.0, 1.0).unwrap();
        for alpha in [0.1, 0.3, 0.5, 1.0] {
            assert_abs_diff_eq!(avatr(alpha, &u).unwrap(), -alpha / 2.0, epsilon = 1e-9);
        }
        let e = Dist::exponential(1.0).unwrap();
        assert_abs_diff_eq!(
            eval_distortion_risk(&Distortion::Identity, &e).unwrap(),
            -1.0,
            epsilon = 1e-8
        );
        // cash invariance on constants: AV@R of a point mass
        let pm = Dist::point_mass(2.5).unwrap();
        assert_abs_diff_eq!(avatr(0.3, &pm).unwrap(), -2.5, epsilon = 1e-14);
    }

    #[test]
    fn avatr_exponential_closed_form() {
        // (1/alpha) ∫_0^alpha ln(1-s) ds = (1/alpha)(-(1-alpha)ln(1-alpha) - alpha)
        let e = Dist::exponential(1.0).unwrap();
        for alpha in [0.05, 0.2, 0.5] {
            let exact = (-(1.0 - alpha) * (1.0f64 - alpha).ln() - alpha) / alpha;
            assert_abs_diff_eq!(avatr(alpha, &e).unwrap(), exact, epsilon = 1e-8);
        }
    }

    #[test]
    fn empirical_l_statistic() {
        let xs = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(eval_empirical_l(&Distortion::Identity, &xs).unwrap(), -2.0);
        let third = Distortion::avatr(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(eval_empirical_l(&third, &xs).unwrap(), -1.0, epsilon = 1e-12);
        let full = Distortion::avatr(1.0).unwrap();
        assert_abs_diff_eq!(eval_empirical_l(&full, &xs).unwrap(), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn l_statistic_matches_quantile_quadrature_path() {
        // oracle equivalence of the two evaluation paths on empirical laws
        let mut rng = crate::seeds::root_rng(3);
        let gs = [
            Distortion::Identity,
            Distortion::avatr(0.1).unwrap(),
            Distortion::avatr(0.5).unwrap(),
            Distortion::one_sided_moment(0.5, 2.0).unwrap(),
        ];
        for n in [1usize, 7, 40] {
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let emp: Dist = crate::dist::EmpiricalDist::new(&xs).unwrap().into();
            for g in &gs {
                let l = eval_empirical_l(g, &xs).unwrap();
                let q = eval_distortion_risk(g, &emp).unwrap();
                assert_abs_diff_eq!(l, q, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn xdomain_cross_check_on_bounded_support() {
        let u = Dist::uniform(-1.0, 2.0).unwrap();
        for g in [
            Distortion::Identity,
            Distortion::avatr(0.25).unwrap(),
            Distortion::one_sided_moment(0.5, 2.0).unwrap(),
            Distortion::proportional_hazard(0.5).unwrap(),
        ] {
            let q = eval_distortion_risk(&g, &u).unwrap();
            let x = eval_distortion_risk_xdomain(&g, &u).unwrap();
            assert_abs_diff_eq!(q, x, epsilon = 1e-7);
        }
    }

    #[test]
    fn divergent_tail_is_flagged() {
        // Pareto with shape 1 has no mean
        let p = Dist::pareto(1.0, 1.0).unwrap();
        assert!(matches!(
            eval_distortion_risk(&Distortion::Identity, &p),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn kusuoka_sup_behaviour() {
        let u = Dist::uniform(0.0, 1.0).unwrap();
        let id = Distortion::Identity;
        let half = Distortion::avatr(0.5).unwrap();

        let single = kusuoka_sup(std::slice::from_ref(&id), &u, 1e-9).unwrap();
        assert_abs_diff_eq!(
            single.value,
            eval_distortion_risk(&id, &u).unwrap(),
            epsilon = 1e-12
        );

        let pair = kusuoka_sup(&[id.clone(), half.clone()], &u, 1e-9).unwrap();
        assert_abs_diff_eq!(pair.value, -0.25, epsilon = 1e-9);
        assert_eq!(pair.argmax, vec![1]);

        let dup = kusuoka_sup(&[half.clone(), half.clone()], &u, 1e-9).unwrap();
        assert_abs_diff_eq!(dup.value, pair.value, epsilon = 1e-12);
        assert_eq!(dup.argmax, vec![0, 1]);

        assert!(kusuoka_sup(&[], &u, 1e-9).is_err());

        // the sup dominates each member
        let fam = [id, half, Distortion::avatr(0.1).unwrap()];
        let all = kusuoka_sup(&fam, &u, 1e-9).unwrap();
        for v in &all.member_values {
            assert!(all.value >= *v - 1e-12);
        }
    }

    #[test]
    fn expectile_symmetric_case_is_negative_mean() {
        let xs = [0.3, -1.2, 2.0, 0.7, -0.4];
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert_abs_diff_eq!(
            expectile_risk_samples(0.5, &xs).unwrap(),
            -mean,
            epsilon = 1e-12
        );
    }

    #[test]
    fn expectile_two_point_matches_closed_form() {
        // rho(-B_{1,t}) = alpha t / (1-alpha+t(2 alpha - 1))
        let alpha = 0.75;
        for t in [0.1, 0.5, 0.9] {
            let d = Dist::two_point(t).unwrap();
            let v = expectile_risk_dist(alpha, &d).unwrap();
            let formula = alpha * t / (1.0 - alpha + t * (2.0 * alpha - 1.0));
            assert_abs_diff_eq!(v, formula, epsilon = 1e-10);
        }
        // sample version on {-1, 0} with equal weight equals g_rho(1/2)
        let v = expectile_risk_samples(0.75, &[-1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(v, 0.75, epsilon = 1e-10);
    }

    #[test]
    fn expectile_monotone_in_level() {
        let xs = [1.0, -0.3, 0.2, 2.4, -1.7, 0.9];
        let lo = expectile_risk_samples(0.6, &xs).unwrap();
        let hi = expectile_risk_samples(0.9, &xs).unwrap();
        assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn expectile_dist_continuous_case() {
        // symmetric law: expectile at 1/2 is the negative mean
        let nrm = Dist::normal(1.5, 2.0).unwrap();
        assert_abs_diff_eq!(expectile_risk_dist(0.5, &nrm).unwrap(), -1.5, epsilon = 1e-6);
        // against a large-sample Monte Carlo root
        let mut rng = crate::seeds::root_rng(99);
        let xs = nrm.sample_n(200_000, &mut rng);
        let mc = expectile_risk_samples(0.8, &xs).unwrap();
        let qd = expectile_risk_dist(0.8, &nrm).unwrap();
        assert!((mc - qd).abs() < 0.02, "{mc} vs {qd}");
    }

    #[test]
    fn one_sided_moment_values() {
        // constant position: penalty vanishes
        let c = [1.7, 1.7, 1.7];
        assert_abs_diff_eq!(
            one_sided_moment_risk_samples(0.8, 2.0, &c).unwrap(),
            -1.7,
            epsilon = 1e-12
        );
        // two-point hand evaluation
        assert_abs_diff_eq!(
            one_sided_moment_risk_samples(1.0, 1.0, &[-1.0, 1.0]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        // rho(-B_{1,t}) = t + a(1-t)t^{1/p}
        let (a, p) = (0.5, 2.0);
        for t in [0.25, 0.5, 0.8] {
            let d = Dist::two_point(t).unwrap();
            let v = one_sided_moment_risk_dist(a, p, &d).unwrap();
            assert_abs_diff_eq!(v, t + a * (1.0 - t) * t.powf(1.0 / p), epsilon = 1e-12);
        }
    }

    #[test]
    fn haezendonck_constant_sample_is_cash() {
        for alpha in [0.0, 0.3, 0.9] {
            let v = haezendonck_risk(&YoungFn::Identity, alpha, &[2.0, 2.0, 2.0]).unwrap();
            assert_abs_diff_eq!(v, -2.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn haezendonck_alpha_zero_against_grid_oracle() {
        // psi = identity, alpha = 0: pi(x) = x + E[(-X-x)^+]; brute-force the
        // infimum on a dense grid
        let xs = [0.5, -1.0, 2.0, 0.1, -0.7];
        let v = haezendonck_risk(&YoungFn::Identity, 0.0, &xs).unwrap();
        let losses: Vec<f64> = xs.iter().map(|x| -x).collect();
        let y_max = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y_min = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let mut oracle = f64::INFINITY;
        for i in 0..200_000 {
            let x = y_min - 1.0 + (y_max - y_min + 1.0 - 1e-9) * i as f64 / 199_999.0;
            let pi = x + losses.iter().map(|y| (y - x).max(0.0)).sum::<f64>() / 5.0;
            oracle = oracle.min(pi);
        }
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-6);
    }

    #[test]
    fn haezendonck_identity_psi_equals_avatr() {
        // with psi(u) = u the infimum is the Rockafellar-Uryasev formula, so
        // the value must match AV@R at level 1 - alpha on the same sample
        let mut rng = crate::seeds::root_rng(17);
        let xs: Vec<f64> = (0..40).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect();
        for alpha in [0.8, 0.95] {
            let hg = haezendonck_risk(&YoungFn::Identity, alpha, &xs).unwrap();
            let av = eval_empirical_l(&Distortion::avatr(1.0 - alpha).unwrap(), &xs).unwrap();
            assert_abs_diff_eq!(hg, av, epsilon = 1e-7);
        }
    }

    #[test]
    fn haezendonck_positive_homogeneity() {
        let psi = YoungFn::power(2.0).unwrap();
        let xs = [0.5, -1.0, 2.0, 0.1, -0.7, 1.3];
        let double: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let v1 = haezendonck_risk(&psi, 0.9, &xs).unwrap();
        let v2 = haezendonck_risk(&psi, 0.9, &double).unwrap();
        assert_abs_diff_eq!(v2, 2.0 * v1, epsilon = 1e-7);
    }

    #[test]
    fn g_rho_endpoints_and_closed_forms() {
        let evaluators: Vec<RiskEvaluator> = vec![
            RiskEvaluator::Distortion(Distortion::avatr(0.3).unwrap()),
            RiskEvaluator::OneSidedMoment { a: 0.5, p: 2.0 },
            RiskEvaluator::Expectile { alpha: 0.75 },
            RiskEvaluator::Haezendonck { psi: YoungFn::power(2.0).unwrap(), alpha: 0.5 },
            RiskEvaluator::KusuokaSup {
                family: vec![Distortion::Identity, Distortion::avatr(0.5).unwrap()],
            },
        ];
        for ev in &evaluators {
            assert_abs_diff_eq!(ev.g_rho(0.0).unwrap(), 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(ev.g_rho(1.0).unwrap(), 1.0, epsilon = 1e-9);
        }
        // spot values from the closed forms
        let osm = RiskEvaluator::OneSidedMoment { a: 0.5, p: 2.0 };
        assert_abs_diff_eq!(osm.g_rho(0.25).unwrap(), 0.4375, epsilon = 1e-10);
        let exp = RiskEvaluator::Expectile { alpha: 0.75 };
        assert_abs_diff_eq!(exp.g_rho(0.5).unwrap(), 0.75, epsilon = 1e-10);
    }

    #[test]
    fn g_rho_closed_forms_on_fine_grid() {
        // 99-point grid, tolerance 1e-8
        let osm = RiskEvaluator::OneSidedMoment { a: 0.5, p: 2.0 };
        let exp = RiskEvaluator::Expectile { alpha: 0.75 };
        for i in 1..100 {
            let t = i as f64 / 100.0;
            let osm_closed = t + 0.5 * (1.0 - t) * t.sqrt();
            assert!((osm.g_rho(t).unwrap() - osm_closed).abs() < 1e-8, "t={t}");
            let exp_closed = 0.75 * t / (0.25 + 0.5 * t);
            assert!((exp.g_rho(t).unwrap() - exp_closed).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn law_invariance_sample_vs_empirical_dist() {
        let mut rng = crate::seeds::root_rng(8);
        let xs: Vec<f64> = (0..25).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
        let emp: Dist = crate::dist::EmpiricalDist::new(&xs).unwrap().into();
        let evaluators: Vec<RiskEvaluator> = vec![
            RiskEvaluator::Distortion(Distortion::avatr(0.2).unwrap()),
            RiskEvaluator::KusuokaSup {
                family: vec![Distortion::Identity, Distortion::avatr(0.4).unwrap()],
            },
            RiskEvaluator::OneSidedMoment { a: 0.7, p: 2.0 },
            RiskEvaluator::Expectile { alpha: 0.8 },
            RiskEvaluator::Haezendonck { psi: YoungFn::power(2.0).unwrap(), alpha: 0.7 },
        ];
        for ev in &evaluators {
            let s = ev.eval_samples(&xs).unwrap();
            let d = ev.eval_dist(&emp).unwrap();
            assert_abs_diff_eq!(s, d, epsilon = 1e-9);
        }
    }

    #[test]
    fn coherence_axioms_spot_checks() {
        let mut rng = crate::seeds::root_rng(21);
        let evaluators: Vec<RiskEvaluator> = vec![
            RiskEvaluator::Distortion(Distortion::avatr(0.25).unwrap()),
            RiskEvaluator::OneSidedMoment { a: 0.5, p: 2.0 },
            RiskEvaluator::Expectile { alpha: 0.7 },
            RiskEvaluator::Haezendonck { psi: YoungFn::power(2.0).unwrap(), alpha: 0.8 },
        ];
        for _ in 0..25 {
            let n = 1 + (rng.random::<f64>() * 30.0) as usize;
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            for ev in &evaluators {
                let rx = ev.eval_samples(&xs).unwrap();
                // cash invariance
                let shifted: Vec<f64> = xs.iter().map(|x| x + 2.5).collect();
                assert_abs_diff_eq!(ev.eval_samples(&shifted).unwrap(), rx - 2.5, epsilon = 1e-9);
                // positive homogeneity
                let scaled: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
                assert_abs_diff_eq!(ev.eval_samples(&scaled).unwrap(), 2.0 * rx, epsilon = 1e-9);
                // monotonicity: ys dominated by xs pointwise
                let dominated: Vec<f64> = xs.iter().map(|x| x - 1.0).collect();
                assert!(ev.eval_samples(&dominated).unwrap() >= rx - 1e-9);
                // subadditivity
                let sum: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x + y).collect();
                let lhs = ev.eval_samples(&sum).unwrap();
                let rhs = rx + ev.eval_samples(&ys).unwrap();
                assert!(lhs <= rhs + 1e-9, "{ev:?}: {lhs} > {rhs}");
            }
        }
    }
}
