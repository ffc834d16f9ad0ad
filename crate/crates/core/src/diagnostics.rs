//! Decidable and numeric diagnostics for the integrability and regularity
//! conditions behind the derivative formulas and the limit theorems:
//!
//! * the weighted tail-integrability condition
//!   `∫ g_rho(gamma F0(x)) / (F0(x) phi(x)) dx < inf`, decided symbolically
//!   through exponent comparison on declared tail classes and probed
//!   numerically over doubling truncations;
//! * the smoothness condition on `F0` (continuously differentiable with
//!   strictly positive density outside a finite exceptional set);
//! * the weight-moment conditions `∫ phi^2 dF0 < inf` (central limit
//!   theorem) and `∫ phi^{1/(1-r)} dF0 < inf` (strong laws at rate `n^r`).
//!
//! Numeric probes cannot prove divergence, so their negative verdict is the
//! honest "diverging-or-slow"; the symbolic path is authoritative where it
//! applies.

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::quad::{self, Trace, TraceStep};
use crate::risk::YoungFn;
use crate::weights::WeightFn;

/// Verdict of a decidable (symbolic) check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
    Undecidable,
}

/// Verdict of a truncation-monitored numeric probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeVerdict {
    Converging,
    DivergingOrSlow,
}

/// One-sided tail behaviour of a distribution function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// the support is bounded on this side
    Bounded,
    /// `F0(x) ~ c |x|^{-kappa}` toward `-inf` (resp. `1-F0` toward `+inf`)
    Power { kappa: f64 },
    /// exponential (or faster) decay
    Exponential,
    /// anything else
    Unknown,
}

/// Declared tail classes of `F0` together with the small-`t` exponent of the
/// associated distortion, `g_rho(t) ≍ t^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailClass {
    pub left: Tail,
    pub right: Tail,
    pub beta: f64,
}

impl TailClass {
    pub fn new(left: Tail, right: Tail, beta: f64) -> Result<Self> {
        for t in [left, right] {
            if let Tail::Power { kappa } = t {
                if !(kappa > 0.0) {
                    return Err(Error::invalid("kappa", format!("must be positive, got {kappa}")));
                }
            }
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta", format!("must be in (0,1], got {beta}")));
        }
        Ok(TailClass { left, right, beta })
    }
}

/// Symbolic decision of the weighted tail-integrability condition through
/// the reduction `∫ F0(x)^{-(1-beta)} / phi_lambda(x) dx < inf` and exponent
/// comparison:
///
/// * compact support: holds for every weight;
/// * left power tail `kappa`: needs `lambda > 1 + kappa (1 - beta)`;
/// * left exponential tail: needs `beta = 1` (then `lambda > 1`);
/// * any unbounded side additionally needs `lambda > 1`.
pub fn tail_integrability_symbolic(tails: &TailClass, lambda: f64) -> Verdict {
    let beta = tails.beta;
    let side = |tail: Tail, is_left: bool| -> Verdict {
        match tail {
            Tail::Bounded => Verdict::Holds,
            Tail::Unknown => Verdict::Undecidable,
            Tail::Power { kappa } => {
                if is_left {
                    if lambda > 1.0 + kappa * (1.0 - beta) {
                        Verdict::Holds
                    } else {
                        Verdict::Fails
                    }
                } else if lambda > 1.0 {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                }
            }
            Tail::Exponential => {
                if is_left && beta < 1.0 {
                    // F0^{-(1-beta)} grows exponentially, no power weight helps
                    Verdict::Fails
                } else if lambda > 1.0 {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                }
            }
        }
    };
    match (side(tails.left, true), side(tails.right, false)) {
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        (Verdict::Undecidable, _) | (_, Verdict::Undecidable) => Verdict::Undecidable,
        _ => Verdict::Holds,
    }
}

/// Numeric probe of a (possibly improper) integral over the support of `F0`
/// with an audit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdict: ProbeVerdict,
    /// accumulated value when the probe converged
    pub value: Option<f64>,
    pub trace: Trace,
}

/// Integrates `g_rho(gamma F0(x)) / (F0(x) phi(x))` over the support of
/// `F0` with truncation monitoring: doubling windows toward infinite
/// endpoints, gap-quartering windows toward finite ones; verdict
/// `Converging` once increments fall below 1e-10 (twice in a row) before 60
/// steps per side.
pub fn probe_integrability<G: Fn(f64) -> f64>(
    g_rho: G,
    f0: &Dist,
    phi: &WeightFn,
    gamma: f64,
) -> Result<ProbeReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("must be in (0,1), got {gamma}")));
    }
    let integrand = |x: f64| {
        let f = f0.cdf(x);
        if f <= 0.0 {
            0.0
        } else {
            g_rho(gamma * f) / (f * phi.eval(x))
        }
    };
    truncation_probe(&integrand, f0.lower(), f0.upper(), f0.left_inv(0.5))
}

/// Shared truncation monitor: integrates outward from `center` to both
/// endpoints, recording one trace step per window.
///
/// Far tails can round the integrand to exact zero (the cdf underflows), so
/// small increments alone do not certify convergence: the side converges
/// only when the increments were also decaying before they vanished.
fn truncation_probe<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, center: f64) -> Result<ProbeReport> {
    let mut trace = Trace::default();
    let mut total = 0.0;
    let mut converged = true;

    for (endpoint, sign) in [(lo, -1.0), (hi, 1.0)] {
        let mut cursor = center;
        let mut small_streak = 0u32;
        let mut side_ok = false;
        if endpoint == center {
            continue;
        }
        let mut width = 1.0f64;
        let mut nonzero: Vec<f64> = Vec::new();
        let decaying = |nonzero: &[f64]| -> bool {
            if nonzero.len() < 2 {
                return true;
            }
            let mut ratios: Vec<f64> = nonzero
                .windows(2)
                .rev()
                .take(4)
                .map(|w| (w[1] / w[0]).abs())
                .collect();
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = ratios[ratios.len() / 2];
            median < 0.95 || nonzero.last().unwrap().abs() < 1e-6
        };
        for _ in 0..quad::MAX_DOUBLINGS {
            let next = if endpoint.is_finite() {
                // quarter the remaining gap toward the finite endpoint
                let gap = endpoint - cursor;
                let n = cursor + 0.75 * gap;
                if n == cursor || (endpoint - n).abs() < 1e-305 {
                    side_ok = decaying(&nonzero);
                    break;
                }
                n
            } else {
                let n = cursor + sign * width;
                width *= 2.0;
                n
            };
            let (a, b) = if next > cursor { (cursor, next) } else { (next, cursor) };
            let inc = quad::adaptive_simpson(f, a, b, 1e-12);
            if !inc.is_finite() {
                converged = false;
                break;
            }
            total += inc;
            trace.steps.push(TraceStep { lo: a, hi: b, increment: inc, partial_sum: total });
            cursor = next;
            if inc != 0.0 {
                nonzero.push(inc);
            }
            if inc.abs() < quad::TAIL_TOL {
                small_streak += 1;
                if small_streak >= 2 {
                    side_ok = decaying(&nonzero);
                    break;
                }
            } else {
                small_streak = 0;
            }
        }
        converged &= side_ok;
    }
    trace.converged = converged;
    Ok(ProbeReport {
        verdict: if converged { ProbeVerdict::Converging } else { ProbeVerdict::DivergingOrSlow },
        value: if converged { Some(total) } else { None },
        trace,
    })
}

fn weight_moment_verdict(f0: &Dist, order: f64, seed: u64) -> Verdict {
    match f0.power_moment_finite(order) {
        Some(true) => Verdict::Holds,
        Some(false) => Verdict::Fails,
        None => {
            // sampling fallback with a doubling-prefix stability monitor
            let mut rng = crate::seeds::root_rng(seed);
            let n = 1_000_000usize;
            let mut partial = Vec::new();
            let mut sum = 0.0;
            let mut next_mark = 1024usize;
            for i in 0..n {
                let x = f0.sample(&mut rng);
                sum += (1.0 + x.abs()).powf(order);
                if i + 1 == next_mark {
                    partial.push(sum / (i + 1) as f64);
                    next_mark *= 2;
                }
            }
            partial.push(sum / n as f64);
            let k = partial.len();
            let tail_growth = partial[k - 1] / partial[k - 3] - 1.0;
            if tail_growth.abs() < 0.02 {
                Verdict::Holds
            } else {
                Verdict::Undecidable
            }
        }
    }
}

/// Moment condition `∫ phi^2 dF0 < inf` for the central limit theorem of
/// the empirical process in the weighted norm.
pub fn clt_weight_check(f0: &Dist, phi: &WeightFn) -> Verdict {
    weight_moment_verdict(f0, 2.0 * phi.lambda(), 0x11CE)
}

/// Moment condition `∫ phi^{1/(1-r)} dF0 < inf` for strong laws with rate
/// `r_n = n^r`, `r in [0, 1/2)`.
pub fn strong_law_weight_check(f0: &Dist, phi: &WeightFn, r: f64) -> Result<Verdict> {
    if !(0.0..0.5).contains(&r) {
        return Err(Error::Domain(format!("rate exponent r must be in [0, 1/2), got {r}")));
    }
    Ok(weight_moment_verdict(f0, phi.lambda() / (1.0 - r), 0x51A3))
}

/// Outcome of the smoothness check on `F0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub verdict: Verdict,
    /// the declared finite exceptional set
    pub exceptional_points: Vec<f64>,
    pub note: Option<String>,
}

/// Checks that `F0` is continuously differentiable with strictly positive
/// density on the interior of its support outside the declared finite
/// exceptional set. Step functions (empirical, discrete) always fail.
pub fn smoothness_check(f0: &Dist) -> SmoothnessReport {
    if f0.is_discrete() {
        return SmoothnessReport {
            verdict: Verdict::Fails,
            exceptional_points: Vec::new(),
            note: Some("step-function cdf".into()),
        };
    }
    if !f0.has_density() {
        return SmoothnessReport {
            verdict: Verdict::Fails,
            exceptional_points: f0.nonsmooth_points().to_vec(),
            note: Some("no density available".into()),
        };
    }
    // density must be strictly positive on the interior, away from the
    // declared exceptional points
    let lo = if f0.lower().is_finite() { f0.lower() } else { f0.left_inv(1e-6) };
    let hi = if f0.upper().is_finite() { f0.upper() } else { f0.left_inv(1.0 - 1e-6) };
    let excl = f0.nonsmooth_points();
    let n = 1024;
    for i in 1..n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        if excl.iter().any(|&e| (x - e).abs() < (hi - lo) / n as f64) {
            continue;
        }
        let d = f0.density(x).unwrap_or(0.0);
        if !(d > 0.0) {
            return SmoothnessReport {
                verdict: Verdict::Fails,
                exceptional_points: excl.to_vec(),
                note: Some(format!("density vanishes near x={x}")),
            };
        }
    }
    SmoothnessReport { verdict: Verdict::Holds, exceptional_points: excl.to_vec(), note: None }
}

/// Small-`t` exponent certificate for the Haezendonck-Goovaerts distortion:
/// from the envelope `g_rho(t) <= 1 ∧ (t + (1-t)/psi^{-1}((1-alpha)/t))`,
/// a Young function bounded by `x^{1/beta}` at infinity yields
/// `g_rho(t) = O(t^beta)`. The test is sufficient only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaezendonckExponent {
    pub beta: f64,
    /// the criterion certifies the bound but cannot refute it
    pub sufficient_condition_only: bool,
}

pub fn haezendonck_small_t_exponent(psi: &YoungFn) -> HaezendonckExponent {
    let beta = match psi {
        YoungFn::Identity => 1.0,
        YoungFn::Power { p } => 1.0 / p,
    };
    HaezendonckExponent { beta, sufficient_condition_only: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::Distortion;

    #[test]
    fn symbolic_bounded_support_always_holds() {
        let t = TailClass::new(Tail::Bounded, Tail::Bounded, 0.5).unwrap();
        for lambda in [0.0, 0.5, 3.0] {
            assert_eq!(tail_integrability_symbolic(&t, lambda), Verdict::Holds);
        }
    }

    #[test]
    fn symbolic_beta_one_reduces_to_weight_integrability() {
        // beta = 1 (expectile / AV@R): condition is ∫ 1/phi < inf, i.e. lambda > 1
        for tail in [Tail::Exponential, Tail::Power { kappa: 2.0 }] {
            let t = TailClass::new(tail, Tail::Exponential, 1.0).unwrap();
            assert_eq!(tail_integrability_symbolic(&t, 1.5), Verdict::Holds);
            assert_eq!(tail_integrability_symbolic(&t, 1.0), Verdict::Fails);
            assert_eq!(tail_integrability_symbolic(&t, 0.5), Verdict::Fails);
        }
    }

    #[test]
    fn symbolic_power_tail_threshold() {
        // left power tail kappa: lambda > 1 + kappa (1 - beta)
        let t = TailClass::new(Tail::Power { kappa: 3.0 }, Tail::Bounded, 0.5).unwrap();
        assert_eq!(tail_integrability_symbolic(&t, 2.6), Verdict::Holds);
        assert_eq!(tail_integrability_symbolic(&t, 2.4), Verdict::Fails);
    }

    #[test]
    fn symbolic_exponential_tail_needs_beta_one() {
        let t = TailClass::new(Tail::Exponential, Tail::Bounded, 0.5).unwrap();
        assert_eq!(tail_integrability_symbolic(&t, 10.0), Verdict::Fails);
    }

    #[test]
    fn symbolic_unknown_tail_is_undecidable() {
        let t = TailClass::new(Tail::Unknown, Tail::Bounded, 0.5).unwrap();
        assert_eq!(tail_integrability_symbolic(&t, 10.0), Verdict::Undecidable);
    }

    #[test]
    fn probe_compact_support_converges() {
        let f0 = Dist::uniform(0.0, 1.0).unwrap();
        let g = Distortion::one_sided_moment(0.5, 2.0).unwrap();
        let rep = probe_integrability(|t| g.eval(t), &f0, &WeightFn::One, 0.5).unwrap();
        assert_eq!(rep.verdict, ProbeVerdict::Converging, "{:?}", rep.trace.steps.len());
        assert!(rep.value.unwrap() > 0.0);
    }

    #[test]
    fn probe_reflected_exponential_identity_diverges() {
        // integrand ~ gamma near -inf: not integrable against phi == 1
        let f0 = Dist::exponential(1.0).unwrap().reflected();
        let rep = probe_integrability(|t| t, &f0, &WeightFn::One, 0.5).unwrap();
        assert_eq!(rep.verdict, ProbeVerdict::DivergingOrSlow);
        assert!(rep.value.is_none());
        // against phi_2 the same integrand converges
        let rep = probe_integrability(|t| t, &f0, &WeightFn::power(2.0), 0.5).unwrap();
        assert_eq!(rep.verdict, ProbeVerdict::Converging);
    }

    #[test]
    fn probe_trace_serializes() {
        let f0 = Dist::uniform(0.0, 1.0).unwrap();
        let rep = probe_integrability(|t| t, &f0, &WeightFn::One, 0.5).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        let back: ProbeReport = serde_json::from_str(&json).unwrap();
        assert_eq!(rep, back);
    }

    #[test]
    fn clt_weight_examples() {
        // phi == 1 always integrates
        assert_eq!(clt_weight_check(&Dist::pareto(1.5, 1.0).unwrap(), &WeightFn::One), Verdict::Holds);
        // E[(1+|X|)^2] = inf for pareto shape 1.5
        assert_eq!(
            clt_weight_check(&Dist::pareto(1.5, 1.0).unwrap(), &WeightFn::power(1.0)),
            Verdict::Fails
        );
        assert_eq!(
            clt_weight_check(&Dist::exponential(1.0).unwrap(), &WeightFn::power(1.0)),
            Verdict::Holds
        );
    }

    #[test]
    fn strong_law_weight_examples() {
        assert_eq!(
            strong_law_weight_check(&Dist::uniform(0.0, 1.0).unwrap(), &WeightFn::One, 0.0).unwrap(),
            Verdict::Holds
        );
        assert_eq!(
            strong_law_weight_check(&Dist::exponential(1.0).unwrap(), &WeightFn::power(1.0), 0.25)
                .unwrap(),
            Verdict::Holds
        );
        // needs E[(1+|X|)^4] < inf, fails for pareto shape 2
        assert_eq!(
            strong_law_weight_check(&Dist::pareto(2.0, 1.0).unwrap(), &WeightFn::power(3.0), 0.25)
                .unwrap(),
            Verdict::Fails
        );
        assert!(strong_law_weight_check(&Dist::uniform(0.0, 1.0).unwrap(), &WeightFn::One, 0.6)
            .is_err());
    }

    #[test]
    fn smoothness_examples() {
        let u = Dist::uniform(0.0, 1.0).unwrap();
        let rep = smoothness_check(&u);
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(rep.exceptional_points.is_empty());

        let emp: Dist = crate::dist::EmpiricalDist::new(&[1.0, 2.0]).unwrap().into();
        assert_eq!(smoothness_check(&emp).verdict, Verdict::Fails);

        // declared kink passes through as metadata
        let mix = Dist::contaminate(
            &Dist::uniform(0.0, 1.0).unwrap(),
            &Dist::uniform(0.0, 2.0).unwrap(),
            0.5,
        )
        .unwrap()
        .with_nonsmooth_points(vec![1.0]);
        let rep = smoothness_check(&mix);
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.exceptional_points, vec![1.0]);
    }

    #[test]
    fn haezendonck_exponent_certificate() {
        let e = haezendonck_small_t_exponent(&YoungFn::power(2.0).unwrap());
        assert_eq!(e.beta, 0.5);
        assert!(e.sufficient_condition_only);
        assert_eq!(haezendonck_small_t_exponent(&YoungFn::Identity).beta, 1.0);
    }

    #[test]
    fn symbolic_and_probe_agree_on_a_small_matrix() {
        // a slice of the consistency matrix (the acceptance suite runs the
        // full 20-case version)
        let cases: Vec<(TailClass, Dist, Distortion, f64)> = vec![
            (
                TailClass::new(Tail::Bounded, Tail::Bounded, 0.5).unwrap(),
                Dist::uniform(0.0, 1.0).unwrap(),
                Distortion::proportional_hazard(0.5).unwrap(),
                0.0,
            ),
            (
                TailClass::new(Tail::Exponential, Tail::Bounded, 1.0).unwrap(),
                Dist::exponential(1.0).unwrap().reflected(),
                Distortion::Identity,
                2.0,
            ),
            (
                TailClass::new(Tail::Exponential, Tail::Bounded, 1.0).unwrap(),
                Dist::exponential(1.0).unwrap().reflected(),
                Distortion::Identity,
                0.0,
            ),
        ];
        for (tails, f0, g, lambda) in cases {
            let symbolic = tail_integrability_symbolic(&tails, lambda);
            let probe =
                probe_integrability(|t| g.eval(t), &f0, &WeightFn::power(lambda), 0.5).unwrap();
            match symbolic {
                Verdict::Holds => assert_eq!(probe.verdict, ProbeVerdict::Converging),
                Verdict::Fails => assert_eq!(probe.verdict, ProbeVerdict::DivergingOrSlow),
                Verdict::Undecidable => {}
            }
        }
    }
}
