//! Distribution functions: parametric families, empirical step functions,
//! finite discrete laws, convex mixtures, reflections, and cdf perturbations
//! along a direction. Each value exposes the cdf, the left-continuous inverse
//! `F^{<-}(s) = inf{x: F(x) >= s}`, the right-continuous inverse
//! `F^{->}(s) = inf{x: F(x) > s}`, support endpoints, an optional density,
//! a declared set of non-smooth points, and a seeded sampler.
//!
//! Values are immutable; samplers take a caller-owned generator so that
//! replication streams stay reproducible.

use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution as RandDistribution, StandardNormal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::weights::Direction;

const INV_TOL: f64 = 1e-13;

/// A distribution function on the real line.
#[derive(Debug, Clone)]
pub struct Dist {
    kind: DistKind,
    /// Declared exceptional set D(F0): finite set of points where the cdf is
    /// not continuously differentiable inside its support. Quadrature splits
    /// here and the smoothness diagnostic reports it.
    nonsmooth: Vec<f64>,
}

#[derive(Debug, Clone)]
enum DistKind {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Pareto { shape: f64, scale: f64 },
    Normal { mean: f64, std: f64 },
    /// Finite discrete law; atoms sorted by location, cumulative sums cached.
    Discrete { atoms: Vec<(f64, f64)>, cum: Vec<f64> },
    Empirical(EmpiricalDist),
    /// Convex mixture; weights sum to one.
    Mixture { parts: Vec<(f64, Arc<Dist>)> },
    /// Distribution of -X for X ~ base.
    Neg(Arc<Dist>),
    /// cdf perturbed to F0 + h v along a direction v; validated monotone at
    /// construction. Inverses fall back to bisection.
    Perturbed { base: Arc<Dist>, v: Direction, h: f64 },
}

impl Dist {
    // ---- constructors -------------------------------------------------

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid("a,b", format!("need a < b finite, got ({a},{b})")));
        }
        Ok(Self::wrap(DistKind::Uniform { a, b }))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid("rate", format!("must be positive, got {rate}")));
        }
        Ok(Self::wrap(DistKind::Exponential { rate }))
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::invalid("shape", format!("must be positive, got {shape}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("scale", format!("must be positive, got {scale}")));
        }
        Ok(Self::wrap(DistKind::Pareto { shape, scale }))
    }

    pub fn normal(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(Error::invalid("mean,std", format!("need finite mean, std>0, got ({mean},{std})")));
        }
        Ok(Self::wrap(DistKind::Normal { mean, std }))
    }

    /// Finite discrete law from `(location, probability)` pairs.
    pub fn discrete(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Domain("discrete law needs at least one atom".into()));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("atom locations must not be NaN"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            if !(p >= 0.0) || !x.is_finite() {
                return Err(Error::invalid("atoms", format!("bad atom ({x},{p})")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        merged.retain(|&(_, p)| p > 0.0);
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("atoms", format!("probabilities sum to {total}, not 1")));
        }
        let mut cum = Vec::with_capacity(merged.len());
        let mut s = 0.0;
        for &(_, p) in &merged {
            s += p;
            cum.push(s);
        }
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        Ok(Self::wrap(DistKind::Discrete { atoms: merged, cum }))
    }

    /// Distribution of `-B` with `B ~ Bernoulli(t)`: mass `t` at -1 and
    /// mass `1-t` at 0.
    pub fn two_point(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid("t", format!("must be in [0,1], got {t}")));
        }
        if t == 0.0 {
            Self::point_mass(0.0)
        } else if t == 1.0 {
            Self::point_mass(-1.0)
        } else {
            Self::discrete(vec![(-1.0, t), (0.0, 1.0 - t)])
        }
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::invalid("x", "point mass location must be finite"));
        }
        Ok(Self::wrap(DistKind::Discrete { atoms: vec![(x, 1.0)], cum: vec![1.0] }))
    }

    /// Contamination `(1-h) F0 + h G`.
    pub fn contaminate(f0: &Dist, g: &Dist, h: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&h) {
            return Err(Error::invalid("h", format!("must be in [0,1], got {h}")));
        }
        if h == 0.0 {
            return Ok(f0.clone());
        }
        if h == 1.0 {
            return Ok(g.clone());
        }
        let mut nonsmooth = f0.nonsmooth.clone();
        nonsmooth.extend_from_slice(&g.nonsmooth);
        Ok(Dist {
            kind: DistKind::Mixture {
                parts: vec![(1.0 - h, Arc::new(f0.clone())), (h, Arc::new(g.clone()))],
            },
            nonsmooth,
        })
    }

    /// Distribution of `-X`.
    pub fn reflected(&self) -> Dist {
        let nonsmooth = self.nonsmooth.iter().map(|x| -x).collect();
        Dist { kind: DistKind::Neg(Arc::new(self.clone())), nonsmooth }
    }

    /// cdf perturbed to `F0 + h v`. Rejects perturbations that do not leave a
    /// valid distribution function (checked on a dense grid together with the
    /// direction's jump points) or whose direction carries mass outside the
    /// support window of `F0`.
    pub fn perturbed(base: &Dist, v: &Direction, h: f64) -> Result<Self> {
        if h < 0.0 || !h.is_finite() {
            return Err(Error::invalid("h", format!("must be nonnegative finite, got {h}")));
        }
        if h == 0.0 || v.is_zero() {
            return Ok(base.clone());
        }
        let (lo, hi) = (base.lower(), base.upper());
        if let Some((wa, wb)) = v.window() {
            if wa < lo - 1e-12 || wb > hi + 1e-12 {
                // tolerate windows that overhang only where v vanishes
                let mut x = wa;
                let step = (wb - wa) / 512.0;
                while x < wb {
                    if (x < lo || x > hi) && v.eval(x).abs() > 1e-15 {
                        return Err(Error::Domain(format!(
                            "direction does not vanish outside the support window at x={x}"
                        )));
                    }
                    x += step;
                }
            }
        }
        validate_perturbed_cdf(base, v, h)?;
        Ok(Dist {
            kind: DistKind::Perturbed { base: Arc::new(base.clone()), v: v.clone(), h },
            nonsmooth: {
                let mut ns = base.nonsmooth.clone();
                ns.extend(v.breakpoints());
                ns
            },
        })
    }

    fn wrap(kind: DistKind) -> Self {
        Dist { kind, nonsmooth: Vec::new() }
    }

    /// Declares the finite exceptional set D(F0) for a custom distribution.
    pub fn with_nonsmooth_points(mut self, points: Vec<f64>) -> Self {
        self.nonsmooth = points;
        self
    }

    // (perturbed-cdf validation lives in `validate_perturbed_cdf` below)

    // ---- cdf and inverses ---------------------------------------------

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            DistKind::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            DistKind::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            DistKind::Pareto { shape, scale } => {
                if x < *scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(*shape)
                }
            }
            DistKind::Normal { mean, std } => Normal::new(*mean, *std).unwrap().cdf(x),
            DistKind::Discrete { atoms, cum } => {
                let i = atoms.partition_point(|a| a.0 <= x);
                if i == 0 {
                    0.0
                } else {
                    cum[i - 1]
                }
            }
            DistKind::Empirical(e) => e.cdf(x),
            DistKind::Mixture { parts } => parts.iter().map(|(w, d)| w * d.cdf(x)).sum(),
            DistKind::Neg(base) => 1.0 - base.cdf_left_limit(-x),
            DistKind::Perturbed { base, v, h } => (base.cdf(x) + h * v.eval(x)).clamp(0.0, 1.0),
        }
    }

    /// `P[X < x]`, the left limit of the cdf.
    pub fn cdf_left_limit(&self, x: f64) -> f64 {
        match &self.kind {
            DistKind::Discrete { atoms, cum } => {
                let i = atoms.partition_point(|a| a.0 < x);
                if i == 0 {
                    0.0
                } else {
                    cum[i - 1]
                }
            }
            DistKind::Empirical(e) => e.cdf_left_limit(x),
            DistKind::Mixture { parts } => parts.iter().map(|(w, d)| w * d.cdf_left_limit(x)).sum(),
            DistKind::Neg(base) => 1.0 - base.cdf(-x),
            DistKind::Perturbed { base, v, h } => {
                (base.cdf_left_limit(x) + h * v.eval_left_limit(x)).clamp(0.0, 1.0)
            }
            _ => self.cdf(x),
        }
    }

    /// Left-continuous inverse `F^{<-}(t) = inf{x : F(x) >= t}` on `(0,1]`.
    pub fn left_inv(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0 && t <= 1.0, "left_inv defined on (0,1], got {t}");
        match &self.kind {
            DistKind::Uniform { a, b } => a + (b - a) * t,
            DistKind::Exponential { rate } => {
                if t == 1.0 {
                    f64::INFINITY
                } else {
                    -(-t).ln_1p() / rate
                }
            }
            DistKind::Pareto { shape, scale } => {
                if t == 1.0 {
                    f64::INFINITY
                } else {
                    scale * (1.0 - t).powf(-1.0 / shape)
                }
            }
            DistKind::Normal { mean, std } => {
                if t == 1.0 {
                    f64::INFINITY
                } else {
                    mean + std * Normal::standard().inverse_cdf(t)
                }
            }
            DistKind::Discrete { atoms, cum } => {
                let i = cum.partition_point(|&c| c < t);
                atoms[i.min(atoms.len() - 1)].0
            }
            DistKind::Empirical(e) => e.left_inv(t),
            _ => self.invert(t, true),
        }
    }

    /// Right-continuous inverse `F^{->}(t) = inf{x : F(x) > t}` on `[0,1)`.
    pub fn right_inv(&self, t: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&t), "right_inv defined on [0,1), got {t}");
        match &self.kind {
            DistKind::Uniform { a, b } => a + (b - a) * t,
            DistKind::Exponential { rate } => -(-t).ln_1p() / rate,
            DistKind::Pareto { shape, scale } => scale * (1.0 - t).powf(-1.0 / shape),
            DistKind::Normal { mean, std } => {
                if t == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    mean + std * Normal::standard().inverse_cdf(t)
                }
            }
            DistKind::Discrete { atoms, cum } => {
                let i = cum.partition_point(|&c| c <= t);
                atoms[i.min(atoms.len() - 1)].0
            }
            DistKind::Empirical(e) => e.right_inv(t),
            _ => self.invert(t, false),
        }
    }

    /// Monotone bisection for kinds without closed-form inverses, to
    /// absolute/relative tolerance 1e-13. `weak` selects `F(x) >= t`
    /// (left inverse) versus `F(x) > t` (right inverse).
    fn invert(&self, t: f64, weak: bool) -> f64 {
        let pred = |x: f64| {
            let f = self.cdf(x);
            if weak {
                f >= t
            } else {
                f > t
            }
        };
        // bracket: expand outwards from the support box
        let mut lo;
        let mut hi;
        let (l, u) = (self.lower(), self.upper());
        if l.is_finite() {
            lo = l - 1.0;
        } else {
            lo = if u.is_finite() { u - 1.0 } else { -1.0 };
            let mut step = 1.0;
            while pred(lo) {
                lo -= step;
                step *= 2.0;
                if step > 1e300 {
                    return f64::NEG_INFINITY;
                }
            }
        }
        if u.is_finite() {
            hi = u + 1.0;
        } else {
            hi = if l.is_finite() { l + 1.0 } else { 1.0 };
            let mut step = 1.0;
            while !pred(hi) {
                hi += step;
                step *= 2.0;
                if step > 1e300 {
                    return f64::INFINITY;
                }
            }
        }
        for _ in 0..200 {
            if hi - lo <= INV_TOL * (1.0 + lo.abs().max(hi.abs())) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if pred(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `F^{->}(0)`, the lower support endpoint (possibly `-inf`).
    pub fn lower(&self) -> f64 {
        match &self.kind {
            DistKind::Uniform { a, .. } => *a,
            DistKind::Exponential { .. } => 0.0,
            DistKind::Pareto { scale, .. } => *scale,
            DistKind::Normal { .. } => f64::NEG_INFINITY,
            DistKind::Discrete { atoms, .. } => atoms[0].0,
            DistKind::Empirical(e) => e.min(),
            DistKind::Mixture { parts } => parts
                .iter()
                .map(|(_, d)| d.lower())
                .fold(f64::INFINITY, f64::min),
            DistKind::Neg(base) => -base.upper(),
            DistKind::Perturbed { base, .. } => base.lower(),
        }
    }

    /// `F^{<-}(1)`, the upper support endpoint (possibly `+inf`).
    pub fn upper(&self) -> f64 {
        match &self.kind {
            DistKind::Uniform { b, .. } => *b,
            DistKind::Exponential { .. } | DistKind::Pareto { .. } => f64::INFINITY,
            DistKind::Normal { .. } => f64::INFINITY,
            DistKind::Discrete { atoms, .. } => atoms[atoms.len() - 1].0,
            DistKind::Empirical(e) => e.max(),
            DistKind::Mixture { parts } => parts
                .iter()
                .map(|(_, d)| d.upper())
                .fold(f64::NEG_INFINITY, f64::max),
            DistKind::Neg(base) => -base.lower(),
            DistKind::Perturbed { base, .. } => base.upper(),
        }
    }

    /// Lebesgue density where one exists.
    pub fn density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            DistKind::Uniform { a, b } => {
                Some(if x >= *a && x < *b { 1.0 / (b - a) } else { 0.0 })
            }
            DistKind::Exponential { rate } => {
                Some(if x >= 0.0 { rate * (-rate * x).exp() } else { 0.0 })
            }
            DistKind::Pareto { shape, scale } => Some(if x >= *scale {
                shape * scale.powf(*shape) * x.powf(-shape - 1.0)
            } else {
                0.0
            }),
            DistKind::Normal { mean, std } => Some(Normal::new(*mean, *std).unwrap().pdf(x)),
            DistKind::Discrete { .. } | DistKind::Empirical(_) => None,
            DistKind::Mixture { parts } => {
                let mut s = 0.0;
                for (w, d) in parts {
                    s += w * d.density(x)?;
                }
                Some(s)
            }
            DistKind::Neg(base) => base.density(-x),
            DistKind::Perturbed { base, v, h } => {
                Some(base.density(x)? + h * v.slope(x)?)
            }
        }
    }

    pub fn has_density(&self) -> bool {
        match &self.kind {
            DistKind::Discrete { .. } | DistKind::Empirical(_) => false,
            DistKind::Mixture { parts } => parts.iter().all(|(_, d)| d.has_density()),
            DistKind::Neg(base) => base.has_density(),
            DistKind::Perturbed { base, v, .. } => base.has_density() && v.has_slope(),
            _ => true,
        }
    }

    /// Declared non-smooth points D(F0) inside the support.
    pub fn nonsmooth_points(&self) -> &[f64] {
        &self.nonsmooth
    }

    /// Whether `E|X|^order` is finite, decided from the family's closed form;
    /// `None` when no closed-form answer exists for this kind.
    pub fn power_moment_finite(&self, order: f64) -> Option<bool> {
        if order <= 0.0 {
            return Some(true);
        }
        if self.lower().is_finite() && self.upper().is_finite() {
            return Some(true);
        }
        match &self.kind {
            DistKind::Exponential { .. } | DistKind::Normal { .. } => Some(true),
            DistKind::Pareto { shape, .. } => Some(order < *shape),
            DistKind::Neg(base) => base.power_moment_finite(order),
            DistKind::Mixture { parts } => {
                let mut all = true;
                for (_, d) in parts {
                    all &= d.power_moment_finite(order)?;
                }
                Some(all)
            }
            _ => None,
        }
    }

    /// True when the law is purely discrete (a step-function cdf).
    pub fn is_discrete(&self) -> bool {
        matches!(
            &self.kind,
            DistKind::Discrete { .. } | DistKind::Empirical(_)
        ) || matches!(&self.kind, DistKind::Neg(b) if b.is_discrete())
            || matches!(&self.kind, DistKind::Mixture { parts } if parts.iter().all(|(_, d)| d.is_discrete()))
    }

    /// Locations where the cdf jumps (atoms); empty for continuous laws.
    pub fn discontinuity_points(&self) -> Vec<f64> {
        match &self.kind {
            DistKind::Discrete { atoms, .. } => atoms.iter().map(|a| a.0).collect(),
            DistKind::Empirical(e) => {
                let mut xs = e.sorted().to_vec();
                xs.dedup();
                xs
            }
            DistKind::Mixture { parts } => {
                let mut xs: Vec<f64> = parts
                    .iter()
                    .flat_map(|(_, d)| d.discontinuity_points())
                    .collect();
                xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                xs.dedup();
                xs
            }
            DistKind::Neg(base) => {
                let mut xs: Vec<f64> = base.discontinuity_points().iter().map(|x| -x).collect();
                xs.reverse();
                xs
            }
            _ => Vec::new(),
        }
    }

    /// The atom decomposition `(location, probability)` when the law is
    /// purely discrete; `None` otherwise. Discrete laws admit exact,
    /// quadrature-free risk evaluation.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            DistKind::Discrete { atoms, .. } => Some(atoms.clone()),
            DistKind::Empirical(e) => {
                let n = e.n() as f64;
                let mut out: Vec<(f64, f64)> = Vec::new();
                for &x in e.sorted() {
                    match out.last_mut() {
                        Some(last) if last.0 == x => last.1 += 1.0 / n,
                        _ => out.push((x, 1.0 / n)),
                    }
                }
                Some(out)
            }
            DistKind::Mixture { parts } => {
                let mut out: Vec<(f64, f64)> = Vec::new();
                for (w, d) in parts {
                    for (x, p) in d.atoms()? {
                        out.push((x, w * p));
                    }
                }
                out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut merged: Vec<(f64, f64)> = Vec::new();
                for (x, p) in out {
                    match merged.last_mut() {
                        Some(last) if last.0 == x => last.1 += p,
                        _ => merged.push((x, p)),
                    }
                }
                Some(merged)
            }
            DistKind::Neg(base) => {
                let mut out: Vec<(f64, f64)> =
                    base.atoms()?.into_iter().map(|(x, p)| (-x, p)).collect();
                out.reverse();
                Some(out)
            }
            _ => None,
        }
    }

    // ---- sampling ------------------------------------------------------

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            DistKind::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            DistKind::Exponential { rate } => {
                let u: f64 = rng.random();
                -(-u).ln_1p() / rate
            }
            DistKind::Pareto { shape, scale } => {
                let u: f64 = rng.random();
                scale * (1.0 - u).powf(-1.0 / shape)
            }
            DistKind::Normal { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std * z
            }
            DistKind::Discrete { atoms, cum } => {
                let u: f64 = rng.random();
                let i = cum.partition_point(|&c| c <= u);
                atoms[i.min(atoms.len() - 1)].0
            }
            DistKind::Empirical(e) => {
                let u: f64 = rng.random();
                let i = ((u * e.n() as f64) as usize).min(e.n() - 1);
                e.sorted()[i]
            }
            DistKind::Mixture { parts } => {
                let mut u: f64 = rng.random();
                for (w, d) in parts {
                    if u < *w {
                        return d.sample(rng);
                    }
                    u -= w;
                }
                parts[parts.len() - 1].1.sample(rng)
            }
            DistKind::Neg(base) => -base.sample(rng),
            DistKind::Perturbed { .. } => {
                let u: f64 = rng.random();
                self.left_inv(1.0 - u)
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Checks, on a dense grid plus the direction's breakpoints, that the raw
/// (unclamped) values of `F0 + h v` form a distribution function: within
/// `[0,1]`, nondecreasing, and cadlag with upward jumps only.
fn validate_perturbed_cdf(base: &Dist, v: &Direction, h: f64) -> Result<()> {
    let (wa, wb) = match v.window() {
        Some(w) => w,
        None => return Ok(()),
    };
    let raw = |x: f64| base.cdf(x) + h * v.eval(x);
    let raw_left = |x: f64| base.cdf_left_limit(x) + h * v.eval_left_limit(x);
    let mut checkpoints: Vec<f64> = Vec::with_capacity(4200);
    let n = 4096;
    for i in 0..=n {
        checkpoints.push(wa + (wb - wa) * i as f64 / n as f64);
    }
    checkpoints.extend(v.breakpoints());
    checkpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prev = f64::NEG_INFINITY;
    for &x in &checkpoints {
        let left = raw_left(x);
        let val = raw(x);
        if val < -1e-12 || val > 1.0 + 1e-12 || left > val + 1e-12 || left < prev - 1e-12 {
            return Err(Error::Domain(format!(
                "perturbed cdf not a distribution function near x={x} (try a smaller step or direction)"
            )));
        }
        prev = val;
    }
    Ok(())
}

/// Empirical distribution of a finite sample: the step function
/// `(1/n) * #{i : X_i <= x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    sorted: Vec<f64>,
}

impl EmpiricalDist {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("empirical distribution needs a nonempty sample".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("sample contains non-finite values".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalDist { sorted })
    }

    /// Takes ownership of an already ascending sample (checked in debug).
    pub fn from_sorted(sorted: Vec<f64>) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(!sorted.is_empty());
        EmpiricalDist { sorted }
    }

    /// Reads one value per line; blank lines and `#` comments are skipped and
    /// a single leading non-numeric header line is tolerated.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        let mut header_allowed = true;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Io { path: "<reader>".into(), source: e })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            // a value may sit in the first column of a wider csv row
            let field = trimmed.split(',').next().unwrap_or(trimmed).trim();
            match field.parse::<f64>() {
                Ok(x) => values.push(x),
                Err(_) if header_allowed => {}
                Err(_) => {
                    return Err(Error::Parse(format!(
                        "line {}: expected a number, got `{trimmed}`",
                        lineno + 1
                    )));
                }
            }
            header_allowed = false;
        }
        Self::new(&values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_csv(std::io::BufReader::new(file))
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.n() as f64
    }

    pub fn cdf_left_limit(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s < x) as f64 / self.n() as f64
    }

    /// The `ceil(n t)`-th order statistic.
    pub fn left_inv(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0 && t <= 1.0);
        let k = (self.n() as f64 * t).ceil() as usize;
        self.sorted[k.clamp(1, self.n()) - 1]
    }

    pub fn right_inv(&self, t: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&t));
        let k = (self.n() as f64 * t).floor() as usize;
        self.sorted[k.min(self.n() - 1)]
    }
}

impl From<EmpiricalDist> for Dist {
    fn from(e: EmpiricalDist) -> Self {
        Dist::wrap(DistKind::Empirical(e))
    }
}
