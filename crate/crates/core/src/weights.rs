//! Weight functions, cadlag directions, and the weighted sup-norm
//! `|v|_phi = sup_x |v(x)| phi(x)`.
//!
//! Directions live in the weighted space attached to a base distribution F0:
//! they vanish outside `[F0^{->}(0), F0^{<-}(1)]`, and membership in the
//! tangent cone additionally requires interior jumps to sit on
//! discontinuities of F0.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{Dist, EmpiricalDist};

/// Continuous weight `phi: R -> [1, inf)` growing toward the tails.
/// The builtin power family is `phi_lambda(x) = (1 + |x|)^lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightFn {
    /// `phi == 1`.
    One,
    /// `(1 + |x|)^lambda`, `lambda >= 0`.
    Power { lambda: f64 },
}

impl WeightFn {
    pub fn power(lambda: f64) -> Self {
        if lambda == 0.0 {
            WeightFn::One
        } else {
            WeightFn::Power { lambda }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightFn::One => 1.0,
            WeightFn::Power { lambda } => (1.0 + x.abs()).powf(*lambda),
        }
    }

    /// Exponent of the power family (0 for the constant weight).
    pub fn lambda(&self) -> f64 {
        match self {
            WeightFn::One => 0.0,
            WeightFn::Power { lambda } => *lambda,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    /// value = sum_k coef[k] (x - start)^k on [start, end)
    coef: [f64; 4],
}

impl Segment {
    fn eval(&self, x: f64) -> f64 {
        let y = x - self.start;
        ((self.coef[3] * y + self.coef[2]) * y + self.coef[1]) * y + self.coef[0]
    }

    fn slope(&self, x: f64) -> f64 {
        let y = x - self.start;
        (3.0 * self.coef[3] * y + 2.0 * self.coef[2]) * y + self.coef[1]
    }

    /// Same polynomial re-expressed around a new start inside the segment.
    fn recentered(&self, new_start: f64) -> [f64; 4] {
        let d = new_start - self.start;
        let [c0, c1, c2, c3] = self.coef;
        [
            ((c3 * d + c2) * d + c1) * d + c0,
            (3.0 * c3 * d + 2.0 * c2) * d + c1,
            3.0 * c3 * d + c2,
            c3,
        ]
    }

    fn is_zero(&self) -> bool {
        self.coef.iter().all(|c| *c == 0.0)
    }
}

#[derive(Clone)]
struct FuncDir {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// exact left limits when the constructor knows them
    left_eval: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    window: (f64, f64),
    breakpoints: Vec<f64>,
    jumps: Vec<f64>,
}

#[derive(Clone)]
enum Repr {
    Zero,
    Piecewise(Vec<Segment>),
    Func(FuncDir),
}

/// A cadlag perturbation direction with bounded support: piecewise
/// polynomial (degree <= 3) segments, or a function-backed representation
/// for empirical differences. Zero outside its support window. Immutable.
#[derive(Clone)]
pub struct Direction {
    repr: Repr,
}

impl std::fmt::Debug for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.repr {
            Repr::Zero => write!(f, "Direction::Zero"),
            Repr::Piecewise(segs) => f
                .debug_struct("Direction::Piecewise")
                .field("segments", &segs.len())
                .field("window", &self.window())
                .finish(),
            Repr::Func(fd) => f
                .debug_struct("Direction::Func")
                .field("window", &fd.window)
                .field("breakpoints", &fd.breakpoints.len())
                .finish(),
        }
    }
}

impl Direction {
    pub fn zero() -> Self {
        Direction { repr: Repr::Zero }
    }

    /// Constant value `c` on `[a, b)`.
    pub fn constant(c: f64, a: f64, b: f64) -> Self {
        assert!(a < b, "need a < b");
        if c == 0.0 {
            return Self::zero();
        }
        Direction {
            repr: Repr::Piecewise(vec![Segment { start: a, end: b, coef: [c, 0.0, 0.0, 0.0] }]),
        }
    }

    /// Polynomial `c0 + c1 x + c2 x^2 + c3 x^3` restricted to `[a, b)`.
    pub fn poly(coeffs: [f64; 4], a: f64, b: f64) -> Self {
        assert!(a < b, "need a < b");
        let absolute = Segment { start: 0.0, end: 0.0, coef: coeffs };
        let seg = Segment { start: a, end: b, coef: absolute.recentered(a) };
        if seg.is_zero() {
            return Self::zero();
        }
        Direction { repr: Repr::Piecewise(vec![seg]) }
    }

    /// C^1 bump supported on `[a, b]`: rises along a cubic smoothstep to
    /// `height` at the midpoint and falls symmetrically. Continuous with zero
    /// slope at both ends, so small multiples keep perturbed cdfs monotone.
    pub fn cubic_bump(a: f64, b: f64, height: f64) -> Self {
        assert!(a < b, "need a < b");
        if height == 0.0 {
            return Self::zero();
        }
        let m = 0.5 * (a + b);
        let w = m - a;
        let up = Segment {
            start: a,
            end: m,
            coef: [0.0, 0.0, 3.0 * height / (w * w), -2.0 * height / (w * w * w)],
        };
        let down = Segment {
            start: m,
            end: b,
            coef: [height, 0.0, -3.0 * height / (w * w), 2.0 * height / (w * w * w)],
        };
        Direction { repr: Repr::Piecewise(vec![up, down]) }
    }

    /// Function-backed direction; `breakpoints` are where the search grids
    /// split, `jumps` the declared discontinuity locations.
    pub fn from_fn(
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        window: (f64, f64),
        breakpoints: Vec<f64>,
        jumps: Vec<f64>,
    ) -> Self {
        assert!(window.0 < window.1, "need a nonempty window");
        Direction {
            repr: Repr::Func(FuncDir { eval, left_eval: None, window, breakpoints, jumps }),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Zero => 0.0,
            Repr::Piecewise(segs) => {
                let i = segs.partition_point(|s| s.start <= x);
                if i == 0 {
                    return 0.0;
                }
                let s = &segs[i - 1];
                if x < s.end {
                    s.eval(x)
                } else {
                    0.0
                }
            }
            Repr::Func(fd) => {
                if x >= fd.window.0 && x < fd.window.1 {
                    (fd.eval)(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Left limit `v(x-)`.
    pub fn eval_left_limit(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Zero => 0.0,
            Repr::Piecewise(segs) => {
                let i = segs.partition_point(|s| s.start < x);
                if i == 0 {
                    return 0.0;
                }
                let s = &segs[i - 1];
                if x <= s.end {
                    s.eval(x)
                } else {
                    0.0
                }
            }
            Repr::Func(fd) => {
                if x > fd.window.0 && x <= fd.window.1 {
                    match &fd.left_eval {
                        Some(f) => f(x),
                        None => (fd.eval)(x - 1e-9 * (1.0 + x.abs())),
                    }
                } else {
                    0.0
                }
            }
        }
    }

    /// Support window outside of which the direction vanishes.
    pub fn window(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Piecewise(segs) => Some((segs[0].start, segs[segs.len() - 1].end)),
            Repr::Func(fd) => Some(fd.window),
        }
    }

    /// Points where the representation changes; integration and search
    /// grids split here.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Zero => Vec::new(),
            Repr::Piecewise(segs) => {
                let mut pts: Vec<f64> = segs.iter().flat_map(|s| [s.start, s.end]).collect();
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup();
                pts
            }
            Repr::Func(fd) => {
                let mut pts = fd.breakpoints.clone();
                pts.push(fd.window.0);
                pts.push(fd.window.1);
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup();
                pts
            }
        }
    }

    /// Locations where `v(x-) != v(x)`.
    pub fn jump_points(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Zero => Vec::new(),
            Repr::Piecewise(_) => self
                .breakpoints()
                .into_iter()
                .filter(|&x| {
                    (self.eval(x) - self.eval_left_limit(x)).abs() > 1e-12 * (1.0 + x.abs())
                })
                .collect(),
            Repr::Func(fd) => fd.jumps.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> Direction {
        if c == 0.0 {
            return Self::zero();
        }
        match &self.repr {
            Repr::Zero => Self::zero(),
            Repr::Piecewise(segs) => Direction {
                repr: Repr::Piecewise(
                    segs.iter()
                        .map(|s| Segment {
                            start: s.start,
                            end: s.end,
                            coef: [c * s.coef[0], c * s.coef[1], c * s.coef[2], c * s.coef[3]],
                        })
                        .collect(),
                ),
            },
            Repr::Func(fd) => {
                let inner = fd.eval.clone();
                let left = fd.left_eval.clone();
                Direction {
                    repr: Repr::Func(FuncDir {
                        eval: Arc::new(move |x| c * inner(x)),
                        left_eval: left.map(|f| {
                            Arc::new(move |x: f64| c * f(x)) as Arc<dyn Fn(f64) -> f64 + Send + Sync>
                        }),
                        window: fd.window,
                        breakpoints: fd.breakpoints.clone(),
                        jumps: fd.jumps.clone(),
                    }),
                }
            }
        }
    }

    /// Pointwise sum; exact on the piecewise-polynomial representation.
    pub fn add(&self, other: &Direction) -> Direction {
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) => other.clone(),
            (_, Repr::Zero) => self.clone(),
            (Repr::Piecewise(a), Repr::Piecewise(b)) => {
                let mut cuts: Vec<f64> = a
                    .iter()
                    .chain(b.iter())
                    .flat_map(|s| [s.start, s.end])
                    .collect();
                cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
                cuts.dedup();
                let mut segs = Vec::new();
                for w in cuts.windows(2) {
                    let (p, q) = (w[0], w[1]);
                    let mut coef = [0.0f64; 4];
                    let mut any = false;
                    for side in [a, b] {
                        let i = side.partition_point(|s| s.start <= p);
                        if i > 0 {
                            let s = &side[i - 1];
                            if p < s.end {
                                let rc = s.recentered(p);
                                for k in 0..4 {
                                    coef[k] += rc[k];
                                }
                                any = true;
                            }
                        }
                    }
                    let seg = Segment { start: p, end: q, coef };
                    if any && !seg.is_zero() {
                        segs.push(seg);
                    }
                }
                if segs.is_empty() {
                    Self::zero()
                } else {
                    Direction { repr: Repr::Piecewise(segs) }
                }
            }
            _ => {
                // at least one side is function-backed: combine pointwise
                let lhs = self.clone();
                let rhs = other.clone();
                let (l0, l1) = self.window().unwrap();
                let (r0, r1) = other.window().unwrap();
                let window = (l0.min(r0), l1.max(r1));
                let mut breakpoints = self.breakpoints();
                breakpoints.extend(other.breakpoints());
                breakpoints.sort_by(|x, y| x.partial_cmp(y).unwrap());
                breakpoints.dedup();
                let mut jumps = self.jump_points();
                jumps.extend(other.jump_points());
                jumps.sort_by(|x, y| x.partial_cmp(y).unwrap());
                jumps.dedup();
                let (ll, rr) = (lhs.clone(), rhs.clone());
                Direction {
                    repr: Repr::Func(FuncDir {
                        eval: Arc::new(move |x| lhs.eval(x) + rhs.eval(x)),
                        left_eval: Some(Arc::new(move |x| {
                            ll.eval_left_limit(x) + rr.eval_left_limit(x)
                        })),
                        window,
                        breakpoints,
                        jumps,
                    }),
                }
            }
        }
    }

    pub fn sub(&self, other: &Direction) -> Direction {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise derivative where the representation is smooth; `None` for
    /// function-backed directions. At a breakpoint the right slope is used.
    pub fn slope(&self, x: f64) -> Option<f64> {
        match &self.repr {
            Repr::Zero => Some(0.0),
            Repr::Piecewise(segs) => {
                let i = segs.partition_point(|s| s.start <= x);
                if i == 0 {
                    return Some(0.0);
                }
                let s = &segs[i - 1];
                Some(if x < s.end { s.slope(x) } else { 0.0 })
            }
            Repr::Func(_) => None,
        }
    }

    pub fn has_slope(&self) -> bool {
        !matches!(self.repr, Repr::Func(_))
    }
}

const GRID_PER_SEGMENT: usize = 256;

/// `sup_x |v(x)| phi(x)`: per segment between breakpoints, evaluates the
/// endpoints, the left limit at the right end, and a dense grid whose best
/// candidates get a ternary refinement pass. Returns `+inf` if non-finite
/// values are encountered (possible only for unbounded function-backed
/// inputs).
pub fn weighted_sup_norm(v: &Direction, phi: &WeightFn) -> f64 {
    let (a, b) = match v.window() {
        None => return 0.0,
        Some(w) => w,
    };
    let mut cuts = v.breakpoints();
    cuts.retain(|x| x.is_finite());
    if cuts.first().copied() != Some(a) && a.is_finite() {
        cuts.insert(0, a);
    }
    if cuts.last().copied() != Some(b) && b.is_finite() {
        cuts.push(b);
    }
    let score = |x: f64| v.eval(x).abs() * phi.eval(x);
    let mut best: f64 = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(q > p) {
            continue;
        }
        best = best.max(score(p));
        best = best.max(v.eval_left_limit(q).abs() * phi.eval(q));
        let step = (q - p) / GRID_PER_SEGMENT as f64;
        let mut seg_best = (p, score(p));
        for i in 1..GRID_PER_SEGMENT {
            let x = p + step * i as f64;
            let s = score(x);
            if s > seg_best.1 {
                seg_best = (x, s);
            }
        }
        // one refinement pass around the best grid point
        let (mut lo, mut hi) = ((seg_best.0 - step).max(p), (seg_best.0 + step).min(q));
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if score(m1) < score(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best = best.max(score(0.5 * (lo + hi))).max(seg_best.1);
    }
    if best.is_nan() {
        f64::INFINITY
    } else {
        best
    }
}

/// Outcome of the tangent-cone membership test: every jump of `v` strictly
/// inside the support interval of `F0` must be a discontinuity point of `F0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub member: bool,
    /// jump locations of `v` that are not discontinuities of `F0`
    pub offending_jumps: Vec<f64>,
}

pub fn membership_c(v: &Direction, f0: &Dist) -> MembershipReport {
    let (lo, hi) = (f0.lower(), f0.upper());
    let disc = f0.discontinuity_points();
    let mut offending = Vec::new();
    for j in v.jump_points() {
        if j <= lo || j >= hi {
            continue;
        }
        let ok = disc.iter().any(|&d| (d - j).abs() <= 1e-12 * (1.0 + d.abs()));
        if !ok {
            offending.push(j);
        }
    }
    MembershipReport { member: offending.is_empty(), offending_jumps: offending }
}

/// The scaled empirical difference `r_n (F_n - F0)` as a direction, with its
/// support clipped to `[F0^{->}(0), F0^{<-}(1)]`.
#[derive(Debug, Clone)]
pub struct EmpiricalDirection {
    pub direction: Direction,
    /// true when some sample mass lies outside the support window of `F0`
    /// (the difference then fails to vanish outside the window).
    pub mass_outside_support: bool,
}

pub fn empirical_direction(emp: &EmpiricalDist, f0: &Dist, r_n: f64) -> EmpiricalDirection {
    let mass_outside = emp.min() < f0.lower() || emp.max() > f0.upper();
    // finite proxy window for unbounded supports: quantile range of F0
    // extended by the sample range
    let lo = if f0.lower().is_finite() {
        f0.lower()
    } else {
        emp.min().min(f0.left_inv(1e-9)) - 1.0
    };
    let hi = if f0.upper().is_finite() {
        f0.upper()
    } else {
        emp.max().max(f0.left_inv(1.0 - 1e-9)) + 1.0
    };
    let mut breakpoints: Vec<f64> = emp.sorted().to_vec();
    breakpoints.dedup();
    let jumps = breakpoints.clone();
    let (e1, f1) = (emp.clone(), f0.clone());
    let (e2, f2) = (emp.clone(), f0.clone());
    let eval = Arc::new(move |x: f64| r_n * (e1.cdf(x) - f1.cdf(x)));
    let left = Arc::new(move |x: f64| r_n * (e2.cdf_left_limit(x) - f2.cdf_left_limit(x)));
    let direction = Direction {
        repr: Repr::Func(FuncDir {
            eval,
            left_eval: Some(left),
            window: (lo, hi),
            breakpoints,
            jumps,
        }),
    };
    EmpiricalDirection { direction, mass_outside_support: mass_outside }
}

/// Exact `sup_x |F_n(x) - F0(x)| phi(x)` specialised for empirical
/// differences. With `phi == 1` this is the Kolmogorov-Smirnov statistic,
/// computed exactly from order statistics; power weights add per-interval
/// grid search over the weighted deviation.
pub fn empirical_sup_norm(emp: &EmpiricalDist, f0: &Dist, phi: &WeightFn) -> f64 {
    let xs = emp.sorted();
    let n = xs.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let w = phi.eval(x);
        sup = sup.max((((i + 1) as f64) / n - f0.cdf(x)).abs() * w);
        sup = sup.max(((i as f64) / n - f0.cdf_left_limit(x)).abs() * w);
    }
    if matches!(phi, WeightFn::One) {
        return sup;
    }
    // weighted case: the deviation between consecutive order statistics is
    // monotone but the weight is not constant; sample each gap
    let lo = if f0.lower().is_finite() { f0.lower() } else { f0.left_inv(1e-12) };
    let hi = if f0.upper().is_finite() { f0.upper() } else { f0.left_inv(1.0 - 1e-12) };
    let mut grid_pts: Vec<f64> = Vec::with_capacity(xs.len() + 2);
    grid_pts.push(lo.min(xs[0]));
    grid_pts.extend_from_slice(xs);
    grid_pts.push(hi.max(xs[xs.len() - 1]));
    for w in grid_pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(q > p) {
            continue;
        }
        for k in 1..8 {
            let x = p + (q - p) * k as f64 / 8.0;
            sup = sup.max((emp.cdf(x) - f0.cdf(x)).abs() * phi.eval(x));
        }
    }
    sup
}
