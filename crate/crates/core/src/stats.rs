//! Small statistics toolbox: normal cdf/quantile wrappers, Kolmogorov-Smirnov
//! distances, Anderson-Darling statistic, and summary helpers.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

/// Standard normal cdf.
pub fn normal_cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

/// Standard normal quantile; one Newton step on top of the library
/// approximation brings the residual down to machine precision.
pub fn normal_quantile(p: f64) -> f64 {
    let n = Normal::standard();
    let mut z = n.inverse_cdf(p);
    for _ in 0..2 {
        let pdf = n.pdf(z);
        if pdf <= f64::MIN_POSITIVE {
            break;
        }
        z -= (n.cdf(z) - p) / pdf;
    }
    z
}

/// Sorts a sample in place, NaN-free inputs assumed.
pub fn sort_in_place(xs: &mut [f64]) {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
}

/// One-sample Kolmogorov-Smirnov distance `sup_x |F_n(x) - F(x)|` against a
/// reference cdf. `sorted` must be ascending.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    sup
}

/// Two-sample Kolmogorov-Smirnov distance between two ascending samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    assert!(n > 0 && m > 0, "two-sample KS needs nonempty samples");
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    sup
}

/// Anderson-Darling statistic A^2 for a fully specified null distribution.
/// `u` are the null-cdf transforms of the ordered sample, ascending in (0,1).
///
/// The fully-specified ("case 0") upper tail points of A^2 are 2.492 (5%) and
/// 3.857 (1%).
pub fn anderson_darling_a2(u: &[f64]) -> f64 {
    let n = u.len();
    assert!(n > 0);
    let nf = n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let ui = u[i].clamp(1e-300, 1.0 - 1e-16);
        let urev = u[n - 1 - i].clamp(1e-300, 1.0 - 1e-16);
        s += (2.0 * i as f64 + 1.0) * (ui.ln() + (1.0 - urev).ln());
    }
    -nf - s / nf
}

/// Mean of a sample.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Empirical quantile by linear interpolation of order statistics;
/// `sorted` ascending, `q` in [0,1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Median (sorted input).
pub fn median_sorted(sorted: &[f64]) -> f64 {
    quantile_sorted(sorted, 0.5)
}
