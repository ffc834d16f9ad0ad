//! Samplers for the data regimes of the limit experiments (i.i.d., AR(1),
//! GARCH(1,1), long-memory moving averages) and for the Gaussian limit
//! objects they converge to: the F0-Brownian bridge with covariance
//! `F0(x ∧ y)(1 - F0(x ∨ y))` and the rank-one degenerate limit
//! `c_{1,beta} f0(.) Z` of strongly dependent data.
//!
//! Samplers are pure functions of `(spec, seed)`; replications parallelize
//! by assigning disjoint substreams via [`crate::seeds::substream_seed`].

use rand::Rng;
use rand_distr::{Distribution as RandDistribution, StandardNormal};

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::quad;
use crate::seeds;

/// Default truncation of the infinite moving average. The truncated sum
/// underestimates long-range dependence by the neglected coefficients
/// `sum_{s > M} s^{-2 beta}`, which decays like `M^{1-2 beta}`.
pub const DEFAULT_MA_TRUNCATION: usize = 10_000;

const BURN_IN: usize = 1_000;

/// Data-generating regime.
#[derive(Debug, Clone)]
pub enum Regime {
    /// independent draws from the innovation law
    Iid { innovation: Dist },
    /// `X_t = coef * X_{t-1} + eps_t`, `|coef| < 1`
    Ar1 { coef: f64, innovation: Dist },
    /// GARCH(1,1): `sigma_t^2 = omega + a X_{t-1}^2 + b sigma_{t-1}^2`,
    /// `X_t = sigma_t z_t` with standard normal innovations; `a + b < 1`
    Garch11 { omega: f64, a: f64, b: f64 },
    /// truncated moving average `X_t = sum_{s=0}^{M} a_s eps_{t-s}` with
    /// `a_s = s^{-beta}` (`a_0 = 1`), `beta in (1/2, 1)`
    LongMemory { beta: f64, truncation: usize, innovation: Dist },
}

/// A fully specified path request: regime, length, and seed.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub regime: Regime,
    pub n: usize,
    pub seed: u64,
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "path length must be positive"));
        }
        match &self.regime {
            Regime::Iid { .. } => {}
            Regime::Ar1 { coef, .. } => {
                if !(coef.abs() < 1.0) {
                    return Err(Error::invalid("coef", format!("need |coef| < 1, got {coef}")));
                }
            }
            Regime::Garch11 { omega, a, b } => {
                if !(*omega > 0.0) {
                    return Err(Error::invalid("omega", format!("must be positive, got {omega}")));
                }
                if !(*a >= 0.0 && *b >= 0.0 && a + b < 1.0) {
                    return Err(Error::invalid("a,b", format!("need a,b >= 0 and a+b < 1, got ({a},{b})")));
                }
            }
            Regime::LongMemory { beta, truncation, .. } => {
                if !(*beta > 0.5 && *beta < 1.0) {
                    return Err(Error::invalid("beta", format!("must be in (1/2,1), got {beta}")));
                }
                if *truncation == 0 {
                    return Err(Error::invalid("truncation", "must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

/// Moving-average coefficient `a_s = s^{-beta}` with the lag-zero
/// coefficient fixed to 1.
pub fn ma_coefficient(s: usize, beta: f64) -> f64 {
    if s == 0 {
        1.0
    } else {
        (s as f64).powf(-beta)
    }
}

/// Draws one path; identical specs give bitwise-identical output.
pub fn sample_process(spec: &ProcessSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = seeds::root_rng(spec.seed);
    let n = spec.n;
    Ok(match &spec.regime {
        Regime::Iid { innovation } => innovation.sample_n(n, &mut rng),
        Regime::Ar1 { coef, innovation } => {
            let mut x = 0.0;
            for _ in 0..BURN_IN {
                x = coef * x + innovation.sample(&mut rng);
            }
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                x = coef * x + innovation.sample(&mut rng);
                out.push(x);
            }
            out
        }
        Regime::Garch11 { omega, a, b } => {
            let mut sigma2 = omega / (1.0 - a - b);
            let mut x = 0.0;
            let step = |rng: &mut rand_chacha::ChaCha8Rng, sigma2: &mut f64, x: &mut f64| {
                *sigma2 = omega + a * *x * *x + b * *sigma2;
                let z: f64 = StandardNormal.sample(rng);
                *x = sigma2.sqrt() * z;
            };
            for _ in 0..BURN_IN {
                step(&mut rng, &mut sigma2, &mut x);
            }
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                step(&mut rng, &mut sigma2, &mut x);
                out.push(x);
            }
            out
        }
        Regime::LongMemory { beta, truncation, innovation } => {
            let m = *truncation;
            let coefs: Vec<f64> = (0..=m).map(|s| ma_coefficient(s, *beta)).collect();
            // ring buffer of the most recent m+1 innovations; the first m
            // outputs are burn-in and discarded
            let mut buf = vec![0.0f64; m + 1];
            let mut head = 0usize;
            for slot in buf.iter_mut() {
                *slot = innovation.sample(&mut rng);
            }
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                head = (head + 1) % (m + 1);
                buf[head] = innovation.sample(&mut rng);
                let mut acc = 0.0;
                for (s, c) in coefs.iter().enumerate() {
                    let idx = (head + (m + 1) - s) % (m + 1);
                    acc += c * buf[idx];
                }
                out.push(acc);
            }
            out
        }
    })
}

/// The scaling constant of the strongly dependent limit,
/// `c_{1,beta} = sqrt( var_eps (1 - (beta - 1/2)) (1 - (2 beta - 1))
///                     / ∫_0^inf (x + x^2)^{-beta} dx )`.
pub fn c1_beta(beta: f64, var_eps: f64) -> Result<f64> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::invalid("beta", format!("must be in (1/2,1), got {beta}")));
    }
    if !(var_eps > 0.0) {
        return Err(Error::invalid("var_eps", format!("must be positive, got {var_eps}")));
    }
    // substitute x = 1/u on [1, inf): the integrand becomes
    // u^{2 beta - 2} (1 + u)^{-beta} on (0, 1], compact with an integrable
    // endpoint singularity at 0
    let head = |x: f64| (x + x * x).powf(-beta);
    let tail = |u: f64| u.powf(2.0 * beta - 2.0) * (1.0 + u).powf(-beta);
    let integral =
        quad::integrate_open(&head, 0.0, 1.0, 1e-13)? + quad::integrate_open(&tail, 0.0, 1.0, 1e-13)?;
    let numerator = var_eps * (1.0 - (beta - 0.5)) * (1.0 - (2.0 * beta - 1.0));
    Ok((numerator / integral).sqrt())
}

/// Grid request for the F0-Brownian bridge.
#[derive(Debug, Clone)]
pub struct BridgeSpec {
    pub f0: Dist,
    pub grid: Vec<f64>,
    pub seed: u64,
}

/// Reusable sampler for the F0-Brownian bridge on a fixed grid, built on the
/// time change `B(x) = W(F0(x))` of a standard Brownian bridge `W` on
/// `[0,1]`, sampled by cumulative increments plus a tie-down at 1 (no dense
/// Cholesky factor).
#[derive(Debug, Clone)]
pub struct BridgeSampler {
    /// `u_i = F0(x_i)`, nondecreasing in `[0,1]`
    time_points: Vec<f64>,
    /// standard deviations of the successive increments, length `m + 1`
    /// (the last entry closes the gap from `u_m` to 1)
    increment_sds: Vec<f64>,
}

impl BridgeSampler {
    pub fn new(f0: &Dist, grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invalid("grid", "must be nonempty"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid", "must be strictly increasing"));
        }
        if grid[0] < f0.lower() || grid[grid.len() - 1] > f0.upper() {
            return Err(Error::Domain(format!(
                "grid must lie within the support [{}, {}]",
                f0.lower(),
                f0.upper()
            )));
        }
        let time_points: Vec<f64> = grid.iter().map(|&x| f0.cdf(x)).collect();
        let mut increment_sds = Vec::with_capacity(time_points.len() + 1);
        let mut prev = 0.0;
        for &u in &time_points {
            increment_sds.push((u - prev).max(0.0).sqrt());
            prev = u;
        }
        increment_sds.push((1.0 - prev).max(0.0).sqrt());
        Ok(BridgeSampler { time_points, increment_sds })
    }

    /// One bridge path on the grid.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = self.time_points.len();
        let mut w = Vec::with_capacity(m);
        let mut acc = 0.0;
        for sd in &self.increment_sds[..m] {
            let z: f64 = StandardNormal.sample(rng);
            acc += sd * z;
            w.push(acc);
        }
        let z: f64 = StandardNormal.sample(rng);
        let w1 = acc + self.increment_sds[m] * z;
        for (wi, &u) in w.iter_mut().zip(&self.time_points) {
            *wi -= u * w1;
        }
        w
    }
}

/// One draw of the F0-Brownian bridge per [`BridgeSpec`].
pub fn sample_bridge(spec: &BridgeSpec) -> Result<Vec<f64>> {
    let sampler = BridgeSampler::new(&spec.f0, &spec.grid)?;
    let mut rng = seeds::root_rng(spec.seed);
    Ok(sampler.draw(&mut rng))
}

/// Sampler for the degenerate limit of strongly dependent data: one Gaussian
/// scalar per draw times the fixed shape `c_{1,beta} f0(.)` on the grid.
#[derive(Debug, Clone)]
pub struct DegenerateLimit {
    shape: Vec<f64>,
}

impl DegenerateLimit {
    pub fn new(f0: &Dist, beta: f64, var_eps: f64, grid: &[f64]) -> Result<Self> {
        if !f0.has_density() {
            return Err(Error::Domain("degenerate limit requires a density".into()));
        }
        let c = c1_beta(beta, var_eps)?;
        let shape = grid
            .iter()
            .map(|&x| c * f0.density(x).unwrap_or(0.0))
            .collect();
        Ok(DegenerateLimit { shape })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: f64 = StandardNormal.sample(rng);
        self.shape.iter().map(|s| s * z).collect()
    }

    pub fn shape(&self) -> &[f64] {
        &self.shape
    }
}

/// Degenerate-limit sampler bound to a grid (see [`DegenerateLimit`]).
pub fn degenerate_limit(f0: &Dist, beta: f64, var_eps: f64, grid: &[f64]) -> Result<DegenerateLimit> {
    DegenerateLimit::new(f0, beta, var_eps, grid)
}

/// Writes a path as a one-column CSV, header carried in a `#` comment line.
pub fn export_path_csv(path: &std::path::Path, header_json: &str, values: &[f64]) -> Result<()> {
    use std::io::Write;
    let mut out = String::with_capacity(values.len() * 20 + header_json.len() + 2);
    out.push_str("# ");
    out.push_str(header_json);
    out.push('\n');
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    file.write_all(out.as_bytes()).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_autocorr(xs: &[f64], lag: usize) -> f64 {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        let cov: f64 = (0..n - lag)
            .map(|i| (xs[i] - mean) * (xs[i + lag] - mean))
            .sum::<f64>();
        cov / var
    }

    #[test]
    fn seed_determinism_is_bitwise() {
        let spec = ProcessSpec {
            regime: Regime::Iid { innovation: Dist::uniform(0.0, 1.0).unwrap() },
            n: 5,
            seed: 7,
        };
        let a = sample_process(&spec).unwrap();
        let b = sample_process(&spec).unwrap();
        assert_eq!(a.len(), 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn ar1_with_zero_coef_is_iid_innovations() {
        let innovation = Dist::normal(0.0, 1.0).unwrap();
        let spec = ProcessSpec {
            regime: Regime::Ar1 { coef: 0.0, innovation: innovation.clone() },
            n: 50,
            seed: 9,
        };
        let path = sample_process(&spec).unwrap();
        // same stream with the burn-in skipped
        let mut rng = seeds::root_rng(9);
        let _burn = innovation.sample_n(1_000, &mut rng);
        let direct = innovation.sample_n(50, &mut rng);
        for (x, y) in path.iter().zip(&direct) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn ma_coefficients_match_the_power_law() {
        assert_abs_diff_eq!(ma_coefficient(1, 0.75), 1.0);
        assert_abs_diff_eq!(ma_coefficient(2, 0.75), 2f64.powf(-0.75), epsilon = 1e-15);
        assert_abs_diff_eq!(ma_coefficient(0, 0.75), 1.0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let innovation = Dist::normal(0.0, 1.0).unwrap();
        let bad = [
            ProcessSpec { regime: Regime::Ar1 { coef: 1.0, innovation: innovation.clone() }, n: 10, seed: 0 },
            ProcessSpec { regime: Regime::Garch11 { omega: 0.1, a: 0.6, b: 0.5 }, n: 10, seed: 0 },
            ProcessSpec {
                regime: Regime::LongMemory { beta: 0.4, truncation: 10, innovation: innovation.clone() },
                n: 10,
                seed: 0,
            },
            ProcessSpec { regime: Regime::Iid { innovation }, n: 0, seed: 0 },
        ];
        for spec in bad {
            assert!(sample_process(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn garch_is_stationaryish_and_deterministic() {
        let spec = ProcessSpec {
            regime: Regime::Garch11 { omega: 0.1, a: 0.1, b: 0.8 },
            n: 20_000,
            seed: 4,
        };
        let xs = sample_process(&spec).unwrap();
        let var = crate::stats::variance(&xs);
        // unconditional variance omega / (1 - a - b) = 1
        assert!((var - 1.0).abs() < 0.25, "variance {var}");
        let again = sample_process(&spec).unwrap();
        assert_eq!(xs[0].to_bits(), again[0].to_bits());
    }

    #[test]
    fn long_memory_autocovariance_signature() {
        let innovation = Dist::normal(0.0, 1.0).unwrap();
        let lm = sample_process(&ProcessSpec {
            regime: Regime::LongMemory {
                beta: 0.75,
                truncation: 2_000,
                innovation: innovation.clone(),
            },
            n: 100_000,
            seed: 12,
        })
        .unwrap();
        let ar = sample_process(&ProcessSpec {
            regime: Regime::Ar1 { coef: 0.5, innovation },
            n: 100_000,
            seed: 12,
        })
        .unwrap();
        let lm10 = sample_autocorr(&lm, 10);
        let ar10 = sample_autocorr(&ar, 10);
        assert!(lm10 > 0.0, "long-memory lag-10 autocorr {lm10}");
        assert!(lm10 > ar10, "long-memory {lm10} vs ar {ar10}");
    }

    #[test]
    fn c1_beta_properties() {
        for beta in [0.6, 0.75, 0.9] {
            let c = c1_beta(beta, 1.0).unwrap();
            assert!(c > 0.0);
            assert_abs_diff_eq!(c1_beta(beta, 4.0).unwrap(), 2.0 * c, epsilon = 1e-12);
        }
        assert!(c1_beta(0.5, 1.0).is_err());
        assert!(c1_beta(1.0, 1.0).is_err());
    }

    #[test]
    fn c1_beta_against_beta_function_closed_form() {
        // ∫_0^inf x^{-b}(1+x)^{-b} dx = B(1-b, 2b-1)
        use statrs::function::gamma::gamma;
        let beta = 0.75;
        let b_exact = gamma(1.0 - beta) * gamma(2.0 * beta - 1.0) / gamma(beta);
        let c = c1_beta(beta, 1.0).unwrap();
        let expected = ((1.0 - (beta - 0.5)) * (1.0 - (2.0 * beta - 1.0)) / b_exact).sqrt();
        assert_abs_diff_eq!(c, expected, epsilon = 1e-8);
    }

    #[test]
    fn bridge_ties_down_and_matches_covariance() {
        let f0 = Dist::uniform(0.0, 1.0).unwrap();
        let grid = [0.0, 0.25, 0.5, 0.9];
        let sampler = BridgeSampler::new(&f0, &grid).unwrap();
        let mut rng = seeds::root_rng(31);
        let n = 10_000;
        let mut sum = vec![0.0; grid.len()];
        let mut sumsq = vec![0.0; grid.len()];
        let mut cross = 0.0; // between grid[1] and grid[2]
        for _ in 0..n {
            let b = sampler.draw(&mut rng);
            assert_eq!(b[0], 0.0); // F0 = 0 at the left edge: exact tie-down
            for (i, &v) in b.iter().enumerate() {
                sum[i] += v;
                sumsq[i] += v * v;
            }
            cross += b[1] * b[2];
        }
        for (i, &x) in grid.iter().enumerate() {
            let u = f0.cdf(x);
            let var = sumsq[i] / n as f64 - (sum[i] / n as f64).powi(2);
            let target = u * (1.0 - u);
            let se = target * (2.0f64 / n as f64).sqrt() + 1e-12;
            assert!((var - target).abs() < 4.0 * se.max(0.005), "var at {x}: {var} vs {target}");
        }
        let target_cov = 0.25 * (1.0 - 0.5);
        let got = cross / n as f64;
        assert!((got - target_cov).abs() < 0.01, "cov {got} vs {target_cov}");
    }

    #[test]
    fn bridge_marginals_pass_anderson_darling() {
        // fully specified null: B(x) ~ N(0, F0(x)(1-F0(x))); 1% critical
        // value of A^2 is 3.857
        let f0 = Dist::exponential(1.0).unwrap();
        let grid = [0.2, 0.8, 2.0];
        let sampler = BridgeSampler::new(&f0, &grid).unwrap();
        let mut rng = seeds::root_rng(77);
        let n = 10_000;
        let mut draws = vec![Vec::with_capacity(n); grid.len()];
        for _ in 0..n {
            let b = sampler.draw(&mut rng);
            for (i, v) in b.into_iter().enumerate() {
                draws[i].push(v);
            }
        }
        for (i, &x) in grid.iter().enumerate() {
            let sd = (f0.cdf(x) * (1.0 - f0.cdf(x))).sqrt();
            let mut u: Vec<f64> = draws[i]
                .iter()
                .map(|v| crate::stats::normal_cdf(v / sd))
                .collect();
            crate::stats::sort_in_place(&mut u);
            let a2 = crate::stats::anderson_darling_a2(&u);
            assert!(a2 < 3.857, "A^2 = {a2} at grid point {x}");
        }
    }

    #[test]
    fn bridge_rejects_bad_grids() {
        let f0 = Dist::uniform(0.0, 1.0).unwrap();
        assert!(BridgeSampler::new(&f0, &[]).is_err());
        assert!(BridgeSampler::new(&f0, &[0.5, 0.5]).is_err());
        assert!(BridgeSampler::new(&f0, &[-0.5, 0.5]).is_err());
    }

    #[test]
    fn degenerate_limit_is_rank_one() {
        let f0 = Dist::exponential(1.0).unwrap();
        let grid = [0.5, 1.0, 2.0];
        let lim = degenerate_limit(&f0, 0.75, 1.0, &grid).unwrap();
        let mut rng = seeds::root_rng(5);
        let c = c1_beta(0.75, 1.0).unwrap();
        let mut mean = 0.0;
        let mut var0 = 0.0;
        let n = 20_000;
        for _ in 0..n {
            let d = lim.draw(&mut rng);
            // ratio equals f0(x)/f0(y) for every draw
            if d[1].abs() > 1e-12 {
                assert_abs_diff_eq!(
                    d[0] / d[1],
                    f0.density(0.5).unwrap() / f0.density(1.0).unwrap(),
                    epsilon = 1e-10
                );
            }
            mean += d[0];
            var0 += d[0] * d[0];
        }
        mean /= n as f64;
        var0 /= n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        let target = (c * f0.density(0.5).unwrap()).powi(2);
        assert!((var0 - target).abs() < 0.05 * target + 0.01, "{var0} vs {target}");

        // missing density is a domain error
        let emp: Dist = crate::dist::EmpiricalDist::new(&[1.0, 2.0]).unwrap().into();
        assert!(degenerate_limit(&emp, 0.75, 1.0, &grid).is_err());
    }

    #[test]
    fn csv_export_writes_comment_header() {
        let dir = std::env::temp_dir().join("riskfunc_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("path.csv");
        export_path_csv(&path, "{\"n\":3}", &[1.0, 2.5, -0.5]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# {\"n\":3}\n1\n2.5\n-0.5\n");
        // ingestable by the empirical loader
        let e = crate::dist::EmpiricalDist::from_csv(std::io::Cursor::new(text)).unwrap();
        assert_eq!(e.n(), 3);
    }
}
