//! Monte Carlo harness for the limit behaviour of plug-in estimators:
//! distributional comparison of scaled estimation errors against their
//! predicted Gaussian (or simulated) limit, strong-law trend checks, and
//! contamination-sensitivity curves. Reports persist as versioned JSON and
//! are bit-reproducible from `(config, root seed)` at any parallelism.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derivative;
use crate::diagnostics::{self, Verdict};
use crate::dist::{Dist, EmpiricalDist};
use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::process::{sample_process, BridgeSampler, ProcessSpec};
use crate::risk::{self, RiskEvaluator};
use crate::seeds;
use crate::specs::{DistSpec, RegimeSpec, RiskSpec};
use crate::stats;
use crate::weights::{empirical_sup_norm, WeightFn};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Scaling rule `r_n` applied to the estimation errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RateRule {
    /// `r_n = sqrt(n)`
    Sqrt,
    /// `r_n = n^r`
    Power { r: f64 },
    /// explicit values aligned with `n_values`
    Custom { values: Vec<f64> },
}

impl RateRule {
    fn value(&self, n: usize, index: usize) -> f64 {
        match self {
            RateRule::Sqrt => (n as f64).sqrt(),
            RateRule::Power { r } => (n as f64).powf(*r),
            RateRule::Custom { values } => values[index],
        }
    }
}

/// Full experiment description; serializes into the report for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub risk: RiskSpec,
    pub f0: DistSpec,
    pub weight: WeightFn,
    pub regime: RegimeSpec,
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub rate: RateRule,
    pub root_seed: u64,
    /// pass/fail threshold on the KS distance to the reference law
    pub ks_tolerance: f64,
    /// size of the simulated/drawn reference sample
    pub reference_draws: usize,
    /// quantile-grid size for simulating the limit functional of the bridge
    pub bridge_grid: usize,
    /// worker threads (None: library default); results do not depend on it
    pub parallelism: Option<usize>,
    /// run on even when a diagnostic hard-fails (logged as a warning)
    pub override_diagnostics: bool,
}

impl ExperimentConfig {
    pub fn new(risk: RiskSpec, f0: DistSpec) -> Self {
        let regime = RegimeSpec::Iid { innovation: f0.clone() };
        ExperimentConfig {
            risk,
            f0,
            weight: WeightFn::power(2.0),
            regime,
            n_values: vec![2_000],
            replications: 1_000,
            rate: RateRule::Sqrt,
            root_seed: 42,
            ks_tolerance: 0.035,
            reference_draws: 10_000,
            bridge_grid: 4_096,
            parallelism: None,
            override_diagnostics: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("n_values", "must be nonempty and increasing"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if let RateRule::Custom { values } = &self.rate {
            if values.len() != self.n_values.len() {
                return Err(Error::invalid("rate", "custom rates must align with n_values"));
            }
        }
        if self.bridge_grid < 16 {
            return Err(Error::invalid("bridge_grid", "too coarse"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportVerdict {
    Pass,
    Fail,
    Insufficient,
}

/// Per-sample-size summary statistics of the scaled errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSummary {
    pub n: usize,
    pub replications: usize,
    pub r_n: f64,
    pub mean: f64,
    pub sd: f64,
    /// `(level, value)` at 5/25/50/75/95 percent
    pub quantiles: Vec<(f64, f64)>,
    /// two-sample KS distance to the reference law (weak-limit runs)
    pub ks_to_reference: Option<f64>,
    /// median of `r_n |R(F_n) - R(F0)|` (strong-law runs)
    pub median_scaled_risk_error: Option<f64>,
    /// median of `r_n |F_n - F0|_phi` (strong-law runs)
    pub median_scaled_norm: Option<f64>,
}

/// Persisted record of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub kind: String,
    pub config: ExperimentConfig,
    pub per_n: Vec<NSummary>,
    pub verdict: ReportVerdict,
    pub notes: Vec<String>,
    /// populated by the runner; excluded from reproducibility comparisons
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl ExperimentReport {
    /// Copy with the wall time cleared, for bit-for-bit comparisons and
    /// byte-identical artifacts.
    pub fn normalized(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_secs = None;
        r
    }
}

/// Writes a report as pretty JSON.
pub fn persist_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(path, json.as_bytes()).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Loads a report, rejecting unknown schema versions.
pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let report: ExperimentReport = serde_json::from_str(&text)?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: report.schema_version,
            expected: REPORT_SCHEMA_VERSION,
        });
    }
    Ok(report)
}

/// Writes per-replication scaled errors as a one-column CSV for plotting.
pub fn export_errors_csv(path: &Path, n: usize, errors: &[f64]) -> Result<()> {
    crate::process::export_path_csv(path, &format!("{{\"scaled_errors_for_n\":{n}}}"), errors)
}

/// Output of a weak-limit run: the report plus the raw scaled errors per n.
#[derive(Debug, Clone)]
pub struct CltRun {
    pub report: ExperimentReport,
    pub scaled_errors: Vec<(usize, Vec<f64>)>,
    /// the reference sample the errors were compared against
    pub reference_sample: Vec<f64>,
}

fn in_pool<T: Send>(parallelism: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match parallelism {
        None => Ok(job()),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn run_diagnostics(config: &ExperimentConfig, f0: &Dist, notes: &mut Vec<String>) -> Result<()> {
    let mut failures = Vec::new();
    let smooth = diagnostics::smoothness_check(f0);
    if smooth.verdict != Verdict::Holds {
        failures.push(format!("smooth-density: {:?} ({})", smooth.verdict, smooth.note.unwrap_or_default()));
    }
    if diagnostics::clt_weight_check(f0, &config.weight) == Verdict::Fails {
        failures.push("clt-weight-moment: Fails".into());
    }
    let ev = config.risk.build()?;
    let probe = diagnostics::probe_integrability(
        |t| ev.g_rho(t).unwrap_or(f64::NAN),
        f0,
        &config.weight,
        0.5,
    )?;
    if probe.verdict == diagnostics::ProbeVerdict::DivergingOrSlow {
        failures.push("tail-integrability: DivergingOrSlow".into());
    }
    if failures.is_empty() {
        return Ok(());
    }
    if config.override_diagnostics {
        for f in failures {
            notes.push(format!("diagnostic overridden: {f}"));
        }
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "diagnostics failed: {} (set override_diagnostics to proceed)",
            failures.join("; ")
        )))
    }
}

/// Simulates draws of the limit functional applied to the F0-Brownian
/// bridge: `sup` over the active members of `∫ g'(F0(x)) B(x) dx`, each
/// integral a trapezoid over a quantile-spaced grid.
pub fn bridge_functional_draws(
    family: &[Distortion],
    f0: &Dist,
    grid_size: usize,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if family.is_empty() {
        return Err(Error::Domain("family must be nonempty".into()));
    }
    // active members at F0 select which derivatives enter the sup
    let active: Vec<usize> = if family.len() == 1 {
        vec![0]
    } else {
        risk::kusuoka_sup(family, f0, 1e-9)?.argmax
    };
    // common t-grid covering the union of the active derivative supports
    let (mut t_lo, mut t_hi) = (1.0f64, 0.0f64);
    for &i in &active {
        let (a, b) = family[i].derivative_support();
        t_lo = t_lo.min(a);
        t_hi = t_hi.max(b);
    }
    let m = grid_size;
    let span = t_hi - t_lo;
    let mut ts = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let frac = (j as f64 / m as f64).max(1e-9 / span.max(1e-9)).min(1.0 - 1e-12);
        ts.push(t_lo + span * frac);
    }
    ts.dedup();
    let xs: Vec<f64> = ts.iter().map(|&t| f0.left_inv(t)).collect();
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Numeric("quantile grid is not strictly increasing".into()));
    }
    let sampler = BridgeSampler::new(f0, &xs)?;
    // per active member: cell weights g'(t at cell midpoint) * cell width
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(active.len());
    for &i in &active {
        let g = &family[i];
        let w: Vec<f64> = (0..xs.len() - 1)
            .map(|j| {
                let tm = 0.5 * (ts[j] + ts[j + 1]);
                let gp = g.rderiv(tm).unwrap_or(0.0);
                if gp.is_finite() {
                    gp * (xs[j + 1] - xs[j])
                } else {
                    0.0
                }
            })
            .collect();
        weights.push(w);
    }
    let out: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeds::substream_rng(seed, k as u64);
            let b = sampler.draw(&mut rng);
            let mut sup = f64::NEG_INFINITY;
            for w in &weights {
                let mut acc = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    acc += wj * 0.5 * (b[j] + b[j + 1]);
                }
                sup = sup.max(acc);
            }
            sup
        })
        .collect();
    Ok(out)
}

/// The distortion family underlying a risk spec, for reference-law
/// simulation; non-distortion measures have no computable limit here.
fn reference_family(risk: &RiskSpec) -> Result<Vec<Distortion>> {
    match risk {
        RiskSpec::Kusuoka { members } => {
            members.iter().map(|m| m.distortion()).collect()
        }
        other => Ok(vec![other.distortion().map_err(|_| {
            Error::Precondition(
                "reference law requires a distortion risk measure or a finite family".into(),
            )
        })?]),
    }
}

/// Weak-limit experiment: for each `n`, draws `replications` datasets,
/// forms `r_n (R(F_n) - R(F0))`, and compares their law against the
/// predicted limit by the two-sample KS distance.
///
/// The reference law is `N(0, sigma^2)` with the quadrature variance for a
/// single distortion, and the simulated law of the bridge functional for a
/// family. Dependent regimes are allowed but the reference stays the
/// independent-sampling limit (noted in the report).
pub fn run_clt(config: &ExperimentConfig) -> Result<CltRun> {
    let t0 = std::time::Instant::now();
    config.validate()?;
    let f0 = config.f0.build()?;
    let ev = config.risk.build()?;
    let mut notes = Vec::new();
    run_diagnostics(config, &f0, &mut notes)?;
    if !matches!(config.regime, RegimeSpec::Iid { .. }) {
        notes.push("reference law assumes independent sampling; regime is dependent".into());
    }
    let r0 = ev.eval_dist(&f0)?;
    let family = reference_family(&config.risk)?;

    // reference sample
    let reference_sample: Vec<f64> = if family.len() == 1 {
        let sigma2 = derivative::asymptotic_variance_iid(&family[0], &f0, 1e-10)?;
        let sigma = sigma2.sqrt();
        let mut rng = seeds::substream_rng(config.root_seed, u64::MAX);
        (0..config.reference_draws)
            .map(|_| {
                let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                sigma * z
            })
            .collect()
    } else {
        bridge_functional_draws(
            &family,
            &f0,
            config.bridge_grid,
            config.reference_draws,
            seeds::substream_seed(config.root_seed, u64::MAX - 1),
        )?
    };
    let mut sorted_reference = reference_sample.clone();
    stats::sort_in_place(&mut sorted_reference);

    let mut per_n = Vec::with_capacity(config.n_values.len());
    let mut scaled_errors = Vec::with_capacity(config.n_values.len());
    let mut verdict = ReportVerdict::Pass;
    for (ni, &n) in config.n_values.iter().enumerate() {
        let rn = config.rate.value(n, ni);
        let errors: Result<Vec<f64>> = in_pool(config.parallelism, || {
            (0..config.replications)
                .into_par_iter()
                .map(|rep| {
                    let stream = (ni as u64) << 40 | rep as u64;
                    let spec = ProcessSpec {
                        regime: config.regime.build()?,
                        n,
                        seed: seeds::substream_seed(config.root_seed, stream),
                    };
                    let mut xs = sample_process(&spec)?;
                    stats::sort_in_place(&mut xs);
                    let r_hat = match &ev {
                        RiskEvaluator::Distortion(g) => risk::eval_empirical_l_sorted(g, &xs),
                        other => other.eval_samples(&xs)?,
                    };
                    Ok(rn * (r_hat - r0))
                })
                .collect()
        })?;
        let errors = errors?;
        let mut sorted = errors.clone();
        stats::sort_in_place(&mut sorted);
        let ks = if config.replications >= 2 {
            Some(stats::ks_two_sample(&sorted, &sorted_reference))
        } else {
            notes.push(format!("n={n}: single replication, KS comparison insufficient"));
            None
        };
        if let Some(d) = ks {
            if d > config.ks_tolerance {
                verdict = ReportVerdict::Fail;
            }
        } else if verdict == ReportVerdict::Pass {
            verdict = ReportVerdict::Insufficient;
        }
        per_n.push(NSummary {
            n,
            replications: config.replications,
            r_n: rn,
            mean: stats::mean(&errors),
            sd: if errors.len() > 1 { stats::variance(&errors).sqrt() } else { 0.0 },
            quantiles: [0.05, 0.25, 0.5, 0.75, 0.95]
                .iter()
                .map(|&q| (q, stats::quantile_sorted(&sorted, q)))
                .collect(),
            ks_to_reference: ks,
            median_scaled_risk_error: None,
            median_scaled_norm: None,
        });
        scaled_errors.push((n, errors));
    }
    let report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: "clt".into(),
        config: config.clone(),
        per_n,
        verdict,
        notes,
        wall_time_secs: Some(t0.elapsed().as_secs_f64()),
    };
    Ok(CltRun { report, scaled_errors, reference_sample: sorted_reference })
}

/// Strong-law experiment: medians of `r_n |R(F_n) - R(F0)|` and of
/// `r_n |F_n - F0|_phi` per sample size; verdict is `Pass`
/// ("consistent with the strong law") when both medians are nonincreasing
/// across the last three sample sizes.
pub fn run_strong_law(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let t0 = std::time::Instant::now();
    config.validate()?;
    let r = match &config.rate {
        RateRule::Power { r } => *r,
        RateRule::Sqrt => 0.5,
        RateRule::Custom { .. } => 0.0,
    };
    if !matches!(config.rate, RateRule::Custom { .. }) && !(0.0..0.5).contains(&r) {
        return Err(Error::Precondition(format!(
            "strong-law rate exponent must satisfy r in [0, 1/2), got {r}"
        )));
    }
    let f0 = config.f0.build()?;
    let ev = config.risk.build()?;
    let mut notes = Vec::new();
    if diagnostics::strong_law_weight_check(&f0, &config.weight, if matches!(config.rate, RateRule::Custom { .. }) { 0.0 } else { r })?
        == Verdict::Fails
    {
        if config.override_diagnostics {
            notes.push("diagnostic overridden: strong-law-weight-moment Fails".into());
        } else {
            return Err(Error::Precondition(
                "strong-law weight moment fails (set override_diagnostics to proceed)".into(),
            ));
        }
    }
    let r0 = ev.eval_dist(&f0)?;
    let phi = config.weight;

    let mut per_n = Vec::with_capacity(config.n_values.len());
    for (ni, &n) in config.n_values.iter().enumerate() {
        let rn = config.rate.value(n, ni);
        let rows: Result<Vec<(f64, f64)>> = in_pool(config.parallelism, || {
            (0..config.replications)
                .into_par_iter()
                .map(|rep| {
                    let stream = (ni as u64) << 40 | rep as u64;
                    let spec = ProcessSpec {
                        regime: config.regime.build()?,
                        n,
                        seed: seeds::substream_seed(config.root_seed, stream),
                    };
                    let mut xs = sample_process(&spec)?;
                    stats::sort_in_place(&mut xs);
                    let emp = EmpiricalDist::from_sorted(xs);
                    let r_hat = match &ev {
                        RiskEvaluator::Distortion(g) => {
                            risk::eval_empirical_l_sorted(g, emp.sorted())
                        }
                        other => other.eval_samples(emp.sorted())?,
                    };
                    let norm = empirical_sup_norm(&emp, &f0, &phi);
                    Ok((rn * (r_hat - r0).abs(), rn * norm))
                })
                .collect()
        })?;
        let rows = rows?;
        let mut risk_errs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut norms: Vec<f64> = rows.iter().map(|r| r.1).collect();
        stats::sort_in_place(&mut risk_errs);
        stats::sort_in_place(&mut norms);
        per_n.push(NSummary {
            n,
            replications: config.replications,
            r_n: rn,
            mean: stats::mean(&risk_errs),
            sd: if risk_errs.len() > 1 { stats::variance(&risk_errs).sqrt() } else { 0.0 },
            quantiles: [0.05, 0.25, 0.5, 0.75, 0.95]
                .iter()
                .map(|&q| (q, stats::quantile_sorted(&risk_errs, q)))
                .collect(),
            ks_to_reference: None,
            median_scaled_risk_error: Some(stats::median_sorted(&risk_errs)),
            median_scaled_norm: Some(stats::median_sorted(&norms)),
        });
    }
    // trend verdict over the last three sample sizes
    let tail = per_n.iter().rev().take(3).collect::<Vec<_>>();
    let nonincreasing = |get: fn(&NSummary) -> Option<f64>| -> bool {
        tail.windows(2).all(|w| {
            // tail is reversed: w[0] is the larger n
            match (get(w[0]), get(w[1])) {
                (Some(big), Some(small)) => big <= small + 1e-12,
                _ => false,
            }
        })
    };
    let verdict = if per_n.len() < 3 {
        ReportVerdict::Insufficient
    } else if nonincreasing(|s| s.median_scaled_risk_error) && nonincreasing(|s| s.median_scaled_norm)
    {
        ReportVerdict::Pass
    } else {
        ReportVerdict::Fail
    };
    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: "strong-law".into(),
        config: config.clone(),
        per_n,
        verdict,
        notes,
        wall_time_secs: Some(t0.elapsed().as_secs_f64()),
    })
}

/// One row of a contamination-sensitivity curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub h: f64,
    pub value: Option<f64>,
    /// secant slope `(R(F_{0,h}) - R(F0)) / h`
    pub slope: Option<f64>,
    pub error: Option<String>,
}

/// Contamination-sensitivity curve `h -> R((1-h) F0 + h G)` together with the
/// tangent prediction `dR(G - F0)` where available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub base_value: f64,
    pub rows: Vec<SensitivityRow>,
    /// derivative prediction; present when `G - F0` is an admissible
    /// direction and the measure is a distortion or finite family
    pub predicted_slope: Option<f64>,
    pub notes: Vec<String>,
}

/// Evaluates the risk along the contamination path `(1-h) F0 + h G`.
/// Row-level failures (e.g. divergence at some `h`) do not stop the curve.
pub fn run_sensitivity(
    risk: &RiskSpec,
    f0: &DistSpec,
    g: &DistSpec,
    h_grid: &[f64],
) -> Result<SensitivityCurve> {
    let ev = risk.build()?;
    let f0d = f0.build()?;
    let gd = g.build()?;
    let base_value = ev.eval_dist(&f0d)?;
    let mut rows = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let row = match Dist::contaminate(&f0d, &gd, h) {
            Err(e) => SensitivityRow { h, value: None, slope: None, error: Some(e.to_string()) },
            Ok(mix) => match ev.eval_dist(&mix) {
                Err(e) => SensitivityRow { h, value: None, slope: None, error: Some(e.to_string()) },
                Ok(v) => SensitivityRow {
                    h,
                    value: Some(v),
                    slope: if h > 0.0 { Some((v - base_value) / h) } else { None },
                    error: None,
                },
            },
        };
        rows.push(row);
    }
    // derivative prediction along v = G - F0
    let mut notes = Vec::new();
    let predicted_slope = match reference_family(risk) {
        Err(_) => {
            notes.push("no derivative prediction for this measure kind".into());
            None
        }
        Ok(family) => {
            if gd.lower() < f0d.lower() - 1e-12 || gd.upper() > f0d.upper() + 1e-12 {
                notes.push(
                    "G - F0 does not vanish outside the support window of F0; no tangent prediction"
                        .into(),
                );
                None
            } else {
                let lo = if f0d.lower().is_finite() { f0d.lower() } else { f0d.left_inv(1e-9) - 1.0 };
                let hi = if f0d.upper().is_finite() { f0d.upper() } else { f0d.left_inv(1.0 - 1e-9) + 1.0 };
                let (g1, f1) = (gd.clone(), f0d.clone());
                let mut breakpoints = gd.discontinuity_points();
                breakpoints.extend_from_slice(f0d.nonsmooth_points());
                let jumps = gd.discontinuity_points();
                let v = crate::weights::Direction::from_fn(
                    std::sync::Arc::new(move |x| g1.cdf(x) - f1.cdf(x)),
                    (lo, hi),
                    breakpoints,
                    jumps.clone(),
                );
                if !jumps.is_empty() && f0d.discontinuity_points().is_empty() {
                    notes.push(
                        "direction jumps where F0 is continuous; prediction is outside the tangent cone"
                            .into(),
                    );
                }
                let cfg = derivative::DerivativeConfig::default();
                match derivative::qh_derivative_family(&family, &f0d, &v, &cfg) {
                    Ok(fd) => Some(fd.value),
                    Err(e) => {
                        notes.push(format!("derivative prediction failed: {e}"));
                        None
                    }
                }
            }
        }
    };
    Ok(SensitivityCurve { base_value, rows, predicted_slope, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quick_clt_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            RiskSpec::Avatr { alpha: 0.2 },
            DistSpec::Uniform { a: 0.0, b: 1.0 },
        );
        c.n_values = vec![400];
        c.replications = 300;
        c.reference_draws = 2_000;
        c.bridge_grid = 512;
        c.ks_tolerance = 0.12;
        c
    }

    #[test]
    fn clt_run_produces_reasonable_report() {
        let run = run_clt(&quick_clt_config()).unwrap();
        let rep = &run.report;
        assert_eq!(rep.kind, "clt");
        assert_eq!(rep.per_n.len(), 1);
        let s = &rep.per_n[0];
        assert!(s.ks_to_reference.unwrap() < 0.12, "{s:?}");
        assert_eq!(rep.verdict, ReportVerdict::Pass);
        assert_eq!(run.scaled_errors[0].1.len(), 300);
    }

    #[test]
    fn clt_single_replication_is_insufficient() {
        let mut c = quick_clt_config();
        c.replications = 1;
        let run = run_clt(&c).unwrap();
        assert_eq!(run.report.verdict, ReportVerdict::Insufficient);
        assert!(run.report.per_n[0].ks_to_reference.is_none());
        assert!(run.report.notes.iter().any(|n| n.contains("insufficient")));
    }

    #[test]
    fn clt_deterministic_across_parallelism() {
        let mut c1 = quick_clt_config();
        c1.replications = 64;
        c1.parallelism = Some(1);
        let mut c8 = c1.clone();
        c8.parallelism = Some(8);
        let r1 = run_clt(&c1).unwrap();
        let r8 = run_clt(&c8).unwrap();
        // identical statistics bit for bit; configs differ only in the knob
        for (a, b) in r1.scaled_errors[0].1.iter().zip(&r8.scaled_errors[0].1) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(
            serde_json::to_string(&r1.report.normalized().per_n).unwrap(),
            serde_json::to_string(&r8.report.normalized().per_n).unwrap()
        );
    }

    #[test]
    fn clt_family_reference_is_simulated() {
        let mut c = quick_clt_config();
        c.risk = RiskSpec::Kusuoka {
            members: vec![RiskSpec::Identity, RiskSpec::Avatr { alpha: 0.5 }],
        };
        c.replications = 200;
        c.ks_tolerance = 0.15;
        let run = run_clt(&c).unwrap();
        assert_eq!(run.report.verdict, ReportVerdict::Pass, "{:?}", run.report.per_n);
    }

    #[test]
    fn clt_rejects_non_distortion_reference() {
        let mut c = quick_clt_config();
        c.risk = RiskSpec::Expectile { alpha: 0.75 };
        assert!(matches!(run_clt(&c), Err(Error::Precondition(_))));
    }

    #[test]
    fn clt_diagnostics_gate() {
        // pareto shape 1.5 with phi_2: CLT weight moment fails
        let mut c = quick_clt_config();
        c.f0 = DistSpec::Pareto { shape: 1.5, scale: 1.0 };
        c.regime = RegimeSpec::Iid { innovation: c.f0.clone() };
        assert!(matches!(run_clt(&c), Err(Error::Precondition(_))));
        c.override_diagnostics = true;
        c.replications = 16;
        c.ks_tolerance = 2.0;
        let run = run_clt(&c).unwrap();
        assert!(run.report.notes.iter().any(|n| n.contains("overridden")));
    }

    #[test]
    fn two_reference_law_paths_agree() {
        // closed sigma^2 vs the simulated bridge functional: the two
        // reference laws must sit within KS distance 0.02 at 10^4 draws
        let f0 = crate::Dist::uniform(0.0, 1.0).unwrap();
        let g = crate::Distortion::avatr(0.2).unwrap();
        let sigma = derivative::asymptotic_variance_iid(&g, &f0, 1e-10).unwrap().sqrt();
        let mut rng = seeds::root_rng(314);
        let mut normal: Vec<f64> = (0..10_000)
            .map(|_| {
                let z: f64 =
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
                sigma * z
            })
            .collect();
        stats::sort_in_place(&mut normal);
        let mut simulated =
            bridge_functional_draws(std::slice::from_ref(&g), &f0, 4_096, 10_000, 315).unwrap();
        stats::sort_in_place(&mut simulated);
        let ks = stats::ks_two_sample(&normal, &simulated);
        assert!(ks < 0.02, "reference-path KS {ks}");
    }

    #[test]
    fn clt_identity_distortion_classical_case() {
        // the negative sample mean: scaled errors vs N(0, 1/12)
        let mut c = ExperimentConfig::new(
            RiskSpec::Identity,
            DistSpec::Uniform { a: 0.0, b: 1.0 },
        );
        c.n_values = vec![2_000];
        c.replications = 4_000;
        c.ks_tolerance = 0.035;
        let run = run_clt(&c).unwrap();
        assert_eq!(run.report.verdict, ReportVerdict::Pass, "{:?}", run.report.per_n);
    }

    #[test]
    fn strong_law_trend_on_uniform() {
        let mut c = ExperimentConfig::new(
            RiskSpec::Avatr { alpha: 0.1 },
            DistSpec::Uniform { a: 0.0, b: 1.0 },
        );
        c.weight = WeightFn::One;
        c.n_values = vec![500, 2_000, 8_000, 32_000];
        c.replications = 30;
        c.rate = RateRule::Power { r: 0.25 };
        let rep = run_strong_law(&c).unwrap();
        assert_eq!(rep.verdict, ReportVerdict::Pass, "{:?}", rep.per_n);
        // r = 0 reduces to plain consistency
        c.rate = RateRule::Power { r: 0.0 };
        c.n_values = vec![500, 2_000, 8_000];
        let rep = run_strong_law(&c).unwrap();
        assert_eq!(rep.verdict, ReportVerdict::Pass, "{:?}", rep.per_n);
    }

    #[test]
    fn strong_law_rejects_rate_out_of_range() {
        let mut c = ExperimentConfig::new(
            RiskSpec::Avatr { alpha: 0.1 },
            DistSpec::Uniform { a: 0.0, b: 1.0 },
        );
        c.rate = RateRule::Power { r: 0.6 };
        let err = run_strong_law(&c).unwrap_err();
        assert!(err.to_string().contains("[0, 1/2)"), "{err}");
    }

    #[test]
    fn report_roundtrip_and_schema_gate() {
        let mut c = quick_clt_config();
        c.replications = 8;
        c.ks_tolerance = 2.0;
        let run = run_clt(&c).unwrap();
        let dir = std::env::temp_dir().join("riskfunc_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.json");
        let normalized = run.report.normalized();
        persist_report(&normalized, &path).unwrap();
        let back = load_report(&path).unwrap();
        assert_eq!(normalized, back);

        // schema version mismatch is an explicit error
        let mut tampered = normalized.clone();
        tampered.schema_version = 99;
        let bad_path = dir.join("bad.json");
        std::fs::write(&bad_path, serde_json::to_string(&tampered).unwrap()).unwrap();
        assert!(matches!(load_report(&bad_path), Err(Error::SchemaVersion { .. })));

        // missing file surfaces the path
        assert!(matches!(load_report(&dir.join("absent.json")), Err(Error::Io { .. })));
    }

    #[test]
    fn sensitivity_exact_at_zero_and_linear_for_the_mean() {
        let risk = RiskSpec::Identity;
        let f0 = DistSpec::Uniform { a: 0.0, b: 1.0 };
        let g = DistSpec::PointMass { at: 0.5 };
        let hs = [0.0, 0.05, 0.1, 0.2];
        let curve = run_sensitivity(&risk, &f0, &g, &hs).unwrap();
        assert_abs_diff_eq!(curve.base_value, -0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(curve.rows[0].value.unwrap(), curve.base_value, epsilon = 1e-12);
        // mean of the mixture is linear in h: all secant slopes equal
        let slopes: Vec<f64> = curve.rows.iter().filter_map(|r| r.slope).collect();
        for w in slopes.windows(2) {
            assert_abs_diff_eq!(w[0], w[1], epsilon = 1e-7);
        }
        // and equal to the tangent prediction ∫ (G - F0) dx
        let predicted = curve.predicted_slope.unwrap();
        assert_abs_diff_eq!(predicted, slopes[0], epsilon = 1e-6);
    }

    #[test]
    fn sensitivity_tail_atom_slopes_increase_leftward() {
        let risk = RiskSpec::Avatr { alpha: 0.1 };
        let f0 = DistSpec::Uniform { a: -10.0, b: 1.0 };
        let hs = [0.01, 0.02];
        let near = run_sensitivity(&risk, &f0, &DistSpec::PointMass { at: -2.0 }, &hs).unwrap();
        let far = run_sensitivity(&risk, &f0, &DistSpec::PointMass { at: -9.0 }, &hs).unwrap();
        // moving the contaminating atom further into the left tail increases
        // the risk response
        let s_near = near.rows[0].slope.unwrap();
        let s_far = far.rows[0].slope.unwrap();
        assert!(s_far > s_near, "{s_far} vs {s_near}");
    }

    #[test]
    fn config_validation() {
        let mut c = quick_clt_config();
        c.n_values = vec![100, 100];
        assert!(c.validate().is_err());
        let mut c = quick_clt_config();
        c.replications = 0;
        assert!(c.validate().is_err());
        let mut c = quick_clt_config();
        c.rate = RateRule::Custom { values: vec![1.0, 2.0] };
        assert!(c.validate().is_err());
    }
}
