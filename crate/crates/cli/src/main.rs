//! Command-line surface: risk evaluation, distortion tables, derivatives,
//! limit-theorem experiments, diagnostics, and sensitivity curves.
//!
//! Exit codes: 0 success/pass, 1 parse or usage error, 2 verdict failure or
//! diagnostic hard-fail, 3 numeric or i/o error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riskfunc::derivative::{
    difference_quotient_check, qh_derivative_family, qh_derivative_single, ConvergenceVerdict,
    DerivativeConfig,
};
use riskfunc::diagnostics::{
    clt_weight_check, haezendonck_small_t_exponent, probe_integrability, smoothness_check,
    strong_law_weight_check, tail_integrability_symbolic, ProbeVerdict, Tail, TailClass, Verdict,
};
use riskfunc::dist::EmpiricalDist;
use riskfunc::error::Error;
use riskfunc::harness::{
    self, run_clt, run_sensitivity, run_strong_law, ExperimentConfig, RateRule, ReportVerdict,
};
use riskfunc::specs::{parse_weight, weight_to_string, DistSpec, RiskSpec};
use riskfunc::weights::{membership_c, Direction};
use riskfunc::Dist;

/// Formats with 12 significant digits.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Parser)]
#[command(
    name = "riskfunc",
    version,
    about = "Coherent risk measures on distribution functions: evaluation, derivatives, and limit-theorem experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a risk measure on a distribution or a CSV sample
    Eval(EvalArgs),
    /// Tabulate the distortion function g_rho(t) = rho(-Bernoulli(t)) as CSV
    Gtable(GtableArgs),
    /// Derivative of the risk functional along a direction, with an optional
    /// difference-quotient verification
    Derivative(DerivativeArgs),
    /// Weak-limit experiment: scaled plug-in errors vs the predicted law
    Clt(CltArgs),
    /// Strong-law experiment: scaled error and norm trends across n
    Stronglaw(StronglawArgs),
    /// Integrability, smoothness, and weight-moment diagnostics
    Diagnose(DiagnoseArgs),
    /// Contamination-sensitivity curve h -> R((1-h) F0 + h G)
    Sensitivity(SensitivityArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Risk measure, e.g. avatr:0.05, identity, osm:0.5,2, expectile:0.75,
    /// haezendonck:2,0.9, kusuoka:identity+avatr:0.1
    #[arg(long)]
    risk: String,
    /// Distribution, e.g. uniform:0,1 | exponential:1 | pareto:3,1 |
    /// normal:0,1 | twopoint:0.3 | pointmass:2 | reflected(exponential:1)
    #[arg(long, conflicts_with = "samples")]
    dist: Option<String>,
    /// CSV file with one sample value per line (header optional)
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Weight function for the diagnostics summary: one | phi:<lambda>
    #[arg(long, default_value = "phi:2")]
    weight: String,
}

#[derive(Args)]
struct GtableArgs {
    #[arg(long)]
    risk: String,
    /// number of interior grid points; the table covers t = i/(steps+1)
    #[arg(long, default_value_t = 99)]
    steps: usize,
    /// output CSV path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DerivativeArgs {
    /// distortion risk measure or kusuoka family
    #[arg(long)]
    risk: String,
    #[arg(long)]
    dist: String,
    /// direction: bump:<a>,<b>,<height> | const:<c>,<a>,<b> |
    /// poly:<c0>,<c1>,<c2>,<c3>,<a>,<b>
    #[arg(long)]
    direction: String,
    /// also run the difference-quotient verification
    #[arg(long, default_value_t = false)]
    check: bool,
    /// write a JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    risk: Option<String>,
    #[arg(long)]
    dist: Option<String>,
    /// sample sizes, comma separated (e.g. 1000,10000)
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    weight: Option<String>,
    /// full experiment config as JSON (overrides the flags above)
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory for report JSON and CSV artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// proceed despite failing diagnostics
    #[arg(long, default_value_t = false)]
    r#override: bool,
}

#[derive(Args)]
struct CltArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// KS pass/fail tolerance
    #[arg(long)]
    ks_tol: Option<f64>,
}

#[derive(Args)]
struct StronglawArgs {
    #[command(flatten)]
    common: ExperimentArgs,
    /// rate exponent r in [0, 1/2) for r_n = n^r
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    risk: String,
    #[arg(long)]
    dist: String,
    #[arg(long, default_value = "phi:2")]
    weight: String,
    /// scaling constant of the tail-integrability probe
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// strong-law rate exponent to check the weight moment for
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long)]
    risk: String,
    #[arg(long)]
    dist: String,
    /// contaminating distribution G
    #[arg(long)]
    contaminant: String,
    /// contamination weights, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.02,0.05,0.1")]
    h: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Gtable(a) => cmd_gtable(a),
        Command::Derivative(a) => cmd_derivative(a),
        Command::Clt(a) => cmd_clt(a),
        Command::Stronglaw(a) => cmd_stronglaw(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidParameter { .. } => 1,
        Error::Precondition(_) | Error::Domain(_) => 2,
        _ => 3,
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), Error> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                        path: dir.to_path_buf(),
                        source: e,
                    })?;
                }
            }
            std::fs::write(path, content).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
    }
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode, Error> {
    let risk: RiskSpec = args.risk.parse()?;
    let ev = risk.build()?;
    let phi = parse_weight(&args.weight)?;
    let (value, path_used, f0): (f64, &str, Option<Dist>) = match (&args.dist, &args.samples) {
        (Some(d), None) => {
            let f0 = d.parse::<DistSpec>()?.build()?;
            (ev.eval_dist(&f0)?, "distribution (quantile quadrature / exact atoms)", Some(f0))
        }
        (None, Some(path)) => {
            let emp = EmpiricalDist::from_csv_path(path)?;
            (ev.eval_samples(emp.sorted())?, "sample (exact L-statistic)", None)
        }
        _ => {
            return Err(Error::Parse("provide exactly one of --dist or --samples".into()));
        }
    };
    println!("value: {}", sig12(value));
    println!("path: {path_used}");
    if let Some(f0) = f0 {
        let mut warned = false;
        if smoothness_check(&f0).verdict == Verdict::Fails {
            println!("warning: F0 is not smooth (step function or vanishing density)");
            warned = true;
        }
        let probe = probe_integrability(|t| ev.g_rho(t).unwrap_or(f64::NAN), &f0, &phi, 0.5)?;
        if probe.verdict == ProbeVerdict::DivergingOrSlow {
            println!(
                "warning: tail-integrability probe diverging-or-slow for weight {}",
                weight_to_string(&phi)
            );
            warned = true;
        }
        if !warned {
            println!("diagnostics: clean");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gtable(args: GtableArgs) -> Result<ExitCode, Error> {
    let risk: RiskSpec = args.risk.parse()?;
    let ev = risk.build()?;
    if args.steps == 0 {
        return Err(Error::Parse("--steps must be positive".into()));
    }
    let mut csv = String::from("t,g_rho\n");
    for i in 0..=args.steps + 1 {
        let t = i as f64 / (args.steps + 1) as f64;
        let g = ev.g_rho(t)?;
        csv.push_str(&format!("{t},{g}\n"));
    }
    write_or_print(args.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_direction(s: &str) -> Result<Direction, Error> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("direction `{s}`: expected kind:params")))?;
    let nums: Result<Vec<f64>, Error> = rest
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("direction `{s}`: `{p}` is not a number")))
        })
        .collect();
    let nums = nums?;
    match (kind, nums.as_slice()) {
        ("bump", [a, b, height]) => Ok(Direction::cubic_bump(*a, *b, *height)),
        ("const", [c, a, b]) => Ok(Direction::constant(*c, *a, *b)),
        ("poly", [c0, c1, c2, c3, a, b]) => Ok(Direction::poly([*c0, *c1, *c2, *c3], *a, *b)),
        _ => Err(Error::Parse(format!(
            "direction `{s}`: use bump:a,b,h | const:c,a,b | poly:c0,c1,c2,c3,a,b"
        ))),
    }
}

fn cmd_derivative(args: DerivativeArgs) -> Result<ExitCode, Error> {
    let risk: RiskSpec = args.risk.parse()?;
    let f0 = args.dist.parse::<DistSpec>()?.build()?;
    let v = parse_direction(&args.direction)?;
    let cfg = DerivativeConfig::default();

    let membership = membership_c(&v, &f0);
    if !membership.member {
        println!(
            "warning: direction jumps outside the discontinuity set of F0 at {:?}",
            membership.offending_jumps
        );
    }
    let family: Vec<riskfunc::Distortion> = match &risk {
        RiskSpec::Kusuoka { members } => {
            members.iter().map(|m| m.distortion()).collect::<Result<_, _>>()?
        }
        other => vec![other.distortion()?],
    };
    let (value, active_note) = if family.len() == 1 {
        (qh_derivative_single(&family[0], &f0, &v, cfg.quad_tol)?, String::new())
    } else {
        let fd = qh_derivative_family(&family, &f0, &v, &cfg)?;
        let note = format!(" (active set {:?}, stabilized: {})", fd.active, fd.stabilized);
        (fd.value, note)
    };
    println!("derivative: {}{active_note}", sig12(value));

    let mut exit = ExitCode::SUCCESS;
    let mut check_json = None;
    if args.check {
        let ev = risk.build()?;
        let rep = difference_quotient_check(&ev, &f0, &v, value, &cfg)?;
        for row in &rep.rows {
            match (row.quotient, &row.note) {
                (Some(q), _) => println!(
                    "h={:>8}: quotient {} error {}",
                    row.h,
                    sig12(q),
                    sig12(row.error.unwrap_or(f64::NAN))
                ),
                (None, Some(note)) => println!("h={:>8}: {note}", row.h),
                _ => {}
            }
        }
        println!("verdict: {:?}", rep.verdict);
        if rep.verdict != ConvergenceVerdict::Converging {
            exit = ExitCode::from(2);
        }
        check_json = Some(rep);
    }
    if let Some(out) = &args.out {
        let json = serde_json::json!({
            "risk": risk,
            "dist": args.dist,
            "derivative": value,
            "membership": membership,
            "quotient_check": check_json,
        });
        write_or_print(Some(out), &serde_json::to_string_pretty(&json)?)?;
    }
    Ok(exit)
}

fn build_config(common: &ExperimentArgs) -> Result<ExperimentConfig, Error> {
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        return Ok(config);
    }
    let risk: RiskSpec = common
        .risk
        .as_deref()
        .ok_or_else(|| Error::Parse("--risk is required (or use --config)".into()))?
        .parse()?;
    let f0: DistSpec = common
        .dist
        .as_deref()
        .ok_or_else(|| Error::Parse("--dist is required (or use --config)".into()))?
        .parse()?;
    let mut config = ExperimentConfig::new(risk, f0);
    if !common.n.is_empty() {
        config.n_values = common.n.clone();
    }
    if let Some(r) = common.replications {
        config.replications = r;
    }
    if let Some(s) = common.seed {
        config.root_seed = s;
    }
    if let Some(w) = &common.weight {
        config.weight = parse_weight(w)?;
    }
    config.override_diagnostics = common.r#override;
    Ok(config)
}

fn write_experiment_artifacts(
    out: Option<&Path>,
    report: &harness::ExperimentReport,
    errors: Option<&[(usize, Vec<f64>)]>,
) -> Result<(), Error> {
    let Some(dir) = out else { return Ok(()) };
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    // wall time is stripped so artifacts are byte-identical across reruns
    harness::persist_report(&report.normalized(), &dir.join("report.json"))?;
    if let Some(errors) = errors {
        for (n, errs) in errors {
            harness::export_errors_csv(&dir.join(format!("scaled_errors_n{n}.csv")), *n, errs)?;
        }
    }
    Ok(())
}

fn cmd_clt(args: CltArgs) -> Result<ExitCode, Error> {
    let mut config = build_config(&args.common)?;
    if let Some(tol) = args.ks_tol {
        config.ks_tolerance = tol;
    }
    let run = run_clt(&config)?;
    write_experiment_artifacts(args.common.out.as_deref(), &run.report, Some(&run.scaled_errors))?;
    for s in &run.report.per_n {
        println!(
            "n={}: ks={} mean={} sd={}",
            s.n,
            s.ks_to_reference.map(sig12).unwrap_or_else(|| "n/a".into()),
            sig12(s.mean),
            sig12(s.sd)
        );
    }
    for note in &run.report.notes {
        println!("note: {note}");
    }
    println!("verdict: {:?}", run.report.verdict);
    Ok(match run.report.verdict {
        ReportVerdict::Fail => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

fn cmd_stronglaw(args: StronglawArgs) -> Result<ExitCode, Error> {
    let mut config = build_config(&args.common)?;
    if let Some(r) = args.rate {
        if !(0.0..0.5).contains(&r) {
            return Err(Error::Parse(format!(
                "--rate must lie in [0, 1/2) for the strong law, got {r}"
            )));
        }
        config.rate = RateRule::Power { r };
    } else if matches!(config.rate, RateRule::Sqrt) {
        config.rate = RateRule::Power { r: 0.25 };
    }
    let report = run_strong_law(&config)?;
    write_experiment_artifacts(args.common.out.as_deref(), &report, None)?;
    for s in &report.per_n {
        println!(
            "n={}: median r_n|dR|={} median r_n|F_n-F0|_phi={}",
            s.n,
            sig12(s.median_scaled_risk_error.unwrap_or(f64::NAN)),
            sig12(s.median_scaled_norm.unwrap_or(f64::NAN)),
        );
    }
    println!("verdict: {:?}", report.verdict);
    Ok(match report.verdict {
        ReportVerdict::Fail => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

fn tail_of(spec: &DistSpec) -> (Tail, Tail) {
    match spec {
        DistSpec::Uniform { .. } | DistSpec::TwoPoint { .. } | DistSpec::PointMass { .. } => {
            (Tail::Bounded, Tail::Bounded)
        }
        DistSpec::Exponential { .. } => (Tail::Bounded, Tail::Exponential),
        DistSpec::Pareto { shape, .. } => (Tail::Bounded, Tail::Power { kappa: *shape }),
        DistSpec::Normal { .. } => (Tail::Exponential, Tail::Exponential),
        DistSpec::Reflected { base } => {
            let (l, r) = tail_of(base);
            (r, l)
        }
        DistSpec::Contaminated { base, contaminant, .. } => {
            let (bl, br) = tail_of(base);
            let (cl, cr) = tail_of(contaminant);
            (worse_tail(bl, cl), worse_tail(br, cr))
        }
    }
}

// the heavier tail dominates a mixture
fn worse_tail(a: Tail, b: Tail) -> Tail {
    let rank = |t: &Tail| match t {
        Tail::Bounded => 0,
        Tail::Exponential => 1,
        Tail::Power { .. } => 2,
        Tail::Unknown => 3,
    };
    if rank(&a) >= rank(&b) {
        a
    } else {
        b
    }
}

fn small_t_exponent_of(risk: &RiskSpec) -> Option<(f64, bool)> {
    match risk {
        RiskSpec::OneSidedMoment { p, .. } => Some((1.0 / p, false)),
        RiskSpec::Expectile { .. } => Some((1.0, false)),
        RiskSpec::Haezendonck { p, .. } => {
            let e = haezendonck_small_t_exponent(&riskfunc::YoungFn::power(*p).ok()?);
            Some((e.beta, true))
        }
        RiskSpec::Kusuoka { .. } => None,
        distortion => distortion.distortion().ok().map(|g| (g.small_t_exponent(), false)),
    }
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<ExitCode, Error> {
    let risk: RiskSpec = args.risk.parse()?;
    let ev = risk.build()?;
    let dist_spec: DistSpec = args.dist.parse()?;
    let f0 = dist_spec.build()?;
    let phi = parse_weight(&args.weight)?;
    let mut hard_fail = false;

    let smooth = smoothness_check(&f0);
    println!(
        "smooth-density: {:?} (exceptional points: {:?})",
        smooth.verdict, smooth.exceptional_points
    );
    hard_fail |= smooth.verdict == Verdict::Fails;

    if let Some((beta, sufficient_only)) = small_t_exponent_of(&risk) {
        let (left, right) = tail_of(&dist_spec);
        let tails = TailClass::new(left, right, beta)?;
        let verdict = tail_integrability_symbolic(&tails, phi.lambda());
        let marker = if sufficient_only { ", sufficient-condition-only" } else { "" };
        println!(
            "tail-integrability (symbolic, beta={beta}, lambda={}{marker}): {verdict:?}",
            phi.lambda()
        );
        hard_fail |= verdict == Verdict::Fails;
    }
    let probe = probe_integrability(|t| ev.g_rho(t).unwrap_or(f64::NAN), &f0, &phi, args.gamma)?;
    println!(
        "tail-integrability (probe, gamma={}): {:?}{}",
        args.gamma,
        probe.verdict,
        probe
            .value
            .map(|v| format!(" (value {})", sig12(v)))
            .unwrap_or_default()
    );
    hard_fail |= probe.verdict == ProbeVerdict::DivergingOrSlow;

    let clt = clt_weight_check(&f0, &phi);
    println!("clt-weight-moment ({}^2): {clt:?}", weight_to_string(&phi));
    hard_fail |= clt == Verdict::Fails;

    if let Some(r) = args.rate {
        let sl = strong_law_weight_check(&f0, &phi, r)?;
        println!("strong-law-weight-moment (r={r}): {sl:?}");
        hard_fail |= sl == Verdict::Fails;
    }
    println!("overall: {}", if hard_fail { "fail" } else { "pass" });
    Ok(if hard_fail { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_sensitivity(args: SensitivityArgs) -> Result<ExitCode, Error> {
    let risk: RiskSpec = args.risk.parse()?;
    let f0: DistSpec = args.dist.parse()?;
    let g: DistSpec = args.contaminant.parse()?;
    let curve = run_sensitivity(&risk, &f0, &g, &args.h)?;
    let mut csv = String::from("h,value,secant_slope\n");
    for row in &curve.rows {
        match (row.value, row.slope) {
            (Some(v), Some(s)) => csv.push_str(&format!("{},{},{}\n", row.h, v, s)),
            (Some(v), None) => csv.push_str(&format!("{},{},\n", row.h, v)),
            _ => csv.push_str(&format!("{},,\n", row.h)),
        }
    }
    println!("base value: {}", sig12(curve.base_value));
    for row in &curve.rows {
        match (&row.error, row.value) {
            (Some(e), _) => println!("h={}: error: {e}", row.h),
            (None, Some(v)) => println!(
                "h={}: value {}{}",
                row.h,
                sig12(v),
                row.slope.map(|s| format!(" slope {}", sig12(s))).unwrap_or_default()
            ),
            _ => {}
        }
    }
    if let Some(p) = curve.predicted_slope {
        println!("tangent prediction: {}", sig12(p));
    }
    for note in &curve.notes {
        println!("note: {note}");
    }
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
        write_or_print(Some(&out.join("sensitivity.csv")), &csv)?;
        let json = serde_json::to_string_pretty(&curve)?;
        write_or_print(Some(&out.join("sensitivity.json")), &json)?;
    }
    Ok(ExitCode::SUCCESS)
}
