//! Serializable descriptions of risk measures, distributions, weights, and
//! data regimes. These are the configuration surface: they parse from the
//! compact command-line syntax (`avatr:0.05`, `uniform:0,1`, `phi:2`), load
//! from JSON, echo into experiment reports, and build the runtime objects.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::Dist;
use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::process::{ProcessSpec, Regime};
use crate::risk::{RiskEvaluator, YoungFn};
use crate::weights::WeightFn;

fn parse_args(token: &str, spec: &str, expected: usize) -> Result<Vec<f64>> {
    let parts: Vec<&str> = if spec.is_empty() { Vec::new() } else { spec.split(',').collect() };
    if parts.len() != expected {
        return Err(Error::Parse(format!(
            "`{token}` expects {expected} parameter(s), got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{token}`: `{p}` is not a number")))
        })
        .collect()
}

/// Distribution description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistSpec {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Pareto { shape: f64, scale: f64 },
    Normal { mean: f64, std: f64 },
    TwoPoint { t: f64 },
    PointMass { at: f64 },
    Reflected { base: Box<DistSpec> },
    Contaminated { base: Box<DistSpec>, contaminant: Box<DistSpec>, h: f64 },
}

impl DistSpec {
    pub fn build(&self) -> Result<Dist> {
        Ok(match self {
            DistSpec::Uniform { a, b } => Dist::uniform(*a, *b)?,
            DistSpec::Exponential { rate } => Dist::exponential(*rate)?,
            DistSpec::Pareto { shape, scale } => Dist::pareto(*shape, *scale)?,
            DistSpec::Normal { mean, std } => Dist::normal(*mean, *std)?,
            DistSpec::TwoPoint { t } => Dist::two_point(*t)?,
            DistSpec::PointMass { at } => Dist::point_mass(*at)?,
            DistSpec::Reflected { base } => base.build()?.reflected(),
            DistSpec::Contaminated { base, contaminant, h } => {
                Dist::contaminate(&base.build()?, &contaminant.build()?, *h)?
            }
        })
    }
}

impl FromStr for DistSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("reflected(").and_then(|r| r.strip_suffix(')')) {
            return Ok(DistSpec::Reflected { base: Box::new(inner.parse()?) });
        }
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        match name {
            "uniform" => {
                let a = parse_args(name, args, 2)?;
                Ok(DistSpec::Uniform { a: a[0], b: a[1] })
            }
            "exponential" | "exp" => {
                let a = parse_args(name, args, 1)?;
                Ok(DistSpec::Exponential { rate: a[0] })
            }
            "pareto" => {
                let a = parse_args(name, args, 2)?;
                Ok(DistSpec::Pareto { shape: a[0], scale: a[1] })
            }
            "normal" => {
                let a = parse_args(name, args, 2)?;
                Ok(DistSpec::Normal { mean: a[0], std: a[1] })
            }
            "twopoint" => {
                let a = parse_args(name, args, 1)?;
                Ok(DistSpec::TwoPoint { t: a[0] })
            }
            "pointmass" => {
                let a = parse_args(name, args, 1)?;
                Ok(DistSpec::PointMass { at: a[0] })
            }
            other => Err(Error::Parse(format!("unknown distribution `{other}`"))),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Uniform { a, b } => write!(f, "uniform:{a},{b}"),
            DistSpec::Exponential { rate } => write!(f, "exponential:{rate}"),
            DistSpec::Pareto { shape, scale } => write!(f, "pareto:{shape},{scale}"),
            DistSpec::Normal { mean, std } => write!(f, "normal:{mean},{std}"),
            DistSpec::TwoPoint { t } => write!(f, "twopoint:{t}"),
            DistSpec::PointMass { at } => write!(f, "pointmass:{at}"),
            DistSpec::Reflected { base } => write!(f, "reflected({base})"),
            DistSpec::Contaminated { base, contaminant, h } => {
                write!(f, "contaminated({base};{contaminant};{h})")
            }
        }
    }
}

/// Risk measure description. Distortion kinds double as family members of a
/// Kusuoka supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "snake_case")]
pub enum RiskSpec {
    Identity,
    Avatr { alpha: f64 },
    ProportionalHazard { beta: f64 },
    /// distortion risk measure with the one-sided moment distortion
    /// `t + a (1-t) t^{1/p}`
    OneSidedMomentDistortion { a: f64, p: f64 },
    OneSidedMoment { a: f64, p: f64 },
    Expectile { alpha: f64 },
    /// Young function `psi(u) = u^p`
    Haezendonck { p: f64, alpha: f64 },
    Kusuoka { members: Vec<RiskSpec> },
}

impl RiskSpec {
    /// The distortion function, for kinds that are distortion risk measures.
    pub fn distortion(&self) -> Result<Distortion> {
        Ok(match self {
            RiskSpec::Identity => Distortion::Identity,
            RiskSpec::Avatr { alpha } => Distortion::avatr(*alpha)?,
            RiskSpec::ProportionalHazard { beta } => Distortion::proportional_hazard(*beta)?,
            RiskSpec::OneSidedMomentDistortion { a, p } => Distortion::one_sided_moment(*a, *p)?,
            other => {
                return Err(Error::Parse(format!(
                    "`{other:?}` is not a distortion risk measure"
                )));
            }
        })
    }

    pub fn build(&self) -> Result<RiskEvaluator> {
        Ok(match self {
            RiskSpec::Identity
            | RiskSpec::Avatr { .. }
            | RiskSpec::ProportionalHazard { .. }
            | RiskSpec::OneSidedMomentDistortion { .. } => {
                RiskEvaluator::Distortion(self.distortion()?)
            }
            RiskSpec::OneSidedMoment { a, p } => RiskEvaluator::OneSidedMoment { a: *a, p: *p },
            RiskSpec::Expectile { alpha } => RiskEvaluator::Expectile { alpha: *alpha },
            RiskSpec::Haezendonck { p, alpha } => RiskEvaluator::Haezendonck {
                psi: YoungFn::power(*p)?,
                alpha: *alpha,
            },
            RiskSpec::Kusuoka { members } => {
                let family: Result<Vec<Distortion>> =
                    members.iter().map(|m| m.distortion()).collect();
                RiskEvaluator::KusuokaSup { family: family? }
            }
        })
    }
}

impl FromStr for RiskSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("kusuoka:") {
            let members: Result<Vec<RiskSpec>> = rest.split('+').map(|m| m.parse()).collect();
            return Ok(RiskSpec::Kusuoka { members: members? });
        }
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        match name {
            "identity" => Ok(RiskSpec::Identity),
            "avatr" => {
                let a = parse_args(name, args, 1)?;
                Ok(RiskSpec::Avatr { alpha: a[0] })
            }
            "phz" => {
                let a = parse_args(name, args, 1)?;
                Ok(RiskSpec::ProportionalHazard { beta: a[0] })
            }
            "osm-g" => {
                let a = parse_args(name, args, 2)?;
                Ok(RiskSpec::OneSidedMomentDistortion { a: a[0], p: a[1] })
            }
            "osm" | "one_sided_moment" => {
                let a = parse_args(name, args, 2)?;
                Ok(RiskSpec::OneSidedMoment { a: a[0], p: a[1] })
            }
            "expectile" => {
                let a = parse_args(name, args, 1)?;
                Ok(RiskSpec::Expectile { alpha: a[0] })
            }
            "haezendonck" | "hg" => {
                let a = parse_args(name, args, 2)?;
                Ok(RiskSpec::Haezendonck { p: a[0], alpha: a[1] })
            }
            other => Err(Error::Parse(format!("unknown risk measure `{other}`"))),
        }
    }
}

impl fmt::Display for RiskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskSpec::Identity => write!(f, "identity"),
            RiskSpec::Avatr { alpha } => write!(f, "avatr:{alpha}"),
            RiskSpec::ProportionalHazard { beta } => write!(f, "phz:{beta}"),
            RiskSpec::OneSidedMomentDistortion { a, p } => write!(f, "osm-g:{a},{p}"),
            RiskSpec::OneSidedMoment { a, p } => write!(f, "osm:{a},{p}"),
            RiskSpec::Expectile { alpha } => write!(f, "expectile:{alpha}"),
            RiskSpec::Haezendonck { p, alpha } => write!(f, "haezendonck:{p},{alpha}"),
            RiskSpec::Kusuoka { members } => {
                write!(f, "kusuoka:")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `one` or `phi:<lambda>` into a weight function.
pub fn parse_weight(s: &str) -> Result<WeightFn> {
    let s = s.trim();
    if s == "one" || s == "1" || s == "phi:0" {
        return Ok(WeightFn::One);
    }
    if let Some(arg) = s.strip_prefix("phi:") {
        let lambda: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`phi`: `{arg}` is not a number")))?;
        if lambda < 0.0 {
            return Err(Error::Parse(format!("weight exponent must be >= 0, got {lambda}")));
        }
        return Ok(WeightFn::power(lambda));
    }
    Err(Error::Parse(format!("unknown weight `{s}` (use `one` or `phi:<lambda>`)")))
}

/// Formats a weight function in the flag syntax.
pub fn weight_to_string(phi: &WeightFn) -> String {
    match phi {
        WeightFn::One => "one".to_string(),
        WeightFn::Power { lambda } => format!("phi:{lambda}"),
    }
}

/// Data-regime description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum RegimeSpec {
    Iid { innovation: DistSpec },
    Ar1 { coef: f64, innovation: DistSpec },
    Garch11 { omega: f64, a: f64, b: f64 },
    LongMemory { beta: f64, truncation: usize, innovation: DistSpec },
}

impl RegimeSpec {
    pub fn build(&self) -> Result<Regime> {
        Ok(match self {
            RegimeSpec::Iid { innovation } => Regime::Iid { innovation: innovation.build()? },
            RegimeSpec::Ar1 { coef, innovation } => {
                Regime::Ar1 { coef: *coef, innovation: innovation.build()? }
            }
            RegimeSpec::Garch11 { omega, a, b } => {
                Regime::Garch11 { omega: *omega, a: *a, b: *b }
            }
            RegimeSpec::LongMemory { beta, truncation, innovation } => Regime::LongMemory {
                beta: *beta,
                truncation: *truncation,
                innovation: innovation.build()?,
            },
        })
    }
}

/// Path description (regime + length + seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpecDesc {
    #[serde(flatten)]
    pub regime: RegimeSpec,
    pub n: usize,
    pub seed: u64,
}

impl ProcessSpecDesc {
    pub fn build(&self) -> Result<ProcessSpec> {
        Ok(ProcessSpec { regime: self.regime.build()?, n: self.n, seed: self.seed })
    }
}
