//! Law-invariant coherent risk measures on distribution functions:
//! evaluation of risk functionals, their quasi-Hadamard derivatives along
//! weighted cadlag directions, diagnostics for the integrability assumptions
//! behind the limit theory, and a Monte Carlo harness that checks the weak
//! and strong limit behaviour of plug-in estimators at desk scale.
//!
//! The crate is organized around a few value types:
//!
//! * [`Distortion`] — concave distortion functions with right derivatives;
//! * [`Dist`] / [`EmpiricalDist`] — distribution functions with inverses,
//!   support endpoints, densities, and seeded samplers;
//! * [`Direction`] and [`WeightFn`] — cadlag perturbations and the weighted
//!   sup-norm they live under;
//! * [`RiskEvaluator`] — the risk measures themselves, with sample-level and
//!   distribution-level evaluation rules tied together by law invariance.
//!
//! On top of these sit the derivative machinery ([`derivative`]), assumption
//! diagnostics ([`diagnostics`]), data-regime samplers ([`process`]), and
//! the experiment harness ([`harness`]).

pub mod derivative;
pub mod diagnostics;
pub mod dist;
pub mod distortion;
pub mod error;
pub mod harness;
pub mod process;
pub mod quad;
pub mod risk;
pub mod seeds;
pub mod specs;
pub mod stats;
pub mod weights;

pub use dist::{Dist, EmpiricalDist};
pub use distortion::Distortion;
pub use error::{Error, Result};
pub use risk::{RiskEvaluator, YoungFn};
pub use weights::{Direction, WeightFn};
