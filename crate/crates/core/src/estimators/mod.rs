//! Empirical tail indices, tail constants and the Breiman product bound.

mod breiman;
mod constants;
mod goldie;
mod scaling;
mod tail;

pub use breiman::{breiman_check, BreimanReport, BREIMAN_SLACK};
pub use constants::{
    constants_recursive, estimate_constants, ConstantEntry, ConstantMethod, ConstantsReport, Estimate,
};
pub use goldie::{goldie_constant, goldie_constant_mc, jackknife_se, GoldieEstimate, JACKKNIFE_BLOCKS};
pub use scaling::{survival_scaling, CurveOptions, CurvePoint, ScalingCurve};
pub use tail::{default_k, hill, rank_regression, Method, TailEstimate};
