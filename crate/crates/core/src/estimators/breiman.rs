use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scaling::{survival_scaling, CurveOptions, ScalingCurve};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Relative Monte Carlo allowance on both the hypothesis and the conclusion.
pub const BREIMAN_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreimanReport {
    pub alpha: f64,
    pub m: f64,
    pub slack: f64,
    /// `E X^alpha`.
    pub moment_x: f64,
    /// `M E X^alpha`.
    pub bound: f64,
    /// Largest value of `x^alpha P(Y > x)` on the grid of `Y`.
    pub y_sup: f64,
    /// Mean of `x^alpha P(XY > x)` over the upper half of the grid.
    pub plateau: f64,
    /// Maximum over the upper half of the grid, the stand-in for the limsup.
    pub upper_max: f64,
    /// `upper_max <= (1 + slack) bound`.
    pub holds: bool,
    pub curve: ScalingCurve,
}

/// Checks `limsup x^alpha P(XY > x) <= M E X^alpha` for `X` independent of
/// `Y` on finite samples. `Y` is given as a sample; `X` is drawn from
/// `x_dist`, one auxiliary stream per sample index.
pub fn breiman_check(
    x_dist: &DistributionSpec,
    y_sample: &[f64],
    alpha: f64,
    m: f64,
    options: CurveOptions,
    seed: u64,
) -> Result<BreimanReport> {
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!("M = {m} must be positive")));
    }
    if let Some(limit) = x_dist.moment_limit() {
        if limit <= alpha {
            return Err(Error::InvalidInput(format!(
                "{x_dist} has no moment beyond alpha = {alpha}"
            )));
        }
    }
    let y_curve = survival_scaling(y_sample, alpha, options)?;
    let y_sup = y_curve.points.iter().map(|p| p.x_pow_alpha_times_survival).fold(0.0, f64::max);
    if y_sup > (1.0 + BREIMAN_SLACK) * m {
        return Err(Error::HypothesisFail { observed: y_sup, bound: m });
    }
    let products: Vec<f64> = y_sample
        .par_iter()
        .enumerate()
        .map(|(i, y)| x_dist.draw(&mut stream(seed, Purpose::Breiman, i as u64)) * y)
        .collect();
    let curve = survival_scaling(&products, alpha, options)?;
    let moment_x = x_dist.moment(alpha);
    let bound = m * moment_x;
    Ok(BreimanReport {
        alpha,
        m,
        slack: BREIMAN_SLACK,
        moment_x,
        bound,
        y_sup,
        plateau: curve.plateau,
        upper_max: curve.upper_max,
        holds: curve.upper_max <= (1.0 + BREIMAN_SLACK) * bound,
        curve,
    })
}
