use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{profile, ModelSpec, TailProfile};
use crate::rng::{compensated_sum, stream, Purpose};
use crate::simulate::{stationary_sample, PathConfig};

/// Blocks used for jackknife standard errors.
pub const JACKKNIFE_BLOCKS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldieEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Monte Carlo mean of `[(A_kk W_k + D_k)^a - (A_kk W_k)^a] / a`.
    pub numerator: f64,
    /// `E[A_kk^a log A_kk]`.
    pub denominator: f64,
    pub samples: usize,
}

/// `(x + y)^a - x^a` without cancellation for `y << x`.
fn power_increment(x: f64, y: f64, a: f64) -> f64 {
    if x == 0.0 {
        y.powf(a)
    } else {
        x.powf(a) * (a * (y / x).ln_1p()).exp_m1()
    }
}

/// Delete-a-block jackknife standard error of the mean of `values`.
pub fn jackknife_se(values: &[f64], blocks: usize) -> f64 {
    let n = values.len();
    if blocks < 2 || n < blocks {
        return f64::NAN;
    }
    let bounds: Vec<usize> = (0..=blocks).map(|b| b * n / blocks).collect();
    let sums: Vec<f64> = bounds.windows(2).map(|w| compensated_sum(values[w[0]..w[1]].iter().copied())).collect();
    let total = compensated_sum(sums.iter().copied());
    let leave_out: Vec<f64> = bounds
        .windows(2)
        .zip(&sums)
        .map(|(w, s)| (total - s) / (n - (w[1] - w[0])) as f64)
        .collect();
    let mean = leave_out.iter().sum::<f64>() / blocks as f64;
    let b = blocks as f64;
    ((b - 1.0) / b * leave_out.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
}

/// Goldie's constant of a self-dominant coordinate `k`,
/// `E[(A_kk W_k + D_k)^a - (A_kk W_k)^a] / (a E[A_kk^a log A_kk])` with
/// `a = alpha_k` and `D_k = sum_{j > k} A_kj W_j + B_k`.
///
/// Each stationary vector in `w_sample` plays `W_{-1}` and is paired with a
/// fresh `(A_0, B_0)` from auxiliary stream `p`.
pub fn goldie_constant(
    spec: &ModelSpec,
    profile: &TailProfile,
    k: usize,
    w_sample: &[Vec<f64>],
    seed: u64,
) -> Result<GoldieEstimate> {
    let d = spec.dim();
    if k >= d {
        return Err(Error::InvalidInput(format!("coordinate {} is out of range", k + 1)));
    }
    if profile.is_dominated(k) {
        return Err(Error::WrongRegime(k + 1));
    }
    if w_sample.len() < JACKKNIFE_BLOCKS || w_sample.iter().any(|w| w.len() != d) {
        return Err(Error::InvalidInput(format!(
            "need at least {JACKKNIFE_BLOCKS} stationary vectors of length {d}"
        )));
    }
    let alpha = profile.alpha[k];
    let values: Vec<f64> = w_sample
        .par_iter()
        .enumerate()
        .map(|(p, w)| {
            let mut rng = stream(seed, Purpose::Auxiliary, p as u64);
            let (mut a, mut b) = (vec![0.0; d * d], vec![0.0; d]);
            spec.draw_into(&mut rng, &mut a, &mut b, None);
            let own = a[k * d + k] * w[k];
            let rest = b[k] + (k + 1..d).map(|j| a[k * d + j] * w[j]).sum::<f64>();
            power_increment(own, rest, alpha) / alpha
        })
        .collect();
    let n = values.len();
    let numerator = compensated_sum(values.iter().copied()) / n as f64;
    let denominator = spec.diag(k).log_moment(alpha)?;
    let std_error = jackknife_se(&values, JACKKNIFE_BLOCKS) / denominator;
    Ok(GoldieEstimate { value: numerator / denominator, std_error, numerator, denominator, samples: n })
}

/// Samples `config.paths` stationary vectors and evaluates [`goldie_constant`].
pub fn goldie_constant_mc(spec: &ModelSpec, k: usize, config: &PathConfig) -> Result<GoldieEstimate> {
    let profile = profile(spec)?;
    let sample = stationary_sample(spec, config)?;
    goldie_constant(spec, &profile, k, &sample, config.seed)
}
