//! Stationarity: the sufficient condition `rho(E A^eps) < 1` and a Monte Carlo
//! estimate of the top Lyapunov exponent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve_alpha, ModelSpec};
use crate::error::{Error, Result};
use crate::rng::{mean_and_se, stream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSufficiency {
    pub eps: f64,
    pub spectral_radius: f64,
    pub sufficient: bool,
}

/// Checks `rho(E A^eps) < 1`. `E A^eps` is upper triangular, so its spectral
/// radius is the largest diagonal moment.
///
/// When every diagonal index exists, `eps` must lie in `(0, min alpha_i)`.
pub fn lyapunov_sufficient(spec: &ModelSpec, eps: f64) -> Result<LyapunovSufficiency> {
    if !(eps > 0.0) {
        return Err(Error::EpsOutOfRange { eps, max: f64::NAN });
    }
    let alphas: Option<Vec<f64>> = (0..spec.dim())
        .map(|i| solve_alpha(spec.diag(i)).ok())
        .collect();
    if let Some(alphas) = alphas {
        let min = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
        if eps >= min {
            return Err(Error::EpsOutOfRange { eps, max: min });
        }
    }
    let m = spec.moment_matrix(eps);
    let d = spec.dim();
    let rho = (0..d).map(|i| m[i * d + i]).fold(0.0, f64::max);
    Ok(LyapunovSufficiency { eps, spectral_radius: rho, sufficient: rho < 1.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub steps: usize,
    pub paths: usize,
}

/// `(1/n) log ||A_1 ... A_n||_1` along one path. The running product is
/// divided by its largest entry after every step and the logs are accumulated.
fn log_norm_rate(spec: &ModelSpec, steps: usize, seed: u64, path: u64) -> Result<f64> {
    let d = spec.dim();
    let mut rng = stream(seed, Purpose::Lyapunov, path);
    let mut prod = vec![0.0; d * d];
    for i in 0..d {
        prod[i * d + i] = 1.0;
    }
    let mut next = vec![0.0; d * d];
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    let mut log_scale = 0.0;
    for step in 1..=steps {
        spec.draw_into(&mut rng, &mut a, &mut b, None);
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += prod[i * d + k] * a[k * d + j];
                }
                next[i * d + j] = acc;
            }
        }
        std::mem::swap(&mut prod, &mut next);
        let max = prod.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 || !max.is_finite() {
            return Err(Error::NumericUnderflow { step });
        }
        prod.iter_mut().for_each(|x| *x /= max);
        log_scale += max.ln();
    }
    let norm: f64 = prod.iter().sum();
    Ok((norm.ln() + log_scale) / steps as f64)
}

/// Monte Carlo estimate of the top Lyapunov exponent with the entrywise
/// 1-norm. Paths run in parallel; each uses its own seeded stream.
pub fn lyapunov_mc(spec: &ModelSpec, steps: usize, paths: usize, seed: u64) -> Result<LyapunovEstimate> {
    if steps == 0 || paths == 0 {
        return Err(Error::InvalidInput("steps and paths must be positive".into()));
    }
    let rates = (0..paths as u64)
        .into_par_iter()
        .map(|p| log_norm_rate(spec, steps, seed, p))
        .collect::<Result<Vec<f64>>>()?;
    let (estimate, std_error) = mean_and_se(&rates);
    Ok(LyapunovEstimate { estimate, std_error, steps, paths })
}
