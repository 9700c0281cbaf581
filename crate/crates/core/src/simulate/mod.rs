//! Forward iteration of the recurrence, stationary sampling, matrix products
//! and the path-wise decomposition of a stationary coordinate.

mod decompose;
mod pi;
mod useq;

pub use decompose::{decompose, decompose_batch, remainder_profile, DecompositionTrace, Split};
pub use pi::{
    pi_column_shifted, pi_entry, pi_entry_enum, pi_prime_entry, pi_prime_entry_enum, pi_row,
    ENUM_MAX_DIM, ENUM_MAX_STEPS,
};
pub use useq::{u_sequence, USequence, UPoint};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{solve_alpha, ModelSpec};
use crate::rng::{stream, Purpose, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathConfig {
    /// Steps iterated from `W = 0` before anything is recorded.
    pub burn_in: usize,
    /// Horizon `s` for decompositions and u-sequences.
    pub horizon: usize,
    /// Number of terms kept by the truncated series sampler.
    pub truncation: usize,
    pub seed: u64,
    pub paths: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self { burn_in: 200, horizon: 10, truncation: 200, seed: DEFAULT_SEED, paths: 1000 }
    }
}

impl PathConfig {
    pub fn check(&self) -> Result<()> {
        if self.truncation == 0 || self.paths == 0 {
            return Err(Error::InvalidInput("truncation and paths must be at least 1".into()));
        }
        Ok(())
    }
}

/// `W <- A W + B` in place; `a` is row-major.
pub(crate) fn step(d: usize, a: &[f64], b: &[f64], w: &mut [f64]) {
    // row i only reads coordinates j >= i, which are still at time t-1
    for i in 0..d {
        let mut acc = b[i];
        for j in 0..d {
            acc += a[i * d + j] * w[j];
        }
        w[i] = acc;
    }
}

fn step_general(d: usize, a: &[f64], b: &[f64], w: &mut [f64], scratch: &mut [f64]) {
    scratch.copy_from_slice(w);
    for i in 0..d {
        let mut acc = b[i];
        for j in 0..d {
            acc += a[i * d + j] * scratch[j];
        }
        w[i] = acc;
    }
}

fn check_finite(w: &[f64], step: usize) -> Result<()> {
    if w.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Overflow { step })
    }
}

/// Exact forward recursion from `w0`; returns `steps + 1` states starting with `w0`.
pub fn iterate<R: Rng + ?Sized>(
    spec: &ModelSpec,
    w0: &[f64],
    steps: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let d = spec.dim();
    if w0.len() != d || w0.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidInput("w0 must be a nonnegative vector of length d".into()));
    }
    let (mut a, mut b, mut scratch) = (vec![0.0; d * d], vec![0.0; d], vec![0.0; d]);
    let mut w = w0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(w.clone());
    for t in 1..=steps {
        spec.draw_into(rng, &mut a, &mut b, None);
        step_general(d, &a, &b, &mut w, &mut scratch);
        check_finite(&w, t)?;
        out.push(w.clone());
    }
    Ok(out)
}

/// One draw of `W_0` per path by forward iteration from zero over `burn_in`
/// steps. Path `p` uses stream `p`, so batches are bit-identical for a fixed
/// seed regardless of thread count.
///
/// The omitted part is the series beyond `burn_in` terms; see [`burn_in_bound`].
pub fn stationary_sample(spec: &ModelSpec, config: &PathConfig) -> Result<Vec<Vec<f64>>> {
    config.check()?;
    let d = spec.dim();
    let triangular = spec.is_upper_triangular();
    (0..config.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream(config.seed, Purpose::Paths, p);
            let (mut a, mut b, mut scratch) = (vec![0.0; d * d], vec![0.0; d], vec![0.0; d]);
            let mut w = vec![0.0; d];
            for t in 1..=config.burn_in {
                spec.draw_into(&mut rng, &mut a, &mut b, None);
                if triangular {
                    step(d, &a, &b, &mut w);
                } else {
                    step_general(d, &a, &b, &mut w, &mut scratch);
                }
                check_finite(&w, t)?;
            }
            Ok(w)
        })
        .collect()
}

/// `W_0 = sum_{n < N} Pi_n B_{-n}` with `N = truncation`, evaluated on the same
/// draws that [`stationary_sample`] uses when `burn_in = truncation`.
pub fn series_sample(spec: &ModelSpec, config: &PathConfig) -> Result<Vec<Vec<f64>>> {
    config.check()?;
    let d = spec.dim();
    let n = config.truncation;
    (0..config.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream(config.seed, Purpose::Paths, p);
            let mut a = vec![0.0; n * d * d];
            let mut b = vec![0.0; n * d];
            // draws arrive in forward time, t = -N+1 first
            for k in 0..n {
                let lag = n - 1 - k;
                spec.draw_into(
                    &mut rng,
                    &mut a[lag * d * d..(lag + 1) * d * d],
                    &mut b[lag * d..(lag + 1) * d],
                    None,
                );
            }
            let mut prod = vec![0.0; d * d];
            for i in 0..d {
                prod[i * d + i] = 1.0;
            }
            let mut next = vec![0.0; d * d];
            let mut w = vec![0.0; d];
            for lag in 0..n {
                let bl = &b[lag * d..(lag + 1) * d];
                for i in 0..d {
                    w[i] += (0..d).map(|j| prod[i * d + j] * bl[j]).sum::<f64>();
                }
                let al = &a[lag * d * d..(lag + 1) * d * d];
                for i in 0..d {
                    for j in 0..d {
                        next[i * d + j] = (0..d).map(|k| prod[i * d + k] * al[k * d + j]).sum();
                    }
                }
                std::mem::swap(&mut prod, &mut next);
            }
            check_finite(&w, n)?;
            Ok(w)
        })
        .collect()
}

/// Geometric factor `rho^burn_in` bounding the `eps`-moment of the omitted
/// series tail, with `eps = 0.5 min alpha_i` and `rho = max_i E A_ii^eps`.
pub fn burn_in_bound(spec: &ModelSpec, burn_in: usize) -> Result<f64> {
    let rho = contraction_rate(spec)?;
    Ok(rho.powf(burn_in as f64))
}

/// Smallest burn-in with [`burn_in_bound`] below `tol`.
pub fn suggest_burn_in(spec: &ModelSpec, tol: f64) -> Result<usize> {
    let rho = contraction_rate(spec)?;
    if !(rho < 1.0) {
        return Err(Error::NoRoot("diagonal moments do not contract".into()));
    }
    Ok((tol.ln() / rho.ln()).ceil().max(1.0) as usize)
}

fn contraction_rate(spec: &ModelSpec) -> Result<f64> {
    let d = spec.dim();
    let alphas = (0..d).map(|i| solve_alpha(spec.diag(i))).collect::<Result<Vec<_>>>()?;
    let eps = 0.5 * alphas.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((0..d).map(|i| spec.diag(i).moment(eps)).fold(0.0, f64::max))
}

/// Stored i.i.d. draws `(A_{-p}, B_{-p})` for `p = 0 .. window-1` together with
/// the states `W_{-p}` for `p = 0 ..= window`.
#[derive(Debug, Clone)]
pub struct Realization {
    d: usize,
    window: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    w: Vec<f64>,
}

impl Realization {
    /// Iterates `burn_in` steps from zero, then records `window` steps.
    pub fn draw<R: Rng + ?Sized>(
        spec: &ModelSpec,
        window: usize,
        burn_in: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let d = spec.dim();
        let mut a = vec![0.0; window * d * d];
        let mut b = vec![0.0; window * d];
        let mut w = vec![0.0; (window + 1) * d];
        let (mut ta, mut tb, mut scratch) = (vec![0.0; d * d], vec![0.0; d], vec![0.0; d]);
        let mut state = vec![0.0; d];
        for t in 1..=burn_in {
            spec.draw_into(rng, &mut ta, &mut tb, None);
            step_general(d, &ta, &tb, &mut state, &mut scratch);
            check_finite(&state, t)?;
        }
        w[window * d..].copy_from_slice(&state);
        for k in 0..window {
            let lag = window - 1 - k;
            let (al, bl) = (
                &mut a[lag * d * d..(lag + 1) * d * d],
                &mut b[lag * d..(lag + 1) * d],
            );
            spec.draw_into(rng, al, bl, None);
            step_general(d, al, bl, &mut state, &mut scratch);
            check_finite(&state, burn_in + k + 1)?;
            w[lag * d..(lag + 1) * d].copy_from_slice(&state);
        }
        Ok(Self { d, window, a, b, w })
    }

    /// Builds a realization from explicit draws, `a[p]` being `A_{-p}`.
    /// States are filled by iterating from `w_start` at time `-window`.
    pub fn from_draws(d: usize, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, w_start: Vec<f64>) -> Result<Self> {
        let window = a.len();
        if b.len() != window || w_start.len() != d || a.iter().any(|m| m.len() != d * d) || b.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidInput("inconsistent realization shapes".into()));
        }
        let mut w = vec![0.0; (window + 1) * d];
        let mut state = w_start;
        let mut scratch = vec![0.0; d];
        w[window * d..].copy_from_slice(&state);
        for lag in (0..window).rev() {
            step_general(d, &a[lag], &b[lag], &mut state, &mut scratch);
            w[lag * d..(lag + 1) * d].copy_from_slice(&state);
        }
        Ok(Self { d, window, a: a.concat(), b: b.concat(), w })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// `A_{-p}`, row-major.
    pub fn a(&self, p: usize) -> &[f64] {
        &self.a[p * self.d * self.d..(p + 1) * self.d * self.d]
    }

    pub fn b(&self, p: usize) -> &[f64] {
        &self.b[p * self.d..(p + 1) * self.d]
    }

    /// `W_{-p}`, for `p <= window`.
    pub fn w(&self, p: usize) -> &[f64] {
        &self.w[p * self.d..(p + 1) * self.d]
    }
}
