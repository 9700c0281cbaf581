use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pi::{pi_column_shifted, pi_entry, pi_row};
use super::{burn_in_bound, PathConfig, Realization};
use crate::error::{Error, Result};
use crate::model::{profile, DepGraph, ModelSpec, TailProfile};
use crate::rng::{mean_and_se, stream, Purpose};

/// Horizon split `s = s1 + s2` used by the induction remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub s1: usize,
    pub s2: usize,
}

impl Split {
    pub fn even(s: usize) -> Self {
        Self { s1: s / 2, s2: s - s / 2 }
    }
}

/// Burn-in is extended until the geometric bound on the omitted series tail
/// falls below this.
pub const TAIL_BOUND: f64 = 1e-12;

/// One path's split of `W_{l,0}`. The `q_*` parts are taken at horizon `s1`;
/// `pi_lj0`, `w_j0_ms` and `r` at the full horizon `s = s1 + s2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTrace {
    pub path_id: u64,
    pub ell: usize,
    pub j0: usize,
    pub s: usize,
    pub s1: usize,
    pub s2: usize,
    pub q_f: f64,
    pub q_t: f64,
    pub q_w: f64,
    pub q_b: f64,
    pub qp_w: f64,
    pub qpp_w: f64,
    pub qstar_w: f64,
    /// `W_{l,0} - pi_{l j0}(s) W_{j0,-s}`.
    pub r: f64,
    /// `Q''_W + Q*_W + Q_B + Q_T`.
    pub r_sum: f64,
    pub pi_lj0: f64,
    pub w_j0_ms: f64,
    pub w_l_0: f64,
    /// Recursion steps behind `W_{l,0}`: burn-in plus horizon.
    pub series_terms: usize,
}

fn trace_path(
    real: &Realization,
    graph: &DepGraph,
    ell: usize,
    j0: usize,
    split: Split,
    path_id: u64,
    series_terms: usize,
) -> DecompositionTrace {
    let d = real.dim();
    let Split { s1, s2 } = split;
    let s = s1 + s2;
    let diag = |p: usize| real.a(p)[ell * d + ell];

    // Q_F, Q_B and Q_T share the running diagonal product Pi^{(l)}_n.
    let (mut q_f, mut q_b) = (0.0, 0.0);
    let mut own = 1.0;
    for n in 0..s1 {
        let a = real.a(n);
        let w_next = real.w(n + 1);
        let d_term = real.b(n)[ell] + (ell + 1..d).map(|j| a[ell * d + j] * w_next[j]).sum::<f64>();
        q_f += own * d_term;

        let mut inner = real.b(n)[ell];
        let mut row: Vec<f64> = (0..d).map(|j| if j > ell { a[ell * d + j] } else { 0.0 }).collect();
        let mut next = vec![0.0; d];
        for m in 1..s1 - n {
            let b = real.b(n + m);
            inner += (0..d).map(|j| row[j] * b[j]).sum::<f64>();
            let am = real.a(n + m);
            for (j, slot) in next.iter_mut().enumerate() {
                *slot = (0..=j).map(|k| row[k] * am[k * d + j]).sum();
            }
            std::mem::swap(&mut row, &mut next);
        }
        q_b += own * inner;
        own *= diag(n);
    }
    let q_t = own * real.w(s1)[ell];

    let pi = pi_row(real, ell, s1);
    let w_s1 = real.w(s1);
    let column = pi_column_shifted(real, j0, s1, s2);
    let w_j0_ms = real.w(s)[j0];
    let (mut q_w, mut qp_w, mut qpp_w, mut qstar_w) = (0.0, 0.0, 0.0, 0.0);
    for j in (ell + 1..d).filter(|&j| graph.reach(ell, j)) {
        let term = pi[j] * w_s1[j];
        q_w += term;
        if graph.reach(j, j0) {
            qp_w += term;
            qstar_w += pi[j] * (w_s1[j] - column[j] * w_j0_ms);
        } else {
            qpp_w += term;
        }
    }
    qstar_w -= pi[ell] * column[ell] * w_j0_ms;

    let pi_lj0 = pi_entry(real, ell, j0, s);
    let w_l_0 = real.w(0)[ell];
    let r = w_l_0 - pi_lj0 * w_j0_ms;
    let r_sum = qpp_w + qstar_w + q_b + q_t;
    DecompositionTrace {
        path_id,
        ell,
        j0,
        s,
        s1,
        s2,
        q_f,
        q_t,
        q_w,
        q_b,
        qp_w,
        qpp_w,
        qstar_w,
        r,
        r_sum,
        pi_lj0,
        w_j0_ms,
        w_l_0,
        series_terms,
    }
}

struct Setup {
    graph: DepGraph,
    j0: usize,
    burn_in: usize,
    split: Split,
}

fn setup(spec: &ModelSpec, profile: &TailProfile, ell: usize, s: usize, split: Option<Split>, config: &PathConfig) -> Result<Setup> {
    config.check()?;
    if ell >= spec.dim() {
        return Err(Error::InvalidInput(format!("coordinate {} is out of range", ell + 1)));
    }
    if !profile.is_dominated(ell) {
        return Err(Error::NotDominated(ell + 1));
    }
    let split = split.unwrap_or_else(|| Split::even(s));
    if split.s1 + split.s2 != s {
        return Err(Error::InvalidInput(format!("split {}+{} does not add up to {s}", split.s1, split.s2)));
    }
    let mut burn_in = config.burn_in;
    while burn_in_bound(spec, burn_in)? > TAIL_BOUND {
        burn_in = (burn_in * 2).max(16);
    }
    Ok(Setup { graph: DepGraph::build(spec), j0: profile.j0[ell], burn_in, split })
}

/// Path 0 of [`decompose_batch`].
pub fn decompose(spec: &ModelSpec, ell: usize, s: usize, split: Option<Split>, config: &PathConfig) -> Result<DecompositionTrace> {
    let one = PathConfig { paths: 1, ..*config };
    Ok(decompose_batch(spec, ell, s, split, &one)?.remove(0))
}

/// One trace per path; path `p` draws from stream `p`.
///
/// The burn-in is raised from `config.burn_in` until the omitted tail bound
/// is below [`TAIL_BOUND`].
pub fn decompose_batch(
    spec: &ModelSpec,
    ell: usize,
    s: usize,
    split: Option<Split>,
    config: &PathConfig,
) -> Result<Vec<DecompositionTrace>> {
    let profile = profile(spec)?;
    let setup = setup(spec, &profile, ell, s, split, config)?;
    (0..config.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream(config.seed, Purpose::Paths, p);
            let real = Realization::draw(spec, s, setup.burn_in, &mut rng)?;
            Ok(trace_path(&real, &setup.graph, ell, setup.j0, setup.split, p, setup.burn_in + s))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderMoment {
    pub s: usize,
    /// Batch mean of `|R(s)|^{alpha_{j0}}`.
    pub moment: f64,
    pub std_error: f64,
}

/// `E|R_{l j0}(s)|^{alpha_{j0}}` across horizons, with the default split.
pub fn remainder_profile(spec: &ModelSpec, ell: usize, horizons: &[usize], config: &PathConfig) -> Result<Vec<RemainderMoment>> {
    let profile = profile(spec)?;
    let alpha = profile.tilde_alpha[ell];
    horizons
        .iter()
        .map(|&s| {
            let traces = decompose_batch(spec, ell, s, None, config)?;
            let values: Vec<f64> = traces.iter().map(|t| t.r.abs().powf(alpha)).collect();
            let (moment, std_error) = mean_and_se(&values);
            Ok(RemainderMoment { s, moment, std_error })
        })
        .collect()
}
