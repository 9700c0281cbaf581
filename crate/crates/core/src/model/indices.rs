use serde::{Deserialize, Serialize};

use super::{DepGraph, ModelSpec};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

/// Minimum separation between marginal indices; closer pairs are rejected.
pub const DISTINCT_TOL: f64 = 1e-6;
/// Bracket-doubling stops here.
pub const ROOT_CAP: f64 = 64.0;

/// The unique `s > 0` with `E[X^s] = 1`.
///
/// Requires `E log X < 0`. The bracket is found by doubling from `s = 1`
/// (capped at [`ROOT_CAP`]) and then bisected on `log E[X^s]` down to
/// adjacent floating-point numbers.
pub fn solve_alpha(dist: &DistributionSpec) -> Result<f64> {
    if dist.is_arithmetic() {
        return Err(Error::Arithmetic);
    }
    let elog = dist.log_moment(0.0)?;
    if !(elog < 0.0) {
        return Err(Error::NoRoot(format!("E log X = {elog} is not negative for {dist}")));
    }
    let f = |s: f64| dist.moment(s).ln();
    let (mut lo, mut hi);
    if f(1.0) >= 0.0 {
        hi = 1.0;
        lo = 0.5;
        while f(lo) >= 0.0 {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::NoRoot(format!("no sign change near 0 for {dist}")));
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        loop {
            let probe = hi.min(ROOT_CAP);
            if f(probe) >= 0.0 {
                hi = probe;
                break;
            }
            if probe >= ROOT_CAP {
                return Err(Error::NoRoot(format!(
                    "E[X^s] < 1 on (0, {ROOT_CAP}] for {dist}"
                )));
            }
            lo = probe;
            hi *= 2.0;
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Marginal indices, modified indices and the dominating coordinate of each
/// coordinate (all 0-based in memory, 1-based when serialized via reports).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub alpha: Vec<f64>,
    pub tilde_alpha: Vec<f64>,
    pub j0: Vec<usize>,
}

impl TailProfile {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// `tilde_alpha_i < alpha_i`: the tail of `i` is inherited from `j0(i)`.
    pub fn is_dominated(&self, i: usize) -> bool {
        self.j0[i] != i
    }
}

/// Rejects index vectors with two entries closer than [`DISTINCT_TOL`].
pub fn check_distinct(alpha: &[f64]) -> Result<()> {
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&x, &y| alpha[x].total_cmp(&alpha[y]));
    for w in order.windows(2) {
        if (alpha[w[1]] - alpha[w[0]]).abs() <= DISTINCT_TOL {
            let (first, second) = (w[0].min(w[1]) + 1, w[0].max(w[1]) + 1);
            return Err(Error::DuplicateIndices { first, second, tol: DISTINCT_TOL });
        }
    }
    Ok(())
}

/// `tilde_alpha_i = min { alpha_j : i ⊴ j }`.
pub fn tilde_alpha_by_reach(alpha: &[f64], graph: &DepGraph) -> (Vec<f64>, Vec<usize>) {
    let d = alpha.len();
    let mut tilde = vec![0.0; d];
    let mut j0 = vec![0; d];
    for i in 0..d {
        let best = graph
            .reach_set(i)
            .min_by(|&x, &y| alpha[x].total_cmp(&alpha[y]))
            .expect("reach set contains i");
        tilde[i] = alpha[best];
        j0[i] = best;
    }
    (tilde, j0)
}

/// Backward recursion `tilde_alpha_i = alpha_i ∧ min { tilde_alpha_j : i ≺ j }`
/// for `i = d, ..., 1`.
pub fn tilde_alpha_by_recursion(alpha: &[f64], graph: &DepGraph) -> (Vec<f64>, Vec<usize>) {
    let d = alpha.len();
    let mut tilde = vec![0.0; d];
    let mut j0 = vec![0; d];
    for i in (0..d).rev() {
        tilde[i] = alpha[i];
        j0[i] = i;
        for j in i + 1..d {
            if graph.direct(i, j) && tilde[j] < tilde[i] {
                tilde[i] = tilde[j];
                j0[i] = j0[j];
            }
        }
    }
    (tilde, j0)
}

/// Computes the profile by the reach-set minimum and cross-checks it against
/// the backward recursion.
pub fn tilde_alpha(alpha: &[f64], graph: &DepGraph) -> Result<TailProfile> {
    if alpha.len() != graph.dim() {
        return Err(Error::InvalidInput(format!(
            "{} indices for a {}-dimensional graph",
            alpha.len(),
            graph.dim()
        )));
    }
    if let Some(bad) = alpha.iter().position(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidInput(format!("alpha_{} = {} is not positive", bad + 1, alpha[bad])));
    }
    check_distinct(alpha)?;
    let (tilde, j0) = tilde_alpha_by_reach(alpha, graph);
    let (tilde_rec, j0_rec) = tilde_alpha_by_recursion(alpha, graph);
    assert_eq!(tilde, tilde_rec, "reach-minimum and recursion disagree");
    assert_eq!(j0, j0_rec, "reach-minimum and recursion disagree on j0");
    Ok(TailProfile { alpha: alpha.to_vec(), tilde_alpha: tilde, j0 })
}

/// Solves every diagonal index and builds the profile of `spec`.
pub fn profile(spec: &ModelSpec) -> Result<TailProfile> {
    let alpha = (0..spec.dim()).map(|i| solve_alpha(spec.diag(i))).collect::<Result<Vec<_>>>()?;
    tilde_alpha(&alpha, &DepGraph::build(spec))
}
