use serde::{Deserialize, Serialize};

use super::PathConfig;
use crate::error::{Error, Result};
use crate::model::{profile, DepGraph, ModelSpec};
use crate::rng::{path_moments, stream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UPoint {
    pub s: usize,
    /// Telescoped estimate of `u(s) = E pi_{l j0}(s)^{alpha_{j0}}`.
    pub estimate: f64,
    pub std_error: f64,
    /// Plain batch mean of `pi_{l j0}(s)^{alpha_{j0}}`.
    pub raw: f64,
    pub raw_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct USequence {
    pub ell: usize,
    pub j0: usize,
    pub alpha_j0: f64,
    pub paths: usize,
    pub points: Vec<UPoint>,
    /// Relative change of the estimate over the last 20% of horizons is below 1%.
    pub converged: bool,
    /// Paths on which `pi(s+1) >= pi(s) A_{j0 j0}` failed at some step.
    pub monotone_violations: u64,
    /// Per coordinate `j` reached from `l` other than `j0`: the first `s` at
    /// which the batch mean of `pi_{l j}(s)^{alpha_{j0}}` is below the last
    /// u estimate. `None` when `j` is unreachable, is `j0`, or never drops below.
    pub first_below: Vec<Option<usize>>,
}

/// Relative-change window and threshold of the convergence flag.
pub const CONVERGENCE_WINDOW: f64 = 0.2;
pub const CONVERGENCE_TOL: f64 = 0.01;

/// `u_l(s)` for `s = 1..=s_max` on common random numbers.
///
/// Along each path the row `pi_{l .}(s)` is extended one factor at a time.
/// Writing `x_s = pi_{l j0}(s)` and `a = A_{j0 j0, -s}`, the estimator adds
/// `x_{s+1}^alpha - (x_s a)^alpha` at each step. The subtracted term has mean
/// `E x_s^alpha`, so the running sum is unbiased for `u(s)`, and it is
/// non-decreasing on every path because `x_{s+1} >= x_s a` term by term.
/// The plain mean of `x_s^alpha` is reported alongside.
///
/// A self-dominant `l` gives `j0 = l`, for which `u(s) = 1`.
pub fn u_sequence(spec: &ModelSpec, ell: usize, s_max: usize, config: &PathConfig) -> Result<USequence> {
    config.check()?;
    let d = spec.dim();
    if ell >= d {
        return Err(Error::InvalidInput(format!("coordinate {} is out of range", ell + 1)));
    }
    if s_max == 0 {
        return Err(Error::InvalidInput("s_max must be at least 1".into()));
    }
    let profile = profile(spec)?;
    let j0 = profile.j0[ell];
    let alpha = profile.alpha[j0];
    let graph = DepGraph::build(spec);
    let width = 2 * s_max + 1 + d * s_max;
    let per_coord = 2 * s_max + 1;
    let moments = path_moments(config.paths as u64, width, |p, out| {
        let mut rng = stream(config.seed, Purpose::Paths, p);
        let (mut a, mut b) = (vec![0.0; d * d], vec![0.0; d]);
        let mut row = vec![0.0; d];
        row[ell] = 1.0;
        let mut next = vec![0.0; d];
        let mut y = if ell == j0 { 1.0 } else { 0.0 };
        let mut violated = false;
        for s in 0..s_max {
            spec.draw_into(&mut rng, &mut a, &mut b, None);
            let carried = row[j0] * a[j0 * d + j0];
            for (j, slot) in next.iter_mut().enumerate() {
                *slot = (0..=j).map(|k| row[k] * a[k * d + j]).sum();
            }
            std::mem::swap(&mut row, &mut next);
            if !row.iter().all(|x| x.is_finite()) {
                return Err(Error::Overflow { step: s + 1 });
            }
            if row[j0] < carried {
                violated = true;
            }
            y += row[j0].powf(alpha) - carried.powf(alpha);
            out[s] = y;
            out[s_max + s] = row[j0].powf(alpha);
            for (j, x) in row.iter().enumerate() {
                out[per_coord + j * s_max + s] = x.powf(alpha);
            }
        }
        out[2 * s_max] = if violated { 1.0 } else { 0.0 };
        Ok(())
    })?;
    let points: Vec<UPoint> = (0..s_max)
        .map(|s| UPoint {
            s: s + 1,
            estimate: moments.mean(s),
            std_error: moments.std_error(s),
            raw: moments.mean(s_max + s),
            raw_std_error: moments.std_error(s_max + s),
        })
        .collect();
    let monotone_violations = (moments.mean(2 * s_max) * moments.count() as f64).round() as u64;
    let last = points[s_max - 1].estimate;
    let first_below = (0..d)
        .map(|j| {
            if j == j0 || !graph.reach(ell, j) {
                return None;
            }
            (0..s_max).find(|&s| moments.mean(per_coord + j * s_max + s) < last).map(|s| s + 1)
        })
        .collect();
    Ok(USequence {
        ell,
        j0,
        alpha_j0: alpha,
        paths: config.paths,
        converged: is_converged(&points),
        points,
        monotone_violations,
        first_below,
    })
}

fn is_converged(points: &[UPoint]) -> bool {
    let n = points.len();
    let last = points[n - 1].estimate;
    if n < 2 {
        return false;
    }
    // the window always holds at least two horizons
    let from = (((n as f64) * (1.0 - CONVERGENCE_WINDOW)).floor() as usize).min(n - 2);
    let change = points[from..].iter().map(|p| (p.estimate - last).abs()).fold(0.0, f64::max);
    last > 0.0 && change / last < CONVERGENCE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    fn fixture_spec() -> ModelSpec {
        ModelSpec::new(
            vec![
                vec![Some(DistributionSpec::lognormal(-0.5, 0.5).unwrap()), Some(DistributionSpec::constant(1.0).unwrap())],
                vec![None, Some(DistributionSpec::lognormal(-1.0, 1.0).unwrap())],
            ],
            vec![DistributionSpec::constant(1.0).unwrap(); 2],
        )
        .unwrap()
    }

    #[test]
    fn self_dominant_probe_is_exactly_one() {
        let cfg = PathConfig { paths: 5000, seed: 2, ..Default::default() };
        let u = u_sequence(&fixture_spec(), 1, 15, &cfg).unwrap();
        assert_eq!(u.j0, 1);
        for p in &u.points {
            assert_eq!(p.estimate, 1.0);
        }
        // the plain mean is a lognormal martingale; only its first step has light enough tails
        let first = &u.points[0];
        assert!((first.raw - 1.0).abs() < 5.0 * first.raw_std_error, "{first:?}");
        assert!(u.converged);
    }

    #[test]
    fn fixture_sequence_is_monotone_and_converges() {
        let cfg = PathConfig { paths: 200_000, seed: 11, ..Default::default() };
        let u = u_sequence(&fixture_spec(), 0, 40, &cfg).unwrap();
        assert_eq!((u.j0, u.monotone_violations), (1, 0));
        assert!((u.alpha_j0 - 2.0).abs() < 1e-9);
        for w in u.points.windows(2) {
            assert!(w[1].estimate >= w[0].estimate);
        }
        // u(1) = E A_12^2 = 1 exactly, since A_12 = 1 and the first factor is A_0
        assert_eq!(u.points[0].estimate, 1.0);
        assert!(u.converged, "{:?}", u.points.last());
        // E pi_11(s)^2 = (E A_11^2)^s = e^{-s/2} is below u from the first step
        assert_eq!(u.first_below, vec![Some(1), None]);
    }

    /// u_1(40) from 10^6 paths at seed 11: 6.16184 with standard error 0.01965.
    const FROZEN_LIMIT: (f64, f64) = (6.161842021920867, 0.019648268312117564);

    #[test]
    fn limit_matches_frozen_fixture() {
        let cfg = PathConfig { paths: 100_000, seed: 12, ..Default::default() };
        let u = u_sequence(&fixture_spec(), 0, 40, &cfg).unwrap();
        let last = u.points.last().unwrap();
        let joint = (last.std_error.powi(2) + FROZEN_LIMIT.1.powi(2)).sqrt();
        assert!((last.estimate - FROZEN_LIMIT.0).abs() < 5.0 * joint, "{last:?}");
    }

    #[test]
    fn first_two_terms_match_closed_form() {
        // u(2) = E (A_11 + A_22)^2 = E A_11^2 + 2 E A_11 E A_22 + E A_22^2
        let m = |mu: f64, s: f64, k: f64| (mu * k + 0.5 * s * s * k * k).exp();
        let want = m(-0.5, 0.5, 2.0) + 2.0 * m(-0.5, 0.5, 1.0) * m(-1.0, 1.0, 1.0) + m(-1.0, 1.0, 2.0);
        let cfg = PathConfig { paths: 400_000, seed: 5, ..Default::default() };
        let u = u_sequence(&fixture_spec(), 0, 2, &cfg).unwrap();
        let p = &u.points[1];
        assert!((p.estimate - want).abs() < 5.0 * p.std_error, "{} vs {want} (se {})", p.estimate, p.std_error);
        assert!((p.raw - want).abs() < 5.0 * p.raw_std_error);
    }

    #[test]
    fn sequence_is_deterministic() {
        let cfg = PathConfig { paths: 9000, seed: 3, ..Default::default() };
        let a = u_sequence(&fixture_spec(), 0, 10, &cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap()
            .install(|| u_sequence(&fixture_spec(), 0, 10, &cfg).unwrap());
        assert_eq!(a, b);
    }
}
