use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hill,
    RankRegression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    /// 1-based coordinate the sample came from, when known.
    pub coordinate: Option<usize>,
    pub method: Method,
    pub point: f64,
    pub std_error: f64,
    pub k: usize,
    pub n: usize,
    pub seed: Option<u64>,
}

impl TailEstimate {
    pub fn with_context(mut self, coordinate: usize, seed: u64) -> Self {
        self.coordinate = Some(coordinate);
        self.seed = Some(seed);
        self
    }

    /// `point ± z·std_error`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.point - z * self.std_error, self.point + z * self.std_error)
    }
}

/// `floor(n^{2/3})`, clamped to `[1, n - 1]`.
pub fn default_k(n: usize) -> usize {
    (((n as f64).powf(2.0 / 3.0) + 1e-9).floor() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// The `k + 1` largest values in decreasing order.
fn top(sample: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = sample.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!("k = {k} must satisfy 0 < k < n = {n}")));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("sample contains NaN".into()));
    }
    let mut values = sample.to_vec();
    let (head, pivot, _) = values.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    let mut head = head.to_vec();
    head.sort_by(|a, b| b.total_cmp(a));
    head.push(*pivot);
    if !(head[k] > 0.0) {
        return Err(Error::InvalidInput(format!("fewer than {} strictly positive values", k + 1)));
    }
    if head[0] == head[k] {
        return Err(Error::Degenerate);
    }
    Ok(head)
}

/// Hill estimator of the tail index from the top `k` order statistics.
pub fn hill(sample: &[f64], k: usize) -> Result<TailEstimate> {
    let top = top(sample, k)?;
    let threshold = top[k].ln();
    let mean_excess = top[..k].iter().map(|x| x.ln() - threshold).sum::<f64>() / k as f64;
    let point = 1.0 / mean_excess;
    Ok(TailEstimate {
        coordinate: None,
        method: Method::Hill,
        point,
        std_error: point / (k as f64).sqrt(),
        k,
        n: sample.len(),
        seed: None,
    })
}

/// Least-squares slope of `log((i - 1/2)/n)` against `log X_(i)` over the
/// top `k` order statistics, negated.
pub fn rank_regression(sample: &[f64], k: usize) -> Result<TailEstimate> {
    let top = top(sample, k)?;
    let n = sample.len() as f64;
    let xs: Vec<f64> = top[..k].iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = (1..=k).map(|i| ((i as f64 - 0.5) / n).ln()).collect();
    let slope = least_squares_slope(&xs, &ys).ok_or(Error::Degenerate)?;
    let point = -slope;
    if !(point > 0.0) {
        return Err(Error::Degenerate);
    }
    Ok(TailEstimate {
        coordinate: None,
        method: Method::RankRegression,
        point,
        std_error: point * (2.0 / k as f64).sqrt(),
        k,
        n: sample.len(),
        seed: None,
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    fn pareto(a: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, Purpose::Auxiliary, 0);
        (0..n).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / a)).collect()
    }

    #[test]
    fn hill_recovers_pareto_index() {
        let sample = pareto(2.0, 100_000, 1);
        let est = hill(&sample, 1000).unwrap();
        assert!((1.8..=2.2).contains(&est.point), "{est:?}");
        assert!((est.point - 2.0).abs() < 3.0 * est.std_error);
        assert_eq!((est.k, est.n), (1000, 100_000));
    }

    #[test]
    fn rank_regression_recovers_pareto_index() {
        let sample = pareto(2.0, 100_000, 2);
        let est = rank_regression(&sample, 1000).unwrap();
        assert!((1.8..=2.2).contains(&est.point), "{est:?}");
    }

    #[test]
    fn hand_computed_hill() {
        // top 2 of {8, 4, 2, 1}: 2 / (ln 4 + ln 2)
        let est = hill(&[1.0, 8.0, 2.0, 4.0], 2).unwrap();
        assert!((est.point - 2.0 / (3.0 * 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn estimators_are_scale_invariant() {
        let sample = pareto(1.5, 20_000, 3);
        let scaled: Vec<f64> = sample.iter().map(|x| 37.5 * x).collect();
        let (h, hs) = (hill(&sample, 300).unwrap(), hill(&scaled, 300).unwrap());
        assert!((h.point - hs.point).abs() < 1e-9 * h.point);
        let (r, rs) = (rank_regression(&sample, 300).unwrap(), rank_regression(&scaled, 300).unwrap());
        assert!((r.point - rs.point).abs() < 1e-9 * r.point);
    }

    #[test]
    fn degenerate_and_invalid_samples() {
        assert_eq!(hill(&[3.0; 50], 10).unwrap_err(), Error::Degenerate);
        assert_eq!(rank_regression(&[3.0; 50], 10).unwrap_err(), Error::Degenerate);
        assert!(hill(&[1.0, 2.0], 2).is_err());
        assert!(hill(&[1.0, 2.0, 0.0], 2).is_err());
        assert!(hill(&[1.0, 2.0, 3.0], 0).is_err());
    }

    #[test]
    fn default_k_rule() {
        assert_eq!(default_k(200_000), 3419);
        assert_eq!(default_k(1_000_000), 10_000);
        assert_eq!(default_k(2), 1);
    }
}
