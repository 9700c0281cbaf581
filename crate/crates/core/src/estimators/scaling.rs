use serde::{Deserialize, Serialize};

use super::tail::least_squares_slope;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveOptions {
    /// Number of log-spaced grid points.
    pub points: usize,
    /// Exceedances left above the largest grid point.
    pub min_exceedances: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self { points: 40, min_exceedances: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    /// `x^alpha * P(X > x)` from the empirical survival function.
    pub x_pow_alpha_times_survival: f64,
    pub exceedances: usize,
}

/// `x^alpha P(X > x)` on a log grid running from the sample median to the
/// level that still has `min_exceedances` points above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub alpha: f64,
    pub n: usize,
    pub points: Vec<CurvePoint>,
    /// Mean over the upper half of the grid.
    pub plateau: f64,
    /// Maximum over the upper half of the grid.
    pub upper_max: f64,
    /// Log-log slope over the last decade of the grid (the whole grid if it
    /// spans less than a decade). Zero means the curve has flattened.
    pub last_decade_slope: f64,
}

pub fn survival_scaling(sample: &[f64], alpha: f64, options: CurveOptions) -> Result<ScalingCurve> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must be positive")));
    }
    if options.points < 4 || options.min_exceedances == 0 {
        return Err(Error::InvalidInput("the grid needs at least 4 points and 1 exceedance".into()));
    }
    let n = sample.len();
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("sample contains NaN".into()));
    }
    if n < 2 * options.min_exceedances + 2 {
        return Err(Error::InvalidInput(format!(
            "sample of {n} is too small for {} exceedances",
            options.min_exceedances
        )));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[n / 2];
    let hi = sorted[n - options.min_exceedances - 1];
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::Degenerate);
    }
    let m = options.points;
    let points: Vec<CurvePoint> = (0..m)
        .map(|i| {
            let x = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (m - 1) as f64).exp();
            let exceedances = n - sorted.partition_point(|v| *v <= x);
            CurvePoint { x, x_pow_alpha_times_survival: x.powf(alpha) * exceedances as f64 / n as f64, exceedances }
        })
        .collect();
    let upper = &points[m / 2..];
    let plateau = upper.iter().map(|p| p.x_pow_alpha_times_survival).sum::<f64>() / upper.len() as f64;
    let upper_max = upper.iter().map(|p| p.x_pow_alpha_times_survival).fold(0.0, f64::max);
    let decade: Vec<&CurvePoint> = points.iter().filter(|p| p.x >= hi / 10.0).collect();
    let xs: Vec<f64> = decade.iter().map(|p| p.x.log10()).collect();
    let ys: Vec<f64> = decade.iter().map(|p| p.x_pow_alpha_times_survival.log10()).collect();
    let last_decade_slope = least_squares_slope(&xs, &ys).ok_or(Error::Degenerate)?;
    Ok(ScalingCurve { alpha, n, points, plateau, upper_max, last_decade_slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    #[test]
    fn exact_pareto_curve_is_flat() {
        let mut rng = stream(1, Purpose::Auxiliary, 0);
        let sample: Vec<f64> = (0..1_000_000).map(|_| 3.0 * (1.0 - rng.random::<f64>()).powf(-0.5)).collect();
        let c = survival_scaling(&sample, 2.0, CurveOptions::default()).unwrap();
        assert_eq!(c.points.len(), 40);
        assert!((c.plateau - 9.0).abs() < 0.03 * 9.0, "{}", c.plateau);
        assert!(c.last_decade_slope.abs() < 0.05, "{}", c.last_decade_slope);
        assert!(c.points.last().unwrap().exceedances >= 2000);
        assert!(c.points.windows(2).all(|w| w[1].x > w[0].x));
    }

    #[test]
    fn wrong_index_tilts_the_curve() {
        let mut rng = stream(2, Purpose::Auxiliary, 0);
        let sample: Vec<f64> = (0..200_000).map(|_| (1.0 - rng.random::<f64>()).powf(-0.5)).collect();
        let c = survival_scaling(&sample, 3.0, CurveOptions::default()).unwrap();
        assert!((c.last_decade_slope - 1.0).abs() < 0.1, "{}", c.last_decade_slope);
    }

    #[test]
    fn rejects_small_or_flat_samples() {
        assert!(survival_scaling(&[1.0; 100], 2.0, CurveOptions::default()).is_err());
        assert_eq!(
            survival_scaling(&[1.0; 10_000], 2.0, CurveOptions::default()).unwrap_err(),
            Error::Degenerate
        );
    }
}
