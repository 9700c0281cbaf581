//! Constant-conditional-correlation GARCH(1,1) as a triangular recurrence.
//!
//! Squared volatilities follow `W_t = alpha0 + alpha X_{t-1}^2 + beta W_{t-1}`
//! with returns `X_t = diag(Z_t) W_t^{1/2}`. Since `X_{t-1}^2 = diag(Z_{t-1}^2) W_{t-1}`,
//! this is the recurrence with `A_t = alpha diag(Z_{t-1}^2) + beta` and `B_t = alpha0`.
//! Entry `(i, j)` of `A_t` is `alpha_ij Z_j^2 + beta_ij`, so one normal
//! shock is shared down each column.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, ShockCoupling};
use crate::rng::{stream, Purpose};
use crate::simulate::PathConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSpec {
    d: usize,
    alpha0: Vec<f64>,
    /// Row-major, upper triangular.
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Share the return shock `Z_{t,j}` across column `j` of `A_t` (the GARCH
    /// recursion itself). When false, every entry of `A_t` draws its own shock.
    common_shock: bool,
}

impl GarchSpec {
    /// `alpha` and `beta` are row-major `d x d`. Shocks are common by default.
    pub fn new(alpha0: Vec<f64>, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let d = alpha0.len();
        if d == 0 || alpha.len() != d * d || beta.len() != d * d {
            return Err(Error::InvalidInput(format!("GARCH parameters must be {d}-vector and {d} x {d} matrices")));
        }
        for (i, a0) in alpha0.iter().enumerate() {
            if !(*a0 > 0.0 && a0.is_finite()) {
                return Err(Error::InvalidInput(format!("alpha0[{}] = {a0} must be positive", i + 1)));
            }
        }
        for (name, m) in [("alpha", &alpha), ("beta", &beta)] {
            for i in 0..d {
                for j in 0..d {
                    let v = m[i * d + j];
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(Error::InvalidInput(format!("{name}[{}][{}] = {v} must be nonnegative", i + 1, j + 1)));
                    }
                    if j < i && v != 0.0 {
                        return Err(Error::InvalidInput(format!("{name}[{}][{}] is below the diagonal", i + 1, j + 1)));
                    }
                }
            }
        }
        for i in 0..d {
            if alpha[i * d + i] + beta[i * d + i] <= 0.0 {
                return Err(Error::InvalidInput(format!("alpha[{0}][{0}] + beta[{0}][{0}] must be positive", i + 1)));
            }
        }
        Ok(Self { d, alpha0, alpha, beta, common_shock: true })
    }

    pub fn with_common_shock(mut self, common: bool) -> Self {
        self.common_shock = common;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn common_shock(&self) -> bool {
        self.common_shock
    }

    pub fn alpha0(&self) -> &[f64] {
        &self.alpha0
    }

    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        self.alpha[i * self.d + j]
    }

    pub fn beta(&self, i: usize, j: usize) -> f64 {
        self.beta[i * self.d + j]
    }

    /// The induced recurrence: `garch_entry(alpha_ij, beta_ij)` where
    /// `alpha_ij > 0`, `constant(beta_ij)` where only `beta_ij > 0`, a
    /// structural zero otherwise, and `B = constant(alpha0)`.
    pub fn to_sre(&self) -> ModelSpec {
        let d = self.d;
        let a = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let (al, be) = (self.alpha(i, j), self.beta(i, j));
                        if al > 0.0 {
                            Some(DistributionSpec::GarchEntry { a: al, b: be })
                        } else if be > 0.0 {
                            Some(DistributionSpec::Constant { c: be })
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let b = self.alpha0.iter().map(|&c| DistributionSpec::Constant { c }).collect();
        let coupling = if self.common_shock { ShockCoupling::ColumnShared } else { ShockCoupling::Independent };
        ModelSpec::new(a, b).expect("validated GARCH parameters give a well-formed model").with_coupling(coupling)
    }
}

/// Returns and squared volatilities of one simulated path, `t = 1..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSeries {
    pub x: Vec<Vec<f64>>,
    pub sigma2: Vec<Vec<f64>>,
}

impl GarchSeries {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sigma2_coordinate(&self, i: usize) -> Vec<f64> {
        self.sigma2.iter().map(|w| w[i]).collect()
    }

    pub fn x_coordinate(&self, i: usize) -> Vec<f64> {
        self.x.iter().map(|x| x[i]).collect()
    }
}

/// One series per path, each `config.horizon` steps long after
/// `config.burn_in` discarded steps from `sigma^2 = 0`. Path `p` uses stream `p`.
pub fn simulate_garch(g: &GarchSpec, config: &PathConfig) -> Result<Vec<GarchSeries>> {
    use rayon::prelude::*;
    config.check()?;
    let spec = g.to_sre();
    let d = g.d;
    (0..config.paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream(config.seed, Purpose::Garch, p);
            let (mut a, mut b, mut z) = (vec![0.0; d * d], vec![0.0; d], vec![0.0; d]);
            let mut w = vec![0.0f64; d];
            let mut next = vec![0.0; d];
            let mut out = GarchSeries { x: Vec::with_capacity(config.horizon), sigma2: Vec::with_capacity(config.horizon) };
            for t in 0..config.burn_in + config.horizon {
                spec.draw_into(&mut rng, &mut a, &mut b, Some(&mut z));
                if t >= config.burn_in {
                    out.x.push(w.iter().zip(&z).map(|(wi, zi)| zi * wi.sqrt()).collect());
                    out.sigma2.push(w.clone());
                }
                for i in 0..d {
                    next[i] = b[i] + (i..d).map(|j| a[i * d + j] * w[j]).sum::<f64>();
                }
                std::mem::swap(&mut w, &mut next);
                if !w.iter().all(|v| v.is_finite()) {
                    return Err(Error::Overflow { step: t + 1 });
                }
            }
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{solve_alpha, validate};
    use crate::rng::mean_and_se;

    fn pipeline_spec() -> GarchSpec {
        GarchSpec::new(vec![0.2, 0.2], vec![0.1, 0.05, 0.0, 0.3], vec![0.5, 0.0, 0.0, 0.4]).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(GarchSpec::new(vec![0.0], vec![0.1], vec![0.8]).is_err());
        assert!(GarchSpec::new(vec![1.0], vec![0.0], vec![0.0]).is_err());
        assert!(GarchSpec::new(vec![1.0, 1.0], vec![0.1, 0.0, 0.2, 0.1], vec![0.5; 4]).is_err());
        assert!(GarchSpec::new(vec![1.0], vec![-0.1], vec![0.8]).is_err());
    }

    #[test]
    fn one_dimensional_mapping() {
        let g = GarchSpec::new(vec![0.2], vec![0.1], vec![0.8]).unwrap();
        let spec = g.to_sre();
        assert_eq!(spec.diag(0), &DistributionSpec::garch_entry(0.1, 0.8).unwrap());
        assert_eq!(spec.b(0), &DistributionSpec::constant(0.2).unwrap());
    }

    #[test]
    fn induced_model_is_structurally_valid() {
        let spec = pipeline_spec().to_sre();
        assert!(spec.is_upper_triangular());
        assert!(spec.a(1, 0).is_none());
        assert!(validate(&spec).accepted);
        let plain = pipeline_spec().with_common_shock(false).to_sre();
        assert!(validate(&plain).accepted);
    }

    #[test]
    fn zero_alpha_gives_deterministic_fixed_point() {
        let g = GarchSpec::new(vec![0.2, 0.1], vec![0.0; 4], vec![0.5, 0.2, 0.0, 0.4]).unwrap();
        assert_eq!(g.to_sre().diag(0), &DistributionSpec::constant(0.5).unwrap());
        let cfg = PathConfig { burn_in: 200, horizon: 5, paths: 2, ..Default::default() };
        let paths = simulate_garch(&g, &cfg).unwrap();
        // (I - beta) w = alpha0: w2 = 0.1 / 0.6, w1 = (0.2 + 0.2 w2) / 0.5
        let w2 = 0.1 / 0.6;
        let w1 = (0.2 + 0.2 * w2) / 0.5;
        for s in &paths[0].sigma2 {
            assert!((s[0] - w1).abs() < 1e-12 && (s[1] - w2).abs() < 1e-12);
        }
    }

    #[test]
    fn returns_are_symmetric() {
        let cfg = PathConfig { burn_in: 500, horizon: 100_000, paths: 1, seed: 4, ..Default::default() };
        let s = &simulate_garch(&pipeline_spec(), &cfg).unwrap()[0];
        assert_eq!(s.len(), 100_000);
        for i in 0..2 {
            // squared returns are serially dependent, so compare against a
            // 10x inflated iid error bar
            let (m, se) = mean_and_se(&s.x_coordinate(i));
            assert!(m.abs() < 5.0 * se * 10f64.sqrt(), "{m} ({se})");
        }
    }

    #[test]
    fn common_shock_recursion_matches_garch_definition() {
        let g = pipeline_spec();
        let cfg = PathConfig { burn_in: 0, horizon: 50, paths: 1, seed: 9, ..Default::default() };
        let s = &simulate_garch(&g, &cfg).unwrap()[0];
        for t in 1..50 {
            for i in 0..2 {
                let mut want = g.alpha0()[i];
                for j in i..2 {
                    want += g.alpha(i, j) * s.x[t - 1][j].powi(2) + g.beta(i, j) * s.sigma2[t - 1][j];
                }
                assert!((s.sigma2[t][i] - want).abs() < 1e-12 * want);
            }
        }
    }

    #[test]
    fn stable_volatility_stays_bounded() {
        let cfg = PathConfig { burn_in: 0, horizon: 10_000_000, paths: 1, seed: 1, ..Default::default() };
        let g = GarchSpec::new(vec![0.1], vec![0.05], vec![0.5]).unwrap();
        let s = &simulate_garch(&g, &cfg).unwrap()[0];
        assert!(s.sigma2.iter().all(|w| w[0].is_finite()));
    }

    #[test]
    fn shock_variants_share_entry_marginals() {
        let g = pipeline_spec();
        let (shared, plain) = (g.to_sre(), g.clone().with_common_shock(false).to_sre());
        let n = 200_000;
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let law = shared.a(i, j).unwrap();
            for s in [0.5, 1.0, 2.0] {
                let draw = |spec: &ModelSpec, seed: u64| {
                    let mut rng = stream(seed, Purpose::Oracle, 0);
                    let (mut a, mut b) = (vec![0.0; 4], vec![0.0; 2]);
                    (0..n)
                        .map(|_| {
                            spec.draw_into(&mut rng, &mut a, &mut b, None);
                            a[i * 2 + j].powf(s)
                        })
                        .collect::<Vec<f64>>()
                };
                let (m1, se1) = mean_and_se(&draw(&shared, 1));
                let (m2, se2) = mean_and_se(&draw(&plain, 2));
                let want = law.moment(s);
                assert!((m1 - want).abs() < 5.0 * se1 && (m2 - want).abs() < 5.0 * se2);
            }
        }
    }

    #[test]
    fn garch_root_is_finite_and_ordered() {
        let a1 = solve_alpha(&DistributionSpec::garch_entry(0.1, 0.5).unwrap()).unwrap();
        let a2 = solve_alpha(&DistributionSpec::garch_entry(0.3, 0.4).unwrap()).unwrap();
        assert!(a1 > a2 && a2 > 1.0);
    }
}
