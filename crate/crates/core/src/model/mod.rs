//! Model declaration and the deterministic theory built on it: dependence
//! relations, tail indices, checks of the standing conditions and stationarity.

mod depgraph;
mod indices;
mod lyapunov;
mod validate;

pub use depgraph::DepGraph;
pub use indices::{
    check_distinct, profile, solve_alpha, tilde_alpha, tilde_alpha_by_reach, tilde_alpha_by_recursion,
    TailProfile, DISTINCT_TOL, ROOT_CAP,
};
pub use lyapunov::{
    lyapunov_mc, lyapunov_sufficient, LyapunovEstimate, LyapunovSufficiency,
};
pub use validate::{validate, ConditionCheck, ValidationReport};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

/// How the shocks behind `garch_entry` coefficients are shared within one draw of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockCoupling {
    /// Every entry draws its own base variate.
    #[default]
    Independent,
    /// All `garch_entry` coefficients in column `j` use the same `Z_j`, as in
    /// `A_t = alpha diag(Z^2) + beta`.
    ColumnShared,
}

/// `W_t = A_t W_{t-1} + B_t` with i.i.d. `(A_t, B_t)`. Coordinates are 0-based
/// in the API and 1-based in files and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    d: usize,
    /// Row-major `d x d`; `None` is a structural zero.
    a: Vec<Option<DistributionSpec>>,
    b: Vec<DistributionSpec>,
    coupling: ShockCoupling,
}

impl ModelSpec {
    /// Checks shape and that every diagonal entry is declared. The standing
    /// conditions themselves are the job of [`validate`].
    pub fn new(
        a: Vec<Vec<Option<DistributionSpec>>>,
        b: Vec<DistributionSpec>,
    ) -> Result<Self> {
        let d = b.len();
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if a.len() != d || a.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidInput(format!("A must be {d} x {d}")));
        }
        for (i, row) in a.iter().enumerate() {
            if row[i].is_none() {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry A[{}][{}] must be declared",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(Self {
            d,
            a: a.into_iter().flatten().collect(),
            b,
            coupling: ShockCoupling::Independent,
        })
    }

    /// Diagonal model `A = diag(diag)`.
    pub fn diagonal(diag: Vec<DistributionSpec>, b: Vec<DistributionSpec>) -> Result<Self> {
        let d = diag.len();
        let a = (0..d)
            .map(|i| (0..d).map(|j| (i == j).then_some(diag[i])).collect())
            .collect();
        Self::new(a, b)
    }

    pub fn with_coupling(mut self, coupling: ShockCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coupling(&self) -> ShockCoupling {
        self.coupling
    }

    pub fn a(&self, i: usize, j: usize) -> Option<&DistributionSpec> {
        self.a[i * self.d + j].as_ref()
    }

    pub fn b(&self, i: usize) -> &DistributionSpec {
        &self.b[i]
    }

    pub fn diag(&self, i: usize) -> &DistributionSpec {
        self.a(i, i).expect("diagonal entries are always declared")
    }

    /// `A_ij` positive in the sense `P(A_ij > 0) > 0`.
    pub fn is_positive(&self, i: usize, j: usize) -> bool {
        self.a(i, j).is_some_and(|x| x.is_positive())
    }

    /// Boolean `d x d` pattern of positive entries (row-major).
    pub fn pattern(&self) -> Vec<bool> {
        (0..self.d * self.d)
            .map(|k| self.is_positive(k / self.d, k % self.d))
            .collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.d).all(|i| (0..i).all(|j| !self.is_positive(i, j)))
    }

    /// Entrywise `E A^s` (zero for structural zeros), row-major.
    pub fn moment_matrix(&self, s: f64) -> Vec<f64> {
        self.a
            .iter()
            .map(|e| e.map_or(0.0, |x| x.moment(s)))
            .collect()
    }

    /// Draws one `(A, B)` pair into row-major `a` and `b`. With column-shared
    /// shocks the per-column normals are written to `shocks` when given.
    pub fn draw_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        a: &mut [f64],
        b: &mut [f64],
        shocks: Option<&mut [f64]>,
    ) {
        let d = self.d;
        match self.coupling {
            ShockCoupling::Independent => {
                for (slot, entry) in a.iter_mut().zip(&self.a) {
                    *slot = entry.map_or(0.0, |x| x.draw(rng));
                }
                if let Some(z) = shocks {
                    for zj in z.iter_mut() {
                        *zj = rng.sample(StandardNormal);
                    }
                }
            }
            ShockCoupling::ColumnShared => {
                let mut local = [0.0f64; 16];
                let mut heap;
                let z: &mut [f64] = match shocks {
                    Some(z) => z,
                    None if d <= 16 => &mut local[..d],
                    None => {
                        heap = vec![0.0; d];
                        &mut heap
                    }
                };
                for zj in z.iter_mut() {
                    *zj = rng.sample(StandardNormal);
                }
                for (k, (slot, entry)) in a.iter_mut().zip(&self.a).enumerate() {
                    *slot = match entry {
                        None => 0.0,
                        Some(x @ DistributionSpec::GarchEntry { .. }) => x.sample(z[k % d]),
                        Some(x) => x.draw(rng),
                    };
                }
            }
        }
        for (slot, dist) in b.iter_mut().zip(&self.b) {
            *slot = dist.draw(rng);
        }
    }

    /// `(I - E A)^{-1} E B`, the stationary mean when it exists.
    pub fn stationary_mean(&self) -> Option<Vec<f64>> {
        let d = self.d;
        if !self.is_upper_triangular() {
            return None;
        }
        let ea = self.moment_matrix(1.0);
        let eb: Vec<f64> = self.b.iter().map(|x| x.mean()).collect();
        let mut w = vec![0.0; d];
        for i in (0..d).rev() {
            let mut rhs = eb[i];
            for j in i + 1..d {
                rhs += ea[i * d + j] * w[j];
            }
            let denom = 1.0 - ea[i * d + i];
            if !(denom > 0.0) || !rhs.is_finite() {
                return None;
            }
            w[i] = rhs / denom;
        }
        Some(w)
    }
}
