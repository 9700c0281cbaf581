//! Gauss-Hermite quadrature for expectations of functions of a standard normal.
//!
//! Nodes are the roots of the orthonormal Hermite polynomial, located by a
//! sign scan and bisection on its three-term recurrence.

use std::sync::OnceLock;

/// Default rule size for `garch_entry` moments.
pub const DEFAULT_NODES: usize = 200;

#[derive(Debug, Clone)]
pub struct GaussHermite {
    /// Abscissas for the weight exp(-x^2).
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Orthonormal Hermite values `(p_n(z), p_{n-1}(z))` for the weight `exp(-z^2)`.
fn hermite_pair(n: usize, z: f64) -> (f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

impl GaussHermite {
    /// Builds the `n`-point rule. Positive roots are bracketed by a sign scan
    /// finer than the smallest root gap, then bisected to full precision.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let nf = n as f64;
        let top = (2.0 * nf + 1.0).sqrt() + 1.0;
        let step = std::f64::consts::PI / (2.0 * nf + 1.0).sqrt() / 32.0;
        let mut roots = Vec::with_capacity(n / 2);
        let mut hi = top;
        let mut f_hi = hermite_pair(n, hi).0;
        while roots.len() < n / 2 {
            let lo = (hi - step).max(step * 0.5);
            let f_lo = hermite_pair(n, lo).0;
            if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
                let (mut a, mut b, fb) = (lo, hi, f_hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    let fm = hermite_pair(n, mid).0;
                    if fm.signum() == fb.signum() && fm != 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            assert!(lo > step * 0.5 || roots.len() == n / 2, "Gauss-Hermite root scan missed a root");
            hi = lo;
            f_hi = f_lo;
        }
        let weight = |z: f64| {
            let pp = (2.0 * nf).sqrt() * hermite_pair(n, z).1;
            2.0 / (pp * pp)
        };
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for (i, &z) in roots.iter().enumerate() {
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = weight(z);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            w[n / 2] = weight(0.0);
        }
        Self { nodes: x, weights: w }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// E[f(Z)] for Z ~ N(0, 1).
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let scale = std::f64::consts::PI.sqrt().recip();
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(std::f64::consts::SQRT_2 * x);
        }
        acc * scale
    }
}

/// Shared 200-node rule.
pub fn default_rule() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(DEFAULT_NODES))
}
