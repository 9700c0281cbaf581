//! Nonnegative scalar laws for the entries of `A` and `B`.
//!
//! Sampling is by inverse or direct transform of a single base variate, so a
//! draw is a deterministic function of that variate. Fractional moments are
//! closed form where one exists; `garch_entry` uses Gauss-Hermite quadrature.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::default_rule;

/// Law of the base variate consumed by [`DistributionSpec::sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseLaw {
    /// uniform on (0, 1)
    Uniform,
    StandardNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Constant { c: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Pareto { a: f64, xm: f64 },
    Uniform { lo: f64, hi: f64 },
    /// `a * Z^2 + b` with `Z ~ N(0, 1)`.
    GarchEntry { a: f64, b: f64 },
}

fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}

impl DistributionSpec {
    pub fn constant(c: f64) -> Result<Self> {
        check(c >= 0.0, "c", c, "constant must be >= 0")?;
        Ok(Self::Constant { c })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        check(true, "mu", mu, "must be finite")?;
        check(sigma > 0.0, "sigma", sigma, "sigma must be > 0")?;
        Ok(Self::Lognormal { mu, sigma })
    }

    pub fn pareto(a: f64, xm: f64) -> Result<Self> {
        check(a > 0.0, "a", a, "tail index must be > 0")?;
        check(xm > 0.0, "xm", xm, "scale must be > 0")?;
        Ok(Self::Pareto { a, xm })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        check(lo >= 0.0, "lo", lo, "lower bound must be >= 0")?;
        check(hi > lo, "hi", hi, "upper bound must exceed lower bound")?;
        Ok(Self::Uniform { lo, hi })
    }

    pub fn garch_entry(a: f64, b: f64) -> Result<Self> {
        check(a >= 0.0, "a", a, "must be >= 0")?;
        check(b >= 0.0, "b", b, "must be >= 0")?;
        check(a + b > 0.0, "a+b", a + b, "a + b must be > 0")?;
        Ok(Self::GarchEntry { a, b })
    }

    /// Re-checks parameter invariants, e.g. after deserialization.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Constant { c } => Self::constant(c),
            Self::Lognormal { mu, sigma } => Self::lognormal(mu, sigma),
            Self::Pareto { a, xm } => Self::pareto(a, xm),
            Self::Uniform { lo, hi } => Self::uniform(lo, hi),
            Self::GarchEntry { a, b } => Self::garch_entry(a, b),
        }
    }

    pub fn base_law(&self) -> BaseLaw {
        match self {
            Self::Lognormal { .. } | Self::GarchEntry { .. } => BaseLaw::StandardNormal,
            _ => BaseLaw::Uniform,
        }
    }

    /// Transforms a base variate drawn from [`Self::base_law`].
    pub fn sample(&self, base: f64) -> f64 {
        match *self {
            Self::Constant { c } => c,
            Self::Lognormal { mu, sigma } => (mu + sigma * base).exp(),
            Self::Pareto { a, xm } => xm * (1.0 - base).powf(-1.0 / a),
            Self::Uniform { lo, hi } => lo + (hi - lo) * base,
            Self::GarchEntry { a, b } => a * base * base + b,
        }
    }

    pub fn draw_base<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.base_law() {
            BaseLaw::Uniform => rng.random::<f64>(),
            BaseLaw::StandardNormal => rng.sample(StandardNormal),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = self.draw_base(rng);
        self.sample(u)
    }

    /// `E[X^s]`; `+inf` when the moment diverges.
    pub fn moment(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        if s == 0.0 {
            return 1.0;
        }
        match *self {
            Self::Constant { c } => c.powf(s),
            Self::Lognormal { mu, sigma } => (mu * s + 0.5 * sigma * sigma * s * s).exp(),
            Self::Pareto { a, xm } => {
                if s < a {
                    a * xm.powf(s) / (a - s)
                } else {
                    f64::INFINITY
                }
            }
            Self::Uniform { lo, hi } => {
                (hi.powf(s + 1.0) - lo.powf(s + 1.0)) / ((s + 1.0) * (hi - lo))
            }
            Self::GarchEntry { a, b } => {
                if a == 0.0 {
                    b.powf(s)
                } else if b == 0.0 {
                    // E|Z|^{2s} = 2^s Gamma(s + 1/2) / Gamma(1/2)
                    (s * (a * 2.0).ln() + ln_gamma(s + 0.5) - ln_gamma(0.5)).exp()
                } else {
                    default_rule().expect(|z| (a * z * z + b).powf(s))
                }
            }
        }
    }

    /// `E[X^s log X]`, the derivative of [`Self::moment`] in `s`.
    pub fn log_moment(&self, s: f64) -> Result<f64> {
        debug_assert!(s >= 0.0);
        let m = self.moment(s);
        if m.is_infinite() {
            return Err(Error::Divergent(s));
        }
        let v = match *self {
            Self::Constant { c } => {
                if c > 0.0 {
                    c.powf(s) * c.ln()
                } else if s > 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::Lognormal { mu, sigma } => (mu + sigma * sigma * s) * m,
            Self::Pareto { a, xm } => m * (xm.ln() + 1.0 / (a - s)),
            Self::Uniform { lo, hi } => {
                let lo_term = if lo > 0.0 { lo.powf(s + 1.0) * lo.ln() } else { 0.0 };
                (hi.powf(s + 1.0) * hi.ln() - lo_term) / ((s + 1.0) * (hi - lo)) - m / (s + 1.0)
            }
            Self::GarchEntry { a, b } => {
                if a == 0.0 {
                    b.powf(s) * b.ln()
                } else if b == 0.0 {
                    m * ((2.0 * a).ln() + digamma(s + 0.5))
                } else {
                    default_rule().expect(|z| {
                        let x = a * z * z + b;
                        x.powf(s) * x.ln()
                    })
                }
            }
        };
        Ok(v)
    }

    /// Lattice law of `log X`. Only point masses are lattice among the built-in kinds.
    pub fn is_arithmetic(&self) -> bool {
        match *self {
            Self::Constant { .. } => true,
            Self::GarchEntry { a, .. } => a == 0.0,
            _ => false,
        }
    }

    /// `P(X > 0) > 0`.
    pub fn is_positive(&self) -> bool {
        !matches!(*self, Self::Constant { c } if c == 0.0)
    }

    /// `P(X = 0) = 1`.
    pub fn is_zero(&self) -> bool {
        !self.is_positive()
    }

    /// Upper end of the finite-moment range, if any.
    pub fn moment_limit(&self) -> Option<f64> {
        match *self {
            Self::Pareto { a, .. } => Some(a),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Constant { c } => write!(f, "constant({c})"),
            Self::Lognormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            Self::Pareto { a, xm } => write!(f, "pareto({a},{xm})"),
            Self::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            Self::GarchEntry { a, b } => write!(f, "garch_entry({a},{b})"),
        }
    }
}

fn literal_err(message: String) -> Error {
    Error::Parse { line: 0, message }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `name(arg, ...)`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let open = compact
            .find('(')
            .ok_or_else(|| literal_err(format!("expected `name(args)`, got `{s}`")))?;
        if !compact.ends_with(')') {
            return Err(literal_err(format!("missing `)` in `{s}`")));
        }
        let name = &compact[..open];
        let inner = &compact[open + 1..compact.len() - 1];
        let args = inner
            .split(',')
            .map(|a| {
                a.parse::<f64>()
                    .map_err(|_| literal_err(format!("bad number `{a}` in `{s}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let want = if name == "constant" { 1 } else { 2 };
        if args.len() != want {
            return Err(literal_err(format!(
                "`{name}` takes {want} argument(s), got {}",
                args.len()
            )));
        }
        match name {
            "constant" => Self::constant(args[0]),
            "lognormal" => Self::lognormal(args[0], args[1]),
            "pareto" => Self::pareto(args[0], args[1]),
            "uniform" => Self::uniform(args[0], args[1]),
            "garch_entry" => Self::garch_entry(args[0], args[1]),
            other => Err(literal_err(format!("unknown distribution `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussHermite;
    use crate::rng::{stream, Purpose};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    fn kinds() -> Vec<DistributionSpec> {
        vec![
            DistributionSpec::constant(1.7).unwrap(),
            DistributionSpec::lognormal(-1.0, 1.0).unwrap(),
            DistributionSpec::lognormal(0.3, 0.4).unwrap(),
            DistributionSpec::pareto(3.0, 1.0).unwrap(),
            DistributionSpec::pareto(5.0, 0.5).unwrap(),
            DistributionSpec::uniform(0.0, 2.0).unwrap(),
            DistributionSpec::uniform(0.5, 1.5).unwrap(),
            DistributionSpec::garch_entry(0.1, 0.8).unwrap(),
            DistributionSpec::garch_entry(0.05, 0.0).unwrap(),
            DistributionSpec::garch_entry(0.0, 0.3).unwrap(),
        ]
    }

    #[test]
    fn sample_examples() {
        let c = DistributionSpec::constant(2.0).unwrap();
        assert_eq!(c.sample(0.123), 2.0);
        let p = DistributionSpec::pareto(1.0, 1.0).unwrap();
        assert_eq!(p.sample(0.5), 2.0);
        let l = DistributionSpec::lognormal(-1.0, 1.0).unwrap();
        assert!((l.sample(0.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
        let g = DistributionSpec::garch_entry(0.1, 0.8).unwrap();
        assert!((g.sample(2.0) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn moment_examples() {
        let l = DistributionSpec::lognormal(-1.0, 1.0).unwrap();
        assert!(close(l.moment(2.0), 1.0, 1e-15));
        let p = DistributionSpec::pareto(3.0, 1.0).unwrap();
        assert!(close(p.moment(2.0), 3.0, 1e-15));
        assert_eq!(p.moment(3.0), f64::INFINITY);
        assert_eq!(p.moment(4.0), f64::INFINITY);
        for k in kinds() {
            assert_eq!(k.moment(0.0), 1.0, "{k}");
        }
    }

    #[test]
    fn log_moment_examples() {
        let c = DistributionSpec::constant(2.0).unwrap();
        assert!(close(c.log_moment(0.0).unwrap(), std::f64::consts::LN_2, 1e-15));
        let l = DistributionSpec::lognormal(-1.0, 1.0).unwrap();
        assert!(close(l.log_moment(0.0).unwrap(), -1.0, 1e-15));
        assert!(close(l.log_moment(2.0).unwrap(), 1.0, 1e-14));
        let p = DistributionSpec::pareto(3.0, 1.0).unwrap();
        assert_eq!(p.log_moment(3.0), Err(Error::Divergent(3.0)));
        // E log U for U ~ uniform(0, 2) is ln 2 - 1
        let u = DistributionSpec::uniform(0.0, 2.0).unwrap();
        assert!(close(u.log_moment(0.0).unwrap(), std::f64::consts::LN_2 - 1.0, 1e-14));
    }

    #[test]
    fn arithmetic_examples() {
        assert!(DistributionSpec::constant(1.5).unwrap().is_arithmetic());
        assert!(!DistributionSpec::lognormal(0.0, 1.0).unwrap().is_arithmetic());
        assert!(DistributionSpec::garch_entry(0.0, 0.3).unwrap().is_arithmetic());
        assert!(!DistributionSpec::garch_entry(0.1, 0.3).unwrap().is_arithmetic());
        assert!(!DistributionSpec::uniform(0.0, 1.0).unwrap().is_arithmetic());
        assert!(!DistributionSpec::pareto(2.0, 1.0).unwrap().is_arithmetic());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DistributionSpec::constant(-1.0).is_err());
        assert!(DistributionSpec::lognormal(0.0, 0.0).is_err());
        assert!(DistributionSpec::pareto(0.0, 1.0).is_err());
        assert!(DistributionSpec::pareto(1.0, -1.0).is_err());
        assert!(DistributionSpec::uniform(1.0, 1.0).is_err());
        assert!(DistributionSpec::uniform(-0.5, 1.0).is_err());
        assert!(DistributionSpec::garch_entry(0.0, 0.0).is_err());
        assert!(DistributionSpec::garch_entry(-0.1, 1.0).is_err());
        assert!(DistributionSpec::lognormal(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn literal_grammar() {
        let cases = [
            ("constant(2)", DistributionSpec::Constant { c: 2.0 }),
            ("lognormal( -1 , 1 )", DistributionSpec::Lognormal { mu: -1.0, sigma: 1.0 }),
            ("pareto(1.5,1)", DistributionSpec::Pareto { a: 1.5, xm: 1.0 }),
            ("uniform(0,2.5)", DistributionSpec::Uniform { lo: 0.0, hi: 2.5 }),
            ("garch_entry(0.1, 0.8)", DistributionSpec::GarchEntry { a: 0.1, b: 0.8 }),
        ];
        for (text, want) in cases {
            let got: DistributionSpec = text.parse().unwrap();
            assert_eq!(got, want);
            assert_eq!(got.to_string().parse::<DistributionSpec>().unwrap(), want);
        }
        for bad in ["gamma(1,2)", "constant", "pareto(1)", "uniform(2,1)", "lognormal(0,x)"] {
            assert!(bad.parse::<DistributionSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn moments_are_log_convex() {
        for k in kinds() {
            let hi = k.moment_limit().unwrap_or(12.0).min(12.0);
            let grid: Vec<f64> = (0..25).map(|i| hi * i as f64 / 25.0).collect();
            for &s1 in &grid {
                for &s2 in &grid {
                    let mid = k.moment(0.5 * (s1 + s2));
                    let prod = k.moment(s1) * k.moment(s2);
                    assert!(mid * mid <= prod * (1.0 + 1e-10), "{k} at {s1}, {s2}");
                }
            }
        }
    }

    #[test]
    fn central_difference_matches_log_moment() {
        for k in kinds() {
            let hi = k.moment_limit().map(|a| a * 0.8).unwrap_or(6.0);
            for i in 1..10 {
                let s = hi * i as f64 / 10.0;
                let h = 1e-5 * (1.0 + s);
                let fd = (k.moment(s + h) - k.moment(s - h)) / (2.0 * h);
                let lm = k.log_moment(s).unwrap();
                let scale = lm.abs().max(1e-3 * k.moment(s));
                assert!((fd - lm).abs() <= 1e-4 * scale, "{k} at s = {s}: fd {fd} vs {lm}");
            }
        }
    }

    #[test]
    fn garch_quadrature_is_converged() {
        let fine = GaussHermite::new(400);
        for (a, b) in [(0.1, 0.8), (0.1, 0.5), (0.3, 0.4), (0.05, 0.2), (1.0, 1.0)] {
            let g = DistributionSpec::garch_entry(a, b).unwrap();
            for s in [0.5, 1.0, 2.5, 3.1, 6.25, 10.1, 20.0] {
                let coarse = g.moment(s);
                let refined = fine.expect(|z| (a * z * z + b).powf(s));
                assert!(close(coarse, refined, 1e-8), "({a},{b}) s={s}: {coarse} vs {refined}");
            }
        }
    }

    #[test]
    fn garch_integer_moments_closed_form() {
        // E(aZ^2 + b) = a + b, E(aZ^2 + b)^2 = 3a^2 + 2ab + b^2
        let (a, b) = (0.3, 0.4);
        let g = DistributionSpec::garch_entry(a, b).unwrap();
        assert!(close(g.moment(1.0), a + b, 1e-13));
        assert!(close(g.moment(2.0), 3.0 * a * a + 2.0 * a * b + b * b, 1e-13));
        let g0 = DistributionSpec::garch_entry(0.05, 0.0).unwrap();
        assert!(close(g0.moment(2.0), 3.0 * 0.05 * 0.05, 1e-12));
    }

    #[test]
    fn monte_carlo_matches_moments() {
        let n = 1_000_000;
        let cases: Vec<(DistributionSpec, Vec<f64>)> = vec![
            (DistributionSpec::lognormal(-1.0, 1.0).unwrap(), vec![0.5, 1.0, 1.5]),
            (DistributionSpec::pareto(6.0, 1.0).unwrap(), vec![0.5, 1.0, 2.0]),
            (DistributionSpec::uniform(0.2, 1.3).unwrap(), vec![0.5, 2.0, 3.7]),
            (DistributionSpec::garch_entry(0.1, 0.8).unwrap(), vec![0.5, 1.5, 3.0]),
            (DistributionSpec::garch_entry(0.05, 0.0).unwrap(), vec![0.25, 1.0]),
            (DistributionSpec::constant(0.7).unwrap(), vec![1.0, 2.0]),
        ];
        for (idx, (dist, powers)) in cases.into_iter().enumerate() {
            let mut rng = stream(11, Purpose::Oracle, idx as u64);
            let xs: Vec<f64> = (0..n).map(|_| dist.draw(&mut rng)).collect();
            assert!(xs.iter().all(|&x| x >= 0.0));
            for s in powers {
                let vals: Vec<f64> = xs.iter().map(|x| x.powf(s)).collect();
                let (mean, se) = crate::rng::mean_and_se(&vals);
                let want = dist.moment(s);
                let tol = 5.0 * se.max(1e-12);
                assert!((mean - want).abs() <= tol, "{dist} s={s}: {mean} vs {want} (se {se})");
            }
        }
    }
}
