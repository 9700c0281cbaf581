use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::goldie::goldie_constant;
use crate::error::{Error, Result};
use crate::model::{profile, ModelSpec, TailProfile};
use crate::simulate::{stationary_sample, u_sequence, PathConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantMethod {
    #[serde(rename = "goldie-direct")]
    GoldieDirect,
    #[serde(rename = "recursive")]
    Recursive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    /// 1-based.
    pub coordinate: usize,
    pub method: ConstantMethod,
    pub value: f64,
    pub std_error: f64,
    /// `u_k` used for propagation.
    pub u: Option<f64>,
    /// Coordinates the value was built from, starting with this one (1-based).
    pub chain: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub constants: Vec<ConstantEntry>,
}

/// `C_k = u_k C_{j0(k)}` for dominated `k`, Goldie's constant otherwise.
/// Coordinates are resolved from `d` down to 1; `j0(k) > k` whenever `k` is
/// dominated, so every source is available when it is needed.
pub fn constants_recursive(
    profile: &TailProfile,
    u_values: &[Option<Estimate>],
    goldie: &[Option<Estimate>],
) -> Result<ConstantsReport> {
    let order: Vec<usize> = (0..profile.dim()).rev().collect();
    constants_in_order(profile, u_values, goldie, &order)
}

pub(crate) fn constants_in_order(
    profile: &TailProfile,
    u_values: &[Option<Estimate>],
    goldie: &[Option<Estimate>],
    order: &[usize],
) -> Result<ConstantsReport> {
    let d = profile.dim();
    if u_values.len() != d || goldie.len() != d {
        return Err(Error::InvalidInput(format!("expected {d} u values and {d} Goldie constants")));
    }
    let mut done: BTreeMap<usize, ConstantEntry> = BTreeMap::new();
    for &k in order {
        resolve(profile, u_values, goldie, k, &mut done)?;
    }
    Ok(ConstantsReport { constants: done.into_values().collect() })
}

fn resolve(
    profile: &TailProfile,
    u_values: &[Option<Estimate>],
    goldie: &[Option<Estimate>],
    k: usize,
    done: &mut BTreeMap<usize, ConstantEntry>,
) -> Result<()> {
    if done.contains_key(&k) {
        return Ok(());
    }
    let entry = if profile.is_dominated(k) {
        let source = profile.j0[k];
        let u = u_values[k].ok_or(Error::MissingU(k + 1))?;
        resolve(profile, u_values, goldie, source, done)?;
        let base = &done[&source];
        let value = u.value * base.value;
        let std_error = (u.value * base.std_error).hypot(base.value * u.std_error);
        let mut chain = vec![k + 1];
        chain.extend(&base.chain);
        ConstantEntry { coordinate: k + 1, method: ConstantMethod::Recursive, value, std_error, u: Some(u.value), chain }
    } else {
        let g = goldie[k].ok_or(Error::MissingGoldie(k + 1))?;
        ConstantEntry {
            coordinate: k + 1,
            method: ConstantMethod::GoldieDirect,
            value: g.value,
            std_error: g.std_error,
            u: None,
            chain: vec![k + 1],
        }
    };
    if !(entry.value > 0.0) {
        return Err(Error::InvalidInput(format!("constant of coordinate {} is not positive", k + 1)));
    }
    done.insert(k, entry);
    Ok(())
}

/// Estimates every ingredient by Monte Carlo and runs [`constants_recursive`]:
/// Goldie constants from one stationary batch, `u_k` as the last point of a
/// u-sequence of length `s_max`.
pub fn estimate_constants(spec: &ModelSpec, config: &PathConfig, s_max: usize) -> Result<ConstantsReport> {
    let profile = profile(spec)?;
    let d = spec.dim();
    let needs_goldie = (0..d).any(|k| !profile.is_dominated(k));
    let sample = if needs_goldie { stationary_sample(spec, config)? } else { Vec::new() };
    let mut u_values = vec![None; d];
    let mut goldie = vec![None; d];
    for k in 0..d {
        if profile.is_dominated(k) {
            let seq = u_sequence(spec, k, s_max, config)?;
            let last = seq.points.last().expect("s_max >= 1");
            u_values[k] = Some(Estimate { value: last.estimate, std_error: last.std_error });
        } else {
            let g = goldie_constant(spec, &profile, k, &sample, config.seed)?;
            goldie[k] = Some(Estimate { value: g.value, std_error: g.std_error });
        }
    }
    constants_recursive(&profile, &u_values, &goldie)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{tilde_alpha, DepGraph};
    use proptest::prelude::*;

    fn est(v: f64) -> Option<Estimate> {
        Some(Estimate { value: v, std_error: 0.1 * v })
    }

    fn example_profile() -> TailProfile {
        let mut p = vec![false; 25];
        for (i, j) in [(0, 1), (0, 4), (1, 3), (2, 4)] {
            p[i * 5 + j] = true;
        }
        let graph = DepGraph::from_pattern(5, &p).unwrap();
        tilde_alpha(&[5.0, 3.0, 2.0, 1.0, 4.0], &graph).unwrap()
    }

    #[test]
    fn example_pattern_propagates_from_coordinate_four() {
        let prof = example_profile();
        let u = [est(2.0), est(3.0), None, None, None];
        let g = [None, None, est(5.0), est(7.0), est(11.0)];
        let r = constants_recursive(&prof, &u, &g).unwrap();
        let methods: Vec<ConstantMethod> = r.constants.iter().map(|c| c.method).collect();
        use ConstantMethod::*;
        assert_eq!(methods, vec![Recursive, Recursive, GoldieDirect, GoldieDirect, GoldieDirect]);
        assert_eq!(r.constants[0].value, 14.0);
        assert_eq!(r.constants[1].value, 21.0);
        assert_eq!(r.constants[0].chain, vec![1, 4]);
        assert_eq!(r.constants[4].value, 11.0);
        // relative errors add in quadrature
        assert!((r.constants[0].std_error / 14.0 - 0.1 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn four_dimensional_full_triangle() {
        // alpha_3 < alpha_4 < alpha_2 < alpha_1 with every link present
        let full: Vec<bool> = (0..16).map(|k| k / 4 <= k % 4).collect();
        let graph = DepGraph::from_pattern(4, &full).unwrap();
        let prof = tilde_alpha(&[4.0, 3.0, 1.0, 2.0], &graph).unwrap();
        let u = [est(2.0), est(3.0), None, None];
        let g = [None, None, est(5.0), est(7.0)];
        let r = constants_recursive(&prof, &u, &g).unwrap();
        assert_eq!(r.constants[0].value, 10.0);
        assert_eq!(r.constants[1].value, 15.0);
        assert_eq!(r.constants[3].method, ConstantMethod::GoldieDirect);
    }

    #[test]
    fn diagonal_model_uses_goldie_everywhere() {
        let graph = DepGraph::from_pattern(3, &[false; 9]).unwrap();
        let prof = tilde_alpha(&[1.0, 2.0, 3.0], &graph).unwrap();
        let g = [est(1.0), est(2.0), est(3.0)];
        let r = constants_recursive(&prof, &[None, None, None], &g).unwrap();
        assert!(r.constants.iter().all(|c| c.method == ConstantMethod::GoldieDirect && c.u.is_none()));
    }

    #[test]
    fn missing_inputs_are_reported() {
        let prof = example_profile();
        let g = [None, None, est(5.0), est(7.0), est(11.0)];
        assert_eq!(
            constants_recursive(&prof, &[est(1.0), None, None, None, None], &g).unwrap_err(),
            Error::MissingU(2)
        );
        let u = [est(2.0), est(3.0), None, None, None];
        assert_eq!(
            constants_recursive(&prof, &u, &[None, None, est(5.0), None, est(1.0)]).unwrap_err(),
            Error::MissingGoldie(4)
        );
    }

    proptest! {
        #[test]
        fn processing_order_does_not_matter(order in Just((0..5usize).collect::<Vec<_>>()).prop_shuffle()) {
            let prof = example_profile();
            let u = [est(2.0), est(3.0), None, None, None];
            let g = [None, None, est(5.0), est(7.0), est(11.0)];
            let reference = constants_recursive(&prof, &u, &g).unwrap();
            prop_assert_eq!(constants_in_order(&prof, &u, &g, &order).unwrap(), reference);
        }
    }
}
