#![allow(dead_code)]

use triax::distributions::DistributionSpec;
use triax::garch::GarchSpec;
use triax::model::ModelSpec;
use triax::modelfile::parse_model_file;

pub fn ln(mu: f64, sigma: f64) -> DistributionSpec {
    DistributionSpec::lognormal(mu, sigma).unwrap()
}

pub fn c(x: f64) -> DistributionSpec {
    DistributionSpec::constant(x).unwrap()
}

pub fn load(text: &str) -> ModelSpec {
    parse_model_file(text).unwrap().recurrence().unwrap()
}

pub fn bivariate() -> ModelSpec {
    load(include_str!("../../models/bivariate.model"))
}

pub fn pattern5() -> ModelSpec {
    load(include_str!("../../models/pattern5.model"))
}

pub fn pipeline_garch() -> GarchSpec {
    parse_model_file(include_str!("../../models/garch2.model")).unwrap().garch.unwrap()
}

/// Full upper triangle with marginal indices (3, 4, 2).
pub fn full_triangle() -> ModelSpec {
    let o = || Some(ln(-1.0, 0.5));
    ModelSpec::new(
        vec![
            vec![Some(ln(-1.5, 1.0)), o(), o()],
            vec![None, Some(ln(-1.0, 1.0 / 2f64.sqrt())), o()],
            vec![None, None, Some(ln(-1.0, 1.0))],
        ],
        vec![c(1.0); 3],
    )
    .unwrap()
}

pub fn scalar() -> ModelSpec {
    ModelSpec::diagonal(vec![ln(-1.0, 1.0)], vec![c(1.0)]).unwrap()
}

/// Two independent coordinates with non-lognormal diagonals.
pub fn mixed_diagonal() -> ModelSpec {
    ModelSpec::diagonal(
        vec![DistributionSpec::uniform(0.0, 1.8).unwrap(), DistributionSpec::pareto(4.0, 0.6).unwrap()],
        vec![DistributionSpec::uniform(0.5, 1.5).unwrap(), c(1.0)],
    )
    .unwrap()
}

pub fn fleet() -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("scalar", scalar()),
        ("bivariate", bivariate()),
        ("pattern5", pattern5()),
        ("full_triangle", full_triangle()),
        ("mixed_diagonal", mixed_diagonal()),
        ("garch2", pipeline_garch().to_sre()),
    ]
}
