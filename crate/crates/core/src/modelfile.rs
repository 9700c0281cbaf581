//! Line-oriented model files.
//!
//! ```text
//! # comments run to the end of the line
//! dim = 2
//! A[1][1] = lognormal(-0.5, 0.5)
//! A[1][2] = constant(1)
//! A[2][2] = lognormal(-1, 1)
//! B[1] = constant(1)
//! B[2] = constant(1)
//! ```
//!
//! Off-diagonal `A` entries default to `zero`. A GARCH(1,1) model is declared
//! with `garch.dim`, `garch.alpha0[i]`, `garch.alpha[i][j]`, `garch.beta[i][j]`
//! and optionally `garch.common_shock = true|false`; missing `alpha`/`beta`
//! entries are zero.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::garch::GarchSpec;
use crate::model::ModelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Option<ModelSpec>,
    pub garch: Option<GarchSpec>,
}

impl ModelFile {
    /// The declared recurrence, or the one induced by the GARCH section.
    pub fn recurrence(&self) -> Result<ModelSpec> {
        match (&self.model, &self.garch) {
            (Some(m), _) => Ok(m.clone()),
            (None, Some(g)) => Ok(g.to_sre()),
            (None, None) => Err(Error::InvalidInput("model file declares no model".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Dim,
    A(usize, usize),
    B(usize),
    GarchDim,
    GarchAlpha0(usize),
    GarchAlpha(usize, usize),
    GarchBeta(usize, usize),
    GarchCommonShock,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses `name`, `name[i]` or `name[i][j]`, returning the base name and 1-based indices.
fn split_key(key: &str) -> Option<(&str, Vec<usize>)> {
    let base_end = key.find('[').unwrap_or(key.len());
    let (base, mut rest) = key.split_at(base_end);
    let mut idx = Vec::new();
    while !rest.is_empty() {
        let close = rest.find(']')?;
        if !rest.starts_with('[') {
            return None;
        }
        idx.push(rest[1..close].parse().ok()?);
        rest = &rest[close + 1..];
    }
    Some((base, idx))
}

fn parse_key(raw: &str, line: usize) -> Result<Key> {
    let bad = || parse_err(line, format!("unknown key `{raw}`"));
    let (base, idx) = split_key(raw).ok_or_else(bad)?;
    if idx.contains(&0) {
        return Err(parse_err(line, format!("indices are 1-based in `{raw}`")));
    }
    let key = match (base, idx.as_slice()) {
        ("dim", []) => Key::Dim,
        ("A", [i, j]) => Key::A(i - 1, j - 1),
        ("B", [i]) => Key::B(i - 1),
        ("garch.dim", []) => Key::GarchDim,
        ("garch.alpha0", [i]) => Key::GarchAlpha0(i - 1),
        ("garch.alpha", [i, j]) => Key::GarchAlpha(i - 1, j - 1),
        ("garch.beta", [i, j]) => Key::GarchBeta(i - 1, j - 1),
        ("garch.common_shock", []) => Key::GarchCommonShock,
        _ => return Err(bad()),
    };
    Ok(key)
}

pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    let mut entries: BTreeMap<Key, (usize, String)> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let compact: String = content.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            continue;
        }
        let (k, v) = compact
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{}`", raw.trim())))?;
        let key = parse_key(k, line)?;
        if let Some((first, _)) = entries.insert(key, (line, v.to_string())) {
            return Err(parse_err(line, format!("`{k}` already set on line {first}")));
        }
    }

    let model = match entries.get(&Key::Dim) {
        Some((line, v)) => Some(build_model(&entries, parse_dim(v, *line)?)?),
        None => {
            if let Some((Key::A(..) | Key::B(..), (line, _))) = entries.iter().find(|(k, _)| matches!(k, Key::A(..) | Key::B(..))) {
                return Err(parse_err(*line, "`dim` must be declared"));
            }
            None
        }
    };
    let garch = match entries.get(&Key::GarchDim) {
        Some((line, v)) => Some(build_garch(&entries, parse_dim(v, *line)?)?),
        None => {
            if let Some((_, (line, _))) = entries.iter().find(|(k, _)| {
                matches!(k, Key::GarchAlpha0(_) | Key::GarchAlpha(..) | Key::GarchBeta(..) | Key::GarchCommonShock)
            }) {
                return Err(parse_err(*line, "`garch.dim` must be declared"));
            }
            None
        }
    };
    if model.is_none() && garch.is_none() {
        return Err(parse_err(0, "model file declares neither `dim` nor `garch.dim`"));
    }
    Ok(ModelFile { model, garch })
}

fn parse_dim(v: &str, line: usize) -> Result<usize> {
    match v.parse::<usize>() {
        Ok(d) if d > 0 => Ok(d),
        _ => Err(parse_err(line, format!("dimension must be a positive integer, got `{v}`"))),
    }
}

fn parse_literal(v: &str, line: usize) -> Result<DistributionSpec> {
    v.parse().map_err(|e: Error| match e {
        Error::Parse { message, .. } => parse_err(line, message),
        other => parse_err(line, other.to_string()),
    })
}

fn build_model(entries: &BTreeMap<Key, (usize, String)>, d: usize) -> Result<ModelSpec> {
    let mut a = vec![vec![None; d]; d];
    let mut b = vec![None; d];
    for (key, (line, v)) in entries {
        match *key {
            Key::A(i, j) => {
                if i >= d || j >= d {
                    return Err(parse_err(*line, format!("A[{}][{}] is outside dim = {d}", i + 1, j + 1)));
                }
                if v == "zero" {
                    if i == j {
                        return Err(parse_err(*line, format!("diagonal entry A[{0}][{0}] cannot be zero", i + 1)));
                    }
                } else {
                    a[i][j] = Some(parse_literal(v, *line)?);
                }
            }
            Key::B(i) => {
                if i >= d {
                    return Err(parse_err(*line, format!("B[{}] is outside dim = {d}", i + 1)));
                }
                if v == "zero" {
                    return Err(parse_err(*line, "`zero` is only allowed for off-diagonal A entries"));
                }
                b[i] = Some(parse_literal(v, *line)?);
            }
            _ => {}
        }
    }
    for i in 0..d {
        if a[i][i].is_none() {
            return Err(parse_err(0, format!("A[{0}][{0}] is not declared", i + 1)));
        }
    }
    let b = b
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| parse_err(0, format!("B[{}] is not declared", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    ModelSpec::new(a, b)
}

fn build_garch(entries: &BTreeMap<Key, (usize, String)>, d: usize) -> Result<GarchSpec> {
    let mut alpha0 = vec![None; d];
    let mut alpha = vec![0.0; d * d];
    let mut beta = vec![0.0; d * d];
    let mut common = true;
    let number = |v: &str, line: usize| v.parse::<f64>().map_err(|_| parse_err(line, format!("bad number `{v}`")));
    for (key, (line, v)) in entries {
        let line = *line;
        let out_of_range = || parse_err(line, format!("index outside garch.dim = {d}"));
        match *key {
            Key::GarchAlpha0(i) => *alpha0.get_mut(i).ok_or_else(out_of_range)? = Some(number(v, line)?),
            Key::GarchAlpha(i, j) | Key::GarchBeta(i, j) => {
                if i >= d || j >= d {
                    return Err(out_of_range());
                }
                let target = if matches!(key, Key::GarchAlpha(..)) { &mut alpha } else { &mut beta };
                target[i * d + j] = number(v, line)?;
            }
            Key::GarchCommonShock => {
                common = match v.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(parse_err(line, format!("expected true or false, got `{v}`"))),
                }
            }
            _ => {}
        }
    }
    let alpha0 = alpha0
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| parse_err(0, format!("garch.alpha0[{}] is not declared", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    Ok(GarchSpec::new(alpha0, alpha, beta)?.with_common_shock(common))
}

/// Writes `spec` in model-file syntax, listing every declared entry.
pub fn render_model(spec: &ModelSpec) -> String {
    let d = spec.dim();
    let mut out = format!("dim = {d}\n");
    for i in 0..d {
        for j in 0..d {
            if let Some(x) = spec.a(i, j) {
                let _ = writeln!(out, "A[{}][{}] = {x}", i + 1, j + 1);
            }
        }
    }
    for i in 0..d {
        let _ = writeln!(out, "B[{}] = {}", i + 1, spec.b(i));
    }
    out
}

pub fn render_garch(g: &GarchSpec) -> String {
    let d = g.dim();
    let mut out = format!("garch.dim = {d}\n");
    for (i, a0) in g.alpha0().iter().enumerate() {
        let _ = writeln!(out, "garch.alpha0[{}] = {a0}", i + 1);
    }
    for i in 0..d {
        for j in i..d {
            let _ = writeln!(out, "garch.alpha[{}][{}] = {}", i + 1, j + 1, g.alpha(i, j));
            let _ = writeln!(out, "garch.beta[{}][{}] = {}", i + 1, j + 1, g.beta(i, j));
        }
    }
    let _ = writeln!(out, "garch.common_shock = {}", g.common_shock());
    out
}
