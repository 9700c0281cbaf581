use super::Realization;
use crate::error::{Error, Result};
use crate::model::DepGraph;

/// Largest dimension accepted by the path enumerations.
pub const ENUM_MAX_DIM: usize = 8;
/// Largest number of factors accepted by the path enumerations.
pub const ENUM_MAX_STEPS: usize = 12;

const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;

/// Row `i` of `A_{-start}^{(0)?} A_{-start-1} ... A_{-start-len+1}` as a
/// mantissa vector plus a natural-log scale.
fn row_product(real: &Realization, i: usize, start: usize, len: usize, strip_first_diag: bool) -> (Vec<f64>, f64) {
    let d = real.dim();
    assert!(start + len <= real.window(), "product reaches past the stored window");
    let mut row = vec![0.0; d];
    row[i] = 1.0;
    let mut next = vec![0.0; d];
    let mut log_scale = 0.0;
    for p in start..start + len {
        let a = real.a(p);
        for (j, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..=j {
                if strip_first_diag && p == start && k == j {
                    continue;
                }
                acc += row[k] * a[k * d + j];
            }
            *slot = acc;
        }
        std::mem::swap(&mut row, &mut next);
        let peak = row.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 && !(RESCALE_LO..=RESCALE_HI).contains(&peak) {
            row.iter_mut().for_each(|x| *x /= peak);
            log_scale += peak.ln();
        }
    }
    (row, log_scale)
}

fn unscale(row: Vec<f64>, log_scale: f64) -> Vec<f64> {
    if log_scale == 0.0 {
        return row;
    }
    row.into_iter().map(|x| if x == 0.0 { 0.0 } else { (x.ln() + log_scale).exp() }).collect()
}

/// Row `i` of `Pi_s = A_0 A_{-1} ... A_{-s+1}`.
pub fn pi_row(real: &Realization, i: usize, s: usize) -> Vec<f64> {
    let (row, scale) = row_product(real, i, 0, s, false);
    unscale(row, scale)
}

/// `pi_ij(s)`, the `(i, j)` entry of `Pi_s`. Panics when `s` exceeds the window.
pub fn pi_entry(real: &Realization, i: usize, j: usize, s: usize) -> f64 {
    let (row, scale) = row_product(real, i, 0, s, false);
    if row[j] == 0.0 {
        0.0
    } else {
        (row[j].ln() + scale).exp()
    }
}

/// Entry `(i, j)` of `A^0_{-start} A_{-start-1} ... A_{-start-len+1}`, where
/// `A^0` is `A` with its diagonal removed; `len >= 1`.
pub fn pi_prime_entry(real: &Realization, i: usize, j: usize, start: usize, len: usize) -> f64 {
    assert!(len >= 1, "the restricted product needs at least one factor");
    let (row, scale) = row_product(real, i, start, len, true);
    if row[j] == 0.0 {
        0.0
    } else {
        (row[j].ln() + scale).exp()
    }
}

/// Column `j` of `A_{-start} ... A_{-start-len+1}`; the unit vector when `len = 0`.
pub fn pi_column_shifted(real: &Realization, j: usize, start: usize, len: usize) -> Vec<f64> {
    let d = real.dim();
    assert!(start + len <= real.window(), "product reaches past the stored window");
    let mut col = vec![0.0; d];
    col[j] = 1.0;
    let mut next = vec![0.0; d];
    for p in (start..start + len).rev() {
        let a = real.a(p);
        for (i, slot) in next.iter_mut().enumerate() {
            *slot = (i..d).map(|k| a[i * d + k] * col[k]).sum();
        }
        std::mem::swap(&mut col, &mut next);
    }
    col
}

fn check_enum(real: &Realization, graph: &DepGraph, start: usize, len: usize) -> Result<()> {
    let d = real.dim();
    if graph.dim() != d {
        return Err(Error::InvalidInput("graph and realization dimensions differ".into()));
    }
    if d > ENUM_MAX_DIM || len > ENUM_MAX_STEPS {
        return Err(Error::TooLarge { d, s: len });
    }
    if start + len > real.window() {
        return Err(Error::InvalidInput("product reaches past the stored window".into()));
    }
    Ok(())
}

struct Walk<'a> {
    real: &'a Realization,
    graph: &'a DepGraph,
    target: usize,
    start: usize,
    len: usize,
}

impl Walk<'_> {
    // sum over admissible continuations from `at` after `done` factors
    fn sum(&self, at: usize, done: usize, weight: f64, first_off_diagonal: bool) -> f64 {
        if done == self.len {
            return if at == self.target { weight } else { 0.0 };
        }
        let d = self.real.dim();
        let a = self.real.a(self.start + done);
        let mut total = 0.0;
        for next in at..d {
            if next == at && first_off_diagonal && done == 0 {
                continue;
            }
            if !(next == at || self.graph.direct(at, next)) || !self.graph.reach(next, self.target) {
                continue;
            }
            total += self.sum(next, done + 1, weight * a[at * d + next], first_off_diagonal);
        }
        total
    }
}

/// `pi_ij(s)` as the sum over all non-decreasing admissible index paths
/// `i = h(0) <= ... <= h(s) = j` of `prod_p A_{h(p) h(p+1), -p}`.
pub fn pi_entry_enum(real: &Realization, graph: &DepGraph, i: usize, j: usize, s: usize) -> Result<f64> {
    check_enum(real, graph, 0, s)?;
    let walk = Walk { real, graph, target: j, start: 0, len: s };
    Ok(walk.sum(i, 0, 1.0, false))
}

/// [`pi_prime_entry`] by enumeration over paths whose first step leaves `i`.
pub fn pi_prime_entry_enum(
    real: &Realization,
    graph: &DepGraph,
    i: usize,
    j: usize,
    start: usize,
    len: usize,
) -> Result<f64> {
    if len == 0 {
        return Err(Error::InvalidInput("the restricted product needs at least one factor".into()));
    }
    check_enum(real, graph, start, len)?;
    let walk = Walk { real, graph, target: j, start, len };
    Ok(walk.sum(i, 0, 1.0, true))
}
