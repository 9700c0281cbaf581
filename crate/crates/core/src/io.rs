//! CSV export and import. Numbers use Rust's shortest round-trip formatting.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::estimators::ScalingCurve;
use crate::garch::GarchSeries;
use crate::simulate::{DecompositionTrace, USequence};

fn num(x: f64) -> String {
    format!("{x}")
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

/// One row per path, columns `W_1 .. W_d`.
pub fn write_batch_csv<W: Write>(out: W, batch: &[Vec<f64>]) -> Result<()> {
    let d = batch.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=d).map(|i| format!("W_{i}")))?;
    for row in batch {
        w.write_record(row.iter().map(|x| num(*x)))?;
    }
    finish(w)
}

pub fn read_batch_csv<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (n, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parse { line: n + 2, message: format!("bad number `{f}`") }))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub const TRACE_COLUMNS: [&str; 13] =
    ["path_id", "s", "Q_F", "Q_T", "Q_W", "Q_B", "QpW", "QppW", "QstarW", "R", "pi_lj0", "W_j0_ms", "W_l_0"];

pub fn write_traces_csv<W: Write>(out: W, traces: &[DecompositionTrace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for t in traces {
        w.write_record([
            t.path_id.to_string(),
            t.s.to_string(),
            num(t.q_f),
            num(t.q_t),
            num(t.q_w),
            num(t.q_b),
            num(t.qp_w),
            num(t.qpp_w),
            num(t.qstar_w),
            num(t.r),
            num(t.pi_lj0),
            num(t.w_j0_ms),
            num(t.w_l_0),
        ])?;
    }
    finish(w)
}

pub fn write_useq_csv<W: Write>(out: W, seq: &USequence) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "estimate", "std_error", "raw", "raw_std_error"])?;
    for p in &seq.points {
        w.write_record([p.s.to_string(), num(p.estimate), num(p.std_error), num(p.raw), num(p.raw_std_error)])?;
    }
    finish(w)
}

pub fn write_curve_csv<W: Write>(out: W, curve: &ScalingCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "x_pow_alpha_times_survival"])?;
    for p in &curve.points {
        w.write_record([num(p.x), num(p.x_pow_alpha_times_survival)])?;
    }
    finish(w)
}

/// Columns `t, X_1 .. X_d, sigma2_1 .. sigma2_d` with `t` starting at 1.
pub fn write_garch_csv<W: Write>(out: W, series: &GarchSeries) -> Result<()> {
    let d = series.x.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("t".to_string())
        .chain((1..=d).map(|i| format!("X_{i}")))
        .chain((1..=d).map(|i| format!("sigma2_{i}")));
    w.write_record(header)?;
    for (t, (x, s)) in series.x.iter().zip(&series.sigma2).enumerate() {
        let row = std::iter::once((t + 1).to_string()).chain(x.iter().map(|v| num(*v))).chain(s.iter().map(|v| num(*v)));
        w.write_record(row)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_round_trips_exactly() {
        let batch = vec![vec![0.1, 1.0 / 3.0], vec![1e-300, 12345.678901234567]];
        let mut buf = Vec::new();
        write_batch_csv(&mut buf, &batch).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("W_1,W_2\n"));
        assert_eq!(read_batch_csv(buf.as_slice()).unwrap(), batch);
    }

    #[test]
    fn garch_header() {
        let s = GarchSeries { x: vec![vec![0.5, -0.25]], sigma2: vec![vec![1.0, 2.0]] };
        let mut buf = Vec::new();
        write_garch_csv(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,X_1,X_2,sigma2_1,sigma2_2\n1,0.5,-0.25,1,2\n");
    }
}
