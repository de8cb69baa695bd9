use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::TraceRow;

pub const TRACE_HEADER: &str = "outer,inner,dist_to_v0,cost_value,data_residual,isnr_db";

/// Scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in rows {
        let isnr = r.isnr_db.map(format_float).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.outer,
            r.inner,
            format_float(r.dist_to_v0),
            format_float(r.cost_value),
            format_float(r.data_residual),
            isnr
        ));
    }
    s
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == TRACE_HEADER => {}
        _ => return Err(Error::Format("trace is missing its header line".into())),
    }
    let bad = |n: usize, what: &str| Error::Format(format!("trace line {n}: {what}"));
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 2;
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 6 {
            return Err(bad(n, "expected 6 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "invalid number"));
        let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(n, "invalid index"));
        rows.push(TraceRow {
            outer: idx(f[0])?,
            inner: idx(f[1])?,
            dist_to_v0: num(f[2])?,
            cost_value: num(f[3])?,
            data_residual: num(f[4])?,
            isnr_db: if f[5].is_empty() {
                None
            } else {
                Some(num(f[5])?)
            },
        });
    }
    Ok(rows)
}

pub fn save_trace(path: impl AsRef<Path>, rows: &[TraceRow]) -> Result<()> {
    fs::write(path, write_trace_csv(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_is_header_only() {
        assert_eq!(write_trace_csv(&[]), format!("{TRACE_HEADER}\n"));
        assert!(parse_trace_csv(&write_trace_csv(&[])).unwrap().is_empty());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_trace_csv("a,b\n").is_err());
        assert!(parse_trace_csv(&format!("{TRACE_HEADER}\n1,2,3\n")).is_err());
        assert!(parse_trace_csv(&format!("{TRACE_HEADER}\n1,2,x,0,0,\n")).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
    }

    proptest! {
        #[test]
        fn round_trip(
            vals in prop::collection::vec((finite(), finite(), finite(), prop::option::of(finite())), 0..20)
        ) {
            let rows: Vec<TraceRow> = vals
                .iter()
                .enumerate()
                .map(|(i, v)| TraceRow {
                    outer: i / 3 + 1,
                    inner: i % 3 + 1,
                    dist_to_v0: v.0,
                    cost_value: v.1,
                    data_residual: v.2,
                    isnr_db: v.3,
                })
                .collect();
            let back = parse_trace_csv(&write_trace_csv(&rows)).unwrap();
            prop_assert_eq!(back, rows);
        }
    }
}
