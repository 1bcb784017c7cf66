//! CSV tables with an embedded, timestamp-free run header.
//!
//! Every table starts with `#` comment lines carrying the tool version, command, seed
//! and resolved configuration, so identical inputs give byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::bench::{BlochMapRow, HistogramStats, MinCurveRow, ThresholdCrossing};
use crate::error::Result;

/// 17 significant digits, '.' decimal separator.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl RunHeader {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        RunHeader {
            tool: "clusterfid".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
        }
    }

    pub fn lines(&self) -> Vec<String> {
        let mut lines = vec![format!("# {} {}", self.tool, self.version), format!("# command: {}", self.command)];
        if let Some(seed) = self.seed {
            lines.push(format!("# seed: {seed}"));
        }
        lines.push(format!("# config: {}", self.config));
        lines
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn write_csv<W: Write>(mut out: W, header: &RunHeader, table: &Table) -> Result<()> {
    for line in header.lines() {
        writeln!(out, "{line}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(header: &RunHeader, table: &Table) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, table)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

const LONG_COLUMNS: [&str; 7] = ["kind", "n", "eps", "statistic", "value", "samples", "seed"];

fn long_row(kind: &str, n: usize, param: f64, stat: &str, value: f64, samples: usize, seed: u64) -> Vec<String> {
    vec![kind.into(), n.to_string(), fmt_f64(param), stat.into(), fmt_f64(value), samples.to_string(), seed.to_string()]
}

/// Columns `kind, n, eps, statistic, value, samples, seed`.
pub fn min_curve_table(rows: &[MinCurveRow], seed: u64) -> Table {
    let mut t = Table::new(&LONG_COLUMNS);
    for r in rows {
        let k = r.kind.as_str();
        let mut stats = vec![
            ("sampled_min", r.sampled_min),
            ("anchor_xz", r.anchor_xz),
            ("anchor_plus_y", r.anchor_plus_y),
            ("anchor_minus_y", r.anchor_minus_y),
            ("channel_min", r.channel_min),
        ];
        if let Some(c) = r.closed_form {
            stats.push(("closed_form", c));
        }
        for (name, v) in stats {
            t.push(long_row(k, r.n, r.epsilon, name, v, r.samples, seed));
        }
    }
    t
}

/// Columns `kind, n, sigma, statistic, value, samples, seed`; bin counts appear as `count@<centre>`.
pub fn histogram_table(stats: &[HistogramStats], seed: u64) -> Table {
    let mut cols = LONG_COLUMNS;
    cols[2] = "sigma";
    let mut t = Table::new(&cols);
    for h in stats {
        let k = h.kind.as_str();
        for (name, v) in [
            ("lower_half_max_fidelity", h.lower_half_max_fidelity),
            ("unity_mass", h.unity_mass),
            ("exact_unity_count", h.exact_unity_count as f64),
            ("mode_center", h.mode_center),
            ("mean", h.mean),
            ("min", h.min),
            ("bin_width", h.bin_width),
        ] {
            t.push(long_row(k, h.n, h.sigma, name, v, h.samples, seed));
        }
        for (c, &count) in h.centers.iter().zip(&h.counts) {
            t.push(long_row(k, h.n, h.sigma, &format!("count@{c:.4}"), count as f64, h.samples, seed));
        }
    }
    t
}

/// Columns `kind, n, statistic, value`; a missing crossing is written as `none`.
pub fn threshold_table(rows: &[ThresholdCrossing]) -> Table {
    let mut t = Table::new(&["kind", "n", "statistic", "value"]);
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "none".into());
    for r in rows {
        let k = r.kind.as_str().to_string();
        t.push(vec![k.clone(), r.n.to_string(), "crossing_eps".into(), opt(r.epsilon)]);
        t.push(vec![k.clone(), r.n.to_string(), "residual".into(), opt(r.residual)]);
        t.push(vec![k, r.n.to_string(), "eps_max_formula".into(), fmt_f64(r.eps_max_formula)]);
    }
    t
}

/// Columns `theta0, phi0, x, y, z, fidelity`.
pub fn bloch_map_table(rows: &[BlochMapRow]) -> Table {
    let mut t = Table::new(&["theta0", "phi0", "x", "y", "z", "fidelity"]);
    for r in rows {
        t.push([r.theta0, r.phi0, r.x, r.y, r.z, r.fidelity].iter().map(|&v| fmt_f64(v)).collect());
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn header_and_rows() {
        let h = RunHeader::new("demo", Some(7), serde_json::json!({"b": 1, "a": [0.5]}));
        let mut t = Table::new(&["x", "y"]);
        t.push(vec!["1".into(), "a,b".into()]);
        let s = to_csv_string(&h, &t).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# clusterfid "));
        assert_eq!(lines[2], "# seed: 7");
        assert_eq!(lines[3], r#"# config: {"a":[0.5],"b":1}"#);
        assert_eq!(lines[4], "x,y");
        assert_eq!(lines[5], "1,\"a,b\"");
    }
}
