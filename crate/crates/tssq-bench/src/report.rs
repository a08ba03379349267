//! Error records, CSV emission and the console summary.

use std::io::{self, Write};

/// Error statistics for one (experiment, distance, method, power) cell.
///
/// `d` is the sweep abscissa: the target distance for the curve
/// experiments, the root height b for the prototype sweep, and the
/// numerator offset for the `prototype_delta` sweep. `m` is the kernel
/// power as a string ("1", "3", "5") or "total" for the assembled value.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub experiment: String,
    pub d: f64,
    pub method: String,
    pub m: String,
    pub err_min: f64,
    pub err_max: f64,
    pub err_mean: f64,
    /// Largest standard-basis cancellation estimate seen in the cell.
    pub ecancel_max: f64,
    /// Targets whose reference value converged and entered the statistics.
    pub targets_used: usize,
    /// Whether the cell's reference is trusted: every target converged and
    /// the distance lies inside the oracle's validity range for the
    /// geometry. Untrusted cells are still emitted, flagged 0.
    pub oracle_ok: bool,
}

impl ErrorRecord {
    /// Build a record from per-target errors, which must be non-empty.
    pub fn from_errors(
        experiment: &str,
        d: f64,
        method: &str,
        m: &str,
        errors: &[f64],
        ecancel_max: f64,
        oracle_ok: bool,
    ) -> ErrorRecord {
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        let mut sum = 0.0;
        for &e in errors {
            min = min.min(e);
            max = max.max(e);
            sum += e;
        }
        ErrorRecord {
            experiment: experiment.to_string(),
            d,
            method: method.to_string(),
            m: m.to_string(),
            err_min: min,
            err_max: max,
            err_mean: sum / errors.len() as f64,
            ecancel_max,
            targets_used: errors.len(),
            oracle_ok,
        }
    }
}

/// Quadrature-vector size relative to the integral it sums to, recorded for
/// the prototype sweep (the cancellation mechanism in one number).
#[derive(Clone, Copy, Debug)]
pub struct QvRow {
    pub b: f64,
    pub m: u32,
    /// Max-norm of the pairing actually used, over |I_m|.
    pub used_ratio: f64,
    /// Same for the standard-basis pairing (identical when it is used).
    pub std_ratio: f64,
}

/// Everything one experiment run produces.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub records: Vec<ErrorRecord>,
    /// Prototype-only: quadrature-vector ratios per (b, m, method).
    pub qv: Vec<(String, QvRow)>,
}

/// Canonical row order: (experiment, d, method, m).
pub fn sort_records(records: &mut [ErrorRecord]) {
    records.sort_by(|a, b| {
        a.experiment
            .cmp(&b.experiment)
            .then(a.d.total_cmp(&b.d))
            .then(a.method.cmp(&b.method))
            .then(a.m.cmp(&b.m))
    });
}

pub const CSV_HEADER: &str =
    "experiment,d,method,m,err_min,err_max,err_mean,ecancel_max,targets_used,oracle_ok";

/// Write the records as CSV in canonical order. Floats use Rust's shortest
/// round-trip formatting, so parsing the file recovers the exact bits.
pub fn emit_csv(records: &[ErrorRecord], out: &mut dyn Write) -> io::Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    writeln!(out, "{CSV_HEADER}")?;
    for r in &sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.d,
            r.method,
            r.m,
            r.err_min,
            r.err_max,
            r.err_mean,
            r.ecancel_max,
            r.targets_used,
            u8::from(r.oracle_ok)
        )?;
    }
    Ok(())
}

/// Console table: one line per record plus the quadrature-vector ratios,
/// meant for eyeballing a run, not for parsing.
pub fn emit_summary(output: &RunOutput, out: &mut dyn Write) -> io::Result<()> {
    let mut sorted = output.records.to_vec();
    sort_records(&mut sorted);
    writeln!(
        out,
        "{:<16} {:>10} {:>12} {:>6} {:>10} {:>10} {:>10} {:>10} {:>7} {:>3}",
        "experiment", "d", "method", "m", "err_min", "err_max", "err_mean", "ecancel", "used", "ok"
    )?;
    for r in &sorted {
        writeln!(
            out,
            "{:<16} {:>10.3e} {:>12} {:>6} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>7} {:>3}",
            r.experiment,
            r.d,
            r.method,
            r.m,
            r.err_min,
            r.err_max,
            r.err_mean,
            r.ecancel_max,
            r.targets_used,
            u8::from(r.oracle_ok)
        )?;
    }
    if !output.qv.is_empty() {
        writeln!(out, "\nquadrature-vector max-norm over |I_m|:")?;
        writeln!(
            out,
            "{:<12} {:>10} {:>3} {:>12} {:>12}",
            "method", "b", "m", "used/|I|", "std/|I|"
        )?;
        for (method, q) in &output.qv {
            writeln!(
                out,
                "{:<12} {:>10.3e} {:>3} {:>12.3e} {:>12.3e}",
                method, q.b, q.m, q.used_ratio, q.std_ratio
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(d: f64, method: &str, m: &str) -> ErrorRecord {
        ErrorRecord {
            experiment: "filament".into(),
            d,
            method: method.into(),
            m: m.into(),
            err_min: 1e-12,
            err_max: 3e-12,
            err_mean: 2e-12,
            ecancel_max: 4e-9,
            targets_used: 5,
            oracle_ok: true,
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        let mut buf = Vec::new();
        emit_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_record_round_trips() {
        let r = record(1e-3, "tssq", "5");
        let mut buf = Vec::new();
        emit_csv(&[r.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!(fields[0], "filament");
        assert_eq!(fields[1].parse::<f64>().unwrap(), r.d);
        assert_eq!(fields[4].parse::<f64>().unwrap(), r.err_min);
        assert_eq!(fields[9], "1");
    }

    #[test]
    fn rows_come_out_in_canonical_order() {
        let records = vec![
            record(1e-2, "tssq", "total"),
            record(1e-3, "tssq", "1"),
            record(1e-3, "ssq", "5"),
            record(1e-3, "ssq", "1"),
        ];
        let mut buf = Vec::new();
        emit_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let keys: Vec<String> = text
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{}|{}|{}", f[1], f[2], f[3])
            })
            .collect();
        assert_eq!(
            keys,
            vec!["0.001|ssq|1", "0.001|ssq|5", "0.001|tssq|1", "0.01|tssq|total"]
        );
    }

    #[test]
    fn stats_builder_orders_min_mean_max() {
        let r = ErrorRecord::from_errors(
            "starfish",
            1e-4,
            "tssq",
            "total",
            &[3e-11, 1e-11, 2e-11],
            5e-8,
            true,
        );
        assert_eq!(r.err_min, 1e-11);
        assert_eq!(r.err_max, 3e-11);
        assert!(r.err_min <= r.err_mean && r.err_mean <= r.err_max);
        assert_eq!(r.targets_used, 3);
    }
}
