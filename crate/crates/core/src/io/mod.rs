//! Output formats: trajectory and sweep CSV, the sweep scatter plot, run
//! manifests and plain-text reports.
//!
//! Reals are written as `{:.16e}` (17 significant digits) so CSV output is
//! locale independent and round-trips exactly. Rows end in `\n`.

mod svg;

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::experiments::SweepResult;
use crate::population::TrajectoryRecord;

pub use svg::{sweep_svg, SVG_HEIGHT, SVG_WIDTH};

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "time",
    "mean_fitness",
    "c2",
    "c3",
    "c4",
    "k_c",
    "k_d",
    "k_w",
    "min_class",
    "max_class",
];

pub const SWEEP_HEADER: [&str; 9] = [
    "N",
    "mu",
    "q",
    "s",
    "replicate",
    "seed",
    "adaptation_rate",
    "rate_sd",
    "mean_c2",
];

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_trajectory_csv<W: Write>(w: W, records: &[TrajectoryRecord]) -> csv::Result<()> {
    let mut out = writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for r in records {
        out.write_record([
            format_real(r.time),
            format_real(r.mean_fitness),
            format_real(r.c2),
            format_real(r.c3),
            format_real(r.c4),
            opt(r.k_c),
            opt(r.k_d),
            r.k_w.to_string(),
            r.min_class.to_string(),
            r.max_class.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn trajectory_csv(records: &[TrajectoryRecord]) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// One row per run. `rate_sd` repeats the across-replicate standard
/// deviation of the run's grid point. Failed runs keep their coordinates
/// and leave `adaptation_rate` and `mean_c2` empty.
pub fn write_sweep_csv<W: Write>(w: W, result: &SweepResult) -> csv::Result<()> {
    let mut out = writer(w);
    out.write_record(SWEEP_HEADER)?;
    for row in &result.rows {
        let c = &row.cell;
        let sd = result.summaries[c.grid_index].rate_sd;
        out.write_record([
            c.params.pop_size.to_string(),
            format_real(c.params.mu),
            format_real(c.params.q),
            format_real(c.params.s),
            c.replicate.to_string(),
            c.seed.to_string(),
            opt_real(row.adaptation_rate),
            opt_real(sd),
            opt_real(row.mean_c2),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, result).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Everything needed to rerun a command: the resolved configuration, the
/// tool version and the seed, plus wall-clock start and end times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Value,
    pub version: String,
    pub seed: u64,
    /// Files written by the run, as given on the command line.
    pub outputs: Vec<String>,
    pub started: String,
    pub finished: String,
}

/// Flattens a JSON value into `key = value` lines, nested keys joined with
/// dots and array elements by index. Strings are printed bare.
pub fn key_value_text(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    walk(&join(k), v, out);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&join(&i.to_string()), v, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
            other => out.push_str(&format!("{prefix} = {other}\n")),
        }
    }
    let mut out = String::new();
    walk("", value, &mut out);
    out
}

/// Parses text produced by [`key_value_text`] back into `(key, value)`
/// pairs.
pub fn parse_key_value_text(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{GridSummary, SweepCell, SweepRow};
    use crate::population::{record, Params, Population};

    #[test]
    fn trajectory_rows() {
        let p = Population::from_counts([(0, 3), (2, 1)]).unwrap();
        let text = trajectory_csv(&[record(&p, 0.5, 0.5)]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "5.0000000000000000e-1");
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.5);
        assert_eq!(row[7], "2");
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn absent_fronts_are_empty() {
        let p = Population::point_mass(0, 1).unwrap();
        let text = trajectory_csv(&[record(&p, 0.0, 0.5)]);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[6], "");
    }

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn sweep_rows_with_failure() {
        let params = Params::new(10, 0.01, 0.5, 0.0).unwrap();
        let cell = |r| SweepCell {
            grid_index: 0,
            replicate: r,
            params,
            seed: 7 + r as u64,
        };
        let result = SweepResult {
            rows: vec![
                SweepRow {
                    cell: cell(0),
                    adaptation_rate: Some(0.25),
                    rate_stderr: Some(0.0),
                    mean_c2: Some(1.0),
                    error: None,
                },
                SweepRow {
                    cell: cell(1),
                    adaptation_rate: None,
                    rate_stderr: None,
                    mean_c2: None,
                    error: Some("budget".into()),
                },
            ],
            summaries: vec![GridSummary {
                grid_index: 0,
                params,
                completed: 1,
                failed: 1,
                mean_rate: Some(0.25),
                rate_sd: None,
                rate_se: None,
                mean_c2: Some(1.0),
            }],
        };
        let text = sweep_csv(&result);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "N,mu,q,s,replicate,seed,adaptation_rate,rate_sd,mean_c2"
        );
        assert!(lines[1].starts_with(
            "10,1.0000000000000000e-2,5.0000000000000000e-1,0.0000000000000000e0,0,7,2.5"
        ));
        assert_eq!(
            lines[2],
            "10,1.0000000000000000e-2,5.0000000000000000e-1,0.0000000000000000e0,1,8,,,"
        );
    }

    #[test]
    fn key_values_flatten() {
        let v = serde_json::json!({"k": 2.5, "nested": {"a": "x", "b": [1, null]}, "flag": true});
        let text = key_value_text(&v);
        let kv = parse_key_value_text(&text);
        assert!(kv.contains(&("k".into(), "2.5".into())));
        assert!(kv.contains(&("nested.a".into(), "x".into())));
        assert!(kv.contains(&("nested.b.1".into(), "null".into())));
        assert!(kv.contains(&("flag".into(), "true".into())));
    }
}
