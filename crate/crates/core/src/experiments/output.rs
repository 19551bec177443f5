//! Result tables, JSON summaries and solution snapshots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::config::Variant;
use crate::experiments::suite::RunReport;
use crate::problem::ExperimentId;

pub const TABLE_HEADER: [&str; 9] = [
    "experiment",
    "method",
    "beta",
    "n",
    "h",
    "l2_error",
    "rate",
    "nm_avg",
    "walltime_s",
];

/// One row of the result table. `method` is the variant label (`FV1`,
/// `DGP`, ...); missing values are empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub experiment: ExperimentId,
    pub method: Variant,
    pub beta: Option<u8>,
    pub n: usize,
    pub h: f64,
    pub l2_error: Option<f64>,
    pub rate: Option<f64>,
    pub nm_avg: Option<f64>,
    pub walltime_s: f64,
}

pub fn table_rows(reports: &[RunReport]) -> Vec<TableRow> {
    reports
        .iter()
        .flat_map(|rep| {
            rep.records.iter().map(move |r| TableRow {
                experiment: rep.config.id,
                method: rep.config.variant,
                beta: rep.config.beta(),
                n: r.n,
                h: r.h,
                l2_error: r.l2_error,
                rate: r.rate,
                nm_avg: r.nm_avg,
                walltime_s: r.walltime_s,
            })
        })
        .collect()
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn write_table_to<W: Write>(writer: W, rows: &[TableRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.as_str().to_string(),
            r.method.as_str().to_string(),
            r.beta.map(|b| b.to_string()).unwrap_or_default(),
            r.n.to_string(),
            float(r.h),
            opt_float(r.l2_error),
            opt_float(r.rate),
            opt_float(r.nm_avg),
            float(r.walltime_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    write_table_to(fs::File::create(path)?, rows)
}

fn cell_error(line: usize, column: &str, value: &str) -> Error {
    Error::Parse {
        line,
        message: format!("bad {column} value '{value}'"),
    }
}

pub fn read_table_from(text: &str) -> Result<Vec<TableRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TABLE_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let get = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64> { get(k).parse().map_err(|_| cell_error(line, TABLE_HEADER[k], get(k))) };
        let opt = |k: usize| -> Result<Option<f64>> {
            if get(k).is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        rows.push(TableRow {
            experiment: get(0).parse().map_err(|_| cell_error(line, "experiment", get(0)))?,
            method: get(1).parse().map_err(|_| cell_error(line, "method", get(1)))?,
            beta: if get(2).is_empty() {
                None
            } else {
                Some(get(2).parse().map_err(|_| cell_error(line, "beta", get(2)))?)
            },
            n: get(3).parse().map_err(|_| cell_error(line, "n", get(3)))?,
            h: num(4)?,
            l2_error: opt(5)?,
            rate: opt(6)?,
            nm_avg: opt(7)?,
            walltime_s: num(8)?,
        });
    }
    Ok(rows)
}

pub fn read_table(path: &Path) -> Result<Vec<TableRow>> {
    read_table_from(&fs::read_to_string(path)?)
}

/// Full reports, configuration included.
pub fn write_summary(path: &Path, reports: &[RunReport]) -> Result<()> {
    let f = fs::File::create(path)?;
    serde_json::to_writer_pretty(f, reports)?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Vec<RunReport>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Sampled solution of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub experiment: ExperimentId,
    pub method: Variant,
    pub n: usize,
    pub time: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl Snapshot {
    pub fn file_name(&self) -> String {
        format!("snapshot_{}_{}_n{}.csv", self.experiment, self.method, self.n)
    }
}

/// Two-column `x,u` file.
pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "u"])?;
    for (x, u) in snap.x.iter().zip(&snap.u) {
        w.write_record([float(*x), float(*u)])?;
    }
    w.flush()?;
    Ok(())
}

pub const TABLE_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Writes the table and summary into `dir`, creating it if needed.
pub fn emit_results(dir: &Path, reports: &[RunReport]) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let table = dir.join(TABLE_FILE);
    let summary = dir.join(SUMMARY_FILE);
    write_table(&table, &table_rows(reports))?;
    write_summary(&summary, reports)?;
    Ok((table, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::ExperimentConfig;
    use crate::experiments::suite::RunRecord;

    fn report() -> RunReport {
        let config = ExperimentConfig::defaults(ExperimentId::MovingShock, Variant::DG2).unwrap();
        let records = vec![
            RunRecord {
                n: 40,
                h: 0.05,
                l2_error: Some(0.123_456_789_012_345_68),
                rate: None,
                nm_avg: Some(3.25),
                steps: 320,
                dt: Some(0.003125),
                walltime_s: 0.01,
                overshoot: None,
                failure: None,
            },
            RunRecord {
                n: 80,
                h: 0.025,
                l2_error: None,
                rate: None,
                nm_avg: None,
                steps: 0,
                dt: None,
                walltime_s: 1.0 / 3.0,
                overshoot: None,
                failure: Some("numeric failure".into()),
            },
        ];
        RunReport { config, records }
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_table_to(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), TABLE_HEADER.join(",") + "\n");
    }

    #[test]
    fn table_round_trip() {
        let rows = table_rows(&[report()]);
        let mut buf = Vec::new();
        write_table_to(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.contains("moving-shock,DG2,2,40,5.0000000000000003e-2,1.2345678901234568e-1,,3.2500000000000000e0,")
        );
        assert_eq!(read_table_from(&text).unwrap(), rows);
    }

    #[test]
    fn bad_cells_report_their_line() {
        let text = TABLE_HEADER.join(",") + "\nmoving-shock,DG2,2,40,0.05,zz,,,0.1\n";
        match read_table_from(&text).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("l2_error"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn summary_and_snapshot_files() {
        let dir = tempfile::tempdir().unwrap();
        let (table, summary) = emit_results(&dir.path().join("out"), &[report()]).unwrap();
        assert_eq!(read_table(&table).unwrap(), table_rows(&[report()]));
        assert_eq!(read_summary(&summary).unwrap(), vec![report()]);
        let snap = Snapshot {
            experiment: ExperimentId::TwoShock,
            method: Variant::H1,
            n: 320,
            time: 2.0,
            x: vec![-1.0, 0.0],
            u: vec![0.0, -0.25],
        };
        let path = dir.path().join(snap.file_name());
        write_snapshot(&path, &snap).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(path.ends_with("snapshot_two-shock_H1_n320.csv"));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        let err = emit_results(&file.join("sub"), &[]).unwrap_err();
        assert!(matches!(err, Error::Io(_)), "{err}");
    }
}
