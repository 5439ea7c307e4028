//! Experiment configuration, commands and CSV/JSON reports.

mod commands;
mod config;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use commands::{
    cmd_decompose, cmd_fig3, cmd_table2, cmd_tomo, exact_sldf, exact_speed, find_crossings,
    point_seed, CountInputs, Crossing, DecomposeReport, PlateRow, Reconstruction, ReportRow,
    SpeedReport, TomoReport, TomoRow, WITNESS_THRESHOLD,
};
pub use config::{default_p_grid, ExperimentConfig};

use crate::error::{Error, Result};

/// Serializes `rows` as CSV with a header row.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(format!("csv encoding: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Paths of a written report pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrittenReport {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<name>.csv` and `<name>.json` into `dir`, creating it if needed.
pub fn write_report<T: Serialize, R: Serialize>(
    dir: &Path,
    name: &str,
    rows: &[R],
    report: &T,
) -> Result<WrittenReport> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join(format!("{name}.csv"));
    let json = dir.join(format!("{name}.json"));
    std::fs::write(&csv, to_csv(rows)?).map_err(|e| Error::io(&csv, e))?;
    std::fs::write(&json, to_json(report)?).map_err(|e| Error::io(&json, e))?;
    Ok(WrittenReport { csv, json })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let report = cmd_table2(&ExperimentConfig::default()).unwrap();
        let text = to_csv(&report.rows).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("p,s_exact,s_estimated,error_bar,i_f,witness"));
        assert_eq!(lines.count(), 11);
    }

    #[test]
    fn reports_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let report = cmd_table2(&ExperimentConfig::default()).unwrap();
        let a = write_report(dir.path(), "a", &report.rows, &report).unwrap();
        let again = cmd_table2(&ExperimentConfig::default()).unwrap();
        let b = write_report(dir.path(), "b", &again.rows, &again).unwrap();
        assert_eq!(
            std::fs::read(&a.csv).unwrap(),
            std::fs::read(&b.csv).unwrap()
        );
        assert_eq!(
            std::fs::read(&a.json).unwrap(),
            std::fs::read(&b.json).unwrap()
        );
        let json: serde_json::Value =
            serde_json::from_slice(&std::fs::read(&a.json).unwrap()).unwrap();
        assert_eq!(json["version"], crate::VERSION);
        assert_eq!(json["config"]["mc_samples"], 1000);
    }
}
