//! Atomic JSON and CSV artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};

use siegel_core::experiments::ExperimentReport;

pub const CSV_HEADER: &str = "y,value,error,fit-residual";

/// Writes `contents` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn report_json(report: &ExperimentReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// One row per series point, 17 significant digits, empty cells for
/// missing fit residuals.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &report.series {
        let residual = p.fit_residual.map(|r| format!("{r:.16e}")).unwrap_or_default();
        out.push_str(&format!("{:.16e},{:.16e},{:.16e},{residual}\n", p.x, p.value, p.error));
    }
    out
}

pub fn csv_path(json: &Path) -> PathBuf {
    json.with_extension("csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use siegel_core::experiments::report::SeriesPoint;

    #[test]
    fn csv_rows() {
        let mut r = ExperimentReport::new("t", serde_json::Value::Null);
        r.series.push(SeriesPoint { x: 0.1, value: 1.0 / 3.0, error: -2.0, fit_residual: None });
        let csv = report_csv(&r);
        let row = csv.lines().nth(1).unwrap();
        assert_eq!(row, "1.0000000000000001e-1,3.3333333333333331e-1,-2.0000000000000000e0,");
        assert_eq!(row.split(',').next().unwrap().parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("r.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
