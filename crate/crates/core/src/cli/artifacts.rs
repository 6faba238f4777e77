use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const RELAXATION_COLUMNS: &[&str] =
    &["model", "stat", "L", "w", "kappa", "lambda", "Gamma", "init", "eta", "tau", "tau_times_Delta", "sustained"];
pub const TRAJECTORY_COLUMNS: &[&str] = &["t", "site", "n", "delta_n"];
pub const PROPAGATOR_COLUMNS: &[&str] = &["model", "stat", "L", "j", "m", "t", "logP", "route"];
pub const SPECTRUM_COLUMNS: &[&str] = &["model", "stat", "L", "index", "E_re", "E_im"];
pub const STEADY_COLUMNS: &[&str] = &["model", "stat", "L", "site", "n_ss"];
pub const INTERFERENCE_COLUMNS: &[&str] =
    &["model", "stat", "L", "m", "j", "t", "index", "E_re", "E_im", "log10_mag", "phase"];
pub const LOCALIZATION_COLUMNS: &[&str] =
    &["model", "stat", "L", "E_re", "E_im", "xi_extracted", "xi_gbz", "residual"];
pub const VERIFY_COLUMNS: &[&str] = &["check", "value", "tolerance", "passed"];

/// Seventeen significant digits with a lowercase exponent.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_csv_string())
    }
}

/// `out.csv` maps to `out.meta.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Sibling table path: `out.csv` with tag `trajectory` maps to `out.trajectory.csv`.
pub fn companion_path(csv: &Path, tag: &str) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    csv.with_file_name(format!("{stem}.{tag}.csv"))
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub name: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sidecar {
    pub tool: &'static str,
    pub version: &'static str,
    pub status: &'static str,
    pub config: serde_json::Value,
    pub columns: Vec<&'static str>,
    pub rows: usize,
    pub wall_time_s: f64,
    pub error: Option<ErrorInfo>,
    pub summary: serde_json::Value,
}

impl Sidecar {
    pub fn write(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(path, text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format() {
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_real(-0.125e-12), "-1.2500000000000000e-13");
        assert_eq!(fmt_real(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_text_and_paths() {
        let mut t = Table::new(TRAJECTORY_COLUMNS);
        t.push(vec![fmt_real(0.0), "3".into(), fmt_real(0.5), fmt_real(1.0)]);
        assert_eq!(t.to_csv_string(), "t,site,n,delta_n\n0.0000000000000000e0,3,5.0000000000000000e-1,1.0000000000000000e0\n");
        assert_eq!(sidecar_path(Path::new("a/relax.csv")), PathBuf::from("a/relax.meta.json"));
        assert_eq!(companion_path(Path::new("a/relax.csv"), "trajectory"), PathBuf::from("a/relax.trajectory.csv"));
    }
}
