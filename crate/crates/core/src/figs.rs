//! Figure recipes: the tables each figure reads and loaders that enforce their schemas.
//! Rendering lives outside this crate; everything here is plain data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cli::{INTERFERENCE_COLUMNS, PROPAGATOR_COLUMNS, RELAXATION_COLUMNS, TRAJECTORY_COLUMNS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    #[serde(rename = "fig1b")]
    Fig1b,
    #[serde(rename = "fig1c")]
    Fig1c,
    #[serde(rename = "fig1d")]
    Fig1d,
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig_interference")]
    Interference,
    #[serde(rename = "fig_P_curves")]
    PCurves,
    #[serde(rename = "fig_heights")]
    Heights,
    #[serde(rename = "fig_sat_fit")]
    SatFit,
    #[serde(rename = "fig_relax_curves")]
    RelaxCurves,
}

/// Dashed analytic reference drawn over the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlay {
    /// `tau Delta = L / xi_loc`.
    Evec,
    /// `1 - sqrt(Delta t / L)`.
    SmallGamma,
    /// Gaussian with the peak's time and width.
    Gaussian,
}

impl FigureId {
    pub const ALL: [FigureId; 9] = [
        Self::Fig1b,
        Self::Fig1c,
        Self::Fig1d,
        Self::Fig2,
        Self::Interference,
        Self::PCurves,
        Self::Heights,
        Self::SatFit,
        Self::RelaxCurves,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Fig1b => "fig1b",
            Self::Fig1c => "fig1c",
            Self::Fig1d => "fig1d",
            Self::Fig2 => "fig2",
            Self::Interference => "fig_interference",
            Self::PCurves => "fig_P_curves",
            Self::Heights => "fig_heights",
            Self::SatFit => "fig_sat_fit",
            Self::RelaxCurves => "fig_relax_curves",
        }
    }

    pub fn required_columns(self) -> &'static [&'static str] {
        match self {
            Self::Fig1b | Self::Fig1c | Self::Fig1d | Self::Fig2 | Self::SatFit => RELAXATION_COLUMNS,
            Self::Interference => INTERFERENCE_COLUMNS,
            Self::PCurves | Self::Heights => PROPAGATOR_COLUMNS,
            Self::RelaxCurves => TRAJECTORY_COLUMNS,
        }
    }

    pub fn overlay(self) -> Option<Overlay> {
        match self {
            Self::Fig1b | Self::Fig1c => Some(Overlay::Evec),
            Self::RelaxCurves => Some(Overlay::SmallGamma),
            Self::PCurves => Some(Overlay::Gaussian),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureRecipe {
    pub figure: FigureId,
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
}

#[derive(Debug, Error)]
pub enum FigsError {
    #[error("{path}: missing columns {missing:?}")]
    SchemaMismatch { path: PathBuf, missing: Vec<String> },
    #[error("{path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("output {0} must be .svg or .pdf")]
    OutputFormat(PathBuf),
}

impl FigsError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SchemaMismatch { .. } => "SchemaMismatch",
            Self::Unreadable { .. } => "Unreadable",
            Self::OutputFormat(_) => "OutputFormat",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedTable {
    pub path: PathBuf,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl LoadedTable {
    fn index(&self, name: &str) -> Result<usize, FigsError> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| FigsError::SchemaMismatch {
            path: self.path.clone(),
            missing: vec![name.to_string()],
        })
    }

    pub fn text(&self, name: &str) -> Result<Vec<&str>, FigsError> {
        let k = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    /// Numeric column; `-inf` and `inf` are accepted as written by the CLI.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>, FigsError> {
        let k = self.index(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[k].parse::<f64>().map_err(|e| FigsError::Unreadable {
                    path: self.path.clone(),
                    reason: format!("column {name}: '{}' {e}", r[k]),
                })
            })
            .collect()
    }
}

fn unreadable(path: &Path, reason: impl ToString) -> FigsError {
    FigsError::Unreadable { path: path.to_path_buf(), reason: reason.to_string() }
}

/// Reads a CSV and checks that every `required` column is present and that rows exist.
pub fn load_table(path: &Path, required: &[&str]) -> Result<LoadedTable, FigsError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| unreadable(path, e))?;
    let columns: Vec<String> = reader.headers().map_err(|e| unreadable(path, e))?.iter().map(str::to_string).collect();
    let mut missing: Vec<String> =
        required.iter().filter(|r| !columns.iter().any(|c| c == *r)).map(|r| r.to_string()).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| unreadable(path, e))?;
    if rows.is_empty() && missing.is_empty() {
        missing.push("<no rows>".into());
    }
    if !missing.is_empty() {
        return Err(FigsError::SchemaMismatch { path: path.to_path_buf(), missing });
    }
    Ok(LoadedTable { path: path.to_path_buf(), columns, rows })
}

/// Sidecar keys the plotting layer relies on.
pub const SIDECAR_KEYS: [&str; 6] = ["tool", "version", "status", "config", "columns", "wall_time_s"];

pub fn load_sidecar(path: &Path) -> Result<serde_json::Value, FigsError> {
    let text = fs::read_to_string(path).map_err(|e| unreadable(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| unreadable(path, e))?;
    let missing: Vec<String> = SIDECAR_KEYS.iter().filter(|k| value.get(**k).is_none()).map(|k| k.to_string()).collect();
    if !missing.is_empty() {
        return Err(FigsError::SchemaMismatch { path: path.to_path_buf(), missing });
    }
    Ok(value)
}

/// Loads every input of a recipe against the figure's schema.
pub fn validate(recipe: &FigureRecipe) -> Result<Vec<LoadedTable>, FigsError> {
    let ext = recipe.output.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext != "svg" && ext != "pdf" {
        return Err(FigsError::OutputFormat(recipe.output.clone()));
    }
    if recipe.inputs.is_empty() {
        return Err(FigsError::SchemaMismatch { path: recipe.output.clone(), missing: vec!["<no inputs>".into()] });
    }
    recipe.inputs.iter().map(|p| load_table(p, recipe.figure.required_columns())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_match_serde() {
        for f in FigureId::ALL {
            assert_eq!(serde_json::to_value(f).unwrap(), serde_json::Value::String(f.label().into()));
        }
    }
}
