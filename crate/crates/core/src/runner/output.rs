//! CSV and JSON artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Scenario;
use crate::error::{Error, Result};
use crate::fem1d::Mesh;
use crate::field::Field;
use crate::optim::Termination;

/// Fields of one time level for a snapshot.
pub struct SnapshotFields<'a> {
    pub h: &'a [f64],
    pub s: &'a [f64],
    pub mu: &'a [f64],
    pub f: &'a [f64],
}

/// Snapshot CSV `x,h,s,H,mu,f` with `H = h + s`. With `mirror`, the rows for
/// `x in [-L, 0)` reflect `(0, L]`, giving `2n - 1` rows.
pub fn snapshot_csv(mesh: &Mesh, fields: &SnapshotFields, mirror: bool) -> String {
    let n = mesh.n_nodes();
    let mut out = String::from("x,h,s,H,mu,f\n");
    let mut row = |x: f64, i: usize| {
        let (h, s) = (fields.h[i], fields.s[i]);
        let _ = writeln!(
            out,
            "{x},{h},{s},{},{},{}",
            h + s,
            fields.mu[i],
            fields.f[i]
        );
    };
    if mirror {
        for i in (1..n).rev() {
            row(-mesh.node(i), i);
        }
    }
    for i in 0..n {
        row(mesh.node(i), i);
    }
    out
}

pub fn write_snapshot(
    path: &Path,
    mesh: &Mesh,
    fields: &SnapshotFields,
    mirror: bool,
) -> Result<()> {
    write_text(path, &snapshot_csv(mesh, fields, mirror))
}

/// Levels written as snapshots: every `every` steps plus the final level.
pub fn snapshot_levels(n_steps: usize, every: Option<usize>) -> Vec<usize> {
    let every = every.unwrap_or_else(|| n_steps.div_ceil(100)).max(1);
    let mut levels: Vec<usize> = (0..=n_steps).step_by(every).collect();
    if levels.last() != Some(&n_steps) {
        levels.push(n_steps);
    }
    levels
}

/// Two-column `x,value` field file.
pub fn write_field(path: &Path, mesh: &Mesh, values: &[f64]) -> Result<()> {
    let mut out = String::from("x,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", mesh.node(i));
    }
    write_text(path, &out)
}

/// Reads an `x,value` field file. The node count must match the mesh; a
/// non-numeric first line is treated as a header.
pub fn read_field(path: &Path, mesh: &Mesh) -> Result<Field> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, message: String| Error::Config {
        path: path.display().to_string(),
        line,
        key: "field".into(),
        message,
    };
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let value = match cols.as_slice() {
            [_, v] | [v] => v.parse::<f64>(),
            _ => return Err(bad(idx + 1, format!("expected `x,value`, got `{line}`"))),
        };
        match value {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(bad(idx + 1, "non-finite value".into())),
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(bad(idx + 1, format!("cannot parse `{line}`"))),
        }
    }
    if values.len() != mesh.n_nodes() {
        return Err(bad(
            0,
            format!(
                "{} values for a mesh of {} nodes",
                values.len(),
                mesh.n_nodes()
            ),
        ));
    }
    Ok(Field::new(values))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Forward,
    Optimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: Scenario,
    pub mode: Mode,
    pub status: String,
    pub termination: Option<Termination>,
    pub message: Option<String>,
    pub iterations: Option<usize>,
    pub initial_cost: Option<f64>,
    pub final_cost: Option<f64>,
    pub final_grad_norm: Option<f64>,
    /// Max over time levels of `‖(h + beta s)^k - target‖∞`.
    pub final_linf_err: Option<f64>,
    /// `‖(h + beta s)^N - target‖∞`.
    pub terminal_linf_err: Option<f64>,
    pub uncontrolled_terminal_linf_err: Option<f64>,
    /// `‖h^N - h^{N-1}‖∞ / dt` of the run that generated a steady target.
    pub target_rate: Option<f64>,
    pub mass_reachable: Option<bool>,
    pub mass_drift: Option<f64>,
    pub min_h: Option<f64>,
    pub energy_max_residual: Option<f64>,
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
    /// Only recorded on request so artifacts stay byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
}

impl RunSummary {
    pub fn new(scenario: Scenario, mode: Mode) -> Self {
        RunSummary {
            scenario,
            mode,
            status: "ok".into(),
            termination: None,
            message: None,
            iterations: None,
            initial_cost: None,
            final_cost: None,
            final_grad_norm: None,
            final_linf_err: None,
            terminal_linf_err: None,
            uncontrolled_terminal_linf_err: None,
            target_rate: None,
            mass_reachable: None,
            mass_drift: None,
            min_h: None,
            energy_max_residual: None,
            notes: Vec::new(),
            files: Vec::new(),
            wall_time_s: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
