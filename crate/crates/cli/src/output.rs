//! CSV with `#` provenance lines, and gnuplot scripts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use schatten_core::experiments::ExperimentReport;

use crate::config::RunConfig;
use crate::CliError;

/// Prefix of the provenance line carrying the replayable config.
pub const CONFIG_PREFIX: &str = "# config: ";

/// A finished table: column names, rows of pre-rendered cells and extra
/// provenance lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub provenance: Vec<String>,
}

impl Table {
    pub fn from_report(report: &ExperimentReport) -> Self {
        let mut provenance = Vec::new();
        for (k, v) in &report.metadata {
            provenance.push(format!("meta {k} = {v}"));
        }
        for f in &report.fitted_exponents {
            provenance.push(format!("fit {} = {} ± {}", f.name, f.value, f.stderr));
        }
        for d in &report.diagnostics {
            let status = if d.passed() { "ok" } else { "EXCEEDED" };
            provenance.push(format!("diagnostic {} = {} (threshold {}) {status}", d.name, d.value, d.threshold));
        }
        Self {
            columns: report.columns.clone(),
            rows: report
                .rows
                .iter()
                .map(|r| r.iter().map(f64::to_string).collect())
                .collect(),
            provenance,
        }
    }
}

/// Recorded copy of `config`: the output location is not part of the run.
pub fn provenance_config(config: &RunConfig) -> RunConfig {
    RunConfig {
        output_path: None,
        emit_plot: false,
        ..config.clone()
    }
}

pub fn render_csv(config: &RunConfig, table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# schatten-lab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# experiment: {}", config.experiment);
    let _ = writeln!(s, "# seed: {}", config.seed());
    let _ = writeln!(s, "{CONFIG_PREFIX}{}", provenance_config(config).to_json());
    for line in &table.provenance {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "{}", table.columns.join(","));
    for row in &table.rows {
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// The config JSON recorded in a CSV written by [`render_csv`].
pub fn recorded_config(csv: &str) -> Option<&str> {
    csv.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn plot_path(csv: &Path) -> PathBuf {
    sibling(csv, ".gp")
}

pub fn boundary_path(csv: &Path) -> PathBuf {
    sibling(csv, ".boundary.csv")
}

/// Gnuplot script plotting every numeric column against the first.
pub fn gnuplot_script(config: &RunConfig, table: &Table, csv: &Path) -> String {
    let file = csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {file}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{}'", config.experiment);
    let _ = writeln!(s, "set xlabel '{}'", table.columns.first().map(String::as_str).unwrap_or(""));
    let numeric: Vec<usize> = (1..table.columns.len())
        .filter(|&i| table.rows.iter().all(|r| r[i].parse::<f64>().is_ok()))
        .collect();
    let positive = |i: usize| table.rows.iter().all(|r| r[i].parse::<f64>().is_ok_and(|v| v > 0.0));
    if positive(0) && numeric.iter().all(|&i| positive(i)) {
        let _ = writeln!(s, "set logscale xy");
    }
    let series: Vec<String> = numeric
        .iter()
        .map(|i| format!("'{file}' using 1:{} with linespoints", i + 1))
        .collect();
    let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
