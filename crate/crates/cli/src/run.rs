//! Runs a validated [`RunConfig`] and writes its output.

use std::io::Write as _;
use std::path::Path;

use clap::ArgMatches;
use schatten_core::experiments::{
    decay_report, decoupling_decay, noncompactness_probe, orthonormal_report, refined_strichartz_family,
    schatten_scan, semiclassical_scan, translation_scaling, unit_gaussian, ExperimentReport, FamilyConfig,
    OrthonormalTruncation, ProbeWindow, TranslationExperiment,
};
use schatten_core::grid::make_grid;
use schatten_core::region::{classify_mixed, region_boundary, ExponentQuery};
use schatten_core::surface::{
    circle_quadrature, flat_segment_quadrature, log_spaced, sample_directions, sphere_quadrature,
};
use schatten_core::SurfaceQuadrature;

use crate::config::{config_from_document, config_from_matches, Experiment, RunConfig};
use crate::output::{
    boundary_path, gnuplot_script, plot_path, recorded_config, render_csv, write_file, Table,
};
use crate::{CliError, EXIT_FLAGGED, EXIT_OK};

/// The result of a run before it is written out.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    /// Extra file written next to the CSV (region boundary polygon).
    pub boundary: Option<String>,
    /// First exceeded diagnostic, reported after the CSV is written.
    pub violation: Option<schatten_core::Error>,
}

pub fn dispatch(m: &ArgMatches) -> Result<i32, CliError> {
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let config = if name == "replay" {
        let path = sub.get_one::<String>("csv").expect("required");
        let mut c = replay_config(Path::new(path))?;
        c.output_path = sub.get_one::<String>("out").map(Into::into);
        c
    } else {
        let exp = Experiment::from_name(name).expect("subcommands mirror experiments");
        config_from_matches(exp, sub)?
    };
    execute(&config)
}

/// The config recorded in a CSV previously written by this tool.
pub fn replay_config(csv: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(csv).map_err(|e| CliError::Io(format!("cannot read {}: {e}", csv.display())))?;
    let json = recorded_config(&text)
        .ok_or_else(|| CliError::Config(format!("{} has no recorded config line", csv.display())))?;
    let doc = serde_json::from_str(json)
        .map_err(|e| CliError::Config(format!("recorded config in {} is not valid JSON: {e}", csv.display())))?;
    config_from_document(&doc)
}

/// Runs `config`, writes the CSV (and plot/boundary files) and returns the exit code.
pub fn execute(config: &RunConfig) -> Result<i32, CliError> {
    let out = run(config)?;
    let csv = render_csv(config, &out.table);
    match &config.output_path {
        Some(path) => {
            write_file(path, &csv)?;
            if config.emit_plot {
                write_file(&plot_path(path), &gnuplot_script(config, &out.table, path))?;
            }
            if let Some(b) = &out.boundary {
                write_file(&boundary_path(path), b)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(csv.as_bytes())
                .and_then(|_| match &out.boundary {
                    Some(b) => b.lines().try_for_each(|l| writeln!(stdout, "# boundary {l}")),
                    None => Ok(()),
                })
                .map_err(|e| CliError::Io(e.to_string()))?;
            if config.emit_plot {
                eprintln!("schatten-lab: --emit-plot needs --out; no plot written");
            }
        }
    }
    match out.violation {
        Some(e) => {
            eprintln!("schatten-lab: flagged: {e}");
            Ok(EXIT_FLAGGED)
        }
        None => Ok(EXIT_OK),
    }
}

fn usize_of(c: &RunConfig, key: &str) -> usize {
    c.int(key) as usize
}

fn usizes(c: &RunConfig, key: &str) -> Vec<usize> {
    c.ints(key).into_iter().map(|v| v as usize).collect()
}

fn quadrature(c: &RunConfig) -> Result<SurfaceQuadrature, CliError> {
    let k = usize_of(c, "nodes");
    Ok(match c.text("surface") {
        "circle" => circle_quadrature(k)?,
        "sphere" => sphere_quadrature(k)?,
        "flat" => flat_segment_quadrature(k, c.float("half_length"))?,
        other => return Err(CliError::Config(format!("parameter `surface`: unknown surface `{other}`"))),
    })
}

fn from_report(report: ExperimentReport) -> RunOutput {
    let violation = report.check_diagnostics().err();
    RunOutput {
        table: Table::from_report(&report),
        boundary: None,
        violation,
    }
}

/// Runs the experiment without touching the filesystem.
pub fn run(c: &RunConfig) -> Result<RunOutput, CliError> {
    let report = match c.experiment {
        Experiment::Decay => return run_decay(c),
        Experiment::Region => return run_region(c),
        Experiment::SchattenScan => {
            let quad = quadrature(c)?;
            let grid = make_grid(quad.ambient_dim(), usize_of(c, "points"), c.float("box"))?;
            schatten_scan(&quad, &grid, &c.floats("widths"), c.float("p"))?
        }
        Experiment::Semiclassical => semiclassical_scan(&quadrature(c)?, &c.floats("h_list"), c.float("p"))?,
        Experiment::Noncompact => {
            let grid = make_grid(1, usize_of(c, "points"), c.float("box"))?;
            let phi = unit_gaussian(&grid);
            let window = ProbeWindow {
                time_steps: usize_of(c, "time_steps"),
            };
            noncompactness_probe(&phi, &phi, &usizes(c, "n_list"), c.float("tau"), window)?
        }
        Experiment::TranslateScaling => {
            let grid = make_grid(1, usize_of(c, "points"), c.float("box"))?;
            let exp = TranslationExperiment::cosine_bump(&grid, c.float("dt"), c.float("width"), usizes(c, "n_list"))?;
            translation_scaling(&exp, &c.floats("t_schedule"))?
        }
        Experiment::Decoupling => {
            let grid = make_grid(1, usize_of(c, "points"), c.float("box"))?;
            let exp = TranslationExperiment::cosine_bump(&grid, c.float("dt"), c.float("width"), vec![1])?;
            decoupling_decay(&exp, &c.floats("t_list"))?
        }
        Experiment::Orthonormal => {
            let quad = circle_quadrature(usize_of(c, "nodes"))?;
            let trunc = OrthonormalTruncation {
                radius: c.float("radius"),
                dr: c.float("dr"),
                directions: usize_of(c, "directions"),
            };
            orthonormal_report(&quad, &usizes(c, "m_list"), c.float("p"), trunc)?
        }
        Experiment::Refined => refined_strichartz_family(&FamilyConfig {
            members: usize_of(c, "members"),
            seed: c.seed(),
            box_halfwidth: c.float("box"),
            coarse_points: usize_of(c, "coarse_points"),
            fine_points: usize_of(c, "fine_points"),
            t_half: c.float("t_half"),
            dt: c.float("dt"),
            q: c.float("q"),
        })?,
    };
    Ok(from_report(report))
}

fn run_decay(c: &RunConfig) -> Result<RunOutput, CliError> {
    let quad = quadrature(c)?;
    let radii = log_spaced(c.float("r_min"), c.float("r_max"), usize_of(c, "radii"));
    let directions = sample_directions(quad.ambient_dim(), usize_of(c, "directions"))?;
    let report = decay_report(&quad, &radii, &directions)?;
    let fit = report.fitted("decay_slope").cloned().expect("decay report carries its fit");
    let mut out = from_report(report);
    out.table.columns.extend(["fit_slope".to_string(), "fit_stderr".to_string()]);
    for row in &mut out.table.rows {
        row.push(fit.value.to_string());
        row.push(fit.stderr.to_string());
    }
    Ok(out)
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn run_region(c: &RunConfig) -> Result<RunOutput, CliError> {
    let d = u32::try_from(c.int("d")).map_err(|_| CliError::Config("parameter `d`: too large".into()))?;
    let queries: Vec<(f64, f64)> = match (c.get("q"), c.get("alpha")) {
        (Some(_), Some(_)) => vec![(c.float("q"), c.float("alpha"))],
        _ => {
            let q_lo = f64::from(d).max(2.0);
            let q_hi = match c.get("q_max") {
                Some(_) => c.float("q_max"),
                None => 2.0 * f64::from(d) + 4.0,
            };
            if q_hi <= q_lo {
                return Err(CliError::Config(format!("parameter `q_max`: must exceed {q_lo}, got {q_hi}")));
            }
            let steps = usize_of(c, "steps");
            let mut alphas = linspace(1.0, c.float("alpha_max"), steps);
            alphas.push(f64::INFINITY);
            linspace(q_lo, q_hi, steps)
                .into_iter()
                .flat_map(|q| alphas.iter().map(move |&a| (q, a)))
                .collect()
        }
    };
    let mut rows = Vec::with_capacity(queries.len());
    for (q, alpha) in queries {
        let v = classify_mixed(&ExponentQuery::new(d, q, alpha)?);
        rows.push(vec![
            d.to_string(),
            q.to_string(),
            alpha.to_string(),
            v.verdict.to_string(),
            v.reason.tag().to_string(),
        ]);
    }
    let boundary = if d >= 3 {
        let b = region_boundary(d)?;
        let mut s = String::from("inv_q_from,inv_alpha_from,inv_q_to,inv_alpha_to,kind,equation\n");
        for e in &b.edges {
            s.push_str(&format!(
                "{},{},{},{},{:?},{}\n",
                e.from.0, e.from.1, e.to.0, e.to.1, e.kind, e.equation
            ));
        }
        Some(s)
    } else {
        None
    };
    Ok(RunOutput {
        table: Table {
            columns: ["d", "q", "alpha", "verdict", "reason"].map(String::from).to_vec(),
            rows,
            provenance: Vec::new(),
        },
        boundary,
        violation: None,
    })
}
