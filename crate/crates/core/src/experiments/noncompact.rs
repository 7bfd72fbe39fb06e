//! Non-compactness of `W̄ T_S W` at the endpoint: for time-independent
//! `V = |W|²` the operator `Γ_V` commutes with the free group, so
//! `⟨φ_n, Γ_V φ_n⟩` with `φ_n = e^{inτΔ} φ` does not decay even though
//! `φ_n ⇀ 0`. A potential living in a single time cell gives the contrast.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{join, ExperimentReport};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::propagator::{gamma_from_slices, revival_period, FreeEvolution};

/// Time discretization of the probe: the window is one revival period of
/// the torus, split into `time_steps` cells, so that `Γ_V` of a
/// time-independent `V` commutes exactly with `e^{iτΔ}` for `τ` a multiple of
/// the cell length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeWindow {
    pub time_steps: usize,
}

/// `π^{-d/4} e^{-|x|²/2}`, unit mass in `L²(R^d)`.
pub fn unit_gaussian(grid: &GridSpec) -> Field {
    let c = PI.powf(-(grid.dim() as f64) / 4.0);
    Field::from_real_fn(grid, |x| c * (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp())
}

fn relative_variation(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        0.0
    } else {
        (max - min) / mean.abs()
    }
}

/// Rows `(n, t, value, contrast)`: `value = ⟨φ_n, Γ_{|W|²} φ_n⟩` over the full
/// periodic window, `contrast` the same with `|W|²` kept only in the cell at `t = 0`.
pub fn noncompactness_probe(
    w: &Field,
    phi: &Field,
    n_list: &[usize],
    tau: f64,
    window: ProbeWindow,
) -> Result<ExperimentReport> {
    w.grid().ensure_same(phi.grid(), "probe")?;
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "need at least one n"));
    }
    if window.time_steps < 2 {
        return Err(Error::invalid("time_steps", "need at least 2 cells"));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", "must be positive"));
    }
    let grid = w.grid();
    let period = revival_period(grid);
    let dt = period / window.time_steps as f64;
    let tau_steps = (tau / dt).round().max(1.0) as usize;
    let n_max = *n_list.iter().max().expect("nonempty");
    if tau_steps * n_max >= window.time_steps {
        return Err(Error::invalid(
            "tau",
            format!(
                "τ·max(n) = {:.3} exceeds the periodic window {period:.3}",
                tau_steps as f64 * dt * n_max as f64
            ),
        ));
    }
    let tau_eff = tau_steps as f64 * dt;

    let v = w.map(|z| Complex64::new(z.norm_sqr(), 0.0));
    let slices: Vec<(f64, &Field)> = (0..window.time_steps).map(|i| (i as f64 * dt, &v)).collect();
    let gamma = gamma_from_slices(grid, dt, &slices)?;
    let local = gamma_from_slices(grid, dt, &slices[..1])?;

    let evo = FreeEvolution::new(grid);
    let mut report = ExperimentReport::new("noncompact", &["n", "t", "value", "contrast"]);
    for &n in n_list {
        let t = n as f64 * tau_eff;
        let phi_n = evo.evolve(phi, t);
        let value = gamma.expectation(&phi_n)?.re;
        let contrast = local.expectation(&phi_n)?.re;
        report.push_row(vec![n as f64, t, value, contrast]);
    }

    let values = report.column("value").expect("column exists");
    let contrast = report.column("contrast").expect("column exists");
    let first = n_list.iter().position(|&n| n == *n_list.iter().min().unwrap()).unwrap();
    let last = n_list.iter().position(|&n| n == n_max).unwrap();
    let retained = if contrast[first] == 0.0 {
        0.0
    } else {
        contrast[last] / contrast[first]
    };

    report.meta("grid", format!("{:?}", grid));
    report.meta("window", period);
    report.meta("dt", dt);
    report.meta("tau", tau_eff);
    report.meta("n_list", join(&n_list.iter().map(|&n| n as f64).collect::<Vec<_>>()));
    report.diagnose("value_variation", relative_variation(&values), 0.01);
    report.diagnose("contrast_retained", retained, 0.5);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn zero_weight_gives_zero() {
        let g = make_grid(1, 32, 6.0).unwrap();
        let r = noncompactness_probe(
            &Field::zeros(&g),
            &unit_gaussian(&g),
            &[0, 1, 2],
            0.5,
            ProbeWindow { time_steps: 256 },
        )
        .unwrap();
        assert!(r.column("value").unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn window_too_short_rejected() {
        let g = make_grid(1, 32, 4.0).unwrap();
        let phi = unit_gaussian(&g);
        let err = noncompactness_probe(&phi, &phi, &[0, 100], 1.0, ProbeWindow { time_steps: 64 });
        assert!(err.is_err());
    }

    #[test]
    fn coarse_probe_is_flat() {
        let g = make_grid(1, 64, 8.0).unwrap();
        let phi = unit_gaussian(&g);
        let r = noncompactness_probe(&phi, &phi, &[0, 2, 4], 0.5, ProbeWindow { time_steps: 512 })
            .unwrap();
        assert!(r.diagnostic("value_variation").unwrap().value < 1e-8);
        assert!(r.column("value").unwrap()[0] > 0.0);
    }
}
