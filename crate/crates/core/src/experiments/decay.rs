use super::ExperimentReport;
use crate::error::Result;
use crate::surface::{decay_fit, SurfaceQuadrature};

/// Direction-averaged `|dσ̂(r·)|` against `r`, with its log-log slope.
pub fn decay_report(
    quad: &SurfaceQuadrature,
    radii: &[f64],
    directions: &[Vec<f64>],
) -> Result<ExperimentReport> {
    let fit = decay_fit(quad, radii, directions)?;
    let mut report = ExperimentReport::new("decay", &["r", "rms_value"]);
    for (r, v) in fit.radii.iter().zip(&fit.rms_values) {
        report.push_row(vec![*r, *v]);
    }
    report.meta("surface", format!("{:?}", quad.kind()));
    report.meta("nodes", quad.len());
    report.meta("directions", directions.len());
    report.meta("aliasing_radius", quad.aliasing_radius());
    report.fit("decay_slope", fit.fit.slope, fit.fit.slope_stderr);
    Ok(report)
}
