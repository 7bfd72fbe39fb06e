//! Schatten norms of `W T_S W` for dilated Gaussian weights, normalized by
//! `‖W‖²_{L^{2p/(2-p)}}` so that a bounded ratio reflects the Schatten-class
//! restriction inequality with exponent `α(p)`.

use super::{join, ExperimentReport};
use crate::error::{Error, Result};
use crate::extension::build_weighted_operator;
use crate::grid::{lq_norm, Exponent, Field, GridSpec};
use crate::region::compact_alpha;
use crate::schatten::{schatten_norm, singular_values, weak_schatten_quasinorm};
use crate::stats::log_log_fit;
use crate::surface::SurfaceQuadrature;

/// Rows `(width, s_alpha, weak_alpha, w_norm_sq, ratio, rank)` for
/// `W(x) = e^{-|x|²/(2λ²)}`, `λ` in `widths`.
pub fn schatten_scan(
    quad: &SurfaceQuadrature,
    grid: &GridSpec,
    widths: &[f64],
    p: f64,
) -> Result<ExperimentReport> {
    if widths.is_empty() || widths.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::invalid("widths", "need positive widths"));
    }
    let alpha = compact_alpha(quad.ambient_dim() as u32, p)?;
    let exponent = if p >= 2.0 {
        Exponent::Infinity
    } else {
        Exponent::new(2.0 * p / (2.0 - p))?
    };
    // The weight must be negligible at the box edge for the torus to stand in for R^d.
    let widest = widths.iter().copied().fold(0.0, f64::max);
    if widest * 6.0 > grid.box_halfwidth() {
        return Err(Error::invalid(
            "widths",
            format!("width {widest} does not fit in a box of half-width {}", grid.box_halfwidth()),
        ));
    }

    let mut report = ExperimentReport::new(
        "schatten-scan",
        &["width", "s_alpha", "weak_alpha", "w_norm_sq", "ratio", "rank"],
    );
    for &lambda in widths {
        let w = Field::from_real_fn(grid, |x| {
            (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * lambda * lambda)).exp()
        });
        let op = build_weighted_operator(&w, &w, quad)?;
        let spec = singular_values(&op)?;
        let s_alpha = schatten_norm(&spec, alpha)?;
        let weak = if alpha.is_finite() {
            weak_schatten_quasinorm(&spec, alpha)?
        } else {
            spec.leading()
        };
        let norm_sq = lq_norm(&w, exponent).powi(2);
        report.push_row(vec![
            lambda,
            s_alpha,
            weak,
            norm_sq,
            s_alpha / norm_sq,
            spec.numerical_rank() as f64,
        ]);
    }
    if let Some(fit) = log_log_fit(widths, &report.column("ratio").expect("column exists")) {
        report.fit("ratio_vs_width", fit.slope, fit.slope_stderr);
    }
    report.meta("surface", format!("{:?}", quad.kind()));
    report.meta("nodes", quad.len());
    report.meta("grid", format!("{:?}", grid));
    report.meta("p", p);
    report.meta("alpha", alpha);
    report.meta("widths", join(widths));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::surface::circle_quadrature;

    #[test]
    fn trace_class_at_p_one() {
        // p = 1: α = 1, and W T_S W ≥ 0 has trace |S| ∫ W².
        let g = make_grid(2, 32, 8.0).unwrap();
        let q = circle_quadrature(32).unwrap();
        let r = schatten_scan(&q, &g, &[0.8, 1.2], 1.0).unwrap();
        for row in &r.rows {
            let lambda = row[0];
            let w = Field::from_real_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * lambda * lambda)).exp());
            let mass = w.norm_l2().powi(2);
            let trace = q.total_measure() * mass;
            assert!((row[1] - trace).abs() < 1e-8 * trace, "{} vs {trace}", row[1]);
            assert!((row[3] - mass).abs() < 1e-12 * mass);
        }
    }

    #[test]
    fn rejects_wide_weights() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let q = circle_quadrature(16).unwrap();
        assert!(schatten_scan(&q, &g, &[2.0], 1.0).is_err());
    }
}
