//! `‖Σ_{k ≤ M} |R_S* e_k|²‖_{L^{p'/2}(R²)}` for the orthonormal system
//! `e_k(θ) = e^{ikθ}/√(2π)` on the unit circle, compared with the
//! triangle-inequality bound (linear in `M`) and `M^{1/α'}`.
//!
//! The whole-plane norm is approximated on a disc of radius `R` in polar
//! coordinates. The radial mass beyond `R` is extrapolated from the two
//! outermost shells assuming power-law decay.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{join, ExperimentReport};
use crate::error::{Error, Result};
use crate::region::{compact_alpha, dual_exponent};
use crate::stats::log_log_fit;
use crate::surface::{SurfaceKind, SurfaceQuadrature};

/// Largest admissible extrapolated tail, as a fraction of the total integral.
pub const TAIL_THRESHOLD: f64 = 0.05;

/// Polar sampling of the disc `|x| < radius`: midpoint radii with step `dr`
/// along `directions` rays spread over a quarter turn (the circle's symmetry
/// group contains rotations by `π/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthonormalTruncation {
    pub radius: f64,
    pub dr: f64,
    pub directions: usize,
}

impl Default for OrthonormalTruncation {
    fn default() -> Self {
        Self {
            radius: 640.0,
            dr: 0.25,
            directions: 4,
        }
    }
}

fn require_circle(quad: &SurfaceQuadrature) -> Result<()> {
    if quad.kind() != SurfaceKind::Circle {
        return Err(Error::invalid("quad", "needs the circle quadrature"));
    }
    Ok(())
}

/// `(R_S* e_k)(x) = Σ_j w_j e^{ikθ_j} e^{ix·ξ_j} / √(2π)` for `k = 1..=m`.
fn extensions_at(quad: &SurfaceQuadrature, x: &[f64], m: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let k = quad.len();
    let mut buf: Vec<Complex64> = (0..k)
        .map(|j| {
            let xi = quad.node(j);
            Complex64::from_polar(quad.weights()[j] / (2.0 * PI).sqrt(), x[0] * xi[0] + x[1] * xi[1])
        })
        .collect();
    // Unnormalized inverse DFT: Σ_j c_j e^{2πi jk/K} with θ_j = 2πj/K.
    planner.plan_fft_inverse(k).process(&mut buf);
    buf[1..=m].to_vec()
}

/// `Σ_k ν_k |R_S* e_k(x)|²`, with `ν_k` the coefficient of `e_{k+1}`.
pub fn circle_extension_density(quad: &SurfaceQuadrature, coefficients: &[f64], x: &[f64]) -> Result<f64> {
    require_circle(quad)?;
    if x.len() != 2 {
        return Err(Error::invalid("x", "need a point in R²"));
    }
    if coefficients.is_empty() || coefficients.len() >= quad.len() / 2 {
        return Err(Error::invalid("coefficients", "need 1 ≤ M < K/2"));
    }
    let mut planner = FftPlanner::new();
    let values = extensions_at(quad, x, coefficients.len(), &mut planner);
    Ok(values.iter().zip(coefficients).map(|(v, nu)| nu * v.norm_sqr()).sum())
}

/// `m2 / m1` for radial mass `∝ r^{-s}` on shells `[0.8, 0.9)` and `[0.9, 1)`.
fn shell_ratio(s: f64) -> f64 {
    let a = 0.8f64.powf(1.0 - s);
    let b = 0.9f64.powf(1.0 - s);
    (1.0 - b) / (b - a)
}

/// Mass beyond the disc implied by the outer shells, or `∞` if the fitted
/// decay is not integrable.
fn extrapolated_tail(m1: f64, m2: f64) -> f64 {
    if m2 == 0.0 {
        return 0.0;
    }
    if m1 <= 0.0 {
        return f64::INFINITY;
    }
    let target = m2 / m1;
    // shell_ratio decreases in s; s = 1 is the borderline of integrability.
    let (mut lo, mut hi) = (1.0 + 1e-9, 60.0);
    if target >= shell_ratio(lo) {
        return f64::INFINITY;
    }
    if target <= shell_ratio(hi) {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shell_ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    m2 / (0.9f64.powf(1.0 - s) - 1.0)
}

struct Truncated {
    norm: f64,
    tail_fraction: f64,
}

/// `(∫ f^s)^{1/s}` from radial samples of `f` (averaged over directions),
/// including the extrapolated tail.
fn truncated_norm(radial: &[f64], radii: &[f64], dr: f64, s: f64, radius: f64) -> Truncated {
    let (mut total, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (f, r) in radial.iter().zip(radii) {
        let mass = f * 2.0 * PI * r * dr;
        total += mass;
        if *r >= 0.9 * radius {
            m2 += mass;
        } else if *r >= 0.8 * radius {
            m1 += mass;
        }
    }
    let tail = extrapolated_tail(m1, m2);
    let tail_fraction = if tail.is_infinite() {
        1.0
    } else if total + tail == 0.0 {
        0.0
    } else {
        tail / (total + tail)
    };
    Truncated {
        norm: (total + if tail.is_finite() { tail } else { 0.0 }).powf(1.0 / s),
        tail_fraction,
    }
}

/// Rows `(M, lhs, alpha_bound, triangle_bound, ratio, tail_fraction)` with
/// `lhs = ‖Σ_{k ≤ M} |R_S* e_k|²‖_{L^{p'/2}}`, `alpha_bound = M^{1/α'}` for
/// `α = α(p)`, `triangle_bound = Σ_{k ≤ M} ‖R_S* e_k‖²_{L^{p'}}` and
/// `ratio = lhs / alpha_bound`. Fails with a diagnostic violation when the
/// extrapolated tail exceeds [`TAIL_THRESHOLD`].
pub fn orthonormal_ratio(
    quad: &SurfaceQuadrature,
    m_list: &[usize],
    p: f64,
    trunc: OrthonormalTruncation,
) -> Result<ExperimentReport> {
    let report = orthonormal_report(quad, m_list, p, trunc)?;
    report.check_diagnostics()?;
    Ok(report)
}

/// [`orthonormal_ratio`] without the tail check; the `tail_fraction`
/// diagnostic is still recorded.
pub fn orthonormal_report(
    quad: &SurfaceQuadrature,
    m_list: &[usize],
    p: f64,
    trunc: OrthonormalTruncation,
) -> Result<ExperimentReport> {
    require_circle(quad)?;
    let alpha = compact_alpha(2, p)?;
    if !(p > 1.0) {
        return Err(Error::invalid("p", "need p > 1 so that p' is finite"));
    }
    let s = dual_exponent(p)? / 2.0;
    let alpha_dual = if alpha == 1.0 { f64::INFINITY } else { dual_exponent(alpha)? };
    if m_list.is_empty() || m_list.iter().any(|&m| m == 0) {
        return Err(Error::invalid("M_list", "need positive M values"));
    }
    let m_max = *m_list.iter().max().expect("nonempty");
    if m_max >= quad.len() / 2 {
        return Err(Error::invalid("M_list", format!("M = {m_max} needs K > 2M nodes")));
    }
    if !(trunc.radius > 0.0 && trunc.dr > 0.0 && trunc.dr < trunc.radius) || trunc.directions == 0 {
        return Err(Error::invalid("truncation", "need 0 < dr < radius and ≥ 1 direction"));
    }
    if trunc.radius > quad.aliasing_radius() {
        return Err(Error::Unresolvable(format!(
            "disc radius {} exceeds the aliasing radius {:.3} of the quadrature",
            trunc.radius,
            quad.aliasing_radius()
        )));
    }
    if trunc.dr > 0.5 * PI {
        return Err(Error::invalid("truncation", "radial step does not resolve unit frequencies"));
    }
    let count = (trunc.radius / trunc.dr).round() as usize;
    let radii: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) * trunc.dr).collect();
    let angles: Vec<f64> = (0..trunc.directions)
        .map(|i| 0.5 * PI * i as f64 / trunc.directions as f64 + 0.1)
        .collect();

    // Per radius: direction-averaged (ρ_M)^s for every M in the list, and
    // |R* e_k|^{2s} for every k up to max M.
    let per_radius: Vec<(Vec<f64>, Vec<f64>)> = radii
        .par_iter()
        .map_init(FftPlanner::new, |planner, &r| {
            let mut dens = vec![0.0; m_list.len()];
            let mut single = vec![0.0; m_max];
            for a in &angles {
                let x = [r * a.cos(), r * a.sin()];
                let ext = extensions_at(quad, &x, m_max, planner);
                let mut prefix = Vec::with_capacity(m_max);
                let mut acc = 0.0;
                for (k, v) in ext.iter().enumerate() {
                    let e = v.norm_sqr();
                    acc += e;
                    prefix.push(acc);
                    single[k] += e.powf(s);
                }
                for (d, &m) in dens.iter_mut().zip(m_list) {
                    *d += prefix[m - 1].powf(s);
                }
            }
            let n = angles.len() as f64;
            dens.iter_mut().for_each(|d| *d /= n);
            single.iter_mut().for_each(|d| *d /= n);
            (dens, single)
        })
        .collect();

    let singles: Vec<Truncated> = (0..m_max)
        .map(|k| {
            let radial: Vec<f64> = per_radius.iter().map(|(_, s1)| s1[k]).collect();
            truncated_norm(&radial, &radii, trunc.dr, 2.0 * s, trunc.radius)
        })
        .collect();

    let mut report = ExperimentReport::new(
        "orthonormal",
        &["M", "lhs", "alpha_bound", "triangle_bound", "ratio", "tail_fraction"],
    );
    for (i, &m) in m_list.iter().enumerate() {
        let radial: Vec<f64> = per_radius.iter().map(|(d, _)| d[i]).collect();
        let lhs = truncated_norm(&radial, &radii, trunc.dr, s, trunc.radius);
        // ‖R* e_k‖²_{L^{p'}} = (∫ |R* e_k|^{2s})^{1/s}.
        let triangle: f64 = singles[..m].iter().map(|t| t.norm * t.norm).sum();
        let alpha_bound = (m as f64).powf(1.0 / alpha_dual);
        report.push_row(vec![
            m as f64,
            lhs.norm,
            alpha_bound,
            triangle,
            lhs.norm / alpha_bound,
            lhs.tail_fraction,
        ]);
    }

    let ms: Vec<f64> = m_list.iter().map(|&m| m as f64).collect();
    if let Some(fit) = log_log_fit(&ms, &report.column("lhs").expect("column exists")) {
        report.fit("lhs_growth", fit.slope, fit.slope_stderr);
    }
    let worst = report
        .column("tail_fraction")
        .expect("column exists")
        .into_iter()
        .fold(0.0, f64::max);
    report.meta("nodes", quad.len());
    report.meta("p", p);
    report.meta("alpha", alpha);
    report.meta("radius", trunc.radius);
    report.meta("dr", trunc.dr);
    report.meta("directions", trunc.directions);
    report.meta("M_list", join(&ms));
    report.diagnose("tail_fraction", worst, TAIL_THRESHOLD);
    Ok(report)
}
