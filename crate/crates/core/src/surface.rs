//! Quadrature discretizations of hypersurfaces with their measures, the
//! Fourier transform of the surface measure, and decay-exponent fits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{log_log_fit, LinearFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SurfaceKind {
    Circle,
    Sphere,
    FlatSegment,
    Paraboloid,
}

/// Nodes `ξ_k ∈ R^N` with positive weights `w_k` discretizing `(S, dσ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceQuadrature {
    ambient_dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: SurfaceKind,
    curvature_nonvanishing: bool,
    node_spacing: f64,
}

impl SurfaceQuadrature {
    fn build(
        ambient_dim: usize,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        kind: SurfaceKind,
        node_spacing: f64,
    ) -> Self {
        debug_assert_eq!(nodes.len(), weights.len() * ambient_dim);
        debug_assert!(weights.iter().all(|w| *w > 0.0));
        Self {
            ambient_dim,
            nodes,
            weights,
            kind,
            curvature_nonvanishing: kind != SurfaceKind::FlatSegment,
            node_spacing,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.ambient_dim..(k + 1) * self.ambient_dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.ambient_dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn curvature_nonvanishing(&self) -> bool {
        self.curvature_nonvanishing
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Typical distance between neighbouring nodes.
    pub fn node_spacing(&self) -> f64 {
        self.node_spacing
    }

    /// Largest `|x|` at which `dσ̂(x)` is resolved by the nodes, `≈ π / spacing`.
    pub fn aliasing_radius(&self) -> f64 {
        PI / self.node_spacing
    }

    /// `max_k |ξ_k|_∞`.
    pub fn max_abs_coordinate(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `K` equispaced nodes on the unit circle with weights `2π/K`.
pub fn circle_quadrature(k: usize) -> Result<SurfaceQuadrature> {
    if k < 8 {
        return Err(Error::invalid("K", format!("circle needs K ≥ 8, got {k}")));
    }
    let step = 2.0 * PI / k as f64;
    let nodes = (0..k)
        .flat_map(|j| {
            let t = j as f64 * step;
            [t.cos(), t.sin()]
        })
        .collect();
    Ok(SurfaceQuadrature::build(
        2,
        nodes,
        vec![step; k],
        SurfaceKind::Circle,
        step,
    ))
}

/// Fibonacci lattice on the unit 2-sphere with equal weights `4π/K`.
pub fn sphere_quadrature(k: usize) -> Result<SurfaceQuadrature> {
    if k < 64 {
        return Err(Error::invalid("K", format!("sphere needs K ≥ 64, got {k}")));
    }
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let nodes = (0..k)
        .flat_map(|j| {
            let z = 1.0 - (2 * j + 1) as f64 / k as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = j as f64 * golden_angle;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    let area = 4.0 * PI;
    Ok(SurfaceQuadrature::build(
        3,
        nodes,
        vec![area / k as f64; k],
        SurfaceKind::Sphere,
        (area / k as f64).sqrt(),
    ))
}

/// Midpoint nodes on `{ξ₁ = 0} × [-ℓ, ℓ] ⊂ R²`, weights `2ℓ/K`.
pub fn flat_segment_quadrature(k: usize, half_length: f64) -> Result<SurfaceQuadrature> {
    if k < 8 {
        return Err(Error::invalid("K", format!("segment needs K ≥ 8, got {k}")));
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::invalid("half_length", "must be positive"));
    }
    let step = 2.0 * half_length / k as f64;
    let nodes = (0..k)
        .flat_map(|j| [0.0, -half_length + (j as f64 + 0.5) * step])
        .collect();
    Ok(SurfaceQuadrature::build(
        2,
        nodes,
        vec![step; k],
        SurfaceKind::FlatSegment,
        step,
    ))
}

/// Nodes `(ξ, -|ξ|²) ∈ R^{d+1}` for `ξ` on the periodic-style lattice
/// `-ξ_max + iΔ`, `Δ = 2ξ_max / n`, carrying the push-forward of Lebesgue
/// measure (weight `Δ^d`), so that `L²(S) ≅ L²(R^d)`.
pub fn paraboloid_quadrature(
    d: usize,
    xi_max: f64,
    nodes_per_axis: usize,
) -> Result<SurfaceQuadrature> {
    if !(1..=2).contains(&d) {
        return Err(Error::invalid("d", format!("paraboloid supports d ∈ {{1, 2}}, got {d}")));
    }
    if !(xi_max > 0.0 && xi_max.is_finite()) {
        return Err(Error::invalid("xi_max", "must be positive"));
    }
    if nodes_per_axis < 8 {
        return Err(Error::invalid(
            "nodes_per_axis",
            format!("need at least 8, got {nodes_per_axis}"),
        ));
    }
    let step = 2.0 * xi_max / nodes_per_axis as f64;
    let axis: Vec<f64> = (0..nodes_per_axis)
        .map(|i| -xi_max + i as f64 * step)
        .collect();
    let mut nodes = Vec::new();
    match d {
        1 => {
            for &a in &axis {
                nodes.extend([a, -a * a]);
            }
        }
        _ => {
            for &a in &axis {
                for &b in &axis {
                    nodes.extend([a, b, -(a * a + b * b)]);
                }
            }
        }
    }
    let count = nodes_per_axis.pow(d as u32);
    let spacing = step * (1.0 + 4.0 * xi_max * xi_max).sqrt();
    Ok(SurfaceQuadrature::build(
        d + 1,
        nodes,
        vec![step.powi(d as i32); count],
        SurfaceKind::Paraboloid,
        spacing,
    ))
}

/// `dσ̂(x) = Σ_k w_k e^{i x·ξ_k}`.
pub fn fourier_transform_of_measure(quad: &SurfaceQuadrature, x: &[f64]) -> Result<Complex64> {
    if x.len() != quad.ambient_dim() {
        return Err(Error::invalid(
            "x",
            format!("point has dimension {}, surface lives in R^{}", x.len(), quad.ambient_dim()),
        ));
    }
    Ok(measure_transform_unchecked(quad, x))
}

pub(crate) fn measure_transform_unchecked(quad: &SurfaceQuadrature, x: &[f64]) -> Complex64 {
    quad.nodes()
        .zip(quad.weights())
        .map(|(xi, w)| {
            let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
            Complex64::from_polar(*w, phase)
        })
        .sum()
}

/// Evenly spread unit vectors: half-circle angles in 2-D, a Fibonacci set in 3-D.
pub fn sample_directions(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::invalid("directions", "need at least one"));
    }
    match dim {
        2 => Ok((0..count)
            .map(|j| {
                let a = PI * (j as f64 + 0.25) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()),
        3 => {
            let golden_angle = PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|j| {
                    let z = 1.0 - (2 * j + 1) as f64 / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = j as f64 * golden_angle;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::invalid("dim", format!("directions for dim {dim} unsupported"))),
    }
}

/// Samples per radius in the radial RMS window.
pub const DECAY_WINDOW_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub radii: Vec<f64>,
    /// RMS of `|dσ̂|` over directions and one oscillation period around each radius.
    pub rms_values: Vec<f64>,
    pub fit: LinearFit,
}

/// Log-log slope of the direction-averaged `|dσ̂(r u)|` against `r`.
///
/// `dσ̂` of a curved surface oscillates (Bessel zeros), so each radius is
/// averaged in root-mean-square over the directions and over a radial window
/// of half-width `min(π, r_min/2)` centred on it before the fit.
pub fn decay_fit(
    quad: &SurfaceQuadrature,
    radii: &[f64],
    directions: &[Vec<f64>],
) -> Result<DecayFit> {
    if radii.len() < 2 {
        return Err(Error::invalid("radii", "need at least two radii"));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::invalid("radii", "must be positive and increasing"));
    }
    let r_min = radii[0];
    let r_max = radii[radii.len() - 1];
    if r_max < 10.0 * r_min {
        return Err(Error::invalid("radii", "must span at least one decade"));
    }
    if quad.curvature_nonvanishing() && directions.len() < 8 {
        return Err(Error::invalid(
            "directions",
            format!("curved surfaces need ≥ 8 directions, got {}", directions.len()),
        ));
    }
    if directions.is_empty() {
        return Err(Error::invalid("directions", "need at least one"));
    }
    for u in directions {
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if u.len() != quad.ambient_dim() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("directions", "must be unit vectors in R^N"));
        }
    }
    let half_window = PI.min(r_min / 2.0);
    if r_max + half_window > quad.aliasing_radius() {
        return Err(Error::Unresolvable(format!(
            "radius {:.3} exceeds aliasing radius {:.3} of the quadrature",
            r_max + half_window,
            quad.aliasing_radius()
        )));
    }

    let rms_values: Vec<f64> = radii
        .par_iter()
        .map(|&r| {
            let mut acc = 0.0;
            let mut count = 0usize;
            let mut x = vec![0.0; quad.ambient_dim()];
            for j in 0..DECAY_WINDOW_SAMPLES {
                let offset =
                    half_window * (2.0 * (j as f64 + 0.5) / DECAY_WINDOW_SAMPLES as f64 - 1.0);
                for u in directions {
                    for (xi, ui) in x.iter_mut().zip(u) {
                        *xi = (r + offset) * ui;
                    }
                    acc += measure_transform_unchecked(quad, &x).norm_sqr();
                    count += 1;
                }
            }
            (acc / count as f64).sqrt()
        })
        .collect();

    let fit = log_log_fit(radii, &rms_values).ok_or_else(|| {
        Error::NumericalBreakdown("decay fit needs strictly positive RMS values".into())
    })?;
    Ok(DecayFit {
        radii: radii.to_vec(),
        rms_values,
        fit,
    })
}

/// `count` log-spaced radii from `r_min` to `r_max` inclusive.
pub fn log_spaced(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![r_min];
    }
    let ratio = (r_max / r_min).ln() / (count - 1) as f64;
    (0..count).map(|i| r_min * (ratio * i as f64).exp()).collect()
}
