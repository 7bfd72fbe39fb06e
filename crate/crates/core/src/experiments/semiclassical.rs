//! The kernel `γ_h(ξ, ξ') = ∫_{|x| ≤ 1/h} e^{ix·(ξ - ξ')} dx` restricted to a
//! surface, and how its spectrum grows as `h → 0`.

use nalgebra::DMatrix;

use super::{join, ExperimentReport};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::region::compact_alpha;
use crate::schatten::{schatten_norm, SingularSpectrum};
use crate::special::{ball_indicator_transform, ball_volume};
use crate::stats::log_log_fit;
use crate::surface::SurfaceQuadrature;

/// `γ_h` sampled on the quadrature nodes. The kernel depends only on
/// `|ξ_k - ξ_l|` and is real, so it is stored as a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SemiclassicalKernel {
    h: f64,
    quad: SurfaceQuadrature,
    matrix: DMatrix<f64>,
}

impl SemiclassicalKernel {
    pub fn new(quad: &SurfaceQuadrature, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid("h", format!("{h} is not a positive real")));
        }
        let dim = quad.ambient_dim();
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid("quad", format!("ambient dimension {dim} not in 1..=3")));
        }
        if quad.node_spacing() > h {
            return Err(Error::Unresolvable(format!(
                "node spacing {:.4} exceeds h = {h}; need more nodes",
                quad.node_spacing()
            )));
        }
        let radius = 1.0 / h;
        let k = quad.len();
        // c_N h^{-N}, evaluated without going through 1/h.
        let diagonal = ball_volume(dim, 1.0) / h.powi(dim as i32);
        let matrix = DMatrix::from_fn(k, k, |a, b| {
            if a == b {
                return diagonal;
            }
            let rho = quad
                .node(a)
                .iter()
                .zip(quad.node(b))
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            ball_indicator_transform(dim, radius, rho)
        });
        Ok(Self {
            h,
            quad: quad.clone(),
            matrix,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn quad(&self) -> &SurfaceQuadrature {
        &self.quad
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `diag(√w) γ_h diag(√w)`, the operator `R_S 1_{B(1/h)} R_S*` on `L²(dσ)`
    /// in the quadrature's orthonormal coordinates.
    pub fn weighted(&self) -> DMatrix<f64> {
        let root: Vec<f64> = self.quad.weights().iter().map(|w| w.sqrt()).collect();
        DMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |a, b| {
            root[a] * self.matrix[(a, b)] * root[b]
        })
    }

    /// Eigenvalues of the weighted kernel, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        symmetric_eigenvalues(&self.weighted())
    }
}

/// Per `h`: the diagonal of `γ_h`, the largest eigenvalue, the number of
/// eigenvalues above half of it, and Schatten norms for `β ∈ {1, 2, α(p)}`.
/// Growth exponents in `1/h` are fitted across the list.
pub fn semiclassical_scan(quad: &SurfaceQuadrature, h_list: &[f64], p: f64) -> Result<ExperimentReport> {
    if !quad.curvature_nonvanishing() {
        return Err(Error::invalid("quad", "needs a curved surface"));
    }
    let lo = h_list.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = h_list.iter().copied().fold(0.0, f64::max);
    if h_list.len() < 2 || !(hi >= 10.0 * lo * (1.0 - 1e-12)) {
        return Err(Error::invalid("h_list", "must span at least one decade"));
    }
    let alpha = compact_alpha(quad.ambient_dim() as u32, p)?;

    let mut report = ExperimentReport::new(
        "semiclassical",
        &["h", "diagonal", "lambda_max", "count_half_max", "s1", "s2", "s_alpha", "psd_defect"],
    );
    for &h in h_list {
        let kernel = SemiclassicalKernel::new(quad, h)?;
        let ev = kernel.eigenvalues()?;
        let top = ev[0];
        let low = *ev.last().expect("nonempty");
        let count = ev.iter().filter(|v| **v > top / 2.0).count();
        let spectrum = SingularSpectrum::new(ev.iter().map(|v| v.max(0.0)).collect())?;
        report.push_row(vec![
            h,
            kernel.matrix()[(0, 0)],
            top,
            count as f64,
            schatten_norm(&spectrum, 1.0)?,
            schatten_norm(&spectrum, 2.0)?,
            schatten_norm(&spectrum, alpha)?,
            (-low).max(0.0) / top,
        ]);
    }

    let inv_h: Vec<f64> = h_list.iter().map(|h| 1.0 / h).collect();
    for (col, name) in [
        ("count_half_max", "count_growth"),
        ("lambda_max", "lambda_max_growth"),
        ("s_alpha", "s_alpha_growth"),
    ] {
        let y = report.column(col).expect("column exists");
        if let Some(fit) = log_log_fit(&inv_h, &y) {
            report.fit(name, fit.slope, fit.slope_stderr);
        }
    }
    let worst = report
        .column("psd_defect")
        .expect("column exists")
        .into_iter()
        .fold(0.0, f64::max);
    report.meta("surface", format!("{:?}", quad.kind()));
    report.meta("nodes", quad.len());
    report.meta("p", p);
    report.meta("alpha", alpha);
    report.meta("h_list", join(h_list));
    report.diagnose("psd_defect", worst, 1e-10);
    Ok(report)
}
