//! The free Schrödinger group `e^{itΔ}` as a Fourier multiplier, densities
//! of evolved orthonormal systems, the conjugated potential operator `Γ_V`,
//! and the Littlewood–Paley bank.
//!
//! `e^{itΔ}` multiplies the DFT by `e^{-it|ξ|²}`. On the torus `[-L, L)^d`
//! the group is periodic with period `2L²/π`.

mod gamma;
mod littlewood_paley;

pub use gamma::{gamma_from_slices, gamma_operator, GammaOperator, GAMMA_NODE_CAP};
pub use littlewood_paley::{littlewood_paley_apply, LittlewoodPaleyBank};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{mixed_norm, Exponent, Field, GridSpec, SpaceTimeField, SpectralPlan};
use crate::CMatrix;

/// Cached plan and `|ξ|²` table for repeated evolutions on one grid.
#[derive(Debug, Clone)]
pub struct FreeEvolution {
    plan: SpectralPlan,
    xi_sq: Vec<f64>,
}

impl FreeEvolution {
    pub fn new(grid: &GridSpec) -> Self {
        Self {
            plan: SpectralPlan::new(grid),
            xi_sq: grid.frequency_norms_sq(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.plan.grid()
    }

    /// Smallest `t > 0` with `e^{itΔ} = I` on the grid's torus.
    pub fn revival_period(&self) -> f64 {
        revival_period(self.grid())
    }

    pub fn evolve_in_place(&self, values: &mut [Complex64], t: f64) {
        if t == 0.0 {
            return;
        }
        self.plan.forward_in_place(values);
        for (v, k2) in values.iter_mut().zip(&self.xi_sq) {
            *v *= Complex64::from_polar(1.0, -t * k2);
        }
        self.plan.inverse_in_place(values);
    }

    pub fn evolve(&self, u: &Field, t: f64) -> Field {
        let mut out = u.clone();
        self.evolve_in_place(out.values_mut(), t);
        out
    }

    /// `U(t) M`, evolving every column of a `nodes × cols` matrix.
    pub fn evolve_columns(&self, m: &CMatrix, t: f64) -> CMatrix {
        let mut out = m.clone();
        let n = m.nrows();
        for col in out.as_mut_slice().chunks_mut(n) {
            self.evolve_in_place(col, t);
        }
        out
    }

    /// `U(-t) M U(t)`.
    pub fn conjugate(&self, m: &CMatrix, t: f64) -> CMatrix {
        // U(-t) M U(t) = U(-t) (U(-t) M*)*.
        let right = self.evolve_columns(&m.adjoint(), -t).adjoint();
        self.evolve_columns(&right, -t)
    }
}

/// `2L²/π`, the period of the discrete free group on `[-L, L)^d`.
pub fn revival_period(grid: &GridSpec) -> f64 {
    2.0 * grid.box_halfwidth().powi(2) / PI
}

/// `e^{itΔ} u`.
pub fn free_evolve(u: &Field, t: f64) -> Field {
    FreeEvolution::new(u.grid()).evolve(u, t)
}

/// Functions `u_j` with real coefficients `ν_j`.
#[derive(Debug, Clone)]
pub struct OrthonormalSystem {
    functions: Vec<Field>,
    coefficients: Vec<f64>,
}

impl OrthonormalSystem {
    /// Checks `|⟨u_i, u_j⟩ - δ_ij| ≤ tolerance` for all pairs.
    pub fn new(functions: Vec<Field>, coefficients: Vec<f64>, tolerance: f64) -> Result<Self> {
        if functions.is_empty() || functions.len() != coefficients.len() {
            return Err(Error::invalid(
                "coefficients",
                "need one coefficient per function and at least one function",
            ));
        }
        for f in &functions[1..] {
            functions[0].grid().ensure_same(f.grid(), "orthonormal system")?;
        }
        let system = Self {
            functions,
            coefficients,
        };
        let defect = system.orthonormality_defect();
        if defect > tolerance {
            return Err(Error::invalid(
                "functions",
                format!("orthonormality defect {defect:.3e} exceeds {tolerance:.1e}"),
            ));
        }
        Ok(system)
    }

    pub fn functions(&self) -> &[Field] {
        &self.functions
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn grid(&self) -> &GridSpec {
        self.functions[0].grid()
    }

    /// `max_{i,j} |⟨u_i, u_j⟩ - δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.functions.iter().enumerate() {
            for (j, b) in self.functions.iter().enumerate().skip(i) {
                let ip = a.inner(b).expect("grids checked at construction");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `Σ_j ν_j |e^{itΔ} u_j(x)|²` at each of the (uniform) `times`.
pub fn density(system: &OrthonormalSystem, times: &[f64]) -> Result<SpaceTimeField> {
    let evo = FreeEvolution::new(system.grid());
    let slices = times
        .iter()
        .map(|&t| {
            let mut rho = vec![Complex64::new(0.0, 0.0); system.grid().node_count()];
            for (u, nu) in system.functions().iter().zip(system.coefficients()) {
                let evolved = evo.evolve(u, t);
                for (r, v) in rho.iter_mut().zip(evolved.values()) {
                    r.re += nu * v.norm_sqr();
                }
            }
            Field::new(system.grid().clone(), rho)
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(times.to_vec(), slices)
}

/// `‖e^{itΔ} u‖_{L^p_t L^q_x}` over the uniform time window `times`.
pub fn strichartz_lhs(u: &Field, p: Exponent, q: Exponent, times: &[f64]) -> Result<f64> {
    let evolved = evolve_over(u, times)?;
    Ok(mixed_norm(&evolved, p, q))
}

/// `e^{itΔ} u` sampled at each of the uniform `times`.
pub fn evolve_over(u: &Field, times: &[f64]) -> Result<SpaceTimeField> {
    let evo = FreeEvolution::new(u.grid());
    let slices = times.iter().map(|&t| evo.evolve(u, t)).collect();
    SpaceTimeField::new(times.to_vec(), slices)
}
