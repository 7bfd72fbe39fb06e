//! Numerical laboratory for Schatten-class restriction and Strichartz
//! estimates.
//!
//! The crate discretizes the restriction operator of a curved hypersurface,
//! its adjoint (the extension operator), the weighted operators
//! `W1 T_S W2` built from them, and the conjugated potential operator
//! `Γ_V = ∫ e^{-itΔ} V(t) e^{itΔ} dt`. Everything lives on uniform periodic
//! grids with a unitary DFT, so adjointness, mass conservation and the group
//! law hold to rounding.
//!
//! Module map:
//! - [`grid`]: grids, fields, DFT, Lebesgue and mixed norms
//! - [`surface`]: surface quadratures and the Fourier transform of `dσ`
//! - [`extension`]: restriction / extension / `T_S` and the factored weighted operator
//! - [`schatten`]: singular spectra, Schatten norms, trace powers
//! - [`propagator`]: free Schrödinger group, `Γ_V`, densities, Littlewood–Paley bank
//! - [`experiments`]: reproducible numerical experiments producing reports
//! - [`region`]: exponent arithmetic and the mixed-norm validity classifier

pub mod error;
pub mod experiments;
pub mod extension;
pub mod grid;
pub mod linalg;
pub mod propagator;
pub mod region;
pub mod schatten;
pub mod special;
pub mod stats;
pub mod surface;

pub use error::{Error, Result};
pub use extension::FactoredOperator;
pub use grid::{Exponent, Field, GridSpec, SpaceTimeField};
pub use num_complex::Complex64;
pub use propagator::{GammaOperator, LittlewoodPaleyBank, OrthonormalSystem};
pub use region::{ExponentQuery, RegionVerdict, Verdict};
pub use schatten::SingularSpectrum;
pub use surface::{SurfaceKind, SurfaceQuadrature};

/// Dense complex matrix used for every materialized operator.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
