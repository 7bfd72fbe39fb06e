//! Thin wrappers around nalgebra's dense decompositions that surface
//! non-convergence as errors instead of panics.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMatrix;

const EPS: f64 = f64::EPSILON;
const MAX_SWEEPS: usize = 0; // 0 = iterate until convergence (nalgebra convention)

/// Singular values of a dense matrix, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    check_finite(m)?;
    let svd = m
        .clone()
        .try_svd(false, false, EPS, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalBreakdown("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    check_finite_values(&s, "singular values")?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Eigenvalues of a Hermitian matrix (only the lower triangle is read), descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    check_finite(m)?;
    let eig = SymmetricEigen::try_new(m.clone(), EPS, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalBreakdown("Hermitian eigensolver did not converge".into()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    check_finite_values(&ev, "eigenvalues")?;
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Eigenvalues of a real symmetric matrix, descending.
pub fn symmetric_eigenvalues(m: &nalgebra::DMatrix<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBreakdown("non-finite matrix entry".into()));
    }
    let eig = SymmetricEigen::try_new(m.clone(), EPS, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalBreakdown("symmetric eigensolver did not converge".into()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

/// Upper-triangular factor of a thin QR decomposition (`min(rows, cols) × cols`).
pub fn qr_r_factor(m: &CMatrix) -> Result<CMatrix> {
    check_finite(m)?;
    Ok(m.clone().qr().r())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `‖M − M*‖_F / ‖M‖_F` (zero for the zero matrix).
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / norm
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NumericalBreakdown("non-finite matrix entry".into()));
    }
    Ok(())
}

fn check_finite_values(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalBreakdown(format!("non-finite {what}")));
    }
    Ok(())
}
