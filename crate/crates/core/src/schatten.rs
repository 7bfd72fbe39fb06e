//! Singular spectra, Schatten norms, weak-Schatten quasinorms, trace powers
//! and the Hilbert–Schmidt kernel identity.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::FactoredOperator;
use crate::grid::Field;
use crate::linalg;
use crate::CMatrix;

/// Relative cutoff below which singular values count as zero in the
/// quasinorm and rank computations.
pub const NUMERICAL_ZERO: f64 = 1e-10;

/// Nonincreasing list of nonnegative singular values `μ_1 ≥ μ_2 ≥ …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// Sorts the input; rejects negative or non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "values",
                "singular values must be finite and nonnegative",
            ));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `μ_1`, or 0 for an empty spectrum.
    pub fn leading(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Number of values above `NUMERICAL_ZERO · μ_1`.
    pub fn numerical_rank(&self) -> usize {
        let cut = NUMERICAL_ZERO * self.leading();
        self.values.iter().take_while(|v| **v > cut).count()
    }
}

/// Operators whose singular values and trace powers can be computed.
pub trait SpectralOperator {
    fn singular_spectrum(&self) -> Result<SingularSpectrum>;
    fn trace_power(&self, m: u32) -> Result<Complex64>;
}

/// Singular values of `A C*` from the thin QR factors `A = Q_A R_A`,
/// `C = Q_C R_C`: they coincide with those of the `K × K` core `R_A R_C*`.
/// Working with `R` factors keeps the conditioning of the original problem,
/// whereas forming `A*A` would square it.
impl SpectralOperator for FactoredOperator {
    fn singular_spectrum(&self) -> Result<SingularSpectrum> {
        let ra = linalg::qr_r_factor(self.left_factor())?;
        let rc = linalg::qr_r_factor(self.right_factor())?;
        let core = &ra * rc.adjoint();
        SingularSpectrum::new(linalg::singular_values(&core)?)
    }

    /// `tr (A C*)^m = tr (C* A)^m`, reduced to `K × K` before powering.
    fn trace_power(&self, m: u32) -> Result<Complex64> {
        check_power(m)?;
        let reduced = self.right_factor().adjoint() * self.left_factor();
        Ok(dense_trace_power(&reduced, m))
    }
}

impl SpectralOperator for CMatrix {
    fn singular_spectrum(&self) -> Result<SingularSpectrum> {
        SingularSpectrum::new(linalg::singular_values(self)?)
    }

    fn trace_power(&self, m: u32) -> Result<Complex64> {
        check_power(m)?;
        if self.nrows() != self.ncols() {
            return Err(Error::invalid("op", "trace power needs a square matrix"));
        }
        Ok(dense_trace_power(self, m))
    }
}

fn check_power(m: u32) -> Result<()> {
    if m < 1 {
        return Err(Error::invalid("m", "power must be at least 1"));
    }
    Ok(())
}

fn dense_trace_power(a: &CMatrix, m: u32) -> Complex64 {
    if m == 1 {
        return linalg::trace(a);
    }
    // tr(A^m) = Σ (A^{m-1})_{ij} A_{ji}, avoiding the last product.
    let mut p = a.clone();
    for _ in 2..m {
        p = &p * a;
    }
    p.iter()
        .zip(a.transpose().iter())
        .map(|(x, y)| x * y)
        .sum()
}

/// Descending singular values of a factored or dense operator.
pub fn singular_values(op: &impl SpectralOperator) -> Result<SingularSpectrum> {
    op.singular_spectrum()
}

/// `tr(M^m)`.
pub fn trace_power(op: &impl SpectralOperator, m: u32) -> Result<Complex64> {
    op.trace_power(m)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::invalid("alpha", format!("{alpha} is not in [1, ∞]")));
    }
    Ok(())
}

/// `‖(μ_n)‖_{ℓ^α}`; `α = ∞` gives `μ_1`.
pub fn schatten_norm(spec: &SingularSpectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let top = spec.leading();
    if alpha.is_infinite() || top == 0.0 {
        return Ok(top);
    }
    let s: f64 = spec.values().iter().map(|v| (v / top).powf(alpha)).sum();
    Ok(top * s.powf(1.0 / alpha))
}

/// `sup_n n^{1/α} μ_n`, ignoring values below `NUMERICAL_ZERO · μ_1`.
pub fn weak_schatten_quasinorm(spec: &SingularSpectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha.is_infinite() {
        return Err(Error::invalid("alpha", "weak quasinorm needs finite alpha"));
    }
    let cut = NUMERICAL_ZERO * spec.leading();
    Ok(spec
        .values()
        .iter()
        .enumerate()
        .take_while(|(_, v)| **v > cut)
        .map(|(i, v)| ((i + 1) as f64).powf(1.0 / alpha) * v)
        .fold(0.0, f64::max))
}

/// `(Σ_x Σ_y h^{2 dim} |W1(x)|² |K(x,y)|² |W2(y)|²)^{1/2}`.
pub fn hs_norm_from_kernel<K>(w1: &Field, kernel: K, w2: &Field) -> Result<f64>
where
    K: Fn(&[f64], &[f64]) -> Complex64 + Sync,
{
    w1.grid().ensure_same(w2.grid(), "weights")?;
    let grid = w1.grid();
    let dim = grid.dim();
    let coords = grid.all_coordinates();
    let vol = grid.cell_volume();
    let sum: f64 = coords
        .par_chunks_exact(dim)
        .zip(w1.values().par_iter())
        .map(|(x, a)| {
            let a2 = a.norm_sqr();
            if a2 == 0.0 {
                return 0.0;
            }
            let row: f64 = coords
                .chunks_exact(dim)
                .zip(w2.values())
                .map(|(y, b)| kernel(x, y).norm_sqr() * b.norm_sqr())
                .sum();
            a2 * row
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(sum.sqrt() * vol)
}
