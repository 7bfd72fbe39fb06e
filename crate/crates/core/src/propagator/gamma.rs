//! Dense assembly of `Γ_V = Δt Σ_t e^{-itΔ} V(t) e^{itΔ}`.
//!
//! In the unitary Fourier basis the multiplication operator by `V(t)` has
//! entries `V̂_t[k - l] / √n`, so
//! `Γ̃_{kl} = Δt Σ_t e^{it(|ξ_k|² - |ξ_l|²)} V̂_t[k - l] / √n`.
//! The matrix is built there (one pass per nonzero time slice) and then
//! transformed to the position basis.

use num_complex::Complex64;
use rayon::prelude::*;

use super::FreeEvolution;
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpaceTimeField, SpectralPlan};
use crate::linalg;
use crate::schatten::{SingularSpectrum, SpectralOperator};
use crate::CMatrix;

/// Largest spatial node count for which `Γ_V` is materialized.
pub const GAMMA_NODE_CAP: usize = 4096;

/// `Γ_V` as a dense `nodes × nodes` matrix in the position basis.
#[derive(Debug, Clone)]
pub struct GammaOperator {
    grid: GridSpec,
    matrix: CMatrix,
}

impl GammaOperator {
    pub fn from_matrix(grid: GridSpec, matrix: CMatrix) -> Result<Self> {
        let n = grid.node_count();
        if matrix.shape() != (n, n) {
            return Err(Error::invalid("matrix", "must be nodes × nodes"));
        }
        Ok(Self { grid, matrix })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    /// Eigenvalues (descending) of the Hermitian part.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let half = Complex64::new(0.5, 0.0);
        let herm = (&self.matrix + self.matrix.adjoint()) * half;
        linalg::hermitian_eigenvalues(&herm)
    }

    /// `U(-t) Γ U(t)`.
    pub fn conjugated(&self, t: f64) -> GammaOperator {
        let evo = FreeEvolution::new(&self.grid);
        GammaOperator {
            grid: self.grid.clone(),
            matrix: evo.conjugate(&self.matrix, t),
        }
    }

    /// `⟨φ, Γ φ⟩` with the grid's `h^dim`-weighted inner product.
    pub fn expectation(&self, phi: &Field) -> Result<Complex64> {
        self.grid.ensure_same(phi.grid(), "expectation")?;
        let v = nalgebra::DVector::from_column_slice(phi.values());
        let gv = &self.matrix * &v;
        let s: Complex64 = v.iter().zip(gv.iter()).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_volume())
    }
}

impl SpectralOperator for GammaOperator {
    fn singular_spectrum(&self) -> Result<SingularSpectrum> {
        self.matrix.singular_spectrum()
    }

    fn trace_power(&self, m: u32) -> Result<Complex64> {
        self.matrix.trace_power(m)
    }
}

/// Rectangle-rule `Γ_V = Δt Σ_t U(-t) V(t) U(t)`, `U(t) = e^{itΔ}`.
pub fn gamma_operator(v: &SpaceTimeField) -> Result<GammaOperator> {
    let slices: Vec<(f64, &Field)> = v.times().iter().copied().zip(v.slices()).collect();
    gamma_from_slices(v.grid(), v.dt(), &slices)
}

/// `Γ_V` from explicit `(t, V(t))` samples on a time grid of step `dt`;
/// omitted times are slices where `V` vanishes.
pub fn gamma_from_slices(grid: &GridSpec, dt: f64, slices: &[(f64, &Field)]) -> Result<GammaOperator> {
    let grid = grid.clone();
    let n = grid.node_count();
    if n > GAMMA_NODE_CAP {
        return Err(Error::TooLarge {
            nodes: n,
            cap: GAMMA_NODE_CAP,
        });
    }
    for (_, s) in slices {
        grid.ensure_same(s.grid(), "potential slices")?;
    }
    let plan = SpectralPlan::new(&grid);
    let xi_sq = grid.frequency_norms_sq();

    // Slices that vanish identically contribute nothing.
    let active: Vec<(Vec<Complex64>, Vec<Complex64>)> = slices
        .par_iter()
        .filter(|(_, s)| s.values().iter().any(|z| *z != Complex64::new(0.0, 0.0)))
        .map(|&(t, s)| {
            let mut hat = s.values().to_vec();
            plan.forward_in_place(&mut hat);
            let phases = xi_sq.iter().map(|k2| Complex64::from_polar(1.0, t * k2)).collect();
            (phases, hat)
        })
        .collect();

    let dim = grid.dim();
    let mut idx = vec![0usize; n * dim];
    for (flat, chunk) in idx.chunks_mut(dim).enumerate() {
        grid.multi_index(flat, chunk);
    }
    let scale = Complex64::new(dt / (n as f64).sqrt(), 0.0);

    // Row k of Γ̃, stored so that column-major data of the transpose is row-major of Γ̃.
    let mut fourier = vec![Complex64::new(0.0, 0.0); n * n];
    fourier.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let ik = &idx[k * dim..(k + 1) * dim];
        let diff: Vec<usize> = (0..n)
            .map(|l| grid.difference_index(ik, &idx[l * dim..(l + 1) * dim]))
            .collect();
        for (phases, hat) in &active {
            let ek = phases[k];
            for ((slot, pl), d) in row.iter_mut().zip(phases).zip(&diff) {
                *slot += ek * pl.conj() * hat[*d];
            }
        }
        row.iter_mut().for_each(|z| *z *= scale);
    });

    // Γ = F* Γ̃ F. The buffer holds Γ̃ row-major, i.e. Γ̃ᵀ column-major.
    // Step 1: columns of Γ̃ are rows of the buffer; transpose to make them contiguous.
    let mut m = CMatrix::from_vec(n, n, fourier).transpose();
    m.as_mut_slice()
        .par_chunks_mut(n)
        .for_each(|col| plan.inverse_in_place(col));
    // Step 2: (G F) rows = F applied to rows of G, F being symmetric.
    let mut t = m.transpose();
    t.as_mut_slice()
        .par_chunks_mut(n)
        .for_each(|col| plan.forward_in_place(col));
    Ok(GammaOperator {
        grid,
        matrix: t.transpose(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::schatten::singular_values;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct sum of `U(-t) diag(V) U(t)` with dense evolution matrices.
    fn brute_force(v: &SpaceTimeField) -> CMatrix {
        let grid = v.grid();
        let evo = FreeEvolution::new(grid);
        let n = grid.node_count();
        let mut out = CMatrix::zeros(n, n);
        for (t, s) in v.times().iter().zip(v.slices()) {
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(s.values()));
            out += evo.conjugate(&d, *t) * Complex64::new(v.dt(), 0.0);
        }
        out
    }

    fn random_potential(grid: &GridSpec, count: usize, seed: u64) -> SpaceTimeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpaceTimeField::from_fn(grid, -0.3, 0.1, count, |_, _| rng.random_range(0.0..1.0))
            .unwrap()
    }

    #[test]
    fn matches_brute_force() {
        for (dim, n) in [(1, 24), (2, 6)] {
            let g = make_grid(dim, n, 3.0).unwrap();
            let v = random_potential(&g, 7, 3);
            let fast = gamma_operator(&v).unwrap();
            let slow = brute_force(&v);
            let err = (fast.matrix() - &slow).norm();
            assert!(err <= 1e-12 * slow.norm(), "dim {dim}: {err}");
        }
    }

    #[test]
    fn trace_identity_and_positivity() {
        let g = make_grid(1, 64, 4.0).unwrap();
        let v = random_potential(&g, 12, 5);
        let gamma = gamma_operator(&v).unwrap();
        let expected: f64 = v
            .slices()
            .iter()
            .flat_map(|s| s.values().iter().map(|z| z.re))
            .sum::<f64>()
            * v.dt();
        assert!((gamma.trace().re - expected).abs() <= 1e-10 * expected);
        assert!(linalg::hermiticity_defect(gamma.matrix()) <= 1e-10);
        let ev = gamma.eigenvalues().unwrap();
        assert!(ev.iter().all(|e| *e >= -1e-10 * ev[0]));
    }

    #[test]
    fn time_shift_covariance() {
        let g = make_grid(1, 48, 5.0).unwrap();
        let dt = 0.05;
        // Support well inside the window so the cyclic shift does not wrap.
        let v = SpaceTimeField::from_fn(&g, 0.0, dt, 40, |t, x| {
            if (0.2..0.6).contains(&t) {
                (-(x[0] - t).powi(2)).exp()
            } else {
                0.0
            }
        })
        .unwrap();
        let steps = 12;
        let shift = steps as f64 * dt;
        let base = gamma_operator(&v).unwrap();
        let moved = gamma_operator(&v.shift_cyclic(steps)).unwrap();
        // Γ_{V(· - T)} = U(-T) Γ_V U(T).
        let predicted = base.conjugated(shift);
        let err = (moved.matrix() - predicted.matrix()).norm();
        assert!(err <= 1e-10 * base.matrix().norm());
        let a = singular_values(&base).unwrap();
        let b = singular_values(&moved).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-8 * a.leading());
        }
    }

    #[test]
    fn oversized_grid_rejected() {
        let g = make_grid(1, GAMMA_NODE_CAP + 1, 1.0).unwrap();
        let v = SpaceTimeField::new(vec![0.0], vec![Field::zeros(&g)]).unwrap();
        assert!(matches!(gamma_operator(&v), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn zero_potential_gives_zero() {
        let g = make_grid(1, 16, 2.0).unwrap();
        let v = SpaceTimeField::from_fn(&g, 0.0, 0.1, 4, |_, _| 0.0).unwrap();
        let gamma = gamma_operator(&v).unwrap();
        assert!(gamma.matrix().iter().all(|z| z.norm() == 0.0));
    }
}
