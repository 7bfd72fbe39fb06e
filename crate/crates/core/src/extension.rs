//! Restriction `R_S f = f̂|_S`, its adjoint (extension), `T_S = R_S* R_S`,
//! and the weighted operator `W1 T_S W2` in rank-`K` factored form.
//!
//! The Fourier transform uses the convention `f̂(ξ) = ∫ f(x) e^{-ix·ξ} dx`,
//! discretized with cell weights `h^dim`. Surface nodes are generally off the
//! dual lattice, so plane waves are evaluated directly.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::surface::SurfaceQuadrature;
use crate::CMatrix;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rejects surfaces whose nodes exceed the grid's Nyquist frequency.
fn check_resolvable(grid: &GridSpec, quad: &SurfaceQuadrature, dim: usize) -> Result<()> {
    if grid.dim() != dim {
        return Err(Error::GridMismatch(format!(
            "grid of dimension {} for a surface in R^{dim}",
            grid.dim()
        )));
    }
    let peak = quad
        .nodes()
        .flat_map(|n| n[..dim].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if peak >= grid.nyquist() {
        return Err(Error::Unresolvable(format!(
            "surface frequency {peak:.4} at or beyond grid Nyquist {:.4}",
            grid.nyquist()
        )));
    }
    Ok(())
}

/// `f̂(ξ_k) = h^dim Σ_x f(x) e^{-ix·ξ_k}` for every surface node.
pub fn restriction_apply(f: &Field, quad: &SurfaceQuadrature) -> Result<Vec<Complex64>> {
    let grid = f.grid();
    check_resolvable(grid, quad, quad.ambient_dim())?;
    let coords = grid.all_coordinates();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    Ok((0..quad.len())
        .into_par_iter()
        .map(|k| {
            let xi = quad.node(k);
            let s: Complex64 = coords
                .chunks_exact(dim)
                .zip(f.values())
                .map(|(x, v)| v * Complex64::from_polar(1.0, -dot(x, xi)))
                .sum();
            s * vol
        })
        .collect())
}

/// `(R_S* g)(x) = Σ_k w_k g_k e^{ix·ξ_k}` on every grid node.
pub fn extension_apply(
    g: &[Complex64],
    quad: &SurfaceQuadrature,
    grid: &GridSpec,
) -> Result<Field> {
    if grid.dim() != quad.ambient_dim() {
        return Err(Error::GridMismatch(format!(
            "grid of dimension {} for a surface in R^{}",
            grid.dim(),
            quad.ambient_dim()
        )));
    }
    extension_on_points(g, quad, grid, None)
}

/// Extension from a paraboloid in `R^{d+1}` evaluated on the spatial slice
/// `{(x, t)}` of a `d`-dimensional grid; equals `e^{itΔ}` applied to the
/// inverse transform of `g`.
pub fn extension_slice(
    g: &[Complex64],
    quad: &SurfaceQuadrature,
    grid: &GridSpec,
    t: f64,
) -> Result<Field> {
    if grid.dim() + 1 != quad.ambient_dim() {
        return Err(Error::GridMismatch(format!(
            "slice grid of dimension {} for a surface in R^{}",
            grid.dim(),
            quad.ambient_dim()
        )));
    }
    extension_on_points(g, quad, grid, Some(t))
}

fn extension_on_points(
    g: &[Complex64],
    quad: &SurfaceQuadrature,
    grid: &GridSpec,
    time: Option<f64>,
) -> Result<Field> {
    if g.len() != quad.len() {
        return Err(Error::invalid(
            "g",
            format!("{} values for {} surface nodes", g.len(), quad.len()),
        ));
    }
    let dim = grid.dim();
    let coeffs: Vec<Complex64> = g.iter().zip(quad.weights()).map(|(v, w)| v * w).collect();
    let coords = grid.all_coordinates();
    let values = coords
        .par_chunks_exact(dim)
        .map(|x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let xi = quad.node(k);
                    let mut phase = dot(x, &xi[..dim]);
                    if let Some(t) = time {
                        phase += t * xi[dim];
                    }
                    c * Complex64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect();
    Field::new(grid.clone(), values)
}

/// `T_S f = R_S* R_S f`, the convolution of `f` with `dσ̂`.
pub fn ts_apply(f: &Field, quad: &SurfaceQuadrature) -> Result<Field> {
    let g = restriction_apply(f, quad)?;
    extension_apply(&g, quad, f.grid())
}

/// `M = A C*` acting on `ℓ²` of the grid nodes (unitary normalization), with
/// `A_{x,k} = W1(x) √w_k e^{ix·ξ_k} √h^dim` and
/// `C_{x,k} = conj(W2(x)) √w_k e^{ix·ξ_k} √h^dim`.
#[derive(Debug, Clone)]
pub struct FactoredOperator {
    grid: GridSpec,
    left: CMatrix,
    right: CMatrix,
}

impl FactoredOperator {
    /// Wraps explicit factors; both must have one row per grid node and equal rank.
    pub fn from_factors(grid: GridSpec, left: CMatrix, right: CMatrix) -> Result<Self> {
        let n = grid.node_count();
        if left.nrows() != n || right.nrows() != n || left.ncols() != right.ncols() {
            return Err(Error::invalid(
                "factors",
                format!(
                    "shapes {:?} and {:?} incompatible with {n} grid nodes",
                    left.shape(),
                    right.shape()
                ),
            ));
        }
        Ok(Self { grid, left, right })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn left_factor(&self) -> &CMatrix {
        &self.left
    }

    pub fn right_factor(&self) -> &CMatrix {
        &self.right
    }

    /// Number of surface nodes `K`, an upper bound for the rank.
    pub fn rank_bound(&self) -> usize {
        self.left.ncols()
    }

    /// The `nodes × nodes` matrix `A C*`.
    pub fn to_dense(&self) -> CMatrix {
        &self.left * self.right.adjoint()
    }

    /// `M f` without forming `M`; node values are taken in `ℓ²` normalization.
    pub fn apply(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.grid.node_count() {
            return Err(Error::invalid("values", "length differs from node count"));
        }
        let v = nalgebra::DVector::from_column_slice(values);
        let inner = self.right.adjoint() * v;
        Ok((&self.left * inner).iter().copied().collect())
    }
}

/// Factored form of `W1 T_S W2` on the grid shared by the two weights.
pub fn build_weighted_operator(
    w1: &Field,
    w2: &Field,
    quad: &SurfaceQuadrature,
) -> Result<FactoredOperator> {
    w1.grid().ensure_same(w2.grid(), "weights")?;
    let grid = w1.grid().clone();
    check_resolvable(&grid, quad, quad.ambient_dim())?;
    let n = grid.node_count();
    let k = quad.len();
    let coords = grid.all_coordinates();
    let dim = grid.dim();
    let root_vol = grid.cell_volume().sqrt();

    // Column-major assembly: one column per surface node.
    let build = |weight: &(dyn Fn(usize) -> Complex64 + Sync)| -> CMatrix {
        let mut data = vec![Complex64::new(0.0, 0.0); n * k];
        data.par_chunks_mut(n).enumerate().for_each(|(col, out)| {
            let xi = quad.node(col);
            let scale = quad.weights()[col].sqrt() * root_vol;
            for (row, slot) in out.iter_mut().enumerate() {
                let x = &coords[row * dim..(row + 1) * dim];
                *slot = weight(row) * Complex64::from_polar(scale, dot(x, xi));
            }
        });
        CMatrix::from_vec(n, k, data)
    };
    let left = build(&|row| w1.values()[row]);
    let right = build(&|row| w2.values()[row].conj());
    Ok(FactoredOperator { grid, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::linalg;
    use crate::propagator::free_evolve;
    use crate::surface::{
        circle_quadrature, fourier_transform_of_measure, paraboloid_quadrature,
        sphere_quadrature,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: &GridSpec, rng: &mut ChaCha8Rng) -> Field {
        Field::from_fn(grid, |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn plane_wave_restriction() {
        // With L = π the dual lattice is Z², so the node (1, 0) is on it.
        let g = make_grid(2, 16, PI).unwrap();
        let q = circle_quadrature(16).unwrap();
        let xi0 = q.node(0).to_vec();
        let f = Field::from_fn(&g, |x| Complex64::from_polar(1.0, dot(x, &xi0)));
        let r = restriction_apply(&f, &q).unwrap();
        assert!((r[0] - Complex64::new(g.box_volume(), 0.0)).norm() < 1e-10);
        // Dirichlet-kernel leakage: |Π_i D(ζ_i)| h^2 with
        // D(ζ) = sin(nhζ/2)/sin(hζ/2), ζ = ξ_k0 - ξ_k.
        let h = g.spacing();
        let n = g.points_per_axis() as f64;
        for k in 1..q.len() {
            let bound: f64 = (0..2)
                .map(|i| {
                    let z = xi0[i] - q.node(k)[i];
                    if z.abs() < 1e-12 {
                        n
                    } else {
                        ((n * h * z / 2.0).sin() / (h * z / 2.0).sin()).abs()
                    }
                })
                .product::<f64>()
                * h
                * h;
            assert!(r[k].norm() <= bound + 1e-9, "node {k}");
            assert!(r[k].norm() < g.box_volume());
        }
        let zero = restriction_apply(&Field::zeros(&g), &q).unwrap();
        assert!(zero.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn gaussian_restriction_matches_closed_form() {
        // ∫ e^{-|x|²/2} e^{-ix·ξ} dx = 2π e^{-|ξ|²/2} in R².
        let g = make_grid(2, 64, 12.0).unwrap();
        let f = Field::from_real_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp());
        let q = circle_quadrature(32).unwrap();
        let r = restriction_apply(&f, &q).unwrap();
        let expected = 2.0 * PI * (-0.5f64).exp();
        for v in r {
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn unresolvable_surface_rejected() {
        let g = make_grid(2, 4, 8.0).unwrap(); // Nyquist π/4
        let q = circle_quadrature(16).unwrap();
        assert!(matches!(
            restriction_apply(&Field::zeros(&g), &q),
            Err(Error::Unresolvable(_))
        ));
        let g3 = make_grid(3, 4, 1.0).unwrap();
        assert!(restriction_apply(&Field::zeros(&g3), &q).is_err());
    }

    #[test]
    fn extension_of_one_is_measure_transform() {
        let g = make_grid(2, 8, 3.0).unwrap();
        let q = circle_quadrature(24).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); q.len()];
        let e = extension_apply(&ones, &q, &g).unwrap();
        for (flat, v) in e.values().iter().enumerate() {
            let x = g.coordinates(flat);
            let expect = fourier_transform_of_measure(&q, &x).unwrap();
            assert!((v - expect).norm() <= 1e-12 * q.total_measure());
        }
        assert!(extension_apply(&ones[1..], &q, &g).is_err());
    }

    #[test]
    fn restriction_and_extension_are_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = make_grid(3, 6, 4.0).unwrap();
        let q = sphere_quadrature(80).unwrap();
        let f = random_field(&g, &mut rng);
        let gv: Vec<Complex64> = (0..q.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let rf = restriction_apply(&f, &q).unwrap();
        let lhs: Complex64 = rf
            .iter()
            .zip(&gv)
            .zip(q.weights())
            .map(|((a, b), w)| a.conj() * b * w)
            .sum();
        let rhs = f.inner(&extension_apply(&gv, &q, &g).unwrap()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
    }

    #[test]
    fn paraboloid_slice_is_free_evolution() {
        // g(ξ) = e^{-ξ²/2} lifts to u0(x) = √(2π) e^{-x²/2}.
        let q = paraboloid_quadrature(1, 8.0, 256).unwrap();
        let gv: Vec<Complex64> = q
            .nodes()
            .map(|n| Complex64::new((-n[0] * n[0] / 2.0).exp(), 0.0))
            .collect();
        let grid = make_grid(1, 256, 20.0).unwrap();
        let u0 = Field::from_real_fn(&grid, |x| (2.0 * PI).sqrt() * (-x[0] * x[0] / 2.0).exp());
        for t in [0.0, 0.3, 1.0] {
            let slice = extension_slice(&gv, &q, &grid, t).unwrap();
            let evolved = free_evolve(&u0, t);
            let err = slice
                .values()
                .iter()
                .zip(evolved.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-6, "t = {t}: {err}");
        }
    }

    #[test]
    fn paraboloid_truncation_convergence() {
        // Fixed lattice step 1/16; the error is the Gaussian mass beyond ξ_max.
        let grid = make_grid(1, 256, 20.0).unwrap();
        let u0 = Field::from_real_fn(&grid, |x| (2.0 * PI).sqrt() * (-x[0] * x[0] / 2.0).exp());
        let evolved = free_evolve(&u0, 0.5);
        let errors: Vec<f64> = [1.0, 2.0, 3.0, 4.0, 6.0]
            .iter()
            .map(|&xi_max| {
                let q = paraboloid_quadrature(1, xi_max, (32.0 * xi_max) as usize).unwrap();
                let gv: Vec<Complex64> = q
                    .nodes()
                    .map(|n| Complex64::new((-n[0] * n[0] / 2.0).exp(), 0.0))
                    .collect();
                let slice = extension_slice(&gv, &q, &grid, 0.5).unwrap();
                slice
                    .values()
                    .iter()
                    .zip(evolved.values())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errors.windows(2) {
            assert!(w[1] < w[0], "{errors:?}");
        }
        assert!(errors[0] > 0.1 && errors[4] < 1e-6, "{errors:?}");
    }

    #[test]
    fn ts_of_delta_is_measure_transform() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let q = circle_quadrature(32).unwrap();
        let mut delta = Field::zeros(&g);
        let origin = g.flat_index(&[8, 8]);
        delta.values_mut()[origin] = Complex64::new(1.0, 0.0);
        let out = ts_apply(&delta, &q).unwrap();
        let vol = g.cell_volume();
        for (flat, v) in out.values().iter().enumerate() {
            let x = g.coordinates(flat);
            let expect = fourier_transform_of_measure(&q, &x).unwrap() * vol;
            assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn ts_is_positive_and_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = make_grid(2, 12, 5.0).unwrap();
        let q = circle_quadrature(40).unwrap();
        for _ in 0..3 {
            let f = random_field(&g, &mut rng);
            let h = random_field(&g, &mut rng);
            let tf = ts_apply(&f, &q).unwrap();
            let quad = f.inner(&tf).unwrap();
            assert!(quad.re >= 0.0 && quad.im.abs() <= 1e-10 * quad.re.max(1.0));

            let a = Complex64::new(0.3, -1.2);
            let mut combo = f.map(|v| v * a);
            combo.add_assign(&h).unwrap();
            let lhs = ts_apply(&combo, &q).unwrap();
            let mut rhs = tf.map(|v| v * a);
            rhs.add_assign(&ts_apply(&h, &q).unwrap()).unwrap();
            let scale = rhs.max_abs();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                assert!((x - y).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn weighted_operator_small_examples() {
        let g = make_grid(2, 4, 2.0).unwrap();
        let q = circle_quadrature(8).unwrap();
        let one = Field::from_real_fn(&g, |_| 1.0);
        let op = build_weighted_operator(&one, &one, &q).unwrap();
        let m = op.to_dense();
        assert_eq!(m.nrows(), 16);
        assert!(linalg::hermiticity_defect(&m) < 1e-14);
        let ev = linalg::hermitian_eigenvalues(&m).unwrap();
        assert!(ev.iter().all(|v| *v >= -1e-10 * ev[0]));
        let rank = ev.iter().filter(|v| **v > 1e-10 * ev[0]).count();
        assert!(rank <= q.len());

        let zero = Field::zeros(&g);
        let op = build_weighted_operator(&one, &zero, &q).unwrap();
        assert!(op.to_dense().iter().all(|v| v.norm() == 0.0));

        let other = make_grid(2, 4, 3.0).unwrap();
        assert!(matches!(
            build_weighted_operator(&one, &Field::zeros(&other), &q),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn dense_operator_matches_ts_conjugated_by_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = make_grid(2, 8, 4.0).unwrap();
        let q = circle_quadrature(12).unwrap();
        let w1 = random_field(&g, &mut rng);
        let w2 = random_field(&g, &mut rng);
        let f = random_field(&g, &mut rng);
        let op = build_weighted_operator(&w1, &w2, &q).unwrap();
        // ℓ² normalization: node values scaled by √h^dim.
        let root = g.cell_volume().sqrt();
        let scaled: Vec<Complex64> = f.values().iter().map(|v| v * root).collect();
        let out = op.apply(&scaled).unwrap();

        let mut weighted = f.clone();
        weighted
            .values_mut()
            .iter_mut()
            .zip(w2.values())
            .for_each(|(v, w)| *v *= w);
        let mut reference = ts_apply(&weighted, &q).unwrap();
        reference
            .values_mut()
            .iter_mut()
            .zip(w1.values())
            .for_each(|(v, w)| *v *= w * root);
        for (a, b) in out.iter().zip(reference.values()) {
            assert!((a - b).norm() <= 1e-10 * reference.max_abs());
        }
    }
}
