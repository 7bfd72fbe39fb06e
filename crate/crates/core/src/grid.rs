//! Uniform periodic grids, complex fields on them, the unitary DFT, and
//! Lebesgue / mixed space-time norms.
//!
//! Nodes are stored row-major: axis 0 varies slowest. Node `i` on an axis sits
//! at `-L + i h` with `h = 2L / n`, and spectral index `i` carries the signed
//! frequency `π k / L`, `k = i` for `i < n/2` and `k = i - n` otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Lebesgue exponent in `[1, ∞]`. `∞` is a distinct variant so that sup
/// norms are exact maxima rather than large finite powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::invalid("exponent", format!("{q} is not in [1, ∞]")));
        }
        Ok(if q.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(q)
        })
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// The value as a float, with `f64::INFINITY` standing in for `∞`.
    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// Hölder conjugate `q' = q / (q - 1)`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(q) if q == 1.0 => Exponent::Infinity,
            Exponent::Finite(q) => Exponent::Finite(q / (q - 1.0)),
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Uniform periodic grid on `[-L, L)^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dim: usize,
    points_per_axis: usize,
    box_halfwidth: f64,
    spacing: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, box_halfwidth: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if points_per_axis < 2 {
            return Err(Error::invalid(
                "points_per_axis",
                format!("{points_per_axis} < 2"),
            ));
        }
        if !(box_halfwidth > 0.0 && box_halfwidth.is_finite()) {
            return Err(Error::invalid(
                "box_halfwidth",
                format!("{box_halfwidth} is not a positive finite number"),
            ));
        }
        let total = (points_per_axis as u128).checked_pow(dim as u32);
        if total.map_or(true, |t| t > usize::MAX as u128 / 64) {
            return Err(Error::invalid("points_per_axis", "node count overflows"));
        }
        Ok(Self {
            dim,
            points_per_axis,
            box_halfwidth,
            spacing: 2.0 * box_halfwidth / points_per_axis as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn box_halfwidth(&self) -> f64 {
        self.box_halfwidth
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// `h^dim`, the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// `(2L)^dim`.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.box_halfwidth).powi(self.dim as i32)
    }

    /// Largest frequency magnitude per axis representable without aliasing (`π / h`).
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing
    }

    /// Frequency spacing of the dual lattice, `π / L`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.box_halfwidth
    }

    pub fn axis_coordinate(&self, i: usize) -> f64 {
        -self.box_halfwidth + i as f64 * self.spacing
    }

    /// Signed integer wave number of spectral index `i`.
    pub fn wave_number(&self, i: usize) -> i64 {
        let n = self.points_per_axis;
        if i < n.div_ceil(2) {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn axis_frequency(&self, i: usize) -> f64 {
        self.wave_number(i) as f64 * self.frequency_step()
    }

    /// Per-axis indices of a flat node index.
    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let n = self.points_per_axis;
        for slot in out.iter_mut().rev() {
            *slot = flat % n;
            flat /= n;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    /// Physical coordinates of a node.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim];
        self.multi_index(flat, &mut idx);
        idx.iter().map(|&i| self.axis_coordinate(i)).collect()
    }

    /// All node coordinates, `dim` entries per node.
    pub fn all_coordinates(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.node_count() * self.dim);
        let mut idx = vec![0; self.dim];
        for flat in 0..self.node_count() {
            self.multi_index(flat, &mut idx);
            out.extend(idx.iter().map(|&i| self.axis_coordinate(i)));
        }
        out
    }

    /// Frequency vector of a spectral index.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim];
        self.multi_index(flat, &mut idx);
        idx.iter().map(|&i| self.axis_frequency(i)).collect()
    }

    /// `|ξ|²` for every spectral index, in storage order.
    pub fn frequency_norms_sq(&self) -> Vec<f64> {
        let mut idx = vec![0; self.dim];
        (0..self.node_count())
            .map(|flat| {
                self.multi_index(flat, &mut idx);
                idx.iter().map(|&i| self.axis_frequency(i).powi(2)).sum()
            })
            .collect()
    }

    /// Flat spectral index of `k - l` (componentwise, modulo the lattice).
    pub(crate) fn difference_index(&self, k: &[usize], l: &[usize]) -> usize {
        let n = self.points_per_axis;
        k.iter()
            .zip(l)
            .fold(0, |acc, (&a, &b)| acc * n + (a + n - b) % n)
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: {self:?} vs {other:?}"
            )));
        }
        Ok(())
    }
}

/// Convenience constructor mirroring [`GridSpec::new`].
pub fn make_grid(dim: usize, points_per_axis: usize, box_halfwidth: f64) -> Result<GridSpec> {
    GridSpec::new(dim, points_per_axis, box_halfwidth)
}

/// Complex-valued function sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::invalid(
                "values",
                format!(
                    "length {} does not match node count {}",
                    values.len(),
                    grid.node_count()
                ),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.node_count()],
            grid: grid.clone(),
        }
    }

    /// Samples `f` at every node; `f` receives the node coordinates.
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let mut idx = vec![0; grid.dim()];
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.node_count())
            .map(|flat| {
                grid.multi_index(flat, &mut idx);
                for (xi, &i) in x.iter_mut().zip(&idx) {
                    *xi = grid.axis_coordinate(i);
                }
                f(&x)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_real_fn(grid: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `h^dim Σ conj(self) other`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid, "inner product")?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn scale(&mut self, s: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_assign(&mut self, other: &Field) -> Result<()> {
        self.grid.ensure_same(&other.grid, "field addition")?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Cyclic translation by whole grid steps along each axis.
    pub fn roll(&self, steps: &[isize]) -> Result<Field> {
        if steps.len() != self.grid.dim() {
            return Err(Error::invalid("steps", "one shift per axis required"));
        }
        let n = self.grid.points_per_axis() as isize;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        let mut idx = vec![0; self.grid.dim()];
        for (flat, v) in self.values.iter().enumerate() {
            self.grid.multi_index(flat, &mut idx);
            for (i, s) in idx.iter_mut().zip(steps) {
                *i = (*i as isize + s).rem_euclid(n) as usize;
            }
            out[self.grid.flat_index(&idx)] = *v;
        }
        Ok(Field {
            grid: self.grid.clone(),
            values: out,
        })
    }
}

/// Cached forward/inverse FFT plans for one grid. Transforms are unitary.
#[derive(Clone)]
pub struct SpectralPlan {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("grid", &self.grid)
            .finish()
    }
}

impl SpectralPlan {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis();
        Self {
            grid: grid.clone(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn forward_in_place(&self, values: &mut [Complex64]) {
        self.transform(values, &self.forward);
    }

    pub fn inverse_in_place(&self, values: &mut [Complex64]) {
        self.transform(values, &self.inverse);
    }

    fn transform(&self, values: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_axis();
        let dim = self.grid.dim();
        let total = values.len();
        debug_assert_eq!(total, self.grid.node_count());
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(values, &mut scratch);
                continue;
            }
            // Lines along `axis` start at every index whose axis digit is 0.
            let block = stride * n;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = values[start + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        values[start + j * stride] = *v;
                    }
                }
            }
        }
        let norm = 1.0 / (total as f64).sqrt();
        values.iter_mut().for_each(|v| *v *= norm);
    }

    pub fn forward(&self, field: &Field) -> Field {
        let mut out = field.clone();
        self.forward_in_place(&mut out.values);
        out
    }

    pub fn inverse(&self, field: &Field) -> Field {
        let mut out = field.clone();
        self.inverse_in_place(&mut out.values);
        out
    }

    /// `idft(multiplier · dft(field))`.
    pub fn apply_multiplier(&self, field: &Field, multiplier: &[Complex64]) -> Field {
        let mut out = field.clone();
        self.forward_in_place(&mut out.values);
        out.values
            .iter_mut()
            .zip(multiplier)
            .for_each(|(v, m)| *v *= m);
        self.inverse_in_place(&mut out.values);
        out
    }
}

/// Unitary DFT in storage order; coefficient `i` belongs to [`GridSpec::frequency`]`(i)`.
pub fn dft(field: &Field) -> Field {
    SpectralPlan::new(field.grid()).forward(field)
}

pub fn idft(spectrum: &Field) -> Field {
    SpectralPlan::new(spectrum.grid()).inverse(spectrum)
}

/// `(Σ |f|^q h^dim)^{1/q}`, or `max |f|` for `q = ∞`.
pub fn lq_norm(field: &Field, q: Exponent) -> f64 {
    lq_norm_of_values(field.values(), field.grid().cell_volume(), q)
}

pub(crate) fn lq_norm_of_values(values: &[Complex64], weight: f64, q: Exponent) -> f64 {
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    match q {
        Exponent::Infinity => peak,
        Exponent::Finite(_) if peak == 0.0 => 0.0,
        Exponent::Finite(q) => {
            let s: f64 = values.iter().map(|v| (v.norm() / peak).powf(q)).sum();
            peak * (s * weight).powf(1.0 / q)
        }
    }
}

/// A sequence of fields on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    times: Vec<f64>,
    slices: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(times: Vec<f64>, slices: Vec<Field>) -> Result<Self> {
        if times.is_empty() || times.len() != slices.len() {
            return Err(Error::invalid(
                "times",
                format!(
                    "{} times for {} slices (need equal, nonzero counts)",
                    times.len(),
                    slices.len()
                ),
            ));
        }
        if times.len() >= 2 {
            let dt = times[1] - times[0];
            if !(dt > 0.0) {
                return Err(Error::invalid("times", "must be strictly increasing"));
            }
            for w in times.windows(2) {
                if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                    return Err(Error::invalid("times", "time step must be uniform"));
                }
            }
        }
        let grid = slices[0].grid();
        for s in &slices[1..] {
            grid.ensure_same(s.grid(), "space-time slices")?;
        }
        Ok(Self { times, slices })
    }

    /// Uniform times `t0 + i dt`, `i < count`, sampled from `f(t, x)`.
    pub fn from_fn(
        grid: &GridSpec,
        t0: f64,
        dt: f64,
        count: usize,
        mut f: impl FnMut(f64, &[f64]) -> f64,
    ) -> Result<Self> {
        if !(dt > 0.0) || count == 0 {
            return Err(Error::invalid("dt", "need dt > 0 and at least one slice"));
        }
        let times: Vec<f64> = (0..count).map(|i| t0 + i as f64 * dt).collect();
        let slices = times
            .iter()
            .map(|&t| Field::from_real_fn(grid, |x| f(t, x)))
            .collect();
        Self::new(times, slices)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn grid(&self) -> &GridSpec {
        self.slices[0].grid()
    }

    /// Time step; a single slice is treated as one unit-length cell.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            1.0
        } else {
            (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Moves slice `i` to position `i + steps` (mod the window); times stay put.
    pub fn shift_cyclic(&self, steps: isize) -> SpaceTimeField {
        let n = self.slices.len() as isize;
        let slices = (0..n)
            .map(|i| self.slices[(i - steps).rem_euclid(n) as usize].clone())
            .collect();
        SpaceTimeField {
            times: self.times.clone(),
            slices,
        }
    }

    pub fn scale(&mut self, s: f64) {
        for f in &mut self.slices {
            f.scale(Complex64::new(s, 0.0));
        }
    }
}

/// `(Σ_t Δt ‖f(t)‖_q^p)^{1/p}`, with suprema for infinite exponents.
pub fn mixed_norm(stf: &SpaceTimeField, p: Exponent, q: Exponent) -> f64 {
    let inner: Vec<f64> = stf.slices().iter().map(|s| lq_norm(s, q)).collect();
    lq_norm_of_reals(&inner, stf.dt(), p)
}

pub(crate) fn lq_norm_of_reals(values: &[f64], weight: f64, q: Exponent) -> f64 {
    let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    match q {
        Exponent::Infinity => peak,
        Exponent::Finite(_) if peak == 0.0 => 0.0,
        Exponent::Finite(q) => {
            let s: f64 = values.iter().map(|v| (v.abs() / peak).powf(q)).sum();
            peak * (s * weight).powf(1.0 / q)
        }
    }
}
