//! Smooth dyadic Fourier multipliers with an exact partition of unity.
//!
//! With `s = log2 |ξ|` and the raised-cosine ramp `φ(s) = 1` for `s ≤ 0`,
//! `cos²(πs/2)` on `[0, 1]`, `0` for `s ≥ 1`, the low block is
//! `φ(s - j_min)` and block `j > j_min` is `φ(s - j) - φ(s - j + 1)`,
//! supported in `2^{j-1} < |ξ| < 2^{j+1}`. The blocks telescope to
//! `φ(s - j_max)`, which is 1 on `|ξ| ≤ 2^{j_max}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, SpectralPlan};

fn ramp(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        (PI * s / 2.0).cos().powi(2)
    }
}

#[derive(Debug, Clone)]
pub struct LittlewoodPaleyBank {
    plan: SpectralPlan,
    j_min: i32,
    j_max: i32,
    profiles: Vec<Vec<f64>>,
}

impl LittlewoodPaleyBank {
    /// Blocks `j_min ..= j_max`; block `j_min` collects all lower frequencies.
    pub fn new(grid: &GridSpec, j_min: i32, j_max: i32) -> Result<Self> {
        if j_max < j_min {
            return Err(Error::invalid("j_max", "must be at least j_min"));
        }
        let norms: Vec<f64> = grid.frequency_norms_sq().iter().map(|v| v.sqrt()).collect();
        let log = |r: f64| if r == 0.0 { f64::NEG_INFINITY } else { r.log2() };
        let profiles = (j_min..=j_max)
            .map(|j| {
                norms
                    .iter()
                    .map(|&r| {
                        let s = log(r);
                        if j == j_min {
                            ramp(s - j as f64)
                        } else {
                            ramp(s - j as f64) - ramp(s - j as f64 + 1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            plan: SpectralPlan::new(grid),
            j_min,
            j_max,
            profiles,
        })
    }

    /// Bank whose blocks cover every frequency of the grid: from the first
    /// nonzero lattice frequency to the corner of the spectral box.
    pub fn covering(grid: &GridSpec) -> Self {
        let j_min = grid.frequency_step().log2().floor() as i32;
        let corner = grid.nyquist() * (grid.dim() as f64).sqrt();
        let j_max = corner.log2().ceil() as i32;
        Self::new(grid, j_min, j_max).expect("j_min ≤ j_max")
    }

    pub fn grid(&self) -> &GridSpec {
        self.plan.grid()
    }

    pub fn range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Multiplier values of block `j` in spectral storage order.
    pub fn profile(&self, j: i32) -> Result<&[f64]> {
        if !self.range().contains(&j) {
            return Err(Error::invalid(
                "j",
                format!("{j} outside bank range {}..={}", self.j_min, self.j_max),
            ));
        }
        Ok(&self.profiles[(j - self.j_min) as usize])
    }

    /// `P_j u` for every block, sharing one forward transform.
    pub fn decompose(&self, u: &Field) -> Result<Vec<Field>> {
        self.grid().ensure_same(u.grid(), "Littlewood–Paley")?;
        let hat = self.plan.forward(u);
        Ok(self
            .profiles
            .iter()
            .map(|p| {
                let mut block = hat.clone();
                block
                    .values_mut()
                    .iter_mut()
                    .zip(p)
                    .for_each(|(v, m)| *v *= *m);
                self.plan.inverse_in_place(block.values_mut());
                block
            })
            .collect())
    }
}

/// `P_j u = idft(profile_j · dft(u))`.
pub fn littlewood_paley_apply(bank: &LittlewoodPaleyBank, u: &Field, j: i32) -> Result<Field> {
    bank.grid().ensure_same(u.grid(), "Littlewood–Paley")?;
    let multiplier: Vec<Complex64> = bank
        .profile(j)?
        .iter()
        .map(|m| Complex64::new(*m, 0.0))
        .collect();
    Ok(bank.plan.apply_multiplier(u, &multiplier))
}
