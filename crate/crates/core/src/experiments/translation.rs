//! Trace-power scaling of `Γ_V` for `V(t, x) = Σ_{j=1}^N v(t - jT, x)`.
//!
//! With `A_v = Γ_v`, each copy contributes `Γ_{v(· - jT)} = U(-jT) A_v U(jT)`,
//! so `tr Γ_V^m = N tr A_v^m + (cross terms)`. The cross terms involve
//! `A_v U(t) A_v` for `|t| ≥ T`, which decays as `t` grows.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{join, ExperimentReport};
use crate::error::{Error, Result};
use crate::grid::{lq_norm, lq_norm_of_reals, Exponent, GridSpec, SpaceTimeField};
use crate::propagator::{gamma_operator, revival_period, FreeEvolution, GammaOperator};
use crate::schatten::{schatten_norm, singular_values, trace_power};
use crate::CMatrix;

const MAX_COPIES: usize = 8;

/// A single time bump `v` and the copy counts to translate it to.
#[derive(Debug, Clone)]
pub struct TranslationExperiment {
    v: SpaceTimeField,
    copies: Vec<usize>,
    power: u32,
}

impl TranslationExperiment {
    /// `v` must be real, nonnegative and vanish for `|t| ≥ 1/2`. The trace
    /// power is `d + 2`.
    pub fn new(v: SpaceTimeField, copies: Vec<usize>) -> Result<Self> {
        if copies.is_empty() || copies.iter().any(|&n| n == 0 || n > MAX_COPIES) {
            return Err(Error::invalid(
                "copies",
                format!("each N must lie in 1..={MAX_COPIES}"),
            ));
        }
        let mut any = false;
        for (t, s) in v.times().iter().zip(v.slices()) {
            let nonzero = s.values().iter().any(|z| *z != Complex64::new(0.0, 0.0));
            if s.values().iter().any(|z| z.im != 0.0 || z.re < 0.0 || !z.re.is_finite()) {
                return Err(Error::invalid("v", "must be real, finite and nonnegative"));
            }
            if nonzero && t.abs() >= 0.5 {
                return Err(Error::invalid("v", format!("nonzero at t = {t}, outside |t| < 1/2")));
            }
            any |= nonzero;
        }
        if !any {
            return Err(Error::invalid("v", "must not vanish identically"));
        }
        let power = v.grid().dim() as u32 + 2;
        Ok(Self { v, copies, power })
    }

    /// `cos²(πt) e^{-|x|²/(2σ²)}` sampled at the cell midpoints of `(-1/2, 1/2)`.
    pub fn cosine_bump(grid: &GridSpec, dt: f64, width: f64, copies: Vec<usize>) -> Result<Self> {
        if !(dt > 0.0 && dt <= 0.5) || !(width > 0.0) {
            return Err(Error::invalid("dt", "need 0 < dt ≤ 1/2 and a positive width"));
        }
        let count = (1.0 / dt).round() as usize;
        let step = 1.0 / count as f64;
        let v = SpaceTimeField::from_fn(grid, -0.5 + step / 2.0, step, count, |t, x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            (PI * t).cos().powi(2) * (-r2 / (2.0 * width * width)).exp()
        })?;
        Self::new(v, copies)
    }

    pub fn bump(&self) -> &SpaceTimeField {
        &self.v
    }

    pub fn copies(&self) -> &[usize] {
        &self.copies
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    fn exponent(&self) -> f64 {
        self.power as f64
    }
}

/// `Σ_{j=1}^N U(-jT) A U(jT)`.
fn translated_sum(a: &GammaOperator, n: usize, separation: f64) -> CMatrix {
    let mut sum = CMatrix::zeros(a.matrix().nrows(), a.matrix().ncols());
    for j in 1..=n {
        sum += a.conjugated(j as f64 * separation).matrix();
    }
    sum
}

/// `‖V‖_{L^{p/2}_t L^{q/2}_x}` for `N` disjoint copies of `v`, `p = q = d + 2`.
fn copies_norm(exp: &TranslationExperiment, n: usize) -> f64 {
    let half = Exponent::Finite(exp.exponent() / 2.0);
    let inner: Vec<f64> = exp.v.slices().iter().map(|s| lq_norm(s, half)).collect();
    let all: Vec<f64> = (0..n).flat_map(|_| inner.iter().copied()).collect();
    lq_norm_of_reals(&all, exp.v.dt(), half)
}

/// Rows `(N, T, trace_gamma, diagonal, remainder, relative_remainder, v_norm)`
/// for every copy count and separation.
pub fn translation_scaling(exp: &TranslationExperiment, t_schedule: &[f64]) -> Result<ExperimentReport> {
    if t_schedule.is_empty() {
        return Err(Error::invalid("t_schedule", "need at least one separation"));
    }
    let grid = exp.v.grid();
    let period = revival_period(grid);
    let n_max = *exp.copies.iter().max().expect("nonempty");
    for &t in t_schedule {
        if !(t >= 1.0) {
            return Err(Error::invalid("t_schedule", format!("T = {t} < 1 overlaps copies")));
        }
        if t * (n_max as f64 + 1.0) > period {
            return Err(Error::invalid(
                "t_schedule",
                format!("T = {t} wraps around the periodic window {period:.3} for N = {n_max}"),
            ));
        }
    }
    let m = exp.power;
    let a = gamma_operator(&exp.v)?;
    let tr_a = trace_power(a.matrix(), m)?.re;

    let mut report = ExperimentReport::new(
        "translate-scaling",
        &["N", "T", "trace_gamma", "diagonal", "remainder", "relative_remainder", "v_norm"],
    );
    for &t in t_schedule {
        for &n in &exp.copies {
            let diagonal = n as f64 * tr_a;
            let (trace, remainder) = if n == 1 {
                (tr_a, 0.0)
            } else {
                let tr = trace_power(&translated_sum(&a, n, t), m)?.re;
                (tr, tr - diagonal)
            };
            let relative = if diagonal == 0.0 { 0.0 } else { remainder / diagonal };
            report.push_row(vec![
                n as f64,
                t,
                trace,
                diagonal,
                remainder,
                relative,
                copies_norm(exp, n),
            ]);
        }
    }

    report.meta("grid", format!("{:?}", grid));
    report.meta("dt", exp.v.dt());
    report.meta("slices", exp.v.len());
    report.meta("power", m);
    report.meta("window", period);
    report.meta("t_schedule", join(t_schedule));
    report.meta("trace_a", tr_a);

    let t_last = *t_schedule.last().expect("nonempty");
    let worst = report
        .rows
        .iter()
        .filter(|r| r[1] == t_last)
        .map(|r| r[5].abs())
        .fold(0.0, f64::max);
    report.diagnose("remainder_over_diagonal", worst, 0.5);

    let rows = &report.rows;
    let norms: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[1] == t_last)
        .map(|r| (r[0], r[6]))
        .collect();
    if let Some(fit) = crate::stats::log_log_fit(
        &norms.iter().map(|p| p.0).collect::<Vec<_>>(),
        &norms.iter().map(|p| p.1).collect::<Vec<_>>(),
    ) {
        report.fit("v_norm_growth", fit.slope, fit.slope_stderr);
    }
    Ok(report)
}

/// Rows `(t, value, ratio)` with `value = ‖A_v U(t) A_v‖_{S^{(d+2)/2}}` and
/// `ratio` its size relative to `t = 0`.
pub fn decoupling_decay(exp: &TranslationExperiment, t_list: &[f64]) -> Result<ExperimentReport> {
    if t_list.is_empty() {
        return Err(Error::invalid("t_list", "need at least one time"));
    }
    let a = gamma_operator(&exp.v)?;
    decoupling_of(&a, exp.exponent() / 2.0, t_list)
}

fn decoupling_of(a: &GammaOperator, alpha: f64, t_list: &[f64]) -> Result<ExperimentReport> {
    let evo = FreeEvolution::new(a.grid());
    let value_at = |t: f64| -> Result<f64> {
        let product = a.matrix() * evo.evolve_columns(a.matrix(), t);
        schatten_norm(&singular_values(&product)?, alpha)
    };
    let baseline = value_at(0.0)?;
    let mut report = ExperimentReport::new("decoupling", &["t", "value", "ratio"]);
    for &t in t_list {
        let value = if t == 0.0 { baseline } else { value_at(t)? };
        let ratio = if baseline == 0.0 { 0.0 } else { value / baseline };
        report.push_row(vec![t, value, ratio]);
    }
    report.meta("grid", format!("{:?}", a.grid()));
    report.meta("alpha", alpha);
    report.meta("baseline", baseline);
    report.meta("t_list", join(t_list));
    let last = report.rows.last().expect("nonempty")[2];
    report.diagnose("decoupling_ratio", last, 0.1);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::grid::Field;
    use crate::propagator::gamma_from_slices;

    fn small() -> TranslationExperiment {
        let g = make_grid(1, 64, 16.0).unwrap();
        TranslationExperiment::cosine_bump(&g, 0.05, 1.0, vec![1, 2, 3]).unwrap()
    }

    #[test]
    fn single_copy_has_no_remainder() {
        let r = translation_scaling(&small(), &[2.0, 4.0]).unwrap();
        for row in r.rows.iter().filter(|r| r[0] == 1.0) {
            assert_eq!(row[4], 0.0);
        }
    }

    #[test]
    fn translated_sum_matches_brute_force() {
        let exp = small();
        let t = 3.0;
        let n = 2;
        let a = gamma_operator(&exp.v).unwrap();
        let fast = translated_sum(&a, n, t);
        // V on its own time axis: slices of v at t_i + jT.
        let dt = exp.v.dt();
        let mut slices: Vec<(f64, &Field)> = Vec::new();
        for j in 1..=n {
            for (ti, s) in exp.v.times().iter().zip(exp.v.slices()) {
                slices.push((ti + j as f64 * t, s));
            }
        }
        let brute = gamma_from_slices(exp.v.grid(), dt, &slices).unwrap();
        let err = (&fast - brute.matrix()).norm();
        assert!(err <= 1e-10 * fast.norm(), "err {err}");
    }

    #[test]
    fn norm_grows_like_power_of_copies() {
        let exp = small();
        let one = copies_norm(&exp, 1);
        let three = copies_norm(&exp, 3);
        assert!((three / one - 3f64.powf(2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = make_grid(1, 32, 8.0).unwrap();
        assert!(TranslationExperiment::cosine_bump(&g, 0.05, 1.0, vec![9]).is_err());
        let exp = TranslationExperiment::cosine_bump(&g, 0.05, 1.0, vec![2]).unwrap();
        assert!(translation_scaling(&exp, &[0.5]).is_err());
        assert!(translation_scaling(&exp, &[100.0]).is_err());
        let late = SpaceTimeField::from_fn(&g, 0.0, 0.1, 8, |_, _| 1.0).unwrap();
        assert!(TranslationExperiment::new(late, vec![1]).is_err());
    }

    #[test]
    fn decoupling_baseline_and_zero() {
        let exp = small();
        let r = decoupling_decay(&exp, &[0.0, 4.0]).unwrap();
        let a = gamma_operator(&exp.v).unwrap();
        let sq = a.matrix() * a.matrix();
        let direct = schatten_norm(&singular_values(&sq).unwrap(), 1.5).unwrap();
        let v0 = r.column("value").unwrap()[0];
        assert!((v0 - direct).abs() <= 1e-10 * direct && v0 > 0.0);

        let g = exp.v.grid().clone();
        let zero = GammaOperator::from_matrix(g.clone(), CMatrix::zeros(64, 64)).unwrap();
        let r = decoupling_of(&zero, 1.5, &[0.0, 2.0]).unwrap();
        assert!(r.column("value").unwrap().iter().all(|v| *v == 0.0));
    }
}
