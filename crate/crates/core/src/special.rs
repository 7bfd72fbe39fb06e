//! Bessel functions and closed-form Fourier transforms of ball indicators.

use std::f64::consts::PI;

/// `J_n(x)` from `J_n(x) = (1/2π) ∫_0^{2π} cos(nτ - x sin τ) dτ`.
///
/// The integrand is periodic and entire, so the trapezoid rule converges
/// geometrically once the node count exceeds `|x| + |n|`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = (x.abs() + n.unsigned_abs() as f64 + 48.0).ceil() as usize;
    let m = m.next_power_of_two().max(64);
    let step = 2.0 * PI / m as f64;
    let nf = n as f64;
    let s: f64 = (0..m)
        .map(|j| {
            let tau = j as f64 * step;
            (nf * tau - x * tau.sin()).cos()
        })
        .sum();
    s / m as f64
}

/// `∫_{|x| ≤ R} e^{i x·ζ} dx` in `R^dim` as a function of `ρ = |ζ|` (dim 1, 2, 3).
pub fn ball_indicator_transform(dim: usize, radius: f64, rho: f64) -> f64 {
    let z = radius * rho;
    match dim {
        1 => {
            if z.abs() < 1e-4 {
                2.0 * radius * (1.0 - z * z / 6.0)
            } else {
                2.0 * (z).sin() / rho
            }
        }
        2 => {
            // 2πR J1(Rρ)/ρ = 2πR² J1(z)/z.
            let ratio = if z.abs() < 1e-3 {
                0.5 - z * z / 16.0
            } else {
                bessel_j(1, z) / z
            };
            2.0 * PI * radius * radius * ratio
        }
        3 => {
            // 4π (sin z − z cos z)/ρ³ = 4πR³ (sin z − z cos z)/z³.
            let ratio = if z.abs() < 0.1 {
                let z2 = z * z;
                1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 45360.0
            } else {
                (z.sin() - z * z.cos()) / (z * z * z)
            };
            4.0 * PI * radius.powi(3) * ratio
        }
        _ => panic!("ball transform implemented for dimensions 1..=3, got {dim}"),
    }
}

/// Volume of the ball of given radius in `R^dim` (dim 1, 2, 3).
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    match dim {
        1 => 2.0 * radius,
        2 => PI * radius * radius,
        3 => 4.0 / 3.0 * PI * radius.powi(3),
        _ => panic!("ball volume implemented for dimensions 1..=3, got {dim}"),
    }
}
