//! Independent numerical oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use quadrature::double_exponential::integrate;

/// (t²/2)∫g(ω)sinc²(ωt/2)dω for g(ω) = 2τ/(1+(ωτ)²), by direct quadrature.
///
/// With ω = tan(u)/τ the Lorentzian measure becomes 2du on (−π/2, π/2). The
/// integrand is even, so integrate [0, π/2) piecewise between sinc zeros
/// u_k = atan(2πk/x), x = t/τ. Beyond the last zero sin² is replaced by its
/// mean; the dropped oscillating part is bounded by 8/(x³ω_K²(1+ω_K²)).
pub fn temporal_factor_quadrature(tau: f64, t: f64) -> f64 {
    let x = t / tau;
    let sinc2 = |a: f64| if a.abs() < 1e-8 { 1.0 - a * a / 3.0 } else { (a.sin() / a).powi(2) };
    let f = |u: f64| 2.0 * sinc2(0.5 * x * u.tan());
    let k_max = (200.0f64).max((10.0 * x / (2.0 * PI)).ceil() + 20.0) as usize;
    let mut sum = 0.0;
    let mut lo = 0.0;
    for k in 1..=k_max {
        let hi = (2.0 * PI * k as f64 / x).atan();
        sum += integrate(f, lo, hi, 1e-15 * (hi - lo)).integral;
        lo = hi;
    }
    // ∫_{u_K}^{π/2} 4/(x² tan²u) du = 4(cot u_K − (π/2 − u_K))/x²
    let big_t = (2.0 * PI * k_max as f64) / x;
    sum += 4.0 * (1.0 / big_t - (1.0 / big_t).atan()) / (x * x);
    // both half lines
    let full = 2.0 * sum;
    0.5 * t * t * full
}

/// Upper bound on the oscillating tail dropped by the quadrature oracle,
/// relative to its result.
pub fn temporal_factor_tail_bound(tau: f64, t: f64) -> f64 {
    let x = t / tau;
    let k_max = (200.0f64).max((10.0 * x / (2.0 * PI)).ceil() + 20.0);
    let w = 2.0 * PI * k_max / x;
    let bound = 2.0 * 8.0 / (x.powi(3) * w * w * (1.0 + w * w));
    bound * 0.5 * t * t / temporal_factor_quadrature(tau, t)
}

fn half_line<F: Fn(f64) -> f64>(scale: f64, f: F) -> f64 {
    // r = scale·s/(1−s), dr = scale/(1−s)² ds
    integrate(
        |s: f64| {
            if s >= 1.0 {
                return 0.0;
            }
            let r = scale * s / (1.0 - s);
            f(r) * scale / ((1.0 - s) * (1.0 - s))
        },
        0.0,
        1.0,
        1e-14,
    )
    .integral
}

/// In-plane (xx, yy, xy) electric weights of traps spread uniformly over the
/// plane at height `d` above the qubit, azimuth in [−π/4, 5π/4], by direct
/// integration of the single-trap kernel. Per unit ρₐp₀².
pub fn trap_plane_brute_force(d: f64) -> (f64, f64, f64) {
    let comp = |i: usize, j: usize| {
        let inner = |phi: f64| {
            half_line(d, |rho: f64| {
                let r = [rho * phi.cos(), rho * phi.sin(), d];
                let r2 = rho * rho + d * d;
                // δ terms vanish for in-plane i, j
                rho * 9.0 * d * d * r[i] * r[j] / r2.powi(5)
            })
        };
        integrate(inner, -PI / 4.0, 5.0 * PI / 4.0, 1e-14 / d.powi(4)).integral
    };
    (comp(0, 0), comp(1, 1), comp(0, 1))
}

/// In-plane (xx, yy, xy) electric weights of randomly oriented dipoles filling
/// the slab z ∈ [z_lo, z_hi] above the qubit, infinite in xy, by direct
/// integration of (1/3)(3RᵢRⱼ + δᵢⱼR²)/R⁸. Per unit ρᵥp₀².
pub fn dipole_slab_brute_force(z_lo: f64, z_hi: f64) -> (f64, f64, f64) {
    let comp = |i: usize, j: usize| {
        let at_height = |z: f64| {
            let ring = |phi: f64| {
                half_line(z, |rho: f64| {
                    let r = [rho * phi.cos(), rho * phi.sin(), z];
                    let r2 = rho * rho + z * z;
                    let delta = if i == j { r2 } else { 0.0 };
                    rho * (3.0 * r[i] * r[j] + delta) / (3.0 * r2.powi(4))
                })
            };
            integrate(ring, 0.0, 2.0 * PI, 1e-13 / z.powi(4)).integral
        };
        integrate(at_height, z_lo, z_hi, 1e-13 / z_lo.powi(3)).integral
    };
    (comp(0, 0), comp(1, 1), comp(0, 1))
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
