//! Ring kernels of the axisymmetric Biot-Savart law.
//!
//! A circular vortex ring of circulation `Γ` at `(r', z')` induces the
//! Stokes stream function `ψ = Γ √B H(m) / 4π` at `(r, z)`, where
//! `B = (r + r')² + dz² + δ²`, `m = 4 r r' / B` and
//! `H(m) = (2 - m) K(m) - 2 E(m)`. `δ` is the blob core radius (zero for
//! patches). Velocities follow from `u_r = -∂_z ψ / r`, `u_z = ∂_r ψ / r`
//! with `H'(m) = E / (2 (1 - m)) - K / 2`.

use super::elliptic::ke_from_complement;
use crate::error::{Error, Result};
use std::f64::consts::PI;

const INV_4PI: f64 = 0.25 / PI;
const SERIES_CUTOFF: f64 = 0.05;
const SERIES_TERMS: usize = 16;

/// `a_n = ((2n-1)!! / (2n)!!)²`.
const fn series_coefficients() -> [f64; SERIES_TERMS + 1] {
    let mut a = [0.0; SERIES_TERMS + 1];
    a[0] = 1.0;
    let mut n = 1;
    while n <= SERIES_TERMS {
        let q = (2 * n - 1) as f64 / (2 * n) as f64;
        a[n] = a[n - 1] * q * q;
        n += 1;
    }
    a
}

const A_COEF: [f64; SERIES_TERMS + 1] = series_coefficients();

/// `(H(m), H'(m))`, using a power series for small `m` where the closed form
/// cancels.
#[inline]
pub(crate) fn h_pair(m: f64, mc: f64) -> (f64, f64) {
    if m < SERIES_CUTOFF {
        // H = (π/2) Σ_{n≥2} a_{n-1} (n-1)/n mⁿ
        let mut h = 0.0;
        let mut dh = 0.0;
        let mut mp = m; // m^{n-1}
        for n in 2..=SERIES_TERMS + 1 {
            let c = A_COEF[n - 1] * (n - 1) as f64;
            dh += c * mp;
            mp *= m;
            h += c / n as f64 * mp;
        }
        (0.5 * PI * h, 0.5 * PI * dh)
    } else {
        let (k, e) = ke_from_complement(m, mc);
        ((2.0 - m) * k - 2.0 * e, 0.5 * e / mc - 0.5 * k)
    }
}

/// Velocity `(u_r, u_z)` induced at `(r, z)` by a unit-circulation ring at
/// `(rp, z')` with `dz = z - z'` and squared core radius `d2`.
#[inline]
pub(crate) fn ring_velocity(r: f64, rp: f64, dz: f64, d2: f64) -> (f64, f64) {
    let dz2d = dz * dz + d2;
    let sum = r + rp;
    let b = sum * sum + dz2d;
    if r == 0.0 {
        return (0.0, 0.5 * rp * rp / (b * b.sqrt()));
    }
    let diff = r - rp;
    let a = diff * diff + dz2d;
    let m = 4.0 * r * rp / b;
    let mc = a / b;
    let (h, dh) = h_pair(m, mc);
    let pre = INV_4PI / (r * b.sqrt());
    let ur = -pre * dz * (h - 2.0 * m * dh);
    let uz = pre * (sum * h + dh * (4.0 * rp - 2.0 * m * sum));
    (ur, uz)
}

/// Stream function at `(r, z)` of a unit-circulation ring at `(rp, z')`.
#[inline]
pub(crate) fn ring_stream(r: f64, rp: f64, dz: f64, d2: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let dz2d = dz * dz + d2;
    let sum = r + rp;
    let b = sum * sum + dz2d;
    let diff = r - rp;
    let a = diff * diff + dz2d;
    let (h, _) = h_pair(4.0 * r * rp / b, a / b);
    INV_4PI * b.sqrt() * h
}

/// Stream kernel `G(r, r', dz)` with `ψ(r, z) = ∬ G(r, r', z - z') ω^θ dr' dz'`.
pub fn ring_stream_kernel(r: f64, rp: f64, dz: f64) -> Result<f64> {
    if !(r >= 0.0) || !(rp > 0.0) || !dz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ring kernel needs r >= 0, r' > 0 (got r = {r}, r' = {rp}, dz = {dz})"
        )));
    }
    if r == rp && dz == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(ring_stream(r, rp, dz, 0.0))
}

/// Velocity kernel companion of [`ring_stream_kernel`].
pub fn ring_velocity_kernel(r: f64, rp: f64, dz: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0) || !(rp > 0.0) || !dz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ring kernel needs r >= 0, r' > 0 (got r = {r}, r' = {rp}, dz = {dz})"
        )));
    }
    if r == rp && dz == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(ring_velocity(r, rp, dz, 0.0))
}

/// Local self-induced velocity of a small square cell of side `s` carrying
/// circulation `gamma` at radius `r`: a ring with uniform core of radius
/// `s / 2`.
#[inline]
pub(crate) fn self_cell_uz(r: f64, s: f64, gamma: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    gamma * INV_4PI / r * ((16.0 * r / s).ln() - 0.25)
}

/// Core-averaged stream function of the same self cell.
#[inline]
pub(crate) fn self_cell_psi(r: f64, s: f64, gamma: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    gamma * r / (2.0 * PI) * ((16.0 * r / s).ln() - 1.5)
}
