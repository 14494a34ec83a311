//! Closed-form quantities for Hill's spherical vortex `ξ_H = 1_B`, the
//! exact oracle for every numerical component.
//!
//! All formulas keep the traveling speed `W` as a field so that vortices of
//! other strengths can be described; unit strength has `W = 2/15`.

use crate::error::{Error, Result};
use crate::geometry::HalfPlanePoint;
use std::f64::consts::PI;

/// Traveling speed of the unit-strength vortex.
pub const W_HILL: f64 = 2.0 / 15.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillConstants {
    /// Traveling speed.
    pub w: f64,
    /// Relative vorticity inside the unit ball.
    pub strength: f64,
}

impl Default for HillConstants {
    fn default() -> Self {
        Self {
            w: W_HILL,
            strength: 1.0,
        }
    }
}

impl HillConstants {
    /// Constants for a vortex of the given strength; `W` scales linearly.
    pub fn with_strength(strength: f64) -> Self {
        Self {
            w: W_HILL * strength,
            strength,
        }
    }

    /// Relative vorticity. The value exactly on `|x| = 1` is unspecified
    /// (this implementation returns 0 there).
    pub fn xi(&self, p: HalfPlanePoint) -> f64 {
        if p.r * p.r + p.z * p.z < 1.0 {
            self.strength
        } else {
            0.0
        }
    }

    pub fn stream(&self, p: HalfPlanePoint) -> f64 {
        let r2 = p.r * p.r;
        let x2 = r2 + p.z * p.z;
        if x2 <= 1.0 {
            0.5 * self.w * r2 * (2.5 - 1.5 * x2)
        } else {
            0.5 * self.w * r2 / (x2 * x2.sqrt())
        }
    }

    /// `(u_r, u_z)` in the lab frame.
    pub fn velocity(&self, p: HalfPlanePoint) -> (f64, f64) {
        let (r, z) = (p.r, p.z);
        let r2 = r * r;
        let x2 = r2 + z * z;
        let w = self.w;
        if x2 <= 1.0 {
            (1.5 * w * r * z, 0.5 * w * (5.0 - 3.0 * x2 - 3.0 * r2))
        } else {
            let x = x2.sqrt();
            let x3 = x2 * x;
            (1.5 * w * r * z / (x3 * x2), w / x3 * (1.0 - 1.5 * r2 / x2))
        }
    }

    /// Stream function in the frame moving with the vortex; vanishes on the
    /// unit sphere and on the axis.
    pub fn comoving_stream(&self, p: HalfPlanePoint) -> f64 {
        let r2 = p.r * p.r;
        let x2 = r2 + p.z * p.z;
        if x2 <= 1.0 {
            0.5 * self.w * r2 * 1.5 * (1.0 - x2)
        } else {
            0.5 * self.w * r2 * (1.0 / (x2 * x2.sqrt()) - 1.0)
        }
    }

    /// Co-moving axial velocity on the axis, `u_z(0, z) - W`.
    pub fn axis_velocity(&self, z: f64) -> f64 {
        let a = z.abs();
        if a <= 1.0 {
            1.5 * self.w * (1.0 - z * z)
        } else {
            self.w / (a * a * a) * (1.0 - a * a * a)
        }
    }

    /// Co-moving axis trajectory starting inside the ball.
    pub fn axis_trajectory_interior(&self, z0: f64, t: f64) -> Result<f64> {
        if !(z0.abs() < 1.0) {
            return Err(Error::OutsideInteriorCase(z0.abs()));
        }
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        // z(t) = tanh(3Wt/2 - c), c = atanh(-z0)
        Ok((1.5 * self.w * t + z0.atanh()).tanh())
    }

    /// Co-moving axis trajectory starting outside the ball, integrated with
    /// adaptive RK4 (step doubling, relative tolerance 1e-10).
    ///
    /// The integration runs on the gap `g = |z| - 1`, which keeps full
    /// relative precision during the exponential approach to `z = 1`. The
    /// returned value stays strictly on the starting side of `±1`, even when
    /// the true gap is below the spacing of floating-point numbers near 1.
    pub fn axis_trajectory_exterior(&self, z0: f64, t: f64) -> Result<f64> {
        if !(z0.abs() > 1.0) {
            return Err(Error::OutsideExteriorCase(z0.abs()));
        }
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        let w = self.w;
        // |v(z)| = W g (3 + 3g + g²) / (1 + g)³ with |z| = 1 + g
        let speed = move |g: f64| w * g * (3.0 + g * (3.0 + g)) / (1.0 + g).powi(3);
        let g0 = z0.abs() - 1.0;
        let (g, sign) = if z0 > 0.0 {
            (integrate_adaptive(|g| -speed(g), g0, t, 1e-10), 1.0)
        } else {
            (integrate_adaptive(speed, g0, t, 1e-10), -1.0)
        };
        let magnitude = (1.0 + g).max(1.0 + f64::EPSILON);
        Ok(sign * magnitude)
    }
}

/// `ξ_H` for the unit-strength vortex.
pub fn hill_xi(p: HalfPlanePoint) -> f64 {
    HillConstants::default().xi(p)
}

pub fn hill_stream(p: HalfPlanePoint) -> f64 {
    HillConstants::default().stream(p)
}

pub fn hill_velocity(p: HalfPlanePoint) -> (f64, f64) {
    HillConstants::default().velocity(p)
}

pub fn comoving_stream(p: HalfPlanePoint) -> f64 {
    HillConstants::default().comoving_stream(p)
}

pub fn axis_velocity(z: f64) -> f64 {
    HillConstants::default().axis_velocity(z)
}

pub fn axis_trajectory_interior(z0: f64, t: f64) -> Result<f64> {
    HillConstants::default().axis_trajectory_interior(z0, t)
}

pub fn axis_trajectory_exterior(z0: f64, t: f64) -> Result<f64> {
    HillConstants::default().axis_trajectory_exterior(z0, t)
}

/// `‖ξ_H - ξ_H^τ‖_{L¹}`, the volume of the symmetric difference of two unit
/// balls whose centres are `|τ|` apart.
pub fn overlap_f(tau: f64) -> f64 {
    let a = tau.abs();
    if a <= 2.0 {
        PI / 6.0 * a * (12.0 - a * a)
    } else {
        8.0 * PI / 3.0
    }
}

fn rk4_scalar(f: &impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
    let k1 = f(z);
    let k2 = f(z + 0.5 * h * k1);
    let k3 = f(z + 0.5 * h * k2);
    let k4 = f(z + h * k3);
    z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn integrate_adaptive(f: impl Fn(f64) -> f64, z0: f64, t_end: f64, rtol: f64) -> f64 {
    let mut t = 0.0;
    let mut z = z0;
    let mut h = 0.01f64.min(t_end.max(1e-300));
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let full = rk4_scalar(&f, z, h);
        let half = rk4_scalar(&f, rk4_scalar(&f, z, 0.5 * h), 0.5 * h);
        let err = (half - full).abs() / 15.0;
        let scale = rtol * z.abs().max(1e-300);
        if err <= scale || h < 1e-12 {
            t += h;
            // Richardson extrapolation of the two estimates
            z = half + (half - full) / 15.0;
            let grow = if err == 0.0 {
                2.0
            } else {
                (0.9 * (scale / err).powf(0.2)).min(2.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * (scale / err).powf(0.2)).max(0.1);
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(r: f64, z: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(r, z)
    }

    #[test]
    fn xi_examples() {
        assert_eq!(hill_xi(p(0.0, 0.0)), 1.0);
        assert_eq!(hill_xi(p(0.6, 0.9)), 0.0);
    }

    #[test]
    fn stream_examples() {
        assert_relative_eq!(hill_stream(p(1.0, 0.0)), 1.0 / 15.0, epsilon = 1e-16);
        let h = HillConstants::default();
        let ext = 0.5 * h.w * 1.0;
        assert_relative_eq!(ext, 1.0 / 15.0, epsilon = 1e-16);
        assert_eq!(hill_stream(p(0.0, 0.3)), 0.0);
        assert_eq!(hill_stream(p(0.0, 3.0)), 0.0);
        assert_relative_eq!(
            hill_stream(p(1.0, 1.0)),
            (1.0 / 15.0) * 2f64.powf(-1.5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn velocity_examples() {
        let (ur, uz) = hill_velocity(p(0.0, 0.0));
        assert_eq!(ur, 0.0);
        assert_relative_eq!(uz, 1.0 / 3.0, epsilon = 1e-15);
        let (ur, uz) = hill_velocity(p(1.0, 0.0));
        assert_eq!(ur, 0.0);
        assert_relative_eq!(uz, -1.0 / 15.0, epsilon = 1e-15);
        let (ur, uz) = hill_velocity(p(2.0, 0.0));
        assert_eq!(ur, 0.0);
        assert_relative_eq!(uz, -1.0 / 120.0, epsilon = 1e-15);
        assert_relative_eq!(hill_velocity(p(0.0, 3.0)).1, 2.0 / 405.0, epsilon = 1e-15);
        for &(r, z) in &[(0.3, 0.4), (1.5, 0.7), (0.2, 2.0)] {
            assert_eq!(hill_velocity(p(r, -z)).0, -hill_velocity(p(r, z)).0);
        }
    }

    #[test]
    fn velocity_continuous_across_sphere() {
        let h = HillConstants::default();
        let mut worst = 0.0f64;
        for k in 0..1000 {
            let th = -PI / 2.0 + PI * (k as f64 + 0.5) / 1000.0;
            let (r, z) = (th.cos(), th.sin());
            let x2 = r * r + z * z;
            let int = (
                1.5 * h.w * r * z,
                0.5 * h.w * (5.0 - 3.0 * x2 - 3.0 * r * r),
            );
            let x = x2.sqrt();
            let x3 = x2 * x;
            let ext = (
                1.5 * h.w * r * z / (x3 * x2),
                h.w / x3 * (1.0 - 1.5 * r * r / x2),
            );
            worst = worst.max((int.0 - ext.0).abs()).max((int.1 - ext.1).abs());
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn velocity_from_stream_differences() {
        let errs: Vec<f64> = [1e-3, 5e-4]
            .iter()
            .map(|&h| {
                let mut worst = 0.0f64;
                for &(r, z) in &[(0.3, 0.2), (0.5, -0.4), (1.5, 0.5), (0.8, 1.6)] {
                    let ur = -(hill_stream(p(r, z + h)) - hill_stream(p(r, z - h))) / (2.0 * h) / r;
                    let uz = (hill_stream(p(r + h, z)) - hill_stream(p(r - h, z))) / (2.0 * h) / r;
                    let (er, ez) = hill_velocity(p(r, z));
                    worst = worst.max((ur - er).abs()).max((uz - ez).abs());
                }
                worst
            })
            .collect();
        assert!(errs[0] < 1e-6);
        assert!(errs[1] < errs[0] / 3.0 || errs[1] < 1e-11);
    }

    #[test]
    fn divergence_free() {
        let h = 1e-4;
        for &(r, z) in &[(0.3, 0.2), (0.5, -0.4), (1.5, 0.5), (0.8, 1.6)] {
            let flux = |rr: f64| rr * hill_velocity(p(rr, z)).0;
            let div = (flux(r + h) - flux(r - h)) / (2.0 * h) / r
                + (hill_velocity(p(r, z + h)).1 - hill_velocity(p(r, z - h)).1) / (2.0 * h);
            assert!(div.abs() < 1e-8, "div {div} at ({r},{z})");
        }
    }

    #[test]
    fn axis_velocity_identity() {
        for k in 0..=400 {
            let z = -4.0 + 0.02 * k as f64;
            let lhs = axis_velocity(z);
            let rhs = hill_velocity(p(0.0, z)).1 - W_HILL;
            assert!((lhs - rhs).abs() <= 1e-14, "z={z}");
        }
        assert_relative_eq!(axis_velocity(0.0), 0.2, epsilon = 1e-15);
        assert_eq!(axis_velocity(1.0), 0.0);
        assert_eq!(axis_velocity(-1.0), 0.0);
        assert_relative_eq!(axis_velocity(2.0), -7.0 / 60.0, epsilon = 1e-15);
    }

    #[test]
    fn comoving_stream_examples() {
        assert_eq!(comoving_stream(p(1.0, 0.0)), 0.0);
        assert_relative_eq!(comoving_stream(p(0.5, 0.0)), 3.0 / 160.0, epsilon = 1e-16);
        for k in 0..100 {
            let th = -PI / 2.0 + PI * k as f64 / 99.0;
            assert!(comoving_stream(p(th.cos(), th.sin())).abs() < 1e-16 * 10.0);
        }
        assert_eq!(comoving_stream(p(0.0, 2.0)), 0.0);
    }

    #[test]
    fn interior_trajectory() {
        assert_relative_eq!(
            axis_trajectory_interior(0.0, 5.0).unwrap(),
            1f64.tanh(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            axis_trajectory_interior(0.5, 0.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(matches!(
            axis_trajectory_interior(1.0, 1.0),
            Err(Error::OutsideInteriorCase(_))
        ));
        // fixed-step RK4 oracle
        let dt = 1e-3;
        let mut z = 0.0;
        for _ in 0..5000 {
            z = rk4_scalar(&axis_velocity, z, dt);
        }
        assert!((z - axis_trajectory_interior(0.0, 5.0).unwrap()).abs() < 1e-8);
        // ODE residual by central differences
        let h = 1e-4;
        for &t in &[0.5, 2.0, 7.0] {
            let d = (axis_trajectory_interior(-0.3, t + h).unwrap()
                - axis_trajectory_interior(-0.3, t - h).unwrap())
                / (2.0 * h);
            let v = axis_velocity(axis_trajectory_interior(-0.3, t).unwrap());
            assert!((d - v).abs() < 1e-8);
        }
    }

    #[test]
    fn exterior_trajectory() {
        let z100 = axis_trajectory_exterior(1.5, 100.0).unwrap();
        assert!(z100 > 1.0 && z100 < 1.001, "{z100}");
        let mut prev = 1.5;
        for k in 1..=20 {
            let z = axis_trajectory_exterior(1.5, k as f64).unwrap();
            assert!(z < prev);
            prev = z;
        }
        let z40 = axis_trajectory_exterior(-2.0, 40.0).unwrap();
        let z50 = axis_trajectory_exterior(-2.0, 50.0).unwrap();
        assert!(z50 < -2.0);
        let slope = (z50 - z40) / 10.0;
        assert!((slope + W_HILL).abs() < 0.05 * W_HILL, "slope {slope}");
        let z0 = 1.0 + 1e-9;
        let z1 = axis_trajectory_exterior(z0, 1.0).unwrap();
        assert!(z1 < z0 && z0 - z1 < 1e-8);
        assert!(axis_trajectory_exterior(0.5, 1.0).is_err());
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_f(0.0), 0.0);
        assert_relative_eq!(overlap_f(2.0), 8.0 * PI / 3.0, epsilon = 1e-14);
        assert_relative_eq!(overlap_f(1.0), 11.0 * PI / 6.0, epsilon = 1e-14);
        assert_eq!(overlap_f(-0.7), overlap_f(0.7));
        for k in 0..1000 {
            let tau = -2.0 + 4.0 * k as f64 / 999.0;
            assert!(4.0 / 3.0 * PI * tau.abs() <= overlap_f(tau) + 1e-14);
        }
    }
}
