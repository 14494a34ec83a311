use super::kernel::{ring_stream, ring_velocity};
use crate::geometry::HalfPlanePoint;
use std::f64::consts::PI;

/// One Lagrangian particle of a smooth vorticity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    pub p: HalfPlanePoint,
    /// Transported relative vorticity.
    pub xi: f64,
    /// Material 3D volume `2π r dr dz` represented by the particle.
    pub volume: f64,
}

impl Blob {
    pub fn new(p: HalfPlanePoint, xi: f64, volume: f64) -> Self {
        Self { p, xi, volume }
    }

    /// Ring circulation `ξ ∬ r dr dz = ξ V / 2π`.
    pub fn circulation(&self) -> f64 {
        self.xi * self.volume / (2.0 * PI)
    }

    /// Meridional area weight `dr dz` recovered from the volume weight.
    pub fn meridional_area(&self) -> f64 {
        if self.p.r > 0.0 {
            self.volume / (2.0 * PI * self.p.r)
        } else {
            0.0
        }
    }
}

/// Blob rings packed for evaluation. Particles with zero circulation are
/// dropped here since they only act as tracers.
#[derive(Debug, Clone, Default)]
pub struct PreparedBlobs {
    r: Vec<f64>,
    z: Vec<f64>,
    gamma: Vec<f64>,
    d2: f64,
}

impl PreparedBlobs {
    pub fn new(blobs: &[Blob], core_radius: f64) -> Self {
        let mut out = PreparedBlobs {
            d2: core_radius * core_radius,
            ..Default::default()
        };
        for b in blobs {
            let g = b.circulation();
            if g != 0.0 {
                out.r.push(b.p.r);
                out.z.push(b.p.z);
                out.gamma.push(g);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn velocity(&self, r: f64, z: f64) -> (f64, f64) {
        let mut ur = 0.0;
        let mut uz = 0.0;
        for k in 0..self.r.len() {
            if self.r[k] == 0.0 {
                continue;
            }
            let (a, b) = ring_velocity(r, self.r[k], z - self.z[k], self.d2);
            ur += self.gamma[k] * a;
            uz += self.gamma[k] * b;
        }
        (ur, uz)
    }

    pub fn stream(&self, r: f64, z: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let mut psi = 0.0;
        for k in 0..self.r.len() {
            if self.r[k] == 0.0 {
                continue;
            }
            psi += self.gamma[k] * ring_stream(r, self.r[k], z - self.z[k], self.d2);
        }
        psi
    }
}
