//! Velocity and stream function of axisymmetric, swirl-free vorticity
//! sources by direct summation of ring kernels.

mod blobs;
mod elliptic;
mod kernel;
mod patch;

pub use blobs::{Blob, PreparedBlobs};
pub use elliptic::elliptic_ke;
pub use kernel::{ring_stream_kernel, ring_velocity_kernel};
pub use patch::PatchRaster;

use crate::error::{Error, Result};
use crate::geometry::{Contour, HalfPlanePoint};
use rayon::prelude::*;

/// A smooth field carried by blobs with a common algebraic core.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobField {
    pub blobs: Vec<Blob>,
    pub core_radius: f64,
}

impl BlobField {
    pub fn new(blobs: Vec<Blob>, core_radius: f64) -> Result<Self> {
        if !(core_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "core radius must be positive, got {core_radius}"
            )));
        }
        if let Some(b) = blobs.iter().find(|b| !(b.volume > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "blob volume must be positive, got {}",
                b.volume
            )));
        }
        Ok(Self { blobs, core_radius })
    }
}

/// Source of the Biot-Savart evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum VorticitySource {
    /// Uniform patch `ξ = xi_value` inside the contours, integrated on a
    /// raster of spacing `h_quad`.
    Patch {
        contours: Vec<Contour>,
        xi_value: f64,
        h_quad: f64,
    },
    Blobs(BlobField),
}

impl VorticitySource {
    pub fn patch(contours: Vec<Contour>, xi_value: f64, h_quad: f64) -> Result<Self> {
        if !(h_quad > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "h_quad must be positive, got {h_quad}"
            )));
        }
        if contours.iter().any(|c| !c.is_closed()) {
            return Err(Error::OpenContour);
        }
        Ok(Self::Patch {
            contours,
            xi_value,
            h_quad,
        })
    }

    pub fn translated(&self, dz: f64) -> Self {
        match self {
            Self::Patch {
                contours,
                xi_value,
                h_quad,
            } => Self::Patch {
                contours: contours.iter().map(|c| c.translated(dz)).collect(),
                xi_value: *xi_value,
                h_quad: *h_quad,
            },
            Self::Blobs(field) => Self::Blobs(BlobField {
                blobs: field
                    .blobs
                    .iter()
                    .map(|b| Blob::new(b.p.translated(dz), b.xi, b.volume))
                    .collect(),
                core_radius: field.core_radius,
            }),
        }
    }

    /// Builds the quadrature data; reuse the result for repeated queries.
    pub fn prepare(&self) -> PreparedSource {
        match self {
            Self::Patch {
                contours,
                xi_value,
                h_quad,
            } => PreparedSource::Patch(PatchRaster::build(contours, *xi_value, *h_quad)),
            Self::Blobs(field) => {
                PreparedSource::Blobs(PreparedBlobs::new(&field.blobs, field.core_radius))
            }
        }
    }
}

/// A source ready for repeated evaluation.
#[derive(Debug, Clone)]
pub enum PreparedSource {
    Patch(PatchRaster),
    Blobs(PreparedBlobs),
}

impl PreparedSource {
    /// `(u_r, u_z)` at `p`; `u_r` is exactly zero on the axis.
    pub fn velocity_at(&self, p: HalfPlanePoint) -> (f64, f64) {
        let (ur, uz) = match self {
            Self::Patch(raster) => raster.velocity(p.r, p.z),
            Self::Blobs(blobs) => blobs.velocity(p.r, p.z),
        };
        if p.r == 0.0 {
            (0.0, uz)
        } else {
            (ur, uz)
        }
    }

    pub fn stream_at(&self, p: HalfPlanePoint) -> f64 {
        match self {
            Self::Patch(raster) => raster.stream(p.r, p.z),
            Self::Blobs(blobs) => blobs.stream(p.r, p.z),
        }
    }

    /// Same values as mapping [`Self::velocity_at`], computed in parallel
    /// over targets.
    pub fn velocity_batch(&self, targets: &[HalfPlanePoint]) -> Vec<(f64, f64)> {
        targets.par_iter().map(|p| self.velocity_at(*p)).collect()
    }

    pub fn stream_batch(&self, targets: &[HalfPlanePoint]) -> Vec<f64> {
        targets.par_iter().map(|p| self.stream_at(*p)).collect()
    }
}

/// Stream function of `src` at `p`. Prepares the source on every call; use
/// [`VorticitySource::prepare`] for repeated evaluation.
pub fn stream_at(src: &VorticitySource, p: HalfPlanePoint) -> f64 {
    src.prepare().stream_at(p)
}

pub fn velocity_at(src: &VorticitySource, p: HalfPlanePoint) -> (f64, f64) {
    src.prepare().velocity_at(p)
}

pub fn velocity_batch(src: &VorticitySource, targets: &[HalfPlanePoint]) -> Vec<(f64, f64)> {
    src.prepare().velocity_batch(targets)
}

/// `c0 ‖r²ξ‖₁^{1/4} ‖ξ‖₁^{1/4} ‖ξ‖_∞^{1/2}`.
pub fn feng_sverak_bound(l1: f64, l1w: f64, linf: f64, c0: f64) -> Result<f64> {
    if !(l1 >= 0.0 && l1w >= 0.0 && linf >= 0.0) {
        return Err(Error::InvalidArgument("norms must be nonnegative".into()));
    }
    if !(c0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c0 must be positive, got {c0}"
        )));
    }
    Ok(c0 * l1w.powf(0.25) * l1.powf(0.25) * linf.sqrt())
}
