use crate::error::{Error, Result};
use crate::evolution::{BlobState, State};
use crate::geometry::HalfPlanePoint;

/// Regular probe grid covering `[0, r_max] × [z_min, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGrid {
    pub h: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl ProbeGrid {
    /// Grid of spacing `h` around the support of the blobs carrying nonzero
    /// vorticity, padded by `pad`.
    pub fn around(s: &BlobState, h: f64, pad: f64) -> Self {
        let mut r_max = 0.0f64;
        let (mut z_min, mut z_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for b in s.field.blobs.iter().filter(|b| b.xi != 0.0) {
            r_max = r_max.max(b.p.r);
            z_min = z_min.min(b.p.z);
            z_max = z_max.max(b.p.z);
        }
        if !z_min.is_finite() {
            z_min = 0.0;
            z_max = 0.0;
        }
        Self {
            h,
            r_max: r_max + pad,
            z_min: z_min - pad,
            z_max: z_max + pad,
        }
    }

    fn dims(&self) -> (usize, usize) {
        (
            (self.r_max / self.h).ceil() as usize + 1,
            ((self.z_max - self.z_min) / self.h).ceil() as usize + 1,
        )
    }
}

/// Samples the transported field on the probe grid.
///
/// With a seeding lattice the field is the piecewise-linear interpolant on
/// the deformed lattice triangles (exact transport of the seeded values);
/// without one, blob values are deposited with area-weighted bilinear
/// weights.
pub fn sample_field(s: &BlobState, grid: &ProbeGrid) -> Vec<f64> {
    let (nr, nz) = grid.dims();
    let mut f = vec![0.0; nr * nz];
    match &s.lattice {
        Some(lat) => {
            let blobs = &s.field.blobs;
            for j in 0..lat.nz.saturating_sub(1) {
                for i in 0..lat.nr.saturating_sub(1) {
                    let (Some(a), Some(b), Some(c), Some(d)) = (
                        lat.get(i, j),
                        lat.get(i + 1, j),
                        lat.get(i, j + 1),
                        lat.get(i + 1, j + 1),
                    ) else {
                        continue;
                    };
                    for tri in [[a, b, d], [a, d, c]] {
                        let v = tri.map(|k| (blobs[k].p, blobs[k].xi));
                        rasterize_triangle(&v, grid, nr, nz, &mut f);
                    }
                }
            }
        }
        None => {
            let h = grid.h;
            let mut w = vec![0.0; nr * nz];
            for b in &s.field.blobs {
                let x = b.p.r / h;
                let y = (b.p.z - grid.z_min) / h;
                if x < 0.0 || y < 0.0 {
                    continue;
                }
                let (i, j) = (x.floor() as usize, y.floor() as usize);
                if i + 1 >= nr || j + 1 >= nz {
                    continue;
                }
                let (fx, fy) = (x - i as f64, y - j as f64);
                let area = b.meridional_area();
                for (di, dj, wt) in [
                    (0, 0, (1.0 - fx) * (1.0 - fy)),
                    (1, 0, fx * (1.0 - fy)),
                    (0, 1, (1.0 - fx) * fy),
                    (1, 1, fx * fy),
                ] {
                    let k = (j + dj) * nr + i + di;
                    f[k] += wt * area * b.xi;
                    w[k] += wt * area;
                }
            }
            let cell = h * h;
            for (v, wt) in f.iter_mut().zip(&w) {
                // a fully covered node has weight h²; partial coverage dilutes
                *v = if *wt > 0.0 { *v / wt.max(cell) } else { 0.0 };
            }
        }
    }
    f
}

fn rasterize_triangle(
    v: &[(HalfPlanePoint, f64); 3],
    grid: &ProbeGrid,
    nr: usize,
    nz: usize,
    f: &mut [f64],
) {
    let (p0, p1, p2) = (v[0].0, v[1].0, v[2].0);
    let det = (p1.r - p0.r) * (p2.z - p0.z) - (p2.r - p0.r) * (p1.z - p0.z);
    if det == 0.0 {
        return;
    }
    let h = grid.h;
    let r_lo = p0.r.min(p1.r).min(p2.r);
    let r_hi = p0.r.max(p1.r).max(p2.r);
    let z_lo = p0.z.min(p1.z).min(p2.z);
    let z_hi = p0.z.max(p1.z).max(p2.z);
    let i0 = ((r_lo / h).ceil().max(0.0)) as usize;
    let i1 = ((r_hi / h).floor().max(-1.0) + 1.0) as usize;
    let j0 = (((z_lo - grid.z_min) / h).ceil().max(0.0)) as usize;
    let j1 = (((z_hi - grid.z_min) / h).floor().max(-1.0) + 1.0) as usize;
    for j in j0..j1.min(nz) {
        let z = grid.z_min + j as f64 * h;
        for i in i0..i1.min(nr) {
            let r = i as f64 * h;
            let l1 = ((r - p0.r) * (p2.z - p0.z) - (p2.r - p0.r) * (z - p0.z)) / det;
            let l2 = ((p1.r - p0.r) * (z - p0.z) - (r - p0.r) * (p1.z - p0.z)) / det;
            let l0 = 1.0 - l1 - l2;
            let eps = -1e-12;
            if l0 >= eps && l1 >= eps && l2 >= eps {
                f[j * nr + i] = l0 * v[0].1 + l1 * v[1].1 + l2 * v[2].1;
            }
        }
    }
}

/// `max |∂_r ξ|` by central differences on the probe grid. Resolution
/// limited: the estimate saturates near `‖ξ‖_∞ / h`.
pub fn max_dr_xi(state: &State, grid: &ProbeGrid) -> Result<f64> {
    let s = match state {
        State::Patch(_) => return Err(Error::PatchGradient),
        State::Blobs(s) => s,
    };
    let (nr, nz) = grid.dims();
    let f = sample_field(s, grid);
    let mut best = 0.0f64;
    for j in 0..nz {
        for i in 1..nr.saturating_sub(1) {
            let d = (f[j * nr + i + 1] - f[j * nr + i - 1]).abs() / (2.0 * grid.h);
            best = best.max(d);
        }
    }
    Ok(best)
}
