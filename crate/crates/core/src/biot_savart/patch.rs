//! Cell quadrature for uniform vortex patches.
//!
//! The cross-section is rasterized on a square grid of side `h` anchored at
//! the origin. Cells crossed by the boundary are clipped exactly, and every
//! cell becomes a ring at its `r`-weighted centroid carrying the circulation
//! `ξ ∬ r dr dz`, so the first moment of `ω^θ` is exact cell by cell.
//! Cells close to an evaluation point are split recursively.

use super::kernel::{ring_stream, ring_velocity, self_cell_psi, self_cell_uz};
use crate::geometry::{clip_polygon, polygon_moments, Contour, HalfPlanePoint};

/// Smallest refined cell, relative to the raster spacing.
pub(crate) const REFINE_FLOOR_DIVISOR: f64 = 64.0;

const FULL: u32 = u32::MAX;

/// Structure-of-arrays raster of one or more contours, in raster order.
#[derive(Debug, Clone, Default)]
pub struct PatchRaster {
    pub(crate) h: f64,
    pub(crate) xi: f64,
    pub(crate) rc: Vec<f64>,
    pub(crate) zc: Vec<f64>,
    pub(crate) gamma: Vec<f64>,
    /// Lower-left corner of each cell.
    pub(crate) r0: Vec<f64>,
    pub(crate) z0: Vec<f64>,
    /// Index into `pieces`, or `FULL`.
    pub(crate) piece: Vec<u32>,
    pub(crate) pieces: Vec<Vec<HalfPlanePoint>>,
}

impl PatchRaster {
    pub fn build(contours: &[Contour], xi: f64, h: f64) -> Self {
        let mut out = PatchRaster {
            h,
            xi,
            ..Default::default()
        };
        for c in contours {
            if c.len() >= 3 {
                out.add_contour(c);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.rc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rc.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Ring positions and circulations `(r, z, Γ)` of all cells.
    pub fn rings(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.len()).map(move |k| (self.rc[k], self.zc[k], self.gamma[k]))
    }

    /// `∬ r dr dz` of cell `k` (circulation divided by `ξ`).
    pub fn cell_first_moment(&self, k: usize) -> f64 {
        self.gamma[k] / self.xi
    }

    fn push(&mut self, r0: f64, z0: f64, m: [f64; 4], piece: u32) {
        if m[1] <= 0.0 {
            return;
        }
        self.rc.push(m[2] / m[1]);
        self.zc.push(m[3] / m[1]);
        self.gamma.push(self.xi * m[1]);
        self.r0.push(r0);
        self.z0.push(z0);
        self.piece.push(piece);
    }

    fn add_contour(&mut self, c: &Contour) {
        let h = self.h;
        let Some((r_min, r_max, z_min, z_max)) = c.bbox() else {
            return;
        };
        let poly = c.nodes();
        let i_lo = (r_min / h).floor().max(0.0) as i64;
        let i_hi = (r_max / h).floor() as i64;
        let j_lo = (z_min / h).floor() as i64;
        let j_hi = (z_max / h).floor() as i64;
        let ncol = (i_hi - i_lo + 1) as usize;
        let mut partial = vec![false; ncol];
        let mut crossings: Vec<f64> = Vec::new();
        for j in j_lo..=j_hi {
            let za = j as f64 * h;
            let zb = za + h;
            let strip = clip_polygon(&clip_polygon(poly, false, za, true), false, zb, false);
            if strip.len() < 3 {
                continue;
            }
            partial.iter_mut().for_each(|p| *p = false);
            crossings.clear();
            let zm = za + 0.5 * h;
            let n = strip.len();
            for k in 0..n {
                let a = strip[k];
                let b = strip[(k + 1) % n];
                let cut_edge = a.z == b.z && (a.z == za || a.z == zb);
                if !cut_edge {
                    let ia = ((a.r.min(b.r) / h).floor() as i64).clamp(i_lo, i_hi);
                    let ib = ((a.r.max(b.r) / h).floor() as i64).clamp(i_lo, i_hi);
                    for i in ia..=ib {
                        partial[(i - i_lo) as usize] = true;
                    }
                }
                if (a.z > zm) != (b.z > zm) {
                    crossings.push(a.r + (zm - a.z) / (b.z - a.z) * (b.r - a.r));
                }
            }
            crossings.sort_by(f64::total_cmp);
            for i in i_lo..=i_hi {
                let ra = i as f64 * h;
                let rb = ra + h;
                if partial[(i - i_lo) as usize] {
                    let piece =
                        clip_polygon(&clip_polygon(&strip, true, ra, true), true, rb, false);
                    if piece.len() < 3 {
                        continue;
                    }
                    let m = polygon_moments(&piece);
                    if m[0] <= 0.0 {
                        continue;
                    }
                    self.pieces.push(piece);
                    let idx = (self.pieces.len() - 1) as u32;
                    self.push(ra, za, m, idx);
                } else {
                    let rm = ra + 0.5 * h;
                    let inside = crossings.iter().filter(|&&x| x < rm).count() % 2 == 1;
                    if inside {
                        self.push(ra, za, full_moments(ra, za, h), FULL);
                    }
                }
            }
        }
    }

    /// Velocity induced at `(r, z)`.
    pub fn velocity(&self, r: f64, z: f64) -> (f64, f64) {
        let h = self.h;
        let floor = h / REFINE_FLOOR_DIVISOR;
        let near2 = 16.0 * h * h;
        let mut ur = 0.0;
        let mut uz = 0.0;
        for k in 0..self.len() {
            let cr = self.r0[k] + 0.5 * h;
            let cz = self.z0[k] + 0.5 * h;
            let d2 = (cr - r).powi(2) + (cz - z).powi(2);
            if d2 < near2 {
                let piece = self.piece_of(k);
                let (a, b) = self.refine_velocity(r, z, self.r0[k], self.z0[k], h, piece, floor);
                ur += a;
                uz += b;
            } else {
                let (a, b) = ring_velocity(r, self.rc[k], z - self.zc[k], 0.0);
                ur += self.gamma[k] * a;
                uz += self.gamma[k] * b;
            }
        }
        (ur, uz)
    }

    /// Stream function at `(r, z)`.
    pub fn stream(&self, r: f64, z: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let h = self.h;
        let floor = h / REFINE_FLOOR_DIVISOR;
        let near2 = 16.0 * h * h;
        let mut psi = 0.0;
        for k in 0..self.len() {
            let cr = self.r0[k] + 0.5 * h;
            let cz = self.z0[k] + 0.5 * h;
            let d2 = (cr - r).powi(2) + (cz - z).powi(2);
            if d2 < near2 {
                let piece = self.piece_of(k);
                psi += self.refine_stream(r, z, self.r0[k], self.z0[k], h, piece, floor);
            } else {
                psi += self.gamma[k] * ring_stream(r, self.rc[k], z - self.zc[k], 0.0);
            }
        }
        psi
    }

    fn piece_of(&self, k: usize) -> Option<&[HalfPlanePoint]> {
        match self.piece[k] {
            FULL => None,
            idx => Some(&self.pieces[idx as usize]),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine_velocity(
        &self,
        r: f64,
        z: f64,
        r0: f64,
        z0: f64,
        s: f64,
        piece: Option<&[HalfPlanePoint]>,
        floor: f64,
    ) -> (f64, f64) {
        let cr = r0 + 0.5 * s;
        let cz = z0 + 0.5 * s;
        let d2 = (cr - r).powi(2) + (cz - z).powi(2);
        if s > floor * 1.5 && 16.0 * s * s > d2 {
            let half = 0.5 * s;
            let mut acc = (0.0, 0.0);
            for (dr, dzc) in [(0.0, 0.0), (half, 0.0), (0.0, half), (half, half)] {
                let (a, b) = self.child(r0 + dr, z0 + dzc, half, piece, |sub| {
                    self.refine_velocity(r, z, r0 + dr, z0 + dzc, half, sub, floor)
                });
                acc.0 += a;
                acc.1 += b;
            }
            return acc;
        }
        let Some((rc, zc, gamma)) = self.cell_ring(r0, z0, s, piece) else {
            return (0.0, 0.0);
        };
        let inside = r >= r0 && r <= r0 + s && z >= z0 && z <= z0 + s;
        if inside && r > 0.0 {
            (0.0, self_cell_uz(r, s, gamma))
        } else if r == rc && z == zc {
            (0.0, 0.0)
        } else {
            let (a, b) = ring_velocity(r, rc, z - zc, 0.0);
            (gamma * a, gamma * b)
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine_stream(
        &self,
        r: f64,
        z: f64,
        r0: f64,
        z0: f64,
        s: f64,
        piece: Option<&[HalfPlanePoint]>,
        floor: f64,
    ) -> f64 {
        let cr = r0 + 0.5 * s;
        let cz = z0 + 0.5 * s;
        let d2 = (cr - r).powi(2) + (cz - z).powi(2);
        if s > floor * 1.5 && 16.0 * s * s > d2 {
            let half = 0.5 * s;
            let mut acc = 0.0;
            for (dr, dzc) in [(0.0, 0.0), (half, 0.0), (0.0, half), (half, half)] {
                acc += self.child(r0 + dr, z0 + dzc, half, piece, |sub| {
                    self.refine_stream(r, z, r0 + dr, z0 + dzc, half, sub, floor)
                });
            }
            return acc;
        }
        let Some((rc, zc, gamma)) = self.cell_ring(r0, z0, s, piece) else {
            return 0.0;
        };
        let inside = r >= r0 && r <= r0 + s && z >= z0 && z <= z0 + s;
        if inside || (r == rc && z == zc) {
            self_cell_psi(r, s, gamma)
        } else {
            gamma * ring_stream(r, rc, z - zc, 0.0)
        }
    }

    /// Runs `f` on the sub-cell with the given corner, clipping the parent
    /// piece when the parent is partial. Empty sub-cells contribute `T::default()`.
    fn child<T: Default>(
        &self,
        r0: f64,
        z0: f64,
        s: f64,
        piece: Option<&[HalfPlanePoint]>,
        f: impl FnOnce(Option<&[HalfPlanePoint]>) -> T,
    ) -> T {
        match piece {
            None => f(None),
            Some(poly) => {
                let sub = clip_to_square(poly, r0, z0, s);
                if sub.len() < 3 {
                    T::default()
                } else {
                    f(Some(&sub))
                }
            }
        }
    }

    fn cell_ring(
        &self,
        r0: f64,
        z0: f64,
        s: f64,
        piece: Option<&[HalfPlanePoint]>,
    ) -> Option<(f64, f64, f64)> {
        let m = match piece {
            None => full_moments(r0, z0, s),
            Some(poly) => polygon_moments(poly),
        };
        if m[1] <= 0.0 {
            return None;
        }
        Some((m[2] / m[1], m[3] / m[1], self.xi * m[1]))
    }
}

fn clip_to_square(poly: &[HalfPlanePoint], r0: f64, z0: f64, s: f64) -> Vec<HalfPlanePoint> {
    let p = clip_polygon(poly, true, r0, true);
    let p = clip_polygon(&p, true, r0 + s, false);
    let p = clip_polygon(&p, false, z0, true);
    clip_polygon(&p, false, z0 + s, false)
}

/// Moments `(∬1, ∬r, ∬r², ∬rz)` of the square with lower-left corner
/// `(r0, z0)` and side `s`.
fn full_moments(r0: f64, z0: f64, s: f64) -> [f64; 4] {
    let r1 = r0 + s;
    let m1 = s * 0.5 * (r1 * r1 - r0 * r0);
    let m2 = s * (r1 * r1 * r1 - r0 * r0 * r0) / 3.0;
    [s * s, m1, m2, m1 * (z0 + 0.5 * s)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AxiBall;
    use approx::assert_relative_eq;

    #[test]
    fn raster_reproduces_first_moment() {
        let c = AxiBall::unit().cross_section(1024);
        let raster = PatchRaster::build(std::slice::from_ref(&c), 1.0, 1.0 / 32.0);
        let total: f64 = raster.gamma.iter().sum();
        assert_relative_eq!(total, c.radial_moment(1), max_relative = 1e-12);
        let r2: f64 = (0..raster.len())
            .map(|k| raster.gamma[k] * raster.rc[k])
            .sum();
        assert_relative_eq!(r2, c.radial_moment(2), max_relative = 1e-12);
    }

    #[test]
    fn grid_aligned_square_has_only_full_cells() {
        let c = Contour::closed(vec![
            HalfPlanePoint::new(0.25, 0.0),
            HalfPlanePoint::new(0.75, 0.0),
            HalfPlanePoint::new(0.75, 0.5),
            HalfPlanePoint::new(0.25, 0.5),
        ]);
        let raster = PatchRaster::build(&[c], 1.0, 0.125);
        assert_eq!(raster.len(), 16);
        let total: f64 = raster.gamma.iter().sum();
        assert_relative_eq!(total, 0.5 * 0.5 * 0.5, max_relative = 1e-14);
    }

    #[test]
    fn raster_is_translation_equivariant_on_grid_shifts() {
        let c = AxiBall::unit().cross_section(300);
        let h = 1.0 / 16.0;
        let a = PatchRaster::build(std::slice::from_ref(&c), 1.0, h);
        let b = PatchRaster::build(&[c.translated(5.0 * h)], 1.0, h);
        assert_eq!(a.len(), b.len());
        for k in 0..a.len() {
            assert!((a.rc[k] - b.rc[k]).abs() < 1e-13);
            assert!((a.zc[k] + 5.0 * h - b.zc[k]).abs() < 1e-13);
        }
    }
}
