use super::discrepancy::golden_section;
use crate::geometry::{point_segment_distance, Contour, HalfPlanePoint};

/// Radius of the largest axis-centred ball inside the closure of the patch.
///
/// Candidate centres lie on the axis segments of each contour; the radius at
/// a centre is its distance to the off-axis part of the boundary. A grid
/// search with spacing `h_ins` is refined by a local golden-section search.
/// Contours without axis segments contribute 0.
pub fn inscription_radius(contours: &[Contour], h_ins: f64) -> f64 {
    contours
        .iter()
        .map(|c| contour_inscription(c, h_ins))
        .fold(0.0, f64::max)
}

fn radius_at(c: &Contour, zc: f64) -> f64 {
    let centre = HalfPlanePoint::new(0.0, zc);
    c.segments()
        .filter(|(a, b)| !(a.on_axis() && b.on_axis()))
        .map(|(a, b)| point_segment_distance(centre, a, b))
        .fold(f64::INFINITY, f64::min)
}

fn contour_inscription(c: &Contour, h_ins: f64) -> f64 {
    let h = h_ins.max(1e-9);
    let mut best = 0.0f64;
    for (lo, hi) in c.axis_intervals() {
        let n = ((hi - lo) / h).ceil().max(1.0) as usize;
        let mut best_k = 0;
        let mut best_here = f64::NEG_INFINITY;
        for k in 0..=n {
            let z = lo + (hi - lo) * k as f64 / n as f64;
            let rho = radius_at(c, z);
            if rho > best_here {
                best_here = rho;
                best_k = k;
            }
        }
        let step = (hi - lo) / n as f64;
        let zk = lo + step * best_k as f64;
        let (a, b) = ((zk - step).max(lo), (zk + step).min(hi));
        let z_opt = golden_section(&|z: f64| -radius_at(c, z), a, b, 1e-9);
        best = best.max(best_here).max(radius_at(c, z_opt));
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}
