//! Meridional half-plane geometry: points `(r, z)` with `r >= 0`, polygonal
//! cross-section contours, and the axisymmetric balls used as reference
//! shapes.
//!
//! A closed contour always describes a cross-section of a solid of
//! revolution. Segments lying on the symmetry axis are ordinary polygon
//! edges; they close the cross-section but are not part of the 3D surface.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Default snapping threshold for the symmetry axis.
pub const DEFAULT_AXIS_SNAP: f64 = 1e-12;

/// A point of the meridional half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HalfPlanePoint {
    pub r: f64,
    pub z: f64,
}

impl HalfPlanePoint {
    pub const fn new(r: f64, z: f64) -> Self {
        Self { r, z }
    }

    /// Distance to the origin of R³.
    pub fn norm(&self) -> f64 {
        self.r.hypot(self.z)
    }

    pub fn dist(&self, other: &HalfPlanePoint) -> f64 {
        (self.r - other.r).hypot(self.z - other.z)
    }

    pub fn translated(&self, dz: f64) -> Self {
        Self::new(self.r, self.z + dz)
    }

    pub fn on_axis(&self) -> bool {
        self.r == 0.0
    }

    /// Reflects negative radii and snaps near-axis points onto the axis.
    pub fn normalized(&self, axis_snap: f64) -> Self {
        let r = self.r.abs();
        Self::new(if r < axis_snap { 0.0 } else { r }, self.z)
    }
}

/// A polyline in the half-plane. Closed contours are positively oriented
/// (interior on the left when `r` is the abscissa and `z` the ordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    nodes: Vec<HalfPlanePoint>,
    closed: bool,
}

impl Contour {
    /// Builds a closed contour, normalizing orientation and snapping nodes
    /// within [`DEFAULT_AXIS_SNAP`] of the axis onto it.
    pub fn closed(nodes: Vec<HalfPlanePoint>) -> Self {
        Self::closed_with_snap(nodes, DEFAULT_AXIS_SNAP)
    }

    pub fn closed_with_snap(nodes: Vec<HalfPlanePoint>, axis_snap: f64) -> Self {
        let mut nodes: Vec<_> = nodes.iter().map(|p| p.normalized(axis_snap)).collect();
        if signed_area_of(&nodes) < 0.0 {
            nodes.reverse();
        }
        Self {
            nodes,
            closed: true,
        }
    }

    pub fn open(nodes: Vec<HalfPlanePoint>) -> Self {
        let nodes = nodes
            .iter()
            .map(|p| p.normalized(DEFAULT_AXIS_SNAP))
            .collect();
        Self {
            nodes,
            closed: false,
        }
    }

    /// Builds a closed contour from nodes that are already positively
    /// oriented, skipping the orientation check. Used on staged positions
    /// inside a time step where a flip would indicate a broken state anyway.
    pub(crate) fn closed_unchecked(nodes: Vec<HalfPlanePoint>) -> Self {
        Self {
            nodes,
            closed: true,
        }
    }

    pub fn nodes(&self) -> &[HalfPlanePoint] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Iterates over segments, including the closing one for closed contours.
    pub fn segments(&self) -> impl Iterator<Item = (HalfPlanePoint, HalfPlanePoint)> + '_ {
        let n = self.nodes.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.nodes[i], self.nodes[(i + 1) % n]))
    }

    pub fn translated(&self, dz: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|p| p.translated(dz)).collect(),
            closed: self.closed,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self
                .nodes
                .iter()
                .map(|p| HalfPlanePoint::new(p.r * factor, p.z * factor))
                .collect(),
            closed: self.closed,
        }
    }

    /// Signed meridional area (positive for positive orientation).
    pub fn signed_area(&self) -> f64 {
        signed_area_of(&self.nodes)
    }

    /// `∬ r^k dr dz` over the enclosed cross-section, for `k` in `0..=3`.
    pub fn radial_moment(&self, k: u32) -> f64 {
        radial_moment_of(&self.nodes, k)
    }

    /// `(r_min, r_max, z_min, z_max)`.
    pub fn bbox(&self) -> Option<(f64, f64, f64, f64)> {
        bbox_of(&self.nodes)
    }

    /// Largest node radius (the sup of `r` on the closure).
    pub fn max_r(&self) -> f64 {
        self.nodes.iter().map(|p| p.r).fold(0.0, f64::max)
    }

    /// z-intervals of the symmetry axis covered by axis segments.
    pub fn axis_intervals(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .segments()
            .filter(|(a, b)| a.on_axis() && b.on_axis() && a.z != b.z)
            .map(|(a, b)| (a.z.min(b.z), a.z.max(b.z)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
        for (lo, hi) in out {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        merged
    }

    /// Local curvature at every node from the circle through the node and
    /// its two neighbours. Axis junctions use the mirror image of their
    /// off-axis neighbour so the value reflects the revolved surface.
    pub fn node_curvatures(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let Some((a, b, c)) = self.neighbour_triple(i) else {
                    return 0.0;
                };
                menger_curvature(a, b, c)
            })
            .collect()
    }

    fn neighbour_triple(
        &self,
        i: usize,
    ) -> Option<(HalfPlanePoint, HalfPlanePoint, HalfPlanePoint)> {
        let n = self.nodes.len();
        if n < 3 {
            return None;
        }
        let b = self.nodes[i];
        let (prev, next) = if self.closed {
            ((i + n - 1) % n, (i + 1) % n)
        } else {
            if i == 0 || i == n - 1 {
                return None;
            }
            (i - 1, i + 1)
        };
        let mut a = self.nodes[prev];
        let mut c = self.nodes[next];
        if b.on_axis() {
            match (a.on_axis(), c.on_axis()) {
                (true, true) => return None,
                (true, false) => a = HalfPlanePoint::new(-c.r, c.z),
                (false, true) => c = HalfPlanePoint::new(-a.r, a.z),
                (false, false) => {}
            }
        }
        Some((a, b, c))
    }
}

fn signed_area_of(nodes: &[HalfPlanePoint]) -> f64 {
    let n = nodes.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = nodes[i];
        let b = nodes[(i + 1) % n];
        s += a.r * b.z - b.r * a.z;
    }
    0.5 * s
}

/// `∬ r^k dr dz` via Green's theorem: `∮ r^{k+1}/(k+1) dz`.
pub(crate) fn radial_moment_of(nodes: &[HalfPlanePoint], k: u32) -> f64 {
    let n = nodes.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += edge_radial_moment(nodes[i], nodes[(i + 1) % n], k);
    }
    s
}

/// Contribution of a single directed edge to `∮ r^{k+1}/(k+1) dz`.
pub(crate) fn edge_radial_moment(a: HalfPlanePoint, b: HalfPlanePoint, k: u32) -> f64 {
    let dz = b.z - a.z;
    if dz == 0.0 {
        return 0.0;
    }
    let (p, q) = (a.r, b.r);
    // ∫_0^1 (p + s (q - p))^{k+1} ds = (sum_{j=0}^{k+1} p^j q^{k+1-j}) / (k+2)
    let sum = match k {
        0 => (p + q) / 2.0,
        1 => (p * p + p * q + q * q) / 3.0,
        2 => (p * p * p + p * p * q + p * q * q + q * q * q) / 4.0,
        3 => {
            let (p2, q2) = (p * p, q * q);
            (p2 * p2 + p2 * p * q + p2 * q2 + p * q2 * q + q2 * q2) / 5.0
        }
        _ => {
            let mut acc = 0.0;
            for j in 0..=(k + 1) {
                acc += p.powi(j as i32) * q.powi((k + 1 - j) as i32);
            }
            acc / (k + 2) as f64
        }
    };
    dz * sum / (k + 1) as f64
}

fn bbox_of(nodes: &[HalfPlanePoint]) -> Option<(f64, f64, f64, f64)> {
    let first = nodes.first()?;
    let mut b = (first.r, first.r, first.z, first.z);
    for p in &nodes[1..] {
        b.0 = b.0.min(p.r);
        b.1 = b.1.max(p.r);
        b.2 = b.2.min(p.z);
        b.3 = b.3.max(p.z);
    }
    Some(b)
}

/// Curvature of the circle through three points (0 for collinear points).
pub fn menger_curvature(a: HalfPlanePoint, b: HalfPlanePoint, c: HalfPlanePoint) -> f64 {
    let cross = (b.r - a.r) * (c.z - a.z) - (b.z - a.z) * (c.r - a.r);
    let denom = a.dist(&b) * b.dist(&c) * c.dist(&a);
    if denom == 0.0 {
        0.0
    } else {
        2.0 * cross.abs() / denom
    }
}

/// Diameter of the solid of revolution generated by the contour nodes.
pub fn revolved_diameter(c: &Contour) -> Result<f64> {
    revolved_diameter_of_points(c.nodes())
}

/// Diameter of the solid of revolution generated by a point cloud: the
/// farthest pair sits on opposite sides of the axis.
pub fn revolved_diameter_of_points(points: &[HalfPlanePoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyGeometry);
    }
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i..] {
            let d = (p.r + q.r).powi(2) + (p.z - q.z).powi(2);
            best = best.max(d);
        }
    }
    Ok(best.sqrt())
}

/// Total length of the polyline; includes the closing segment for closed
/// contours.
pub fn arc_length(c: &Contour) -> Result<f64> {
    if c.len() < 2 {
        return Err(Error::InvalidArgument(
            "arc length needs at least two nodes".into(),
        ));
    }
    Ok(c.segments().map(|(a, b)| a.dist(&b)).sum())
}

/// Volume of the solid of revolution, `2π ∬ r dr dz`.
pub fn revolved_volume(c: &Contour) -> Result<f64> {
    if !c.is_closed() {
        return Err(Error::OpenContour);
    }
    Ok(2.0 * PI * c.radial_moment(1))
}

/// Even-odd containment. The result for points exactly on the boundary is
/// unspecified.
pub fn contains(c: &Contour, p: HalfPlanePoint) -> bool {
    point_in_polygon(c.nodes(), p)
}

pub(crate) fn point_in_polygon(nodes: &[HalfPlanePoint], p: HalfPlanePoint) -> bool {
    let n = nodes.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (nodes[i], nodes[j]);
        if (a.z > p.z) != (b.z > p.z) {
            let r_cross = a.r + (p.z - a.z) / (b.z - a.z) * (b.r - a.r);
            if p.r < r_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from a point to a segment.
pub fn point_segment_distance(p: HalfPlanePoint, a: HalfPlanePoint, b: HalfPlanePoint) -> f64 {
    let (dr, dz) = (b.r - a.r, b.z - a.z);
    let len2 = dr * dr + dz * dz;
    if len2 == 0.0 {
        return p.dist(&a);
    }
    let s = (((p.r - a.r) * dr + (p.z - a.z) * dz) / len2).clamp(0.0, 1.0);
    p.dist(&HalfPlanePoint::new(a.r + s * dr, a.z + s * dz))
}

/// Symmetric Hausdorff distance between two node sets, measured against the
/// other contour's segments.
pub fn hausdorff_distance(a: &Contour, b: &Contour) -> f64 {
    fn one_sided(from: &Contour, to: &Contour) -> f64 {
        from.nodes()
            .iter()
            .map(|p| {
                to.segments()
                    .map(|(s0, s1)| point_segment_distance(*p, s0, s1))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
    one_sided(a, b).max(one_sided(b, a))
}

/// An axisymmetric ball `{|x - center_z e_z| < radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiBall {
    pub center_z: f64,
    pub radius: f64,
}

impl AxiBall {
    pub fn new(center_z: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center_z, radius })
    }

    pub fn unit() -> Self {
        Self {
            center_z: 0.0,
            radius: 1.0,
        }
    }

    pub fn contains(&self, p: HalfPlanePoint) -> bool {
        p.r * p.r + (p.z - self.center_z).powi(2) < self.radius * self.radius
    }

    /// Distance from the center in R³.
    pub fn center_distance(&self, p: HalfPlanePoint) -> f64 {
        p.r.hypot(p.z - self.center_z)
    }

    /// Shell `S^{τ,λ} = {1 - λ ≤ |x - τ e_z| ≤ 1 + λ}` scaled by the radius.
    pub fn in_shell(&self, p: HalfPlanePoint, lambda: f64) -> bool {
        let d = self.center_distance(p);
        d >= self.radius - lambda && d <= self.radius + lambda
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    /// Polygonal cross-section: the semicircle sampled with `arc_nodes`
    /// segments plus the axis diameter.
    pub fn cross_section(&self, arc_nodes: usize) -> Contour {
        let n = arc_nodes.max(2);
        let nodes = (0..=n)
            .map(|k| {
                let theta = -PI / 2.0 + PI * k as f64 / n as f64;
                HalfPlanePoint::new(
                    if k == 0 || k == n {
                        0.0
                    } else {
                        self.radius * theta.cos()
                    },
                    self.center_z + self.radius * theta.sin(),
                )
            })
            .collect();
        Contour::closed(nodes)
    }
}

/// Parameters of [`remesh`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemeshParams {
    pub h_min: f64,
    pub h_max: f64,
    pub curvature_budget: f64,
}

impl RemeshParams {
    pub fn new(h_min: f64, h_max: f64, curvature_budget: f64) -> Result<Self> {
        if !(h_min > 0.0 && h_max > 0.0 && curvature_budget > 0.0) {
            return Err(Error::InvalidArgument(
                "remesh parameters must be positive".into(),
            ));
        }
        if h_min >= h_max {
            return Err(Error::InvalidArgument(format!(
                "h_min ({h_min}) must be below h_max ({h_max})"
            )));
        }
        Ok(Self {
            h_min,
            h_max,
            curvature_budget,
        })
    }
}

/// Redistributes contour nodes: inserts spline points on segments longer
/// than `h_max` or whose length times local curvature exceeds the budget,
/// then drops nodes closer than `h_min` to their predecessor. Axis
/// junctions and open-contour endpoints are never moved or removed.
pub fn remesh(c: &Contour, h_min: f64, h_max: f64, curvature_budget: f64) -> Result<Contour> {
    let params = RemeshParams::new(h_min, h_max, curvature_budget)?;
    remesh_with(c, &params)
}

pub fn remesh_with(c: &Contour, params: &RemeshParams) -> Result<Contour> {
    if c.len() < 2 {
        return Err(Error::EmptyGeometry);
    }
    let mut current = c.clone();
    for _ in 0..4 {
        let (refined, inserted) = insert_pass(&current, params);
        current = refined;
        if !inserted {
            break;
        }
    }
    Ok(coarsen_pass(&current, params))
}

fn is_protected(c: &Contour, i: usize) -> bool {
    let n = c.len();
    let nodes = c.nodes();
    if !c.closed && (i == 0 || i == n - 1) {
        return true;
    }
    if nodes[i].on_axis() {
        let prev = nodes[(i + n - 1) % n];
        let next = nodes[(i + 1) % n];
        // junctions between the axis and the off-axis boundary
        return !(prev.on_axis() && next.on_axis());
    }
    false
}

fn insert_pass(c: &Contour, p: &RemeshParams) -> (Contour, bool) {
    let nodes = c.nodes();
    let n = nodes.len();
    let curv = c.node_curvatures();
    let seg_count = if c.closed { n } else { n - 1 };
    let mut out = Vec::with_capacity(n + n / 4);
    let mut inserted = false;
    for i in 0..seg_count {
        let j = (i + 1) % n;
        let (a, b) = (nodes[i], nodes[j]);
        out.push(a);
        let len = a.dist(&b);
        let by_length = (len / p.h_max).ceil().max(1.0);
        let kappa = curv[i].max(curv[j]);
        let by_curvature = if len * kappa > p.curvature_budget {
            (len * kappa / p.curvature_budget)
                .ceil()
                .min((len / p.h_min).floor())
                .max(1.0)
        } else {
            1.0
        };
        let pieces = by_length.max(by_curvature) as usize;
        if pieces > 1 {
            inserted = true;
            for k in 1..pieces {
                let s = k as f64 / pieces as f64;
                out.push(spline_point(c, i, s));
            }
        }
    }
    if !c.closed {
        out.push(nodes[n - 1]);
    }
    let out: Vec<_> = out
        .into_iter()
        .map(|q| q.normalized(DEFAULT_AXIS_SNAP))
        .collect();
    (
        Contour {
            nodes: out,
            closed: c.closed,
        },
        inserted,
    )
}

/// Point at parameter `s` on the centripetal Catmull-Rom spline through the
/// segment starting at node `i`.
fn spline_point(c: &Contour, i: usize, s: f64) -> HalfPlanePoint {
    let nodes = c.nodes();
    let n = nodes.len();
    let j = (i + 1) % n;
    let (p1, p2) = (nodes[i], nodes[j]);
    let lerp = |a: HalfPlanePoint, b: HalfPlanePoint, s: f64| {
        HalfPlanePoint::new(a.r + s * (b.r - a.r), a.z + s * (b.z - a.z))
    };
    if p1.on_axis() && p2.on_axis() {
        return lerp(p1, p2, s);
    }
    let prev = if c.closed || i > 0 {
        Some(nodes[(i + n - 1) % n])
    } else {
        None
    };
    let next = if c.closed || j + 1 < n {
        Some(nodes[(j + 1) % n])
    } else {
        None
    };
    let mirror = |q: HalfPlanePoint| HalfPlanePoint::new(-q.r, q.z);
    let p0 = match prev {
        Some(q) if p1.on_axis() && q.on_axis() => mirror(p2),
        Some(q) => q,
        None => HalfPlanePoint::new(2.0 * p1.r - p2.r, 2.0 * p1.z - p2.z),
    };
    let p3 = match next {
        Some(q) if p2.on_axis() && q.on_axis() => mirror(p1),
        Some(q) => q,
        None => HalfPlanePoint::new(2.0 * p2.r - p1.r, 2.0 * p2.z - p1.z),
    };
    catmull_rom(p0, p1, p2, p3, s)
}

fn catmull_rom(
    p0: HalfPlanePoint,
    p1: HalfPlanePoint,
    p2: HalfPlanePoint,
    p3: HalfPlanePoint,
    s: f64,
) -> HalfPlanePoint {
    let knot = |a: HalfPlanePoint, b: HalfPlanePoint| a.dist(&b).sqrt().max(1e-12);
    let t0 = 0.0;
    let t1 = t0 + knot(p0, p1);
    let t2 = t1 + knot(p1, p2);
    let t3 = t2 + knot(p2, p3);
    let t = t1 + s * (t2 - t1);
    let mix = |a: HalfPlanePoint, b: HalfPlanePoint, ta: f64, tb: f64| {
        let wa = (tb - t) / (tb - ta);
        let wb = (t - ta) / (tb - ta);
        HalfPlanePoint::new(wa * a.r + wb * b.r, wa * a.z + wb * b.z)
    };
    let a1 = mix(p0, p1, t0, t1);
    let a2 = mix(p1, p2, t1, t2);
    let a3 = mix(p2, p3, t2, t3);
    let b1 = mix(a1, a2, t0, t2);
    let b2 = mix(a2, a3, t1, t3);
    mix(b1, b2, t1, t2)
}

fn coarsen_pass(c: &Contour, p: &RemeshParams) -> Contour {
    let nodes = c.nodes();
    let n = nodes.len();
    if n < 4 {
        return c.clone();
    }
    let mut keep: Vec<usize> = vec![0];
    for i in 1..n {
        let last = nodes[*keep.last().unwrap()];
        let next = if i + 1 < n {
            Some(nodes[i + 1])
        } else if c.closed {
            Some(nodes[0])
        } else {
            None
        };
        let drop = !is_protected(c, i)
            && last.dist(&nodes[i]) < p.h_min
            && next.is_some_and(|q| last.dist(&q) <= p.h_max);
        if !drop {
            keep.push(i);
        }
    }
    if c.closed && keep.len() > 3 {
        let last_idx = *keep.last().unwrap();
        let prev = nodes[keep[keep.len() - 2]];
        if !is_protected(c, last_idx)
            && nodes[last_idx].dist(&nodes[0]) < p.h_min
            && prev.dist(&nodes[0]) <= p.h_max
        {
            keep.pop();
        }
    }
    Contour {
        nodes: keep.into_iter().map(|i| nodes[i]).collect(),
        closed: c.closed,
    }
}

fn orient(a: HalfPlanePoint, b: HalfPlanePoint, c: HalfPlanePoint) -> f64 {
    (b.r - a.r) * (c.z - a.z) - (b.z - a.z) * (c.r - a.r)
}

fn on_segment(a: HalfPlanePoint, b: HalfPlanePoint, p: HalfPlanePoint) -> bool {
    p.r >= a.r.min(b.r) && p.r <= a.r.max(b.r) && p.z >= a.z.min(b.z) && p.z <= a.z.max(b.z)
}

/// Whether two closed segments share at least one point.
pub fn segments_intersect(
    a: HalfPlanePoint,
    b: HalfPlanePoint,
    c: HalfPlanePoint,
    d: HalfPlanePoint,
) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// First pair of non-adjacent segments that touch, found by a sweep over
/// segments sorted by their lower z bound.
pub fn find_self_intersection(c: &Contour) -> Option<(usize, usize)> {
    let nodes = c.nodes();
    let n = nodes.len();
    if n < 4 {
        return None;
    }
    let seg_count = if c.closed { n } else { n - 1 };
    let seg = |i: usize| (nodes[i], nodes[(i + 1) % n]);
    let mut order: Vec<usize> = (0..seg_count).collect();
    let zmin = |i: usize| {
        let (a, b) = seg(i);
        a.z.min(b.z)
    };
    let zmax = |i: usize| {
        let (a, b) = seg(i);
        a.z.max(b.z)
    };
    order.sort_by(|&i, &j| zmin(i).total_cmp(&zmin(j)).then(i.cmp(&j)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let lo = zmin(i);
        active.retain(|&j| zmax(j) >= lo);
        let (a, b) = seg(i);
        for &j in &active {
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (c0, d0) = seg(j);
            if a.r.max(b.r) < c0.r.min(d0.r) || c0.r.max(d0.r) < a.r.min(b.r) {
                continue;
            }
            if segments_intersect(a, b, c0, d0) {
                return Some((i.min(j), i.max(j)));
            }
        }
        active.push(i);
    }
    None
}

/// Clip a polygon against the half-plane `coord >= bound` (`keep_above`) or
/// `coord <= bound`, where `coord` is `r` when `along_r` and `z` otherwise.
pub(crate) fn clip_polygon(
    poly: &[HalfPlanePoint],
    along_r: bool,
    bound: f64,
    keep_above: bool,
) -> Vec<HalfPlanePoint> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 4);
    if n == 0 {
        return out;
    }
    let coord = |p: &HalfPlanePoint| if along_r { p.r } else { p.z };
    let inside = |p: &HalfPlanePoint| {
        if keep_above {
            coord(p) >= bound
        } else {
            coord(p) <= bound
        }
    };
    let cut = |a: &HalfPlanePoint, b: &HalfPlanePoint| {
        let (ca, cb) = (coord(a), coord(b));
        let s = (bound - ca) / (cb - ca);
        if along_r {
            HalfPlanePoint::new(bound, a.z + s * (b.z - a.z))
        } else {
            HalfPlanePoint::new(a.r + s * (b.r - a.r), bound)
        }
    };
    let mut prev = poly[n - 1];
    let mut prev_in = inside(&prev);
    for cur in poly {
        let cur_in = inside(cur);
        if cur_in {
            if !prev_in {
                out.push(cut(&prev, cur));
            }
            out.push(*cur);
        } else if prev_in {
            out.push(cut(&prev, cur));
        }
        prev = *cur;
        prev_in = cur_in;
    }
    out
}

/// Area-weighted moments of a polygon piece: `(∬ 1, ∬ r, ∬ r², ∬ r z)`.
pub(crate) fn polygon_moments(poly: &[HalfPlanePoint]) -> [f64; 4] {
    let n = poly.len();
    let mut m = [0.0; 4];
    if n < 3 {
        return m;
    }
    let o = poly[0];
    for i in 1..n - 1 {
        let (a, b) = (poly[i], poly[i + 1]);
        let area = 0.5 * ((a.r - o.r) * (b.z - o.z) - (b.r - o.r) * (a.z - o.z));
        if area == 0.0 {
            continue;
        }
        // edge midpoints: exact for quadratic integrands
        let mids = [
            HalfPlanePoint::new(0.5 * (o.r + a.r), 0.5 * (o.z + a.z)),
            HalfPlanePoint::new(0.5 * (a.r + b.r), 0.5 * (a.z + b.z)),
            HalfPlanePoint::new(0.5 * (b.r + o.r), 0.5 * (b.z + o.z)),
        ];
        let w = area / 3.0;
        m[0] += area;
        for q in &mids {
            m[1] += w * q.r;
            m[2] += w * q.r * q.r;
            m[3] += w * q.r * q.z;
        }
    }
    m
}
