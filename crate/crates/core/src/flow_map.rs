//! Particle trajectories through a sampled velocity history.

use crate::biot_savart::{PreparedSource, VorticitySource};
use crate::error::{Error, Result};
use crate::geometry::HalfPlanePoint;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    PiecewiseConstant,
    #[default]
    Linear,
}

/// Velocity field `u(t, ·)` sampled at increasing times. Sources are
/// prepared lazily and cached.
#[derive(Debug, Default)]
pub struct VelocityHistory {
    times: Vec<f64>,
    sources: Vec<VorticitySource>,
    prepared: Vec<OnceLock<PreparedSource>>,
    interpolation: Interpolation,
}

impl VelocityHistory {
    pub fn new(interpolation: Interpolation) -> Self {
        Self {
            interpolation,
            ..Default::default()
        }
    }

    /// Appends a snapshot; times must be strictly increasing.
    pub fn push(&mut self, t: f64, src: VorticitySource) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidArgument(format!(
                    "history times must increase ({t} after {last})"
                )));
            }
        }
        self.times.push(t);
        self.sources.push(src);
        self.prepared.push(OnceLock::new());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sources(&self) -> &[VorticitySource] {
        &self.sources
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    fn prepared(&self, k: usize) -> &PreparedSource {
        self.prepared[k].get_or_init(|| self.sources[k].prepare())
    }

    fn check(&self, t: f64) -> Result<()> {
        let (start, end) = self.span().ok_or(Error::EmptyGeometry)?;
        if t < start - 1e-12 || t > end + 1e-12 {
            return Err(Error::OutsideHistory { t, start, end });
        }
        Ok(())
    }

    /// Velocity at time `t` and position `p`.
    pub fn velocity(&self, t: f64, p: HalfPlanePoint) -> Result<(f64, f64)> {
        self.check(t)?;
        let n = self.times.len();
        // index of the last snapshot at or before t
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            i => i - 1,
        };
        if k + 1 >= n || self.times[k] == t {
            return Ok(self.prepared(k.min(n - 1)).velocity_at(p));
        }
        match self.interpolation {
            Interpolation::PiecewiseConstant => Ok(self.prepared(k).velocity_at(p)),
            Interpolation::Linear => {
                let (t0, t1) = (self.times[k], self.times[k + 1]);
                let s = (t - t0) / (t1 - t0);
                let a = self.prepared(k).velocity_at(p);
                let b = self.prepared(k + 1).velocity_at(p);
                Ok(((1.0 - s) * a.0 + s * b.0, (1.0 - s) * a.1 + s * b.1))
            }
        }
    }
}

fn snap(p: HalfPlanePoint) -> HalfPlanePoint {
    p.normalized(crate::geometry::DEFAULT_AXIS_SNAP)
}

/// RK4 path from `(t0, x0)` to `t1`, sampled at every step. The last step is
/// shortened to land on `t1`.
pub fn advect(
    h: &VelocityHistory,
    t0: f64,
    x0: HalfPlanePoint,
    t1: f64,
    dt: f64,
) -> Result<Vec<(f64, HalfPlanePoint)>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if t1 < t0 {
        return Err(Error::InvalidArgument(
            "backward advection is not supported".into(),
        ));
    }
    h.check(t0)?;
    h.check(t1)?;
    let mut path = vec![(t0, x0)];
    let n = ((t1 - t0) / dt - 1e-9).ceil().max(0.0) as usize;
    let mut p = x0;
    let mut t = t0;
    for k in 1..=n {
        let t_next = if k == n { t1 } else { t0 + k as f64 * dt };
        let step = t_next - t;
        let tm = (t + 0.5 * step).min(t1);
        let k1 = h.velocity(t, p)?;
        let k2 = h.velocity(
            tm,
            snap(HalfPlanePoint::new(
                p.r + 0.5 * step * k1.0,
                p.z + 0.5 * step * k1.1,
            )),
        )?;
        let k3 = h.velocity(
            tm,
            snap(HalfPlanePoint::new(
                p.r + 0.5 * step * k2.0,
                p.z + 0.5 * step * k2.1,
            )),
        )?;
        let k4 = h.velocity(
            t_next,
            snap(HalfPlanePoint::new(p.r + step * k3.0, p.z + step * k3.1)),
        )?;
        p = snap(HalfPlanePoint::new(
            p.r + step / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            p.z + step / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        ));
        t = t_next;
        path.push((t, p));
    }
    Ok(path)
}

/// Long-time behaviour of an axis trajectory relative to the shifted vortex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisFate {
    /// Falls behind the vortex: the gap to the centre keeps decreasing below -1.
    Tail,
    /// Starts inside and approaches the front stagnation point from below.
    InteriorToFront,
    /// Starts ahead and approaches the front stagnation point from above.
    AheadToFront,
}

impl AxisFate {
    pub fn label(&self) -> &'static str {
        match self {
            AxisFate::Tail => "tail",
            AxisFate::InteriorToFront => "interior-to-front",
            AxisFate::AheadToFront => "ahead-to-front",
        }
    }
}

/// Linear interpolation in a `(t, τ)` series.
pub fn interpolate_series(series: &[(f64, f64)], t: f64) -> Option<f64> {
    let first = series.first()?;
    let last = series.last()?;
    if t <= first.0 {
        return Some(first.1);
    }
    if t >= last.0 {
        return Some(last.1);
    }
    let k = series.partition_point(|s| s.0 <= t);
    let (a, b) = (series[k - 1], series[k]);
    Some(a.1 + (t - a.0) / (b.0 - a.0) * (b.1 - a.1))
}

/// Gap `z(t) - τ(t)` along an axis path.
pub fn axis_gap(
    path: &[(f64, HalfPlanePoint)],
    tau_series: &[(f64, f64)],
) -> Result<Vec<(f64, f64)>> {
    if path.iter().any(|(_, p)| p.r != 0.0) {
        return Err(Error::OffAxisPath);
    }
    path.iter()
        .map(|(t, p)| {
            let tau = interpolate_series(tau_series, *t)
                .ok_or_else(|| Error::InvalidArgument("empty shift series".into()))?;
            Ok((*t, p.z - tau))
        })
        .collect()
}

/// Classifies an axis path against the shift series using the front band
/// `[1 - margin, 1 + margin]` for the gap.
pub fn classify_axis_fate(
    path: &[(f64, HalfPlanePoint)],
    tau_series: &[(f64, f64)],
    margin: f64,
) -> Result<AxisFate> {
    let gap = axis_gap(path, tau_series)?;
    let (Some(first), Some(last)) = (gap.first(), gap.last()) else {
        return Err(Error::Unclassified("empty path".into()));
    };
    let (g0, g1) = (first.1, last.1);
    if gap.iter().all(|(_, g)| *g < -1.0) && g1 < g0 {
        return Ok(AxisFate::Tail);
    }
    let in_band = |g: f64| (g - 1.0).abs() <= margin;
    if let Some(&(_, g)) = gap.iter().find(|(_, g)| in_band(*g)) {
        if g0 < 1.0 && g >= g0 {
            return Ok(AxisFate::InteriorToFront);
        }
        if g0 > 1.0 && g <= g0 {
            return Ok(AxisFate::AheadToFront);
        }
    }
    Err(Error::Unclassified(format!(
        "gap went from {g0:.4} to {g1:.4} without a recognised pattern"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AxiBall;
    use crate::hill_analytic::{axis_trajectory_interior, W_HILL};

    fn hill_history(t_end: f64, every: f64) -> VelocityHistory {
        let base =
            VorticitySource::patch(vec![AxiBall::unit().cross_section(512)], 1.0, 1.0 / 32.0)
                .unwrap();
        let mut h = VelocityHistory::new(Interpolation::Linear);
        let n = (t_end / every).round() as usize;
        for k in 0..=n {
            let t = k as f64 * every;
            h.push(t, base.translated(W_HILL * t)).unwrap();
        }
        h
    }

    #[test]
    fn rejects_out_of_span() {
        let h = hill_history(1.0, 0.5);
        assert!(matches!(
            advect(&h, 0.0, HalfPlanePoint::new(0.0, 0.0), 2.0, 0.1),
            Err(Error::OutsideHistory { .. })
        ));
        assert!(h.velocity(-0.5, HalfPlanePoint::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn single_sample_when_t1_equals_t0() {
        let h = hill_history(1.0, 0.5);
        let path = advect(&h, 0.5, HalfPlanePoint::new(0.3, 0.1), 0.5, 0.1).unwrap();
        assert_eq!(path, vec![(0.5, HalfPlanePoint::new(0.3, 0.1))]);
    }

    #[test]
    fn interior_axis_path_matches_closed_form() {
        // the quadrature grid is not co-moving, so the field carries small
        // translation-dependent errors; a short path keeps the budget tight
        let h = hill_history(3.0, 0.25);
        let path = advect(&h, 0.0, HalfPlanePoint::new(0.0, 0.0), 3.0, 0.05).unwrap();
        assert!(path.iter().all(|(_, p)| p.r == 0.0));
        let (t, p) = *path.last().unwrap();
        let exact = axis_trajectory_interior(0.0, t).unwrap() + W_HILL * t;
        assert!((p.z - exact).abs() < 2e-3, "{} vs {exact}", p.z);
    }

    #[test]
    fn composition() {
        let h = hill_history(2.0, 0.25);
        let x0 = HalfPlanePoint::new(0.4, -0.3);
        let direct = advect(&h, 0.0, x0, 2.0, 0.05).unwrap();
        let mid = advect(&h, 0.0, x0, 1.0, 0.05).unwrap();
        let rest = advect(&h, 1.0, mid.last().unwrap().1, 2.0, 0.05).unwrap();
        let a = direct.last().unwrap().1;
        let b = rest.last().unwrap().1;
        assert!(a.dist(&b) < 1e-9, "{}", a.dist(&b));
    }

    #[test]
    fn classification_rules() {
        let tau: Vec<(f64, f64)> = (0..=20).map(|k| (k as f64, W_HILL * k as f64)).collect();
        let mk = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, HalfPlanePoint)> {
            (0..=20)
                .map(|k| {
                    let t = k as f64;
                    (t, HalfPlanePoint::new(0.0, f(t) + W_HILL * t))
                })
                .collect()
        };
        let tail = mk(&|t| -1.5 - 0.1 * t);
        assert_eq!(
            classify_axis_fate(&tail, &tau, 0.1).unwrap(),
            AxisFate::Tail
        );
        let interior = mk(&|t| (0.2 * t).tanh());
        assert_eq!(
            classify_axis_fate(&interior, &tau, 0.1).unwrap(),
            AxisFate::InteriorToFront
        );
        let ahead = mk(&|t| 1.0 + 0.5 * (-0.4 * t).exp());
        assert_eq!(
            classify_axis_fate(&ahead, &tau, 0.1).unwrap(),
            AxisFate::AheadToFront
        );
        let stuck = mk(&|_| 0.0);
        assert!(matches!(
            classify_axis_fate(&stuck, &tau, 0.1),
            Err(Error::Unclassified(_))
        ));
        let off = vec![(0.0, HalfPlanePoint::new(0.1, 0.0))];
        assert_eq!(classify_axis_fate(&off, &tau, 0.1), Err(Error::OffAxisPath));
    }
}
