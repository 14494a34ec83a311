//! Initial data presets: Hill's vortex and its perturbations.

use crate::biot_savart::{Blob, BlobField};
use crate::error::{Error, Result};
use crate::evolution::{BlobState, Lattice, PatchParams, PatchState, RunParams, State};
use crate::geometry::{revolved_volume, Contour, HalfPlanePoint};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    Hill,
    Prolate,
    Oblate,
    SeededSegment,
    FrontPeak,
    SmoothHill,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Hill,
        ScenarioKind::Prolate,
        ScenarioKind::Oblate,
        ScenarioKind::SeededSegment,
        ScenarioKind::FrontPeak,
        ScenarioKind::SmoothHill,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Hill => "hill",
            ScenarioKind::Prolate => "prolate",
            ScenarioKind::Oblate => "oblate",
            ScenarioKind::SeededSegment => "seeded-segment",
            ScenarioKind::FrontPeak => "front-peak",
            ScenarioKind::SmoothHill => "smooth-hill",
        }
    }

    /// Whether the scenario produces a blob state.
    pub fn is_smooth(&self) -> bool {
        matches!(self, ScenarioKind::FrontPeak | ScenarioKind::SmoothHill)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown scenario '{s}' (expected one of hill, prolate, oblate, seeded-segment, front-peak, smooth-hill)"
                ))
            })
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    /// Spheroid semi-axis along r.
    pub a: f64,
    /// Spheroid semi-axis along z (replaced by `1/a²` when `match_volume`).
    pub b: f64,
    pub match_volume: bool,
    /// Support margin: initial data lies in `B(1 + delta)`.
    pub delta: f64,
    pub m_peak: f64,
    pub r0: f64,
    /// Mollification width, also the meridional radius of the front peak.
    pub sigma: f64,
    /// Smooth-hill only: mollify the seeded-segment shape instead of the ball.
    pub seeded: bool,
    pub dt: f64,
    pub t_end: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h_quad: f64,
    pub curvature_budget: f64,
    /// Initial contour nodes on the arc; 0 picks from `h_max`.
    pub arc_nodes: usize,
    pub blob_spacing: f64,
    /// Blob core radius; `None` means twice the spacing.
    pub core_radius: Option<f64>,
    pub snapshot_every: usize,
    pub diag_every: usize,
    pub energy: bool,
    pub margin: f64,
    pub out: String,
}

impl ScenarioConfig {
    /// Defaults for a scenario.
    pub fn preset(kind: ScenarioKind) -> Self {
        let mut c = Self {
            scenario: kind,
            a: 1.0,
            b: 1.0,
            match_volume: false,
            delta: 0.2,
            m_peak: 20.0,
            r0: 0.05,
            sigma: 0.02,
            seeded: false,
            dt: 0.02,
            t_end: 10.0,
            h_min: 0.005,
            h_max: 0.05,
            h_quad: 1.0 / 128.0,
            curvature_budget: 0.1,
            arc_nodes: 0,
            blob_spacing: 1.0 / 32.0,
            core_radius: None,
            snapshot_every: 10,
            diag_every: 5,
            energy: true,
            margin: 0.1,
            out: "out".to_string(),
        };
        match kind {
            ScenarioKind::Prolate => {
                c.a = 0.9;
                c.delta = 0.25;
            }
            ScenarioKind::Oblate => {
                c.a = 1.1;
                c.delta = 0.25;
            }
            ScenarioKind::SmoothHill => {
                c.sigma = 0.1;
                c.dt = 0.05;
            }
            ScenarioKind::FrontPeak => {
                c.dt = 0.05;
            }
            _ => {}
        }
        c
    }

    /// The z semi-axis actually used.
    pub fn semi_axis_b(&self) -> f64 {
        if self.match_volume {
            1.0 / (self.a * self.a)
        } else {
            self.b
        }
    }

    pub fn core(&self) -> f64 {
        self.core_radius.unwrap_or(2.0 * self.blob_spacing)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("b", self.b),
            ("delta", self.delta),
            ("m_peak", self.m_peak),
            ("r0", self.r0),
            ("sigma", self.sigma),
            ("dt", self.dt),
            ("h_min", self.h_min),
            ("h_max", self.h_max),
            ("h_quad", self.h_quad),
            ("curvature_budget", self.curvature_budget),
            ("blob_spacing", self.blob_spacing),
            ("margin", self.margin),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.h_min >= self.h_max {
            return Err(Error::Config(format!(
                "h_min ({}) must be below h_max ({})",
                self.h_min, self.h_max
            )));
        }
        if let Some(c) = self.core_radius {
            if !(c > 0.0) {
                return Err(Error::Config(format!(
                    "core_radius must be positive, got {c}"
                )));
            }
        }
        if self.snapshot_every == 0 || self.diag_every == 0 {
            return Err(Error::Config("strides must be at least 1".into()));
        }
        let b = self.semi_axis_b();
        match self.scenario {
            ScenarioKind::Prolate if self.a >= b => {
                return Err(Error::Config(format!(
                    "prolate spheroid needs a < b, got a = {}, b = {b}",
                    self.a
                )))
            }
            ScenarioKind::Oblate if self.a <= b => {
                return Err(Error::Config(format!(
                    "oblate spheroid needs a > b, got a = {}, b = {b}",
                    self.a
                )))
            }
            ScenarioKind::Prolate | ScenarioKind::Oblate if self.a.max(b) > 1.0 + self.delta => {
                return Err(Error::Config(format!(
                    "spheroid with semi-axes {}, {b} does not fit in B(1 + {})",
                    self.a, self.delta
                )))
            }
            ScenarioKind::SmoothHill | ScenarioKind::FrontPeak if self.sigma > self.delta => {
                return Err(Error::Config(format!(
                    "mollification width {} exceeds the margin {}",
                    self.sigma, self.delta
                )))
            }
            ScenarioKind::FrontPeak if self.r0 + self.sigma >= 1.0 => {
                return Err(Error::Config("front peak must sit inside the ball".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn patch_params(&self) -> Result<PatchParams> {
        PatchParams::new(self.h_quad, self.h_min, self.h_max, self.curvature_budget)
    }

    pub fn run_params(&self) -> Result<RunParams> {
        Ok(RunParams {
            dt: self.dt,
            t_end: self.t_end,
            stride: 1,
            patch: if self.scenario.is_smooth() {
                None
            } else {
                Some(self.patch_params()?)
            },
            max_halvings: 3,
        })
    }
}

/// Star-shaped meridional shapes, as a polar radius over the latitude
/// `θ = atan2(z, r) ∈ [-π/2, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Ball,
    Spheroid {
        a: f64,
        b: f64,
    },
    /// Ball with a smooth rear bulge reaching the axis at `z = -1 - delta/2`.
    Seeded {
        delta: f64,
    },
}

impl Shape {
    pub fn radius(&self, theta: f64) -> f64 {
        match *self {
            Shape::Ball => 1.0,
            Shape::Spheroid { a, b } => {
                let (s, c) = theta.sin_cos();
                a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt()
            }
            Shape::Seeded { delta } => {
                // stationary at both poles, so the mirrored curve is C¹
                let w = 0.5 * (1.0 - theta.sin());
                1.0 + 0.5 * delta * w.powi(4)
            }
        }
    }

    /// `|x| - R(θ)`, a smooth level-set function of the shape.
    pub fn level(&self, p: HalfPlanePoint) -> f64 {
        let rho = p.norm();
        if rho == 0.0 {
            return -self.radius(0.0);
        }
        rho - self.radius(p.z.atan2(p.r))
    }

    pub fn contour(&self, arc_nodes: usize) -> Contour {
        let n = arc_nodes.max(4);
        let nodes = (0..=n)
            .map(|k| {
                let th = -PI / 2.0 + PI * k as f64 / n as f64;
                let rad = self.radius(th);
                let r = if k == 0 || k == n {
                    0.0
                } else {
                    rad * th.cos()
                };
                HalfPlanePoint::new(r, rad * th.sin())
            })
            .collect();
        Contour::closed(nodes)
    }
}

/// `6x⁵ - 15x⁴ + 10x³` on [0, 1], clamped outside.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Mollified indicator: 1 for `level ≤ -σ`, 0 for `level ≥ σ`, C² between.
pub fn mollified(level: f64, sigma: f64) -> f64 {
    1.0 - smoothstep(0.5 * (level / sigma + 1.0))
}

fn arc_nodes(cfg: &ScenarioConfig, extent: f64) -> usize {
    if cfg.arc_nodes > 0 {
        cfg.arc_nodes
    } else {
        ((PI * extent / (0.5 * cfg.h_max)).ceil() as usize).max(32)
    }
}

/// Polygon of the ball scaled so its revolved volume is exactly `4π/3`.
pub fn hill_contour(arc_nodes: usize) -> Result<Contour> {
    let c = Shape::Ball.contour(arc_nodes);
    let v = revolved_volume(&c)?;
    Ok(c.scaled((4.0 * PI / 3.0 / v).cbrt()))
}

/// Blobs on a regular lattice of spacing `h` covering `[0, r_max] × [z_lo, z_hi]`.
/// Lattice nodes where `xi` vanishes are kept as tracers only if `keep` holds.
pub fn lattice_blobs(
    xi: &dyn Fn(HalfPlanePoint) -> f64,
    keep: &dyn Fn(HalfPlanePoint) -> bool,
    h: f64,
    r_max: f64,
    z_lo: f64,
    z_hi: f64,
) -> (Vec<Blob>, Lattice) {
    let nr = (r_max / h).ceil() as usize + 1;
    let j_lo = (z_lo / h).floor() as i64;
    let j_hi = (z_hi / h).ceil() as i64;
    let nz = (j_hi - j_lo + 1) as usize;
    let mut blobs = Vec::new();
    let mut index = Vec::with_capacity(nr * nz);
    for j in 0..nz {
        let z = (j_lo + j as i64) as f64 * h;
        for i in 0..nr {
            let p = HalfPlanePoint::new(i as f64 * h, z);
            let v = xi(p);
            if v != 0.0 || keep(p) {
                // the axis node owns [0, h/2] whose r-moment is h²/8
                let r_moment = if i == 0 { h * h / 8.0 } else { p.r * h };
                index.push(Some(blobs.len()));
                blobs.push(Blob::new(p, v, 2.0 * PI * r_moment * h));
            } else {
                index.push(None);
            }
        }
    }
    (blobs, Lattice { nr, nz, index })
}

fn smooth_hill(cfg: &ScenarioConfig) -> Result<BlobState> {
    let shape = if cfg.seeded {
        Shape::Seeded { delta: cfg.delta }
    } else {
        Shape::Ball
    };
    let h = cfg.blob_spacing;
    let sigma = cfg.sigma;
    let reach = sigma + 2.0 * h;
    let xi = |p: HalfPlanePoint| mollified(shape.level(p), sigma);
    let keep = |p: HalfPlanePoint| shape.level(p) < reach;
    let ext = 1.0 + cfg.delta + 2.0 * h;
    let (blobs, lattice) = lattice_blobs(&xi, &keep, h, ext, -ext, ext);
    Ok(BlobState::new(
        0.0,
        BlobField::new(blobs, cfg.core())?,
        Some(lattice),
    ))
}

/// Mollified ball plus a smooth bump of height `m_peak` and radius `sigma`
/// at `(r0, 1 - sigma)`. The coarse lattice cells covering the bump are
/// replaced by a fine grid centred on the bump, so no seeding lattice is
/// kept.
fn front_peak(cfg: &ScenarioConfig) -> Result<BlobState> {
    let h = cfg.blob_spacing;
    let sigma = cfg.sigma;
    let centre = HalfPlanePoint::new(cfg.r0, 1.0 - sigma);
    let xi = |p: HalfPlanePoint| {
        let bg = mollified(Shape::Ball.level(p), sigma);
        let bump = cfg.m_peak * (1.0 - smoothstep(p.dist(&centre) / sigma));
        bg.max(bump)
    };
    let reach = sigma + 2.0 * h;
    let keep = |p: HalfPlanePoint| Shape::Ball.level(p) < reach;
    let ext = 1.0 + cfg.delta + 2.0 * h;
    let (coarse, _) = lattice_blobs(&xi, &keep, h, ext, -ext, ext);

    // box of whole coarse cells around the bump
    let pad = sigma + h;
    let i_lo = ((centre.r - pad) / h).round().max(0.0);
    let i_hi = ((centre.r + pad) / h).round();
    let j_lo = ((centre.z - pad) / h).round();
    let j_hi = ((centre.z + pad) / h).round();
    let in_box = |p: HalfPlanePoint| {
        let (i, j) = ((p.r / h).round(), (p.z / h).round());
        i >= i_lo && i <= i_hi && j >= j_lo && j <= j_hi
    };
    let r_lo = if i_lo == 0.0 { 0.0 } else { (i_lo - 0.5) * h };
    let r_hi = (i_hi + 0.5) * h;
    let z_lo = (j_lo - 0.5) * h;
    let z_hi = (j_hi + 0.5) * h;

    let mut blobs: Vec<Blob> = coarse.into_iter().filter(|b| !in_box(b.p)).collect();
    let hf = h.min(0.2 * sigma);
    let cells = |lo: f64, hi: f64, c: f64| -> Vec<(f64, f64)> {
        let a0 = ((lo - c) / hf - 0.5).floor() as i64;
        let a1 = ((hi - c) / hf + 0.5).ceil() as i64;
        (a0..=a1)
            .map(|a| {
                let x0 = (c + (a as f64 - 0.5) * hf).max(lo);
                let x1 = (c + (a as f64 + 0.5) * hf).min(hi);
                (x0, x1)
            })
            .filter(|(x0, x1)| x1 > x0)
            .collect()
    };
    let rs = cells(r_lo, r_hi, centre.r);
    let zs = cells(z_lo, z_hi, centre.z);
    for &(z0, z1) in &zs {
        for &(r0, r1) in &rs {
            // a full cell keeps its node at the centre of the bump lattice
            let p = HalfPlanePoint::new(0.5 * (r0 + r1), 0.5 * (z0 + z1));
            let v = xi(p);
            if v != 0.0 || keep(p) {
                let vol = PI * (r1 * r1 - r0 * r0) * (z1 - z0);
                blobs.push(Blob::new(p, v, vol));
            }
        }
    }
    Ok(BlobState::new(
        0.0,
        BlobField::new(blobs, cfg.core())?,
        None,
    ))
}

/// Builds the initial state of a scenario.
pub fn make_scenario(cfg: &ScenarioConfig) -> Result<State> {
    cfg.validate()?;
    let state = match cfg.scenario {
        ScenarioKind::Hill => State::Patch(PatchState::new(
            0.0,
            vec![hill_contour(arc_nodes(cfg, 1.0))?],
            1.0,
        )?),
        ScenarioKind::Prolate | ScenarioKind::Oblate => {
            let (a, b) = (cfg.a, cfg.semi_axis_b());
            let shape = Shape::Spheroid { a, b };
            State::Patch(PatchState::new(
                0.0,
                vec![shape.contour(arc_nodes(cfg, a.max(b)))],
                1.0,
            )?)
        }
        ScenarioKind::SeededSegment => {
            let shape = Shape::Seeded { delta: cfg.delta };
            State::Patch(PatchState::new(
                0.0,
                vec![shape.contour(arc_nodes(cfg, 1.0 + cfg.delta))],
                1.0,
            )?)
        }
        ScenarioKind::SmoothHill => State::Blobs(smooth_hill(cfg)?),
        ScenarioKind::FrontPeak => State::Blobs(front_peak(cfg)?),
    };
    Ok(state)
}

/// Largest `|x|` over the support of the initial data (contour nodes or
/// blobs with nonzero vorticity).
pub fn support_radius(state: &State) -> f64 {
    match state {
        State::Patch(s) => s
            .contours
            .iter()
            .flat_map(|c| c.nodes().iter().map(|p| p.norm()))
            .fold(0.0, f64::max),
        State::Blobs(s) => s
            .field
            .blobs
            .iter()
            .filter(|b| b.xi != 0.0)
            .map(|b| b.p.norm())
            .fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{discrepancy_norm, moment_suite, sup_vorticity};

    #[test]
    fn hill_volume() {
        let s = make_scenario(&ScenarioConfig::preset(ScenarioKind::Hill)).unwrap();
        let State::Patch(p) = &s else { panic!() };
        let v = revolved_volume(&p.contours[0]).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-3 * 4.0 * PI / 3.0);
    }

    #[test]
    fn supports_inside_margin_ball() {
        for kind in ScenarioKind::ALL {
            let mut cfg = ScenarioConfig::preset(kind);
            cfg.blob_spacing = 1.0 / 16.0;
            if kind == ScenarioKind::Prolate || kind == ScenarioKind::Oblate {
                cfg.match_volume = true;
            }
            let s = make_scenario(&cfg).unwrap();
            assert!(support_radius(&s) <= 1.0 + cfg.delta + 1e-9, "{kind}");
        }
    }

    #[test]
    fn seeded_segment_reaches_axis() {
        let mut cfg = ScenarioConfig::preset(ScenarioKind::SeededSegment);
        cfg.delta = 0.2;
        let State::Patch(p) = make_scenario(&cfg).unwrap() else {
            panic!()
        };
        let iv = p.contours[0].axis_intervals();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + 1.1).abs() < 1e-12 && (iv[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spheroid_parameter_errors() {
        let mut cfg = ScenarioConfig::preset(ScenarioKind::Prolate);
        cfg.a = 1.05;
        assert!(make_scenario(&cfg).is_err());
        let mut cfg = ScenarioConfig::preset(ScenarioKind::Oblate);
        cfg.a = 0.95;
        assert!(make_scenario(&cfg).is_err());
    }

    #[test]
    fn prolate_initial_discrepancy() {
        let mut cfg = ScenarioConfig::preset(ScenarioKind::Prolate);
        cfg.a = 0.95;
        cfg.match_volume = true;
        cfg.arc_nodes = 2048;
        let s = make_scenario(&cfg).unwrap();
        let d = discrepancy_norm(&s, 0.0);
        // L¹ of the symmetric difference by brute-force quadrature of the
        // two indicators on a fine grid
        let b = 1.0 / (0.95f64 * 0.95);
        let n = 800;
        let h = 1.2 / n as f64;
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        let mut l1w = 0.0;
        for i in 0..n {
            for j in -n..n {
                let (r, z) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let ball = r * r + z * z < 1.0;
                let sph = (r / 0.95).powi(2) + (z / b).powi(2) < 1.0;
                if ball != sph {
                    let w = 2.0 * PI * r * h * h;
                    l1 += w;
                    l2 += w;
                    l1w += w * r * r;
                }
            }
        }
        let oracle = l1 + l2.sqrt() + l1w;
        assert!((d - oracle).abs() < 0.02 * oracle, "{d} vs {oracle}");
    }

    #[test]
    fn front_peak_values() {
        let mut cfg = ScenarioConfig::preset(ScenarioKind::FrontPeak);
        cfg.r0 = 1.0 / 200.0;
        cfg.blob_spacing = 1.0 / 16.0;
        let s = make_scenario(&cfg).unwrap();
        let (_, _, _, linf) = moment_suite(&s);
        assert!((linf - 20.0).abs() < 1e-9, "{linf}");
        // direct evaluation of r ξ over the seeded field
        let State::Blobs(b) = &s else { panic!() };
        let peak = b
            .field
            .blobs
            .iter()
            .filter(|q| q.xi > 1.0)
            .map(|q| q.p.r * q.xi)
            .fold(0.0, f64::max);
        let bg = b
            .field
            .blobs
            .iter()
            .filter(|q| q.xi <= 1.0)
            .map(|q| q.p.r * q.xi)
            .fold(0.0, f64::max);
        assert!(peak <= (cfg.r0 + cfg.sigma) * 20.0);
        assert_eq!(sup_vorticity(&s), peak.max(bg));
        assert!(bg > 0.9 && bg < 1.0 + cfg.sigma);
    }

    fn ball_mass(sigma: f64) -> f64 {
        // radial quadrature of the mollified profile
        let n = 100_000;
        let top = 1.0 + sigma;
        let dr = top / n as f64;
        (0..n)
            .map(|k| {
                let rho = (k as f64 + 0.5) * dr;
                4.0 * PI * rho * rho * mollified(rho - 1.0, sigma) * dr
            })
            .sum()
    }

    #[test]
    fn front_peak_background_mass() {
        let mut cfg = ScenarioConfig::preset(ScenarioKind::FrontPeak);
        cfg.blob_spacing = 1.0 / 64.0;
        cfg.m_peak = 1e-9;
        let s = make_scenario(&cfg).unwrap();
        let (_, l1, _, _) = moment_suite(&s);
        let exact = ball_mass(cfg.sigma);
        assert!((l1 - exact).abs() < 0.005 * exact, "{l1} vs {exact}");
    }

    #[test]
    fn smooth_hill_mass() {
        let mut cfg = ScenarioConfig::preset(ScenarioKind::SmoothHill);
        cfg.blob_spacing = 1.0 / 64.0;
        let s = make_scenario(&cfg).unwrap();
        let (_, l1, _, linf) = moment_suite(&s);
        let exact = ball_mass(cfg.sigma);
        assert!((l1 - exact).abs() < 0.005 * exact, "{l1} vs {exact}");
        assert_eq!(linf, 1.0);
    }
}
