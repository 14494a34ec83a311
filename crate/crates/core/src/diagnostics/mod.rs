//! Quantities tracked along a run: shift, geometry, conserved integrals,
//! vorticity and gradient growth, and the Feng-Šverák ratio.

mod discrepancy;
mod gradient;
mod inscription;

pub use discrepancy::{
    blob_discrepancy, discrepancy_norm, discrepancy_parts, estimate_tau, patch_discrepancy,
    Discrepancy,
};
pub use gradient::{max_dr_xi, sample_field, ProbeGrid};
pub use inscription::inscription_radius;

use crate::biot_savart::{PatchRaster, PreparedSource};
use crate::error::{Error, Result};
use crate::evolution::{BlobState, Observer, PatchState, State};
use crate::geometry::{arc_length, revolved_diameter, revolved_diameter_of_points, HalfPlanePoint};
use crate::hill_analytic::{hill_velocity, W_HILL};
use std::f64::consts::PI;
use std::io::Write;

pub const CSV_HEADER: &str = "t,tau,speed_residual,diameter,perimeter,r_ins,impulse,energy,l1,l2,linf,sup_vorticity,max_dr_xi,fs_ratio";

/// One time sample of every tracked quantity. Missing values are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub tau: f64,
    pub speed_residual: f64,
    pub diameter: f64,
    pub perimeter: f64,
    pub r_ins: f64,
    pub impulse: f64,
    pub energy: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub sup_vorticity: f64,
    pub max_dr_xi: f64,
    pub fs_ratio: f64,
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.12e}")
    }
}

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 14] {
        [
            self.t,
            self.tau,
            self.speed_residual,
            self.diameter,
            self.perimeter,
            self.r_ins,
            self.impulse,
            self.energy,
            self.l1,
            self.l2,
            self.linf,
            self.sup_vorticity,
            self.max_dr_xi,
            self.fs_ratio,
        ]
    }

    pub fn to_csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| fmt_value(*v))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| {
                let s = s.trim();
                if s == "nan" {
                    Ok(f64::NAN)
                } else {
                    s.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad diagnostics value '{s}': {e}")))
                }
            })
            .collect::<Result<_>>()?;
        if v.len() != 14 {
            return Err(Error::Parse(format!(
                "diagnostics row has {} fields, expected 14",
                v.len()
            )));
        }
        Ok(Self {
            t: v[0],
            tau: v[1],
            speed_residual: v[2],
            diameter: v[3],
            perimeter: v[4],
            r_ins: v[5],
            impulse: v[6],
            energy: v[7],
            l1: v[8],
            l2: v[9],
            linf: v[10],
            sup_vorticity: v[11],
            max_dr_xi: v[12],
            fs_ratio: v[13],
        })
    }
}

/// Reads a diagnostics CSV written by [`DiagnosticsObserver`].
pub fn read_diagnostics_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse("missing diagnostics header".into())),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(DiagnosticsRecord::from_csv_row)
        .collect()
}

/// Conserved integrals of the continuum dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    /// `(1/2) ∫ r² ξ dx = π ∬ r³ ξ dr dz`.
    pub impulse: f64,
    /// `(1/2) ∫ |u|² dx = π ∬ ψ ξ r dr dz`.
    pub energy: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Energy of a patch: the pairing `π Σ ψ Γ` over the cells of a raster of
/// spacing `h_energy`, with `ψ` from the full-resolution source.
pub fn patch_energy(s: &PatchState, source: &PreparedSource, h_energy: f64) -> f64 {
    use rayon::prelude::*;
    let targets = PatchRaster::build(&s.contours, s.xi_value, h_energy);
    let rings: Vec<(f64, f64, f64)> = targets.rings().collect();
    let terms: Vec<f64> = rings
        .par_iter()
        .map(|&(r, z, g)| source.stream_at(HalfPlanePoint::new(r, z)) * g)
        .collect();
    PI * terms.iter().sum::<f64>()
}

/// Energy of a blob field, including the regularised self-interaction, which
/// makes it the exact Hamiltonian of the blob dynamics.
pub fn blob_energy(s: &BlobState, source: &PreparedSource) -> f64 {
    use rayon::prelude::*;
    let terms: Vec<f64> = s
        .field
        .blobs
        .par_iter()
        .map(|b| {
            let g = b.circulation();
            if g == 0.0 {
                0.0
            } else {
                source.stream_at(b.p) * g
            }
        })
        .collect();
    PI * terms.iter().sum::<f64>()
}

/// Impulse and `L^p` norms (no energy), which need no velocity evaluation.
pub fn moment_suite(state: &State) -> (f64, f64, f64, f64) {
    match state {
        State::Patch(s) => {
            let c = s.xi_value;
            let i1: f64 = s.contours.iter().map(|k| k.radial_moment(1)).sum();
            let i3: f64 = s.contours.iter().map(|k| k.radial_moment(3)).sum();
            (
                PI * c * i3,
                2.0 * PI * c.abs() * i1,
                (2.0 * PI * c * c * i1).sqrt(),
                c.abs(),
            )
        }
        State::Blobs(s) => {
            let (mut imp, mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0, 0.0f64);
            for b in &s.field.blobs {
                imp += 0.5 * b.xi * b.volume * b.p.r * b.p.r;
                l1 += b.xi.abs() * b.volume;
                l2 += b.xi * b.xi * b.volume;
                linf = linf.max(b.xi.abs());
            }
            (imp, l1, l2.sqrt(), linf)
        }
    }
}

/// Impulse, energy and `L¹`, `L²`, `L^∞` norms. Patches use a raster of
/// spacing `h_quad` for the source and `h_energy` for the energy pairing.
pub fn conserved_suite(state: &State, h_quad: f64, h_energy: f64) -> Conserved {
    let (impulse, l1, l2, linf) = moment_suite(state);
    let energy = match state {
        State::Patch(s) => patch_energy(s, &s.source(h_quad).prepare(), h_energy),
        State::Blobs(s) => blob_energy(s, &s.source().prepare()),
    };
    Conserved {
        impulse,
        energy,
        l1,
        l2,
        linf,
    }
}

/// `sup r ξ`: for a patch, `ξ` times the largest boundary radius; for blobs,
/// the largest `r ξ` over particles (a lower bound of the true sup).
pub fn sup_vorticity(state: &State) -> f64 {
    match state {
        State::Patch(s) => {
            s.xi_value.abs() * s.contours.iter().map(|c| c.max_r()).fold(0.0, f64::max)
        }
        State::Blobs(s) => s
            .field
            .blobs
            .iter()
            .map(|b| b.p.r * b.xi.abs())
            .fold(0.0, f64::max),
    }
}

/// `‖u‖_∞ / (‖r²ξ‖₁^{1/4} ‖ξ‖₁^{1/4} ‖ξ‖_∞^{1/2})`.
pub fn fs_ratio(sup_u: f64, l1: f64, l1w: f64, linf: f64) -> f64 {
    let denom = l1w.powf(0.25) * l1.powf(0.25) * linf.sqrt();
    if denom > 0.0 {
        sup_u / denom
    } else {
        f64::NAN
    }
}

/// The Feng-Šverák constant measured on Hill's vortex: the largest speed of
/// the closed-form field on a grid, divided by the norm product.
pub fn measure_c0() -> f64 {
    let mut sup = 0.0f64;
    for i in 0..=200 {
        for j in 0..=400 {
            let p = HalfPlanePoint::new(2.0 * i as f64 / 200.0, -2.0 + 4.0 * j as f64 / 400.0);
            let (ur, uz) = hill_velocity(p);
            sup = sup.max(ur.hypot(uz));
        }
    }
    fs_ratio(sup, 4.0 * PI / 3.0, 8.0 * PI / 15.0, 1.0)
}

/// Largest speed over evaluation points tied to the state: boundary nodes and
/// a coarse interior grid for patches, particle positions for blobs.
pub fn sup_speed(state: &State, source: &PreparedSource, h_grid: f64) -> f64 {
    let mut pts: Vec<HalfPlanePoint> = Vec::new();
    match state {
        State::Patch(s) => {
            for c in &s.contours {
                pts.extend_from_slice(c.nodes());
                if let Some((r0, r1, z0, z1)) = c.bbox() {
                    let nr = ((r1 - r0) / h_grid).ceil() as usize;
                    let nz = ((z1 - z0) / h_grid).ceil() as usize;
                    for i in 0..=nr {
                        for j in 0..=nz {
                            let p =
                                HalfPlanePoint::new(r0 + i as f64 * h_grid, z0 + j as f64 * h_grid);
                            if crate::geometry::contains(c, p) || p.r == 0.0 {
                                pts.push(p);
                            }
                        }
                    }
                }
            }
        }
        State::Blobs(s) => {
            pts.extend(s.field.blobs.iter().filter(|b| b.xi != 0.0).map(|b| b.p));
        }
    }
    source
        .velocity_batch(&pts)
        .iter()
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max)
}

/// Settings of [`DiagnosticsObserver`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsParams {
    /// Source raster spacing for patch states.
    pub h_quad: f64,
    /// Target raster spacing of the patch energy pairing.
    pub h_energy: f64,
    /// Grid spacing for the inscription-radius centre search.
    pub h_ins: f64,
    /// Probe spacing for `max_dr_xi` on blob runs.
    pub h_probe: f64,
    /// Half-width of the shift search bracket.
    pub bracket: f64,
    /// Largest accepted change of `τ` between records.
    pub jump_guard: f64,
    /// Traveling speed used for the speed residual.
    pub w: f64,
    /// Whether to evaluate the (expensive) energy and speed monitors.
    pub with_energy: bool,
}

impl DiagnosticsParams {
    pub fn new(h_quad: f64) -> Self {
        Self {
            h_quad,
            h_energy: 4.0 * h_quad,
            h_ins: 0.01,
            h_probe: 1.0 / 256.0,
            bracket: 0.5,
            jump_guard: 0.5,
            w: W_HILL,
            with_energy: true,
        }
    }
}

/// Computes one record for `state`, warm-starting the shift at `tau_prev`.
pub fn record(
    state: &State,
    tau_prev: f64,
    params: &DiagnosticsParams,
) -> Result<DiagnosticsRecord> {
    let t = state.t();
    let tau = estimate_tau(state, tau_prev, params.bracket)?;
    if (tau - tau_prev).abs() > params.jump_guard {
        return Err(Error::ShiftTrackingLost {
            t,
            reason: format!("jump from {tau_prev} to {tau} exceeds the guard"),
        });
    }
    let (impulse, l1, l2, linf) = moment_suite(state);
    let (energy, fs) = if params.with_energy {
        let (energy, source) = match state {
            State::Patch(s) => {
                let src = s.source(params.h_quad).prepare();
                (patch_energy(s, &src, params.h_energy), src)
            }
            State::Blobs(s) => {
                let src = s.source().prepare();
                (blob_energy(s, &src), src)
            }
        };
        let sup_u = sup_speed(state, &source, 1.0 / 16.0);
        (energy, fs_ratio(sup_u, l1, 2.0 * impulse, linf))
    } else {
        (f64::NAN, f64::NAN)
    };
    let (diameter, perimeter, r_ins, dr_xi) = match state {
        State::Patch(s) => {
            let nodes: Vec<HalfPlanePoint> =
                s.contours.iter().flat_map(|c| c.nodes().to_vec()).collect();
            let perimeter = s.contours.iter().map(arc_length).sum::<Result<f64>>()?;
            let diameter = if s.contours.len() == 1 {
                revolved_diameter(&s.contours[0])?
            } else {
                revolved_diameter_of_points(&nodes)?
            };
            (
                diameter,
                perimeter,
                inscription_radius(&s.contours, params.h_ins),
                f64::NAN,
            )
        }
        State::Blobs(s) => {
            let pts: Vec<HalfPlanePoint> = s
                .field
                .blobs
                .iter()
                .filter(|b| b.xi != 0.0)
                .map(|b| b.p)
                .collect();
            let grid = ProbeGrid::around(s, params.h_probe, 4.0 * params.h_probe);
            (
                revolved_diameter_of_points(&pts)?,
                f64::NAN,
                f64::NAN,
                max_dr_xi(state, &grid)?,
            )
        }
    };
    Ok(DiagnosticsRecord {
        t,
        tau,
        speed_residual: (tau - params.w * t).abs(),
        diameter,
        perimeter,
        r_ins,
        impulse,
        energy,
        l1,
        l2,
        linf,
        sup_vorticity: sup_vorticity(state),
        max_dr_xi: dr_xi,
        fs_ratio: fs,
    })
}

/// Observer that records diagnostics and optionally streams them as CSV.
pub struct DiagnosticsObserver {
    pub params: DiagnosticsParams,
    pub records: Vec<DiagnosticsRecord>,
    tau_prev: f64,
    out: Option<Box<dyn Write>>,
}

impl DiagnosticsObserver {
    pub fn new(params: DiagnosticsParams) -> Self {
        Self {
            params,
            records: Vec::new(),
            tau_prev: 0.0,
            out: None,
        }
    }

    /// Writes the header now and one row per record (flushed immediately).
    pub fn with_writer(mut self, mut out: Box<dyn Write>) -> Result<Self> {
        writeln!(out, "{CSV_HEADER}")?;
        out.flush()?;
        self.out = Some(out);
        Ok(self)
    }

    /// `(t, τ)` pairs recorded so far.
    pub fn tau_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.tau)).collect()
    }
}

impl Observer for DiagnosticsObserver {
    fn observe(&mut self, state: &State, _step: usize) -> Result<()> {
        let rec = record(state, self.tau_prev, &self.params)?;
        self.tau_prev = rec.tau;
        if let Some(out) = self.out.as_mut() {
            writeln!(out, "{}", rec.to_csv_row())?;
            out.flush()?;
        }
        self.records.push(rec);
        Ok(())
    }
}

/// Least-squares line `y = a + b x`; returns `(slope, intercept, R²)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, my - slope * mx, r2)
}
