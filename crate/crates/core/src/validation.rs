//! Analytic-oracle checks of a build: each row compares a numerical result
//! with a closed form or an independent computation.

use crate::biot_savart::{elliptic_ke, VorticitySource};
use crate::diagnostics::{estimate_tau, moment_suite, patch_energy};
use crate::error::Result;
use crate::evolution::{run, Observer, PatchParams, PatchState, RunParams, State};
use crate::geometry::HalfPlanePoint;
use crate::hill_analytic::{
    axis_trajectory_exterior, axis_trajectory_interior, axis_velocity, hill_stream, hill_velocity,
    overlap_f, W_HILL,
};
use crate::scenario::hill_contour;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub name: &'static str,
    /// Measured error (or margin) compared against `tolerance`.
    pub error: f64,
    pub tolerance: f64,
}

impl OracleRow {
    pub fn pass(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn row(name: &'static str, error: f64, tolerance: f64) -> OracleRow {
    OracleRow {
        name,
        error,
        tolerance,
    }
}

/// Relative sup errors of velocity and stream function of the Hill patch on
/// an `n × n` grid of `[0,2]×[-2,2]`, skipping a `2 h_quad` band around the
/// sphere.
pub fn hill_field_errors(h_quad: f64, n: usize, arc_nodes: usize) -> Result<(f64, f64)> {
    let src = VorticitySource::patch(vec![hill_contour(arc_nodes)?], 1.0, h_quad)?.prepare();
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = HalfPlanePoint::new(
                2.0 * i as f64 / (n - 1) as f64,
                -2.0 + 4.0 * j as f64 / (n - 1) as f64,
            );
            if (p.norm() - 1.0).abs() > 2.0 * h_quad {
                pts.push(p);
            }
        }
    }
    let vel = src.velocity_batch(&pts);
    let psi = src.stream_batch(&pts);
    let (mut eu, mut su, mut ep, mut sp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (k, p) in pts.iter().enumerate() {
        let (ur, uz) = hill_velocity(*p);
        eu = eu.max((vel[k].0 - ur).hypot(vel[k].1 - uz));
        su = su.max(ur.hypot(uz));
        let s = hill_stream(*p);
        ep = ep.max((psi[k] - s).abs());
        sp = sp.max(s.abs());
    }
    Ok((eu / su, ep / sp))
}

fn rk4_axis(z0: f64, t: f64, dt: f64) -> f64 {
    let n = (t / dt).round() as usize;
    let h = t / n as f64;
    let mut z = z0;
    for _ in 0..n {
        let k1 = axis_velocity(z);
        let k2 = axis_velocity(z + 0.5 * h * k1);
        let k3 = axis_velocity(z + 0.5 * h * k2);
        let k4 = axis_velocity(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    z
}

/// Radical inverse in base `b`.
fn halton(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut x = 0.0;
    while i > 0 {
        f /= b as f64;
        x += f * (i % b) as f64;
        i /= b;
    }
    x
}

/// Symmetric-difference volume of `B(0)` and `B(τ e_z)` by quasi-Monte Carlo.
fn overlap_qmc(tau: f64, n: u64) -> f64 {
    let (zl, zh) = (-1.0, 1.0 + tau.abs());
    let vol_box = 4.0 * (zh - zl);
    let mut hits = 0u64;
    for i in 1..=n {
        let x = 2.0 * halton(i, 2) - 1.0;
        let y = 2.0 * halton(i, 3) - 1.0;
        let z = zl + (zh - zl) * halton(i, 5);
        let a = x * x + y * y + z * z < 1.0;
        let zz = z - tau.abs();
        let b = x * x + y * y + zz * zz < 1.0;
        if a != b {
            hits += 1;
        }
    }
    vol_box * hits as f64 / n as f64
}

struct Track(Vec<State>);

impl Observer for Track {
    fn observe(&mut self, s: &State, _step: usize) -> Result<()> {
        self.0.push(s.clone());
        Ok(())
    }
}

/// Runs every oracle.
pub fn oracle_suite() -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();

    let (eu, ep) = hill_field_errors(1.0 / 64.0, 11, 1024)?;
    rows.push(row(
        "biot-savart velocity vs closed form (rel sup)",
        eu,
        0.02,
    ));
    rows.push(row("biot-savart stream vs closed form (rel sup)", ep, 0.01));

    let (k, e) = elliptic_ke(0.5)?;
    rows.push(row(
        "elliptic K(1/2), E(1/2) vs tables",
        (k - 1.854_074_677_301_372)
            .abs()
            .max((e - 1.350_643_881_047_675_5).abs()),
        1e-13,
    ));

    let zi = axis_trajectory_interior(0.0, 5.0)?;
    rows.push(row(
        "interior axis path z(5) = tanh(1)",
        (zi - 1f64.tanh()).abs(),
        1e-12,
    ));
    rows.push(row(
        "interior axis path vs RK4",
        (zi - rk4_axis(0.0, 5.0, 1e-3)).abs(),
        1e-8,
    ));
    let ahead = (axis_trajectory_exterior(1.5, 5.0)? - rk4_axis(1.5, 5.0, 1e-3)).abs();
    let behind = (axis_trajectory_exterior(-1.5, 5.0)? - rk4_axis(-1.5, 5.0, 1e-3)).abs();
    rows.push(row("exterior axis paths vs RK4", ahead.max(behind), 1e-8));

    let mut worst = 0.0f64;
    for tau in [0.5, 1.0, 1.5, 2.0] {
        let f = overlap_f(tau);
        worst = worst.max((overlap_qmc(tau, 1 << 18) - f).abs() / f);
    }
    rows.push(row(
        "overlap function vs quasi-Monte Carlo (rel)",
        worst,
        0.01,
    ));
    let mut slack = f64::NEG_INFINITY;
    for k in 0..=1000 {
        let tau = -2.0 + 4.0 * k as f64 / 1000.0;
        slack = slack.max(4.0 / 3.0 * PI * tau.abs() - overlap_f(tau));
    }
    rows.push(row(
        "overlap lower bound (4/3)π|τ| ≤ f(τ)",
        slack.max(0.0),
        0.0,
    ));

    let hill = PatchState::new(0.0, vec![hill_contour(512)?], 1.0)?;
    let shifted = State::Patch(PatchState::new(
        0.0,
        vec![hill.contours[0].translated(0.137)],
        1.0,
    )?);
    let tau = estimate_tau(&shifted, 0.0, 0.5)?;
    rows.push(row(
        "shift recovery of a translated ball",
        (tau - 0.137).abs(),
        1e-6,
    ));

    let src = hill.source(1.0 / 64.0).prepare();
    let e = patch_energy(&hill, &src, 1.0 / 16.0);
    let exact = 8.0 * PI / 315.0;
    rows.push(row(
        "Hill energy vs 8π/315 (rel)",
        (e - exact).abs() / exact,
        0.01,
    ));

    let params = RunParams {
        dt: 0.1,
        t_end: 1.0,
        stride: 10,
        patch: Some(PatchParams::new(1.0 / 32.0, 0.02, 0.1, 0.3)?),
        max_halvings: 2,
    };
    let h0 = State::Patch(PatchState::new(0.0, vec![hill_contour(96)?], 1.0)?);
    let mut track = Track(Vec::new());
    let out = run(h0, &params, &mut [&mut track])?;
    let (i0, l0, _, _) = moment_suite(&track.0[0]);
    let (i1, l1, _, _) = moment_suite(&out.state);
    let drift = ((i1 - i0) / i0).abs().max(((l1 - l0) / l0).abs());
    rows.push(row("short Hill run: impulse and volume drift", drift, 0.01));
    let tau1 = estimate_tau(&out.state, W_HILL, 0.5)?;
    rows.push(row(
        "short Hill run: shift at t = 1 vs W (rel)",
        (tau1 - W_HILL).abs() / W_HILL,
        0.05,
    ));
    Ok(rows)
}
