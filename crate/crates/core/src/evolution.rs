//! Time stepping of patch (contour) and blob (particle) states.

use crate::biot_savart::{Blob, BlobField, PreparedSource, VorticitySource};
use crate::error::{Error, Result};
use crate::geometry::{find_self_intersection, remesh_with, Contour, HalfPlanePoint, RemeshParams};

/// A uniform vortex patch described by its cross-section boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchState {
    pub t: f64,
    pub contours: Vec<Contour>,
    pub xi_value: f64,
}

impl PatchState {
    pub fn new(t: f64, contours: Vec<Contour>, xi_value: f64) -> Result<Self> {
        if contours.is_empty() {
            return Err(Error::EmptyGeometry);
        }
        if contours.iter().any(|c| !c.is_closed()) {
            return Err(Error::OpenContour);
        }
        Ok(Self {
            t,
            contours,
            xi_value,
        })
    }

    pub fn source(&self, h_quad: f64) -> VorticitySource {
        VorticitySource::Patch {
            contours: self.contours.clone(),
            xi_value: self.xi_value,
            h_quad,
        }
    }

    pub fn node_count(&self) -> usize {
        self.contours.iter().map(Contour::len).sum()
    }
}

/// Regular seeding lattice of a blob state: `index[j * nr + i]` is the blob
/// seeded at lattice node `(i, j)`. Kept so the transported field can be
/// reconstructed by interpolation on the deformed lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub nr: usize,
    pub nz: usize,
    pub index: Vec<Option<usize>>,
}

impl Lattice {
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        self.index[j * self.nr + i]
    }
}

/// A smooth field carried by blobs.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobState {
    pub t: f64,
    pub field: BlobField,
    pub lattice: Option<Lattice>,
    /// Number of axis reflections applied so far.
    pub reflections: usize,
}

impl BlobState {
    pub fn new(t: f64, field: BlobField, lattice: Option<Lattice>) -> Self {
        Self {
            t,
            field,
            lattice,
            reflections: 0,
        }
    }

    pub fn source(&self) -> VorticitySource {
        VorticitySource::Blobs(self.field.clone())
    }

    pub fn positions(&self) -> Vec<HalfPlanePoint> {
        self.field.blobs.iter().map(|b| b.p).collect()
    }
}

/// Either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Patch(PatchState),
    Blobs(BlobState),
}

impl State {
    pub fn t(&self) -> f64 {
        match self {
            State::Patch(s) => s.t,
            State::Blobs(s) => s.t,
        }
    }
}

/// Numerical parameters of the patch stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchParams {
    pub h_quad: f64,
    pub remesh: RemeshParams,
    /// Evaluate every RK4 stage with the stage-0 quadrature mask (cheaper,
    /// first-order in time for the source geometry).
    pub frozen_stage_masks: bool,
}

impl PatchParams {
    pub fn new(h_quad: f64, h_min: f64, h_max: f64, curvature_budget: f64) -> Result<Self> {
        if !(h_quad > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "h_quad must be positive, got {h_quad}"
            )));
        }
        Ok(Self {
            h_quad,
            remesh: RemeshParams::new(h_min, h_max, curvature_budget)?,
            frozen_stage_masks: false,
        })
    }
}

/// One classical RK4 step for a set of points under a position-dependent
/// velocity evaluator.
pub fn rk4_points<F>(points: &[HalfPlanePoint], dt: f64, mut velocity: F) -> Vec<HalfPlanePoint>
where
    F: FnMut(&[HalfPlanePoint]) -> Vec<(f64, f64)>,
{
    let stage = |base: &[HalfPlanePoint], k: &[(f64, f64)], f: f64| -> Vec<HalfPlanePoint> {
        base.iter()
            .zip(k)
            .map(|(p, v)| HalfPlanePoint::new(p.r + f * v.0, p.z + f * v.1))
            .collect()
    };
    let k1 = velocity(points);
    let k2 = velocity(&stage(points, &k1, 0.5 * dt));
    let k3 = velocity(&stage(points, &k2, 0.5 * dt));
    let k4 = velocity(&stage(points, &k3, dt));
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            HalfPlanePoint::new(
                p.r + dt / 6.0 * (k1[i].0 + 2.0 * k2[i].0 + 2.0 * k3[i].0 + k4[i].0),
                p.z + dt / 6.0 * (k1[i].1 + 2.0 * k2[i].1 + 2.0 * k3[i].1 + k4[i].1),
            )
        })
        .collect()
}

fn split_nodes(contours: &[Contour], flat: &[HalfPlanePoint]) -> Vec<Vec<HalfPlanePoint>> {
    let mut out = Vec::with_capacity(contours.len());
    let mut at = 0;
    for c in contours {
        out.push(flat[at..at + c.len()].to_vec());
        at += c.len();
    }
    out
}

/// Advances a patch by one RK4 step, then remeshes and snaps the axis.
pub fn step_patch(s: &PatchState, dt: f64, params: &PatchParams) -> Result<PatchState> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time step must be >= 0, got {dt}"
        )));
    }
    if dt == 0.0 {
        return Ok(s.clone());
    }
    let flat: Vec<HalfPlanePoint> = s.contours.iter().flat_map(|c| c.nodes().to_vec()).collect();
    let frozen = if params.frozen_stage_masks {
        Some(s.source(params.h_quad).prepare())
    } else {
        None
    };
    let moved = rk4_points(&flat, dt, |pts| {
        if let Some(src) = &frozen {
            return src.velocity_batch(pts);
        }
        let staged: Vec<Contour> = split_nodes(&s.contours, pts)
            .into_iter()
            .map(|nodes| {
                Contour::closed_unchecked(
                    nodes
                        .into_iter()
                        .map(|p| HalfPlanePoint::new(p.r.abs(), p.z))
                        .collect(),
                )
            })
            .collect();
        VorticitySource::Patch {
            contours: staged,
            xi_value: s.xi_value,
            h_quad: params.h_quad,
        }
        .prepare()
        .velocity_batch(pts)
    });
    let mut contours = Vec::with_capacity(s.contours.len());
    for nodes in split_nodes(&s.contours, &moved) {
        let c = Contour::closed(nodes);
        if find_self_intersection(&c).is_some() {
            return Err(Error::StepRejected {
                suggested_dt: dt / 2.0,
            });
        }
        let c = remesh_with(&c, &params.remesh)?;
        if find_self_intersection(&c).is_some() {
            return Err(Error::StepRejected {
                suggested_dt: dt / 2.0,
            });
        }
        let widest = c.segments().map(|(a, b)| a.dist(&b)).fold(0.0, f64::max);
        if widest > 10.0 * params.remesh.h_max {
            return Err(Error::ResolutionExhausted(format!(
                "segment of length {widest} after remesh (h_max = {})",
                params.remesh.h_max
            )));
        }
        contours.push(c);
    }
    Ok(PatchState {
        t: s.t + dt,
        contours,
        xi_value: s.xi_value,
    })
}

fn reflect(points: &mut [HalfPlanePoint]) -> usize {
    let mut n = 0;
    for p in points.iter_mut() {
        if p.r < 0.0 {
            p.r = -p.r;
            n += 1;
        }
    }
    n
}

/// Advances blob positions by one RK4 step; `ξ` and volume weights are
/// carried unchanged. Blobs crossing the axis are reflected and counted.
pub fn step_blobs(s: &BlobState, dt: f64) -> Result<BlobState> {
    if dt < 0.0 || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time step must be >= 0, got {dt}"
        )));
    }
    if dt == 0.0 {
        return Ok(s.clone());
    }
    let blobs = &s.field.blobs;
    let core = s.field.core_radius;
    let start = s.positions();
    let mut moved = rk4_points(&start, dt, |pts| {
        let staged: Vec<Blob> = blobs
            .iter()
            .zip(pts)
            .map(|(b, p)| Blob::new(HalfPlanePoint::new(p.r.abs(), p.z), b.xi, b.volume))
            .collect();
        let src = PreparedSource::Blobs(crate::biot_savart::PreparedBlobs::new(&staged, core));
        let targets: Vec<HalfPlanePoint> = pts
            .iter()
            .map(|p| HalfPlanePoint::new(p.r.abs(), p.z))
            .collect();
        src.velocity_batch(&targets)
    });
    let reflected = reflect(&mut moved);
    let blobs = blobs
        .iter()
        .zip(moved)
        .map(|(b, p)| Blob::new(p, b.xi, b.volume))
        .collect();
    Ok(BlobState {
        t: s.t + dt,
        field: BlobField {
            blobs,
            core_radius: core,
        },
        lattice: s.lattice.clone(),
        reflections: s.reflections + reflected,
    })
}

/// Receives immutable snapshots during [`run`].
pub trait Observer {
    fn observe(&mut self, state: &State, step: usize) -> Result<()>;

    /// Called once after the last step (also after an early stop).
    fn finish(&mut self, _state: &State) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub dt: f64,
    pub t_end: f64,
    /// Observers are invoked every `stride` steps (and at the final state).
    pub stride: usize,
    pub patch: Option<PatchParams>,
    /// How many times a rejected step is retried with halved substeps.
    pub max_halvings: u32,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: State,
    pub steps: usize,
    /// Why the run ended before `t_end`, if it did.
    pub stopped: Option<Error>,
}

fn step_state(state: &State, dt: f64, params: &RunParams) -> Result<State> {
    match state {
        State::Patch(s) => {
            let p = params.patch.ok_or_else(|| {
                Error::InvalidArgument("patch run without patch parameters".into())
            })?;
            step_patch(s, dt, &p).map(State::Patch)
        }
        State::Blobs(s) => step_blobs(s, dt).map(State::Blobs),
    }
}

/// Steps with `dt`, retrying a rejected step with 2, 4, ... substeps.
fn step_with_retry(state: &State, dt: f64, params: &RunParams) -> Result<State> {
    match step_state(state, dt, params) {
        Err(Error::StepRejected { .. }) => {}
        other => return other,
    }
    let mut last = Error::StepRejected {
        suggested_dt: dt / 2.0,
    };
    for k in 1..=params.max_halvings {
        let n = 1usize << k;
        let sub = dt / n as f64;
        let mut s = state.clone();
        let mut ok = true;
        for _ in 0..n {
            match step_state(&s, sub, params) {
                Ok(next) => s = next,
                Err(e @ Error::StepRejected { .. }) => {
                    last = e;
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            return Ok(s);
        }
    }
    Err(last)
}

fn set_time(state: &mut State, t: f64) {
    match state {
        State::Patch(s) => s.t = t,
        State::Blobs(s) => s.t = t,
    }
}

/// Fixed-step loop from `s0` to `t_end`, invoking observers on the initial
/// state, every `stride` steps, and at the final state. A step that stays
/// rejected after all retries, or that exhausts resolution, ends the run
/// cleanly with the reason in [`RunOutcome::stopped`]; observer errors abort.
pub fn run(
    s0: State,
    params: &RunParams,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutcome> {
    if !(params.dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {}",
            params.dt
        )));
    }
    if !(params.t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be nonnegative, got {}",
            params.t_end
        )));
    }
    let stride = params.stride.max(1);
    let t0 = s0.t();
    let n_steps = ((params.t_end - t0) / params.dt - 1e-9).ceil().max(0.0) as usize;
    let mut state = s0;
    for o in observers.iter_mut() {
        o.observe(&state, 0)?;
    }
    let mut stopped = None;
    let mut steps = 0;
    for k in 1..=n_steps {
        let t_target = if k == n_steps {
            params.t_end
        } else {
            t0 + k as f64 * params.dt
        };
        let dt = t_target - state.t();
        match step_with_retry(&state, dt, params) {
            Ok(mut next) => {
                set_time(&mut next, t_target);
                state = next;
                steps = k;
            }
            Err(e @ (Error::StepRejected { .. } | Error::ResolutionExhausted(_))) => {
                stopped = Some(e);
                break;
            }
            Err(e) => {
                for o in observers.iter_mut() {
                    o.finish(&state)?;
                }
                return Err(e);
            }
        }
        if k % stride == 0 || k == n_steps {
            for o in observers.iter_mut() {
                o.observe(&state, k)?;
            }
        }
    }
    if stopped.is_some() && steps % stride != 0 {
        for o in observers.iter_mut() {
            o.observe(&state, steps)?;
        }
    }
    for o in observers.iter_mut() {
        o.finish(&state)?;
    }
    Ok(RunOutcome {
        state,
        steps,
        stopped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hausdorff_distance, revolved_volume, AxiBall};
    use crate::hill_analytic::{hill_velocity, W_HILL};

    fn hill_state(nodes: usize) -> PatchState {
        PatchState::new(0.0, vec![AxiBall::unit().cross_section(nodes)], 1.0).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let s = hill_state(32);
        let p = PatchParams::new(1.0 / 16.0, 0.02, 0.1, 0.5).unwrap();
        assert_eq!(step_patch(&s, 0.0, &p).unwrap(), s);
        assert!(step_patch(&s, -0.1, &p).is_err());
    }

    #[test]
    fn frozen_field_reversibility() {
        let field = |pts: &[HalfPlanePoint]| -> Vec<(f64, f64)> {
            pts.iter().map(|p| hill_velocity(*p)).collect()
        };
        let pts = vec![
            HalfPlanePoint::new(0.5, 0.2),
            HalfPlanePoint::new(1.3, -0.4),
        ];
        let errs: Vec<f64> = [0.4, 0.2]
            .iter()
            .map(|&dt| {
                let fwd = rk4_points(&pts, dt, field);
                let back = rk4_points(&fwd, -dt, field);
                back.iter()
                    .zip(&pts)
                    .map(|(a, b)| a.dist(b))
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] < 1e-5, "{errs:?}");
        // O(dt^3) or better: halving dt shrinks the error at least 8x
        assert!(errs[1] < errs[0] / 8.0 || errs[1] < 1e-15, "{errs:?}");
    }

    #[test]
    fn hill_patch_translates() {
        let s = hill_state(96);
        let p = PatchParams::new(1.0 / 32.0, 0.01, 0.08, 0.3).unwrap();
        let mut st = s.clone();
        for _ in 0..5 {
            st = step_patch(&st, 0.2, &p).unwrap();
        }
        let target = AxiBall::new(W_HILL * st.t, 1.0).unwrap().cross_section(512);
        let d = hausdorff_distance(&st.contours[0], &target);
        assert!(d < 0.02, "hausdorff {d}");
        let v0 = revolved_volume(&s.contours[0]).unwrap();
        let v1 = revolved_volume(&st.contours[0]).unwrap();
        assert!(((v1 - v0) / v0).abs() < 0.01);
        assert!(st.contours[0].nodes().iter().any(|q| q.r == 0.0));
    }

    #[test]
    fn blob_step_zero_and_values() {
        let blobs = vec![
            Blob::new(HalfPlanePoint::new(0.5, 0.0), 1.0, 0.01),
            Blob::new(HalfPlanePoint::new(0.7, 0.1), 2.0, 0.02),
        ];
        let s = BlobState::new(0.0, BlobField::new(blobs, 0.1).unwrap(), None);
        assert_eq!(step_blobs(&s, 0.0).unwrap(), s);
        let n = step_blobs(&s, 0.1).unwrap();
        for (a, b) in n.field.blobs.iter().zip(&s.field.blobs) {
            assert_eq!(a.xi, b.xi);
            assert_eq!(a.volume, b.volume);
        }
        assert!((n.t - 0.1).abs() < 1e-15);
    }

    struct Count(usize);
    impl Observer for Count {
        fn observe(&mut self, _: &State, _: usize) -> Result<()> {
            self.0 += 1;
            Ok(())
        }
    }

    #[test]
    fn run_with_zero_end_observes_once() {
        let s = State::Patch(hill_state(32));
        let params = RunParams {
            dt: 0.1,
            t_end: 0.0,
            stride: 1,
            patch: Some(PatchParams::new(1.0 / 16.0, 0.02, 0.1, 0.5).unwrap()),
            max_halvings: 3,
        };
        let mut c = Count(0);
        let out = run(s, &params, &mut [&mut c]).unwrap();
        assert_eq!(c.0, 1);
        assert_eq!(out.steps, 0);
    }
}
