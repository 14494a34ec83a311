//! Axisymmetric, swirl-free Euler solver for perturbations of Hill's
//! spherical vortex.
//!
//! Patches (uniform `ξ = r⁻¹ω^θ` inside a region) evolve by contour
//! dynamics; smooth fields evolve as regularised vortex rings (blobs).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biot_savart;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod flow_map;
pub mod geometry;
pub mod hill_analytic;
pub mod scenario;
pub mod snapshot;
pub mod validation;

pub use biot_savart::{Blob, BlobField, PreparedSource, VorticitySource};
pub use config::{parse_config, parse_config_with, serialize_config};
pub use error::{Error, Result};
pub use evolution::{run, BlobState, Observer, PatchState, RunOutcome, RunParams, State};
pub use geometry::{AxiBall, Contour, HalfPlanePoint};
pub use hill_analytic::W_HILL;
pub use scenario::{make_scenario, ScenarioConfig, ScenarioKind};
