//! Reduced-model toolkit for metastable bar and dipole states of 2D
//! Navier–Stokes on the torus `[0, 2πδ] × [0, 2π]`.
//!
//! * [`model`]: the eight-mode reduced system and its center-manifold graph.
//! * [`integrate`]: fixed-step RK4 and adaptive Dormand–Prince integration.
//! * [`observables`]: phase-reduced coordinates and scalar diagnostics.
//! * [`manifold`]: the quadratic family of stable manifolds of the dipole line.
//! * [`bounds`]: decay certificates checked along trajectories.
//! * [`perturbation`]: the slow-fast rescaling near δ = 1 and its expansions.
//! * [`spectral`]: a truncated Galerkin reference solver.
//! * [`trajectory_csv`]: CSV encoding of reduced-model trajectories.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod integrate;
pub mod manifold;
pub mod model;
pub mod observables;
pub mod perturbation;
pub mod spectral;
pub mod trajectory_csv;

pub use bounds::{AsymmetricConstants, DecayCertificate};
pub use error::{Error, Result};
pub use integrate::{integrate, Phase, StepControl, TimeGrid, Trajectory, TrajectoryMeta};
pub use manifold::{manifold_eval, StableManifoldChart};
pub use model::{
    center_graph, graph_invariance_defect, reduced_rhs, simulate, CenterGraphValues, ModeState, ModelParams,
    ReducedSystem,
};
pub use num_complex::Complex64;
pub use observables::{diagnostics, to_observables, Diagnostics, ObservableState, Quantity};
pub use perturbation::{AsymptoticSolution, PerturbationConfig};
pub use spectral::FourierField;

/// Default fixed step for reduced-model runs, `min(ν/10, 1e-2)`.
pub fn default_dt(nu: f64) -> f64 {
    (nu / 10.0).min(1e-2)
}
