//! Pseudo-spectral solver for the incompressible Navier–Stokes equations with
//! nonlinear damping `α|u|^{β−1}u` on the periodic box `[0, L)³`, together with
//! the diagnostics and checks for its energy estimates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod initial;
pub mod integrator;
pub mod par;
pub mod spectral;
pub mod verify;

pub use cli_io::config::RunConfig;
pub use cli_io::{cli_main, execute_run, parse_config};
pub use diagnostics::{energy_balance_residual, record, DiagnosticsRecord, DiagnosticsRecorder};
pub use error::{Error, Result};
pub use experiment::{ExperimentKind, ExperimentSpec, SweepResult};
pub use field::{PhysicalVelocity, SpectralVelocity};
pub use forcing::{Axis, Cylinder, ForcingField, ForcingSpec};
pub use grid::WaveGrid;
pub use initial::{make_initial_condition, InitialCondition};
pub use integrator::{
    adapt_dt, explicit_rhs, integrate, step, step_with_dt, Flow, Method, Observer, Physics,
    SchemeConfig, SolverState, Stride,
};
pub use spectral::{damping_term, leray_project, nonlinear_term, stokes_lambda1};
