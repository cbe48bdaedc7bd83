//! Finite-volume solver for the two-fluid single-temperature SHTC model with
//! a reference-solution IMEX time discretization that runs at material CFL
//! for all Mach numbers.
//!
//! The crate is organized bottom-up: [`eos`] closures, [`state`] storage and
//! boundary handling, the [`explicit`] and [`implicit`] subsystems, the
//! [`imex`] Runge-Kutta driver, the unsplit [`reference`] solver, the exact
//! [`vortex`], test [`cases`], [`diagnostics`], file [`io`] and the
//! [`convergence`] harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod convergence;
pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod explicit;
pub mod imex;
pub mod implicit;
pub mod io;
pub mod linsolve;
pub mod reference;
pub mod state;
pub mod vortex;

pub use cases::CaseSpec;
pub use diagnostics::FieldReport;
pub use eos::{MixtureEOS, PhaseParams, ThermoEval};
pub use error::{Result, SolverError};
pub use explicit::{ExplicitConfig, FluxModel};
pub use imex::{ButcherPair, RunConfig, Solver};
pub use implicit::{ImplicitConfig, ReferenceState};
pub use state::{Bc, Field, Grid, State};
pub use vortex::{VortexParams, VortexProfile};
