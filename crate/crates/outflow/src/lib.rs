//! Numerical laboratory for the outflow problem of the 1-D full compressible
//! Navier-Stokes equations on the half line.
//!
//! The crate constructs stationary boundary-layer solutions in all three Mach
//! regimes (the degenerate transonic case via a center-manifold reduction),
//! checks decay rates and sign conditions, and runs the transient
//! initial-boundary value problem to observe the asymptotic stability of the
//! transonic profile under small perturbations.
//!
//! Modules:
//! - [`eos`]: equation-of-state closures, thermodynamic identities and the
//!   sign/positivity conditions evaluated at the far field.
//! - [`stationary`]: boundary-layer profile construction and validation.
//! - [`transient`]: explicit finite-difference time integrator with outflow
//!   boundary conditions.
//! - [`harness`]: perturbation builders, norm/energy tracking and stability
//!   verdicts.
//! - [`config`] / [`cli`]: config ingestion, run orchestration and artifact
//!   emission.

pub mod cli;
pub mod config;
pub mod eos;
pub mod harness;
pub mod stationary;
pub mod transient;
