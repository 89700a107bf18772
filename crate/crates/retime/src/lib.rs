//! Time reparameterization of stiff ODE trajectories.
//!
//! Stiff systems force explicit integrators into tiny steps. This crate
//! mitigates that by re-expressing trajectories in a stretched time
//! coordinate tau through a strictly increasing map t(tau), so that fast
//! transients are spread out and explicit integration on a uniform
//! tau grid becomes stable. Three constructions are implemented:
//!
//! * solver-directed: the clock is inherited from an adaptive implicit
//!   solver's accepted-step grid,
//! * extrema-based: cubic time maps with zero slope at trajectory
//!   extrema in arc length,
//! * trajectory-optimized (TOTR): a traversal-speed profile over the
//!   arc-length coordinate is optimized to minimize squared acceleration
//!   in stretched time under an arrival-time constraint.
//!
//! The crate also ships the benchmark systems the methods are evaluated
//! on, fixed-step and adaptive implicit integrators, a small neural-ODE
//! surrogate trained in stretched time, and the evaluation metrics.

pub mod error;
pub mod geometry;
pub mod integrate;
pub mod interp;
pub mod io;
pub mod metrics;
pub mod reparam;
pub mod surrogate;
pub mod systems;

pub use error::{Error, Result};
