//! Scalar-auxiliary-variable time integrators for gradient flows on periodic
//! Fourier grids.
//!
//! The crate is layered bottom-up:
//!
//! - [`spectral`]: periodic grids, FFTs, diagonal operators, quadrature.
//! - [`models`]: Allen–Cahn, Cahn–Hilliard, phase-field crystal and
//!   Navier–Stokes instances, initial data and manufactured forcing.
//! - [`integrators`]: SAV/BDFk, RSAV/CN, EOP-SAV/CN, GSAV-family BDFk and the
//!   Navier–Stokes EOP-GSAV scheme as step functions over [`SchemeState`].
//! - [`audit`]: per-step energy records and the dissipation checks.
//! - [`harness`]: convergence ladders and named scenarios.
//! - [`io`]: run configuration, CSV, snapshots and plot scripts.
//!
//! Data-parallel inner loops (pointwise nonlinearities, FFT lines, reductions,
//! convergence rungs) run on rayon when the `parallel` feature is enabled and
//! the grid's [`Execution`] policy asks for it. Reductions use a fixed chunking
//! so results are bit-identical between the two policies.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod error;
pub mod exec;
pub mod harness;
pub mod integrators;
pub mod io;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use integrators::{Integrator, SchemeConfig, SchemeKind, SchemeState};
pub use models::ModelSpec;
pub use spectral::{DiagonalOperator, PeriodicGrid, ScalarField, Spectrum, VectorField};
