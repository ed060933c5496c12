//! Periodic Fourier pseudo-spectral backend.
//!
//! Fields are stored as real samples on a uniform periodic grid; spectra are
//! full complex arrays in standard FFT ordering. The forward transform is
//! unnormalised and the inverse divides by the number of grid points, but no
//! public contract depends on that convention: every inner product and norm
//! exposed here is stated in real space.

mod fft;
mod field;
mod grid;
mod operator;
mod vector;

pub use field::{Dealias, ScalarField, Spectrum, VectorField};
pub use grid::PeriodicGrid;
pub use operator::{solve_shifted, DiagonalOperator, ShiftedSystem};
pub use vector::{divergence, gradient, inverse_laplacian, leray_project, leray_project_spectra};
