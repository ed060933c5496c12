//! Vector-calculus operators on periodic grids: divergence, gradient and the
//! Leray projector onto divergence-free fields.
//!
//! First derivatives use the Nyquist-free wavenumbers of
//! [`PeriodicGrid::derivative_wavenumber`], and the projector is built from
//! the same wavenumbers, so projected fields have exactly zero discrete
//! divergence.

use rustfft::num_complex::Complex64;

use super::field::{Spectrum, VectorField};
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};
use crate::exec::{for_each_chunk_mut, CHUNK};

fn derivative_wavevector(grid: &PeriodicGrid, flat: usize, out: &mut [f64]) {
    for (a, j) in grid.unflatten(flat).into_iter().enumerate() {
        out[a] = grid.derivative_wavenumber(a, j);
    }
}

/// Spectrum of `∇·u`.
pub fn divergence(components: &[Spectrum]) -> Result<Spectrum> {
    let grid = components.first().ok_or(Error::GridMismatch)?.grid().clone();
    if components.len() != grid.dim() {
        return Err(Error::GridMismatch);
    }
    let parts: Vec<Spectrum> = components.iter().enumerate().map(|(a, c)| c.derivative(a)).collect();
    let terms: Vec<(f64, &Spectrum)> = parts.iter().map(|s| (1.0, s)).collect();
    Ok(Spectrum::combination(&terms))
}

/// Spectra of `∇q`.
pub fn gradient(q: &Spectrum) -> Vec<Spectrum> {
    (0..q.grid().dim()).map(|a| q.derivative(a)).collect()
}

/// Applies `P = I − k kᵀ/|k|²` mode by mode; the zero mode passes unchanged.
pub fn leray_project_spectra(components: &[Spectrum]) -> Result<Vec<Spectrum>> {
    let grid = components.first().ok_or(Error::GridMismatch)?.grid().clone();
    let dim = grid.dim();
    if components.len() != dim || components.iter().any(|c| !c.grid().same_shape(&grid)) {
        return Err(Error::GridMismatch);
    }
    // Interleave so each mode's vector is contiguous for the chunked kernel.
    let n = grid.len();
    let mut packed = vec![Complex64::new(0.0, 0.0); n * dim];
    for (a, c) in components.iter().enumerate() {
        for (i, z) in c.coeffs().iter().enumerate() {
            packed[i * dim + a] = *z;
        }
    }
    let g = grid.as_ref();
    for_each_chunk_mut(grid.execution(), &mut packed, CHUNK * dim, |ci, chunk| {
        let mut k = vec![0.0; dim];
        for (j, v) in chunk.chunks_mut(dim).enumerate() {
            derivative_wavevector(g, ci * CHUNK + j, &mut k);
            let k2: f64 = k.iter().map(|x| x * x).sum();
            if k2 == 0.0 {
                continue;
            }
            let mut kv = Complex64::new(0.0, 0.0);
            for a in 0..dim {
                kv += v[a] * k[a];
            }
            for a in 0..dim {
                v[a] -= kv * (k[a] / k2);
            }
        }
    });
    let mut out = Vec::with_capacity(dim);
    for a in 0..dim {
        let coeffs = (0..n).map(|i| packed[i * dim + a]).collect();
        out.push(Spectrum::from_coeffs(&grid, coeffs)?);
    }
    Ok(out)
}

/// Real-space Leray projection.
pub fn leray_project(u: &VectorField) -> Result<VectorField> {
    let spectra: Vec<Spectrum> = u.components().iter().map(|c| c.spectrum().clone()).collect();
    let projected = leray_project_spectra(&spectra)?;
    VectorField::new(projected.iter().map(|s| s.to_field()).collect())
}

/// Mean-free `q` solving `Δq = s`; the zero mode is set to 0.
pub fn inverse_laplacian(s: &Spectrum) -> Spectrum {
    let k2 = s.grid().k_squared();
    let inv: Vec<f64> = k2.iter().map(|&k| if k == 0.0 { 0.0 } else { -1.0 / k }).collect();
    s.with_symbol(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Dealias, ScalarField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn grid() -> Arc<PeriodicGrid> {
        PeriodicGrid::new(2, &[1.0, 1.0], &[16, 16]).unwrap()
    }

    fn random_field(g: &Arc<PeriodicGrid>, rng: &mut ChaCha8Rng) -> ScalarField {
        ScalarField::from_values(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn projector_annihilates_gradients() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_field(&g, &mut rng);
        let grad = gradient(q.spectrum());
        let p = leray_project_spectra(&grad).unwrap();
        for c in p {
            assert!(c.to_field().max_abs() < 1e-12);
        }
    }

    #[test]
    fn projection_plus_gradient_part_recovers_field() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // band-limited data: on Nyquist rows the derivative wavenumber is 0
        // while |k|² is not, so the decomposition only holds below Nyquist
        let v = VectorField::new(vec![
            random_field(&g, &mut rng).dealiased(Dealias::TwoThirds),
            random_field(&g, &mut rng).dealiased(Dealias::TwoThirds),
        ])
        .unwrap();
        let pv = leray_project(&v).unwrap();
        let spectra: Vec<Spectrum> = v.components().iter().map(|c| c.spectrum().clone()).collect();
        let q = inverse_laplacian(&divergence(&spectra).unwrap());
        let grad_part = gradient(&q);
        for (a, gp) in grad_part.iter().enumerate() {
            let recon = ScalarField::combination(&[(1.0, pv.component(a)), (1.0, &gp.to_field())]);
            for (r, o) in recon.values().iter().zip(v.component(a).values()) {
                assert!((r - o).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projected_field_is_divergence_free() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = VectorField::new(vec![random_field(&g, &mut rng), random_field(&g, &mut rng)]).unwrap();
        let pv = leray_project(&v).unwrap();
        let spectra: Vec<Spectrum> = pv.components().iter().map(|c| c.spectrum().clone()).collect();
        assert!(divergence(&spectra).unwrap().norm_sqr().sqrt() < 1e-12 * pv.norm());
    }
}
