use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;

use super::fft;
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};
use crate::exec::{chunked_sum, chunked_sum2, for_each_chunk_mut, CHUNK};

/// Dealiasing rule applied to pseudo-spectral nonlinear products.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    #[default]
    None,
    /// Zero every mode with `|m| > N/3` on any axis.
    TwoThirds,
}

/// Spectral coefficients of a real field on a [`PeriodicGrid`].
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Arc<PeriodicGrid>,
    coeffs: Vec<Complex64>,
}

/// Real samples of a scalar field, with a lazily computed spectrum.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<PeriodicGrid>,
    values: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

/// `dim` scalar components on one grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

fn check_grids(a: &PeriodicGrid, b: &PeriodicGrid) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

impl Spectrum {
    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        Spectrum { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_coeffs(grid: &Arc<PeriodicGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Spectrum { grid: grid.clone(), coeffs })
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Inverse transform; the imaginary residue of round-off is discarded.
    pub fn to_field(&self) -> ScalarField {
        let mut buf = self.coeffs.clone();
        fft::inverse(&self.grid, &mut buf);
        let values = buf.into_iter().map(|z| z.re).collect();
        ScalarField::from_values_unchecked(&self.grid, values)
    }

    /// Inverse transform that keeps `self` as the field's cached spectrum,
    /// saving the forward transform when the result is reused spectrally.
    pub fn into_field(self) -> ScalarField {
        let field = self.to_field();
        let _ = field.spectrum.set(self);
        field
    }

    /// Multiplies every mode by a real symbol.
    pub fn scale_by_symbol(&mut self, symbol: &[f64]) {
        debug_assert_eq!(symbol.len(), self.coeffs.len());
        for_each_chunk_mut(self.grid.execution(), &mut self.coeffs, CHUNK, |ci, c| {
            let base = ci * CHUNK;
            c.iter_mut().enumerate().for_each(|(j, z)| *z *= symbol[base + j]);
        });
    }

    pub fn with_symbol(&self, symbol: &[f64]) -> Spectrum {
        let mut out = self.clone();
        out.scale_by_symbol(symbol);
        out
    }

    pub fn scale(&mut self, s: f64) {
        for_each_chunk_mut(self.grid.execution(), &mut self.coeffs, CHUNK, |_, c| c.iter_mut().for_each(|z| *z *= s));
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Spectrum) {
        debug_assert!(self.grid.same_shape(&other.grid));
        let src = &other.coeffs;
        for_each_chunk_mut(self.grid.execution(), &mut self.coeffs, CHUNK, |ci, c| {
            let base = ci * CHUNK;
            c.iter_mut().enumerate().for_each(|(j, z)| *z += src[base + j] * s);
        });
    }

    /// Linear combination `Σ w_i s_i` of spectra on one grid.
    pub fn combination(terms: &[(f64, &Spectrum)]) -> Spectrum {
        let (w0, s0) = terms[0];
        let mut out = s0.clone();
        out.scale(w0);
        for &(w, s) in &terms[1..] {
            out.axpy(w, s);
        }
        out
    }

    /// Real-space L² pairing `(f, g)` computed from coefficients (Parseval).
    pub fn inner(&self, other: &Spectrum) -> f64 {
        debug_assert!(self.grid.same_shape(&other.grid));
        let s = chunked_sum2(self.grid.execution(), &self.coeffs, &other.coeffs, |_, a, b| a.re * b.re + a.im * b.im);
        s * self.parseval_factor()
    }

    /// `(f, A g)` for a real diagonal symbol A.
    pub fn weighted_inner(&self, symbol: &[f64], other: &Spectrum) -> f64 {
        let s = chunked_sum2(self.grid.execution(), &self.coeffs, &other.coeffs, |i, a, b| {
            symbol[i] * (a.re * b.re + a.im * b.im)
        });
        s * self.parseval_factor()
    }

    /// `(f, A f)` for a real diagonal symbol A.
    pub fn quadratic_form(&self, symbol: &[f64]) -> f64 {
        let s = chunked_sum(self.grid.execution(), &self.coeffs, |i, a| symbol[i] * a.norm_sqr());
        s * self.parseval_factor()
    }

    pub fn norm_sqr(&self) -> f64 {
        chunked_sum(self.grid.execution(), &self.coeffs, |_, a| a.norm_sqr()) * self.parseval_factor()
    }

    /// Converts Σ f̂ ĝ* into the rectangle-rule integral of f g.
    fn parseval_factor(&self) -> f64 {
        let n = self.grid.len() as f64;
        self.grid.cell_volume() / n
    }

    /// Spectral first derivative `∂/∂x_axis`; the Nyquist slot is dropped.
    pub fn derivative(&self, axis: usize) -> Spectrum {
        let grid = self.grid.clone();
        let n = grid.modes()[axis];
        let stride: usize = grid.modes()[axis + 1..].iter().product();
        let mut out = self.clone();
        for_each_chunk_mut(grid.execution(), &mut out.coeffs, CHUNK, |ci, c| {
            let base = ci * CHUNK;
            for (j, z) in c.iter_mut().enumerate() {
                let slot = ((base + j) / stride) % n;
                let k = grid.derivative_wavenumber(axis, slot);
                *z = Complex64::new(-k * z.im, k * z.re);
            }
        });
        out
    }

    /// Applies a dealiasing rule in place.
    pub fn dealias(&mut self, rule: Dealias) {
        if rule == Dealias::None {
            return;
        }
        let grid = self.grid.clone();
        let modes = grid.modes().to_vec();
        for (flat, z) in self.coeffs.iter_mut().enumerate() {
            let m = grid.mode_of(flat);
            if m.iter().zip(&modes).any(|(&mi, &n)| 3 * mi.unsigned_abs() as usize > n) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<PeriodicGrid>, c: f64) -> Self {
        Self::from_values_unchecked(grid, vec![c; grid.len()])
    }

    pub fn from_values(grid: &Arc<PeriodicGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    pub(crate) fn from_values_unchecked(grid: &Arc<PeriodicGrid>, values: Vec<f64>) -> Self {
        ScalarField { grid: grid.clone(), values, spectrum: OnceLock::new() }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(&[f64]) -> f64 + Send + Sync) -> Self {
        let mut values = vec![0.0; grid.len()];
        let g = grid.as_ref();
        for_each_chunk_mut(grid.execution(), &mut values, CHUNK, |ci, c| {
            let base = ci * CHUNK;
            for (j, v) in c.iter_mut().enumerate() {
                *v = f(&g.coordinates(base + j));
            }
        });
        Self::from_values_unchecked(grid, values)
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable samples; invalidates the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectrum = OnceLock::new();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Forward transform, cached until the samples change.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft::forward(&self.grid, &mut buf);
            Spectrum { grid: self.grid.clone(), coeffs: buf }
        })
    }

    /// Pointwise map `g(x) = f(φ(x))`.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Send + Sync) -> ScalarField {
        let mut values = self.values.clone();
        for_each_chunk_mut(self.grid.execution(), &mut values, CHUNK, |_, c| c.iter_mut().for_each(|v| *v = f(*v)));
        Self::from_values_unchecked(&self.grid, values)
    }

    /// Pointwise linear combination `Σ w_i f_i`.
    pub fn combination(terms: &[(f64, &ScalarField)]) -> ScalarField {
        let grid = terms[0].1.grid.clone();
        let mut values = vec![0.0; grid.len()];
        for_each_chunk_mut(grid.execution(), &mut values, CHUNK, |ci, c| {
            let base = ci * CHUNK;
            for (j, v) in c.iter_mut().enumerate() {
                *v = terms.iter().map(|(w, f)| w * f.values[base + j]).sum();
            }
        });
        Self::from_values_unchecked(&grid, values)
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    /// Rectangle-rule integral `h₁⋯h_d Σ f`.
    pub fn integral(&self) -> f64 {
        chunked_sum(self.grid.execution(), &self.values, |_, v| *v) * self.grid.cell_volume()
    }

    /// Rectangle-rule integral of `g(φ)`.
    pub fn integral_of(&self, g: impl Fn(f64) -> f64 + Send + Sync) -> f64 {
        chunked_sum(self.grid.execution(), &self.values, |_, v| g(*v)) * self.grid.cell_volume()
    }

    /// L² pairing `(f, g) = h₁⋯h_d Σ f g`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        check_grids(&self.grid, &other.grid)?;
        Ok(chunked_sum2(self.grid.execution(), &self.values, &other.values, |_, a, b| a * b) * self.grid.cell_volume())
    }

    pub fn norm(&self) -> f64 {
        self.integral_of(|v| v * v).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Copy with a dealiasing rule applied to the spectrum.
    pub fn dealiased(&self, rule: Dealias) -> ScalarField {
        if rule == Dealias::None {
            return self.clone();
        }
        let mut s = self.spectrum().clone();
        s.dealias(rule);
        s.to_field()
    }
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first =
            components.first().ok_or_else(|| Error::InvalidGrid("vector field needs at least one component".into()))?;
        for c in &components[1..] {
            check_grids(first.grid(), c.grid())?;
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        VectorField { components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    /// `Σ_i (u_i, v_i)`.
    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        self.components.iter().zip(&other.components).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c.integral_of(|v| v * v)).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        VectorField { components: self.components.iter().map(|c| c.scaled(s)).collect() }
    }

    pub fn combination(terms: &[(f64, &VectorField)]) -> VectorField {
        let dim = terms[0].1.components.len();
        let components = (0..dim)
            .map(|i| {
                let parts: Vec<(f64, &ScalarField)> = terms.iter().map(|(w, v)| (*w, &v.components[i])).collect();
                ScalarField::combination(&parts)
            })
            .collect();
        VectorField { components }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> Arc<PeriodicGrid> {
        PeriodicGrid::new(1, &[2.0], &[n]).unwrap()
    }

    #[test]
    fn constant_field_concentrates_at_zero_mode() {
        let g = PeriodicGrid::new(2, &[2.0, 2.0], &[16, 16]).unwrap();
        let f = ScalarField::constant(&g, 3.5);
        let s = f.spectrum();
        assert!((s.coeffs()[0].re - 3.5 * 256.0).abs() < 1e-10);
        for z in &s.coeffs()[1..] {
            assert!(z.norm() <= 1e-13);
        }
    }

    #[test]
    fn pure_harmonic_has_two_modes() {
        let g = grid1(32);
        let f = ScalarField::from_fn(&g, |x| (PI * x[0]).sin());
        let s = f.spectrum();
        for (j, z) in s.coeffs().iter().enumerate() {
            if j == 1 || j == 31 {
                assert!((z.norm() - 16.0).abs() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12, "mode {j}: {z}");
            }
        }
    }

    #[test]
    fn inner_products_on_square() {
        let g = PeriodicGrid::new(2, &[2.0, 2.0], &[32, 32]).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        assert!((one.inner(&one).unwrap() - 4.0).abs() < 1e-14);
        let s = ScalarField::from_fn(&g, |x| (PI * x[0]).sin());
        assert!((s.inner(&s).unwrap() - 2.0).abs() < 1e-13);
        assert!((s.spectrum().inner(s.spectrum()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dealias_rules() {
        let g = grid1(12);
        // cos(6πx) on [0,2] with 12 points is the Nyquist mode m = 6.
        let nyq = ScalarField::from_fn(&g, |x| (6.0 * PI * x[0]).cos());
        let cut = nyq.dealiased(Dealias::TwoThirds);
        assert!(cut.max_abs() < 1e-13);
        let same = nyq.dealiased(Dealias::None);
        assert_eq!(same.values(), nyq.values());
        // m = 4 = N/3 survives.
        let keep = ScalarField::from_fn(&g, |x| (4.0 * PI * x[0]).cos());
        let kept = keep.dealiased(Dealias::TwoThirds);
        for (a, b) in kept.values().iter().zip(keep.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = ScalarField::zeros(&grid1(8));
        let b = ScalarField::zeros(&grid1(16));
        assert!(matches!(a.inner(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn values_mut_invalidates_spectrum() {
        let g = grid1(8);
        let mut f = ScalarField::zeros(&g);
        assert_eq!(f.spectrum().coeffs()[0].re, 0.0);
        f.values_mut().iter_mut().for_each(|v| *v = 1.0);
        assert!((f.spectrum().coeffs()[0].re - 8.0).abs() < 1e-14);
    }
}
