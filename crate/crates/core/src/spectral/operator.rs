use std::sync::Arc;

use super::field::{ScalarField, Spectrum};
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

/// Constant-coefficient operator that is diagonal in Fourier space with a real
/// symbol, e.g. `-|k|²` for Δ or `(β - |k|²)²` for `(Δ + β)²`.
#[derive(Clone, Debug)]
pub struct DiagonalOperator {
    grid: Arc<PeriodicGrid>,
    symbol: Arc<[f64]>,
}

impl DiagonalOperator {
    pub fn from_symbol(grid: &Arc<PeriodicGrid>, symbol: Vec<f64>) -> Result<Self> {
        if symbol.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(DiagonalOperator { grid: grid.clone(), symbol: symbol.into() })
    }

    /// Symbol `f(k)` evaluated on every wavevector.
    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        DiagonalOperator { grid: grid.clone(), symbol: grid.symbol_from_fn(f).into() }
    }

    /// `c·I`.
    pub fn scalar(grid: &Arc<PeriodicGrid>, c: f64) -> Self {
        DiagonalOperator { grid: grid.clone(), symbol: vec![c; grid.len()].into() }
    }

    pub fn identity(grid: &Arc<PeriodicGrid>) -> Self {
        Self::scalar(grid, 1.0)
    }

    /// Δ, symbol `-|k|²`.
    pub fn laplacian(grid: &Arc<PeriodicGrid>) -> Self {
        let symbol: Vec<f64> = grid.k_squared().into_iter().map(|k2| -k2).collect();
        DiagonalOperator { grid: grid.clone(), symbol: symbol.into() }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// `c·A`.
    pub fn scaled(&self, c: f64) -> Self {
        let symbol: Vec<f64> = self.symbol.iter().map(|s| c * s).collect();
        DiagonalOperator { grid: self.grid.clone(), symbol: symbol.into() }
    }

    /// `A∘B`; diagonal operators commute so the order is irrelevant.
    pub fn compose(&self, other: &DiagonalOperator) -> Result<Self> {
        self.check(&other.grid)?;
        let symbol: Vec<f64> = self.symbol.iter().zip(other.symbol.iter()).map(|(a, b)| a * b).collect();
        Ok(DiagonalOperator { grid: self.grid.clone(), symbol: symbol.into() })
    }

    /// Smallest symbol value.
    pub fn min_symbol(&self) -> f64 {
        self.symbol.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check(&self, grid: &PeriodicGrid) -> Result<()> {
        if self.grid.same_shape(grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Real-space result of multiplying the field's spectrum by the symbol.
    pub fn apply(&self, field: &ScalarField) -> Result<ScalarField> {
        self.check(field.grid())?;
        Ok(field.spectrum().with_symbol(&self.symbol).to_field())
    }

    pub fn apply_spectrum(&self, s: &Spectrum) -> Result<Spectrum> {
        self.check(s.grid())?;
        Ok(s.with_symbol(&self.symbol))
    }
}

/// The implicit operator `a·I + b·A∘B` of the IMEX schemes.
#[derive(Clone, Debug)]
pub struct ShiftedSystem {
    grid: Arc<PeriodicGrid>,
    inverse: Vec<f64>,
}

impl ShiftedSystem {
    /// Precomputes the inverse symbol, failing on the first mode where
    /// `a + b·A_k·B_k` vanishes relative to its terms.
    pub fn new(a: f64, b: f64, op_a: &DiagonalOperator, op_b: &DiagonalOperator) -> Result<Self> {
        op_a.check(&op_b.grid)?;
        let grid = op_a.grid.clone();
        let mut inverse = Vec::with_capacity(grid.len());
        for (flat, (sa, sb)) in op_a.symbol.iter().zip(op_b.symbol.iter()).enumerate() {
            let prod = b * sa * sb;
            let den = a + prod;
            if !den.is_finite() || den.abs() <= f64::EPSILON * (a.abs() + prod.abs()) || den == 0.0 {
                return Err(Error::SingularSymbol { mode: grid.unflatten(flat), value: den });
            }
            inverse.push(1.0 / den);
        }
        Ok(ShiftedSystem { grid, inverse })
    }

    pub fn inverse_symbol(&self) -> &[f64] {
        &self.inverse
    }

    pub fn solve_spectrum(&self, rhs: &Spectrum) -> Result<Spectrum> {
        if !self.grid.same_shape(rhs.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(rhs.with_symbol(&self.inverse))
    }

    pub fn solve(&self, rhs: &ScalarField) -> Result<ScalarField> {
        Ok(self.solve_spectrum(rhs.spectrum())?.to_field())
    }
}

/// Solves `(a·I + b·A∘B) φ = rhs` mode by mode.
pub fn solve_shifted(
    a: f64,
    b: f64,
    op_a: &DiagonalOperator,
    op_b: &DiagonalOperator,
    rhs: &ScalarField,
) -> Result<ScalarField> {
    ShiftedSystem::new(a, b, op_a, op_b)?.solve(rhs)
}
