use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Uniform periodic box in one, two or three dimensions.
///
/// Samples sit at `x_a = i_a * h_a`, `i_a = 0..N_a`, stored row-major with the
/// last axis contiguous. Wavenumbers follow the FFT ordering
/// `m = 0, 1, .., N/2, -N/2+1, .., -1`, so the Nyquist entry carries `+N/2`.
#[derive(Clone)]
pub struct PeriodicGrid {
    extents: Vec<f64>,
    modes: Vec<usize>,
    wavenumbers: Vec<Vec<f64>>,
    exec: Execution,
    pub(super) forward: Vec<Arc<dyn Fft<f64>>>,
    pub(super) inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl PeriodicGrid {
    /// Builds a grid after checking `dim ∈ {1,2,3}`, positive extents and even
    /// mode counts of at least 4.
    pub fn new(dim: usize, extents: &[f64], modes: &[usize]) -> Result<Arc<Self>> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if extents.len() != dim || modes.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} extents and modes, got {} and {}",
                extents.len(),
                modes.len()
            )));
        }
        for (axis, (&l, &n)) in extents.iter().zip(modes).enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("axis {axis}: extent {l} must be positive")));
            }
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("axis {axis}: mode count {n} must be even and at least 4")));
            }
        }

        let wavenumbers = extents
            .iter()
            .zip(modes)
            .map(|(&l, &n)| (0..n).map(|j| 2.0 * PI * mode_index(j, n) as f64 / l).collect())
            .collect();

        let mut planner = FftPlanner::new();
        let forward = modes.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = modes.iter().map(|&n| planner.plan_fft_inverse(n)).collect();

        Ok(Arc::new(PeriodicGrid {
            extents: extents.to_vec(),
            modes: modes.to_vec(),
            wavenumbers,
            exec: Execution::default(),
            forward,
            inverse,
        }))
    }

    /// Same grid with a different execution policy.
    pub fn with_execution(&self, exec: Execution) -> Arc<Self> {
        let mut g = self.clone();
        g.exec = exec;
        Arc::new(g)
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Total number of grid points (and of spectral coefficients).
    pub fn len(&self) -> usize {
        self.modes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.modes[axis] as f64
    }

    /// Product of grid spacings, the rectangle-rule cell weight.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.extents.iter().product()
    }

    /// Wavenumber table of one axis in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Wavenumbers used for first derivatives: the Nyquist entry is zeroed so
    /// odd-order derivatives of real fields stay real.
    pub fn derivative_wavenumber(&self, axis: usize, j: usize) -> f64 {
        if j == self.modes[axis] / 2 {
            0.0
        } else {
            self.wavenumbers[axis][j]
        }
    }

    /// Signed integer mode index per axis for a flat index.
    pub fn mode_of(&self, flat: usize) -> Vec<i64> {
        self.unflatten(flat).into_iter().zip(&self.modes).map(|(j, &n)| mode_index(j, n)).collect()
    }

    /// Per-axis array index for a flat (row-major) index.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.modes[a];
            flat /= self.modes[a];
        }
        idx
    }

    /// Physical coordinates of a flat grid index.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat).into_iter().enumerate().map(|(a, i)| i as f64 * self.spacing(a)).collect()
    }

    /// Evaluates `f(k)` on the wavevector of every spectral mode.
    pub fn symbol_from_fn(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut k = vec![0.0; self.dim()];
        (0..self.len())
            .map(|flat| {
                for (a, j) in self.unflatten(flat).into_iter().enumerate() {
                    k[a] = self.wavenumbers[a][j];
                }
                f(&k)
            })
            .collect()
    }

    /// |k|² for every spectral mode.
    pub fn k_squared(&self) -> Vec<f64> {
        self.symbol_from_fn(|k| k.iter().map(|v| v * v).sum())
    }

    /// Same extents and mode counts.
    pub fn same_shape(&self, other: &PeriodicGrid) -> bool {
        std::ptr::eq(self, other) || (self.modes == other.modes && self.extents == other.extents)
    }
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("extents", &self.extents)
            .field("modes", &self.modes)
            .field("exec", &self.exec)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other)
    }
}

/// Signed mode number of FFT slot `j` on an `n`-point axis (Nyquist is `+n/2`).
pub(crate) fn mode_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_wavenumbers_follow_fft_order() {
        let g = PeriodicGrid::new(1, &[2.0], &[4]).unwrap();
        let expect = [0.0, PI, 2.0 * PI, -PI];
        for (k, e) in g.wavenumbers(0).iter().zip(expect) {
            assert!((k - e).abs() < 1e-15, "{k} vs {e}");
        }
        assert_eq!(g.derivative_wavenumber(0, 2), 0.0);
    }

    #[test]
    fn paper_grids_build() {
        let g = PeriodicGrid::new(2, &[2.0, 2.0], &[64, 64]).unwrap();
        assert_eq!(g.len(), 4096);
        let g3 = PeriodicGrid::new(3, &[50.0; 3], &[64; 3]).unwrap();
        assert_eq!(g3.len(), 64 * 64 * 64);
        assert!((g3.spacing(2) - 50.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PeriodicGrid::new(1, &[1.0], &[5]).is_err());
        assert!(PeriodicGrid::new(1, &[1.0], &[2]).is_err());
        assert!(PeriodicGrid::new(1, &[0.0], &[8]).is_err());
        assert!(PeriodicGrid::new(1, &[-1.0], &[8]).is_err());
        assert!(PeriodicGrid::new(4, &[1.0; 4], &[8; 4]).is_err());
        assert!(PeriodicGrid::new(2, &[1.0], &[8, 8]).is_err());
    }

    #[test]
    fn wavenumbers_antisymmetric_except_nyquist() {
        let g = PeriodicGrid::new(1, &[3.0], &[16]).unwrap();
        let k = g.wavenumbers(0);
        for j in 1..16 {
            if j == 8 {
                continue;
            }
            assert_eq!(k[j], -k[16 - j]);
        }
    }

    #[test]
    fn flat_index_round_trip() {
        let g = PeriodicGrid::new(3, &[1.0, 2.0, 3.0], &[4, 6, 8]).unwrap();
        let idx = g.unflatten(4 * 6 * 8 - 1);
        assert_eq!(idx, vec![3, 5, 7]);
        assert_eq!(g.mode_of(1), vec![0, 0, 1]);
    }
}
