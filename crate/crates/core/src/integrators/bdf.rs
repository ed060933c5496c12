use crate::error::{Error, Result};

/// Coefficients of the IMEX BDFk discretisation
/// `(α φ^{n+1} − Σ A_i φ^{n−i}) / Δt` with explicit extrapolation
/// `φ̂^{n+1} = Σ ŵ_i φ^{n−i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BdfTable {
    pub k: usize,
    pub alpha: f64,
    /// History weights, newest first.
    pub a: Vec<f64>,
    /// Extrapolation weights, newest first.
    pub hat: Vec<f64>,
}

impl BdfTable {
    pub fn new(k: usize) -> Result<Self> {
        let (alpha, a, hat) = match k {
            1 => (1.0, vec![1.0], vec![1.0]),
            2 => (1.5, vec![2.0, -0.5], vec![2.0, -1.0]),
            3 => (11.0 / 6.0, vec![3.0, -1.5, 1.0 / 3.0], vec![3.0, -3.0, 1.0]),
            4 => (25.0 / 12.0, vec![4.0, -3.0, 4.0 / 3.0, -0.25], vec![4.0, -6.0, 4.0, -1.0]),
            _ => return Err(Error::Config(format!("k out of range 1..4 (got {k})"))),
        };
        Ok(BdfTable { k, alpha, a, hat })
    }

    /// `A_k(x)` for scalar history, newest first.
    pub fn a_scalar(&self, hist: &[f64]) -> f64 {
        self.a.iter().zip(hist).map(|(w, x)| w * x).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistency_sums() {
        for k in 1..=4 {
            let t = BdfTable::new(k).unwrap();
            assert!((t.a.iter().sum::<f64>() - t.alpha).abs() < 1e-14, "k={k}");
            assert!((t.hat.iter().sum::<f64>() - 1.0).abs() < 1e-14, "k={k}");
            assert_eq!(t.a.len(), k);
            assert_eq!(t.hat.len(), k);
        }
    }

    #[test]
    fn rejects_order_five() {
        let err = BdfTable::new(5).unwrap_err().to_string();
        assert!(err.contains("k out of range 1..4"));
    }

    // Oracle: apply the difference and extrapolation to t^p for p ≤ k on
    // unit steps and compare with the exact derivative and value at t = 1.
    #[test]
    fn exact_on_polynomials() {
        for k in 1..=4 {
            let t = BdfTable::new(k).unwrap();
            for p in 0..=k as i32 {
                let f = |s: f64| s.powi(p);
                let hist: Vec<f64> = (0..k).map(|i| f(-(i as f64))).collect();
                let deriv = t.alpha * f(1.0) - t.a_scalar(&hist);
                let exact = if p == 0 { 0.0 } else { p as f64 };
                assert!((deriv - exact).abs() < 1e-12, "k={k} p={p}");
                let extrap: f64 = t.hat.iter().zip(&hist).map(|(w, x)| w * x).sum();
                if p < k as i32 {
                    assert!((extrap - f(1.0)).abs() < 1e-12, "k={k} p={p}");
                }
            }
        }
    }
}
