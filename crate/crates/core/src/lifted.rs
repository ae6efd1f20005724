//! The lifted regularizer `phi(y) = -alpha log(sum y) + psi(y / sum y)` on the cone over the simplex.
//!
//! A point `y` is split as `(s, x)` with `s = sum y` and `x = y / s`; in a
//! cautious-optimistic step `s = lambda / eta`.

use crate::error::{Error, Result};
use crate::game::{check_distribution, dot};
use crate::regularizer::{neg_log_divergence, Regularizer};

#[derive(Debug, Clone)]
pub struct LiftedRegularizer {
    base: Regularizer,
    alpha: f64,
}

impl LiftedRegularizer {
    pub fn new(base: Regularizer, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { base, alpha })
    }

    pub fn base(&self) -> &Regularizer {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn split(&self, y: &[f64]) -> Result<(f64, Vec<f64>)> {
        if y.len() != self.base.dim() {
            return Err(Error::InvalidInput(format!("y has length {}, expected {}", y.len(), self.base.dim())));
        }
        if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("lifted point must be nonnegative and finite".into()));
        }
        let s: f64 = y.iter().sum();
        if !(s > 0.0) {
            return Err(Error::Domain("lifted point must have positive mass".into()));
        }
        let x: Vec<f64> = y.iter().map(|v| v / s).collect();
        check_distribution(&x, 1e-9).map_err(Error::Domain)?;
        Ok((s, x))
    }

    pub fn value(&self, y: &[f64]) -> Result<f64> {
        let (s, x) = self.split(y)?;
        Ok(-self.alpha * s.ln() + self.base.value(&x)?)
    }

    /// `d_i phi(y) = (-alpha - <grad psi(x), x> + d_i psi(x)) / sum y`.
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (s, x) = self.split(y)?;
        let g = self.base.gradient(&x)?;
        let inner = dot(&g, &x);
        Ok(g.iter().map(|gi| (-self.alpha - inner + gi) / s).collect())
    }

    /// `D_phi(y' || y)` from the definition.
    pub fn bregman(&self, y_new: &[f64], y_ref: &[f64]) -> Result<f64> {
        let diff: Vec<f64> = y_new.iter().zip(y_ref).map(|(a, b)| a - b).collect();
        Ok(self.value(y_new)? - self.value(y_ref)? - dot(&self.gradient(y_ref)?, &diff))
    }

    /// `alpha D_{-log}(s' || s) + (s'/s) D_psi(x' || x) + (1 - s'/s)(psi(x') - psi(x))`.
    pub fn bregman_decomposed(&self, y_new: &[f64], y_ref: &[f64]) -> Result<f64> {
        let (s1, x1) = self.split(y_new)?;
        let (s0, x0) = self.split(y_ref)?;
        let ratio = s1 / s0;
        let dpsi = self.base.bregman(&x1, &x0)?;
        let psi_gap = self.base.value(&x1)? - self.base.value(&x0)?;
        Ok(self.alpha * neg_log_divergence(s1, s0) + ratio * dpsi + (1.0 - ratio) * psi_gap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_finite_differences() {
        let lifted = LiftedRegularizer::new(Regularizer::tsallis(3, 0.5).unwrap(), 9.0).unwrap();
        let y = [0.2, 0.15, 0.25];
        let g = lifted.gradient(&y).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let mut up = y;
            let mut dn = y;
            up[i] += h;
            dn[i] -= h;
            let fd = (lifted.value(&up).unwrap() - lifted.value(&dn).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn decomposition_matches_definition() {
        let lifted = LiftedRegularizer::new(Regularizer::neg_entropy(3), 5.0).unwrap();
        let a = [0.1, 0.3, 0.2];
        let b = [0.05, 0.05, 0.4];
        let direct = lifted.bregman(&a, &b).unwrap();
        let split = lifted.bregman_decomposed(&a, &b).unwrap();
        assert!((direct - split).abs() < 1e-12, "{direct} vs {split}");
    }

    #[test]
    fn rejects_zero_mass() {
        let lifted = LiftedRegularizer::new(Regularizer::neg_entropy(2), 5.0).unwrap();
        assert!(lifted.value(&[0.0, 0.0]).is_err());
        assert!(LiftedRegularizer::new(Regularizer::neg_entropy(2), 0.0).is_err());
    }
}
