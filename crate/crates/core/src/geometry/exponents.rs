use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents `(n, p, q)` together with the derived `alpha = n(1/p - 1/q)`,
/// `r = (p + q)/2` and `beta = n(1/p - 1/r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub r: f64,
    pub beta: f64,
}

impl ExponentSet {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidExponents("dimension must be positive".into()));
        }
        if !(p.is_finite() && q.is_finite() && 1.0 < p && p < q) {
            return Err(Error::InvalidExponents(format!("need 1 < p < q < inf, got p = {p}, q = {q}")));
        }
        let nf = n as f64;
        let alpha = nf * (1.0 / p - 1.0 / q);
        let r = 0.5 * (p + q);
        let beta = nf * (1.0 / p - 1.0 / r);
        if !(0.0 < beta && beta < alpha && alpha < nf) {
            return Err(Error::InvalidExponents(format!(
                "derived exponents violate 0 < beta < alpha < n: alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { n, p, q, alpha, r, beta })
    }

    /// Power of the rectangle volume in the integral kernel, `alpha/n - 1`.
    pub fn kernel_exponent(&self) -> f64 {
        self.alpha / self.n as f64 - 1.0
    }

    /// `beta/n - 1`.
    pub fn beta_exponent(&self) -> f64 {
        self.beta / self.n as f64 - 1.0
    }

    /// `r / q`, the power of the maximal function in the pointwise bound.
    pub fn split(&self) -> f64 {
        self.r / self.q
    }

    /// `min(alpha - beta, n/q)`.
    pub fn decay_rate(&self) -> f64 {
        (self.alpha - self.beta).min(self.n as f64 / self.q)
    }
}
