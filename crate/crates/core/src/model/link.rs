use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Two-way timing link: `n_rounds` exchanges with noise variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub n_rounds: u32,
    pub sigma2: f64,
}

impl LinkModel {
    pub fn new(n_rounds: u32, sigma2: f64) -> Result<Self> {
        if n_rounds == 0 {
            return Err(invalid("n_rounds must be positive"));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(invalid(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(Self { n_rounds, sigma2 })
    }

    /// Link model with unit per-link information (`2N/sigma^2 = 1`).
    pub fn unit() -> Self {
        Self {
            n_rounds: 1,
            sigma2: 2.0,
        }
    }

    /// Fisher information contributed by one link, `2N / sigma^2`.
    pub fn gamma(&self) -> f64 {
        2.0 * self.n_rounds as f64 / self.sigma2
    }
}

impl Default for LinkModel {
    fn default() -> Self {
        Self::unit()
    }
}
