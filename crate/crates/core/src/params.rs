//! Tuning parameters of the clustering procedure and their practical defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(k, k*, β)` plus an optional known number of groups.
///
/// `k` fixes the pooled threshold rank, `k_star` the self-scaling rank and
/// `beta` the per-column statistic rank `⌊β·k⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub k: usize,
    pub k_star: usize,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub known_g: Option<usize>,
}

impl ClusterParams {
    pub fn new(k: usize, k_star: usize, beta: f64) -> Result<Self> {
        let params = Self {
            k,
            k_star,
            beta,
            known_g: None,
        };
        params.check_intrinsic()?;
        Ok(params)
    }

    pub fn with_known_g(mut self, g: usize) -> Self {
        self.known_g = Some(g);
        self
    }

    pub fn without_known_g(mut self) -> Self {
        self.known_g = None;
        self
    }

    /// `⌊β·k⌋`, floored on the real product.
    pub fn beta_k(&self) -> usize {
        (self.beta * self.k as f64).floor() as usize
    }

    fn check_intrinsic(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "beta = {} must lie in (0, 1)",
                self.beta
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if self.beta_k() < 1 {
            return Err(Error::InvalidParams(format!(
                "floor(beta * k) = floor({} * {}) must be at least 1",
                self.beta, self.k
            )));
        }
        if self.k >= self.k_star {
            return Err(Error::InvalidParams(format!(
                "k = {} must be smaller than k_star = {}",
                self.k, self.k_star
            )));
        }
        if self.known_g == Some(0) {
            return Err(Error::InvalidParams("known g must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks every invariant against a dataset of `n` rows and `p` columns.
    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        self.check_intrinsic()?;
        if self.k_star > n.saturating_sub(1) {
            return Err(Error::InvalidParams(format!(
                "k_star = {} must be at most n - 1 = {}",
                self.k_star,
                n.saturating_sub(1)
            )));
        }
        if let Some(g) = self.known_g {
            if g > p {
                return Err(Error::InvalidParams(format!(
                    "known g = {g} exceeds the number of columns p = {p}"
                )));
            }
        }
        Ok(())
    }
}

/// `⌊3·(ln p)^1.05⌋`, at least 1.
pub fn default_k(p: usize) -> usize {
    let k = (3.0 * (p as f64).ln().powf(1.05)).floor();
    if k.is_nan() || k < 1.0 {
        1
    } else {
        k as usize
    }
}

/// `⌊n0^0.98⌋`.
pub fn default_k_star(n0: usize) -> usize {
    (n0 as f64).powf(0.98).floor() as usize
}

/// `min(2·(k/k*)·p + 0.5, 0.9)`.
pub fn default_beta(k: usize, k_star: usize, p: usize) -> f64 {
    (2.0 * (k as f64 / k_star as f64) * p as f64 + 0.5).min(0.9)
}

/// Practical defaults for `p` columns whose sparsest column holds `n0`
/// positive observations. Logarithms are natural.
pub fn default_params(p: usize, n0: usize) -> Result<ClusterParams> {
    if p < 2 {
        return Err(Error::InvalidParams(format!(
            "default parameters need p >= 2, got {p}"
        )));
    }
    if n0 < 4 {
        return Err(Error::InvalidParams(format!(
            "default parameters need n0 >= 4, got {n0}"
        )));
    }
    let k = default_k(p);
    let k_star = default_k_star(n0);
    ClusterParams::new(k, k_star, default_beta(k, k_star, p))
}
