use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric ε-grid, `ε_k = ε_max · r^k` for `k = 0..count`.
///
/// Grids are built in log space so that `exponential(k0, ..)` reproduces
/// `exp(-k)` bit for bit; systems whose metric takes values `exp(-i)` then
/// compare exactly against grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonGrid {
    /// `ε_k = eps_max · ratio^k`.
    Geometric { eps_max: f64, ratio: f64, count: usize },
    /// `ε_k = exp(-(first + k))`.
    Exponential { first: u32, count: usize },
}

impl EpsilonGrid {
    pub fn dyadic(first: i32, count: usize) -> Self {
        EpsilonGrid::Geometric {
            eps_max: 2f64.powi(-first),
            ratio: 0.5,
            count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EpsilonGrid::Geometric { eps_max, ratio, count } => {
                if !(eps_max > 0.0 && eps_max.is_finite()) {
                    return Err(Error::InvalidInput(format!("grid eps_max must be positive, got {eps_max}")));
                }
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "grid ratio must lie in (0, 1) so the grid decreases, got {ratio}"
                    )));
                }
                if count == 0 {
                    return Err(Error::InvalidInput("grid count must be positive".into()));
                }
            }
            EpsilonGrid::Exponential { count, .. } => {
                if count == 0 {
                    return Err(Error::InvalidInput("grid count must be positive".into()));
                }
            }
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            EpsilonGrid::Geometric { eps_max, ratio, count } => {
                (0..count).map(|k| eps_max * ratio.powi(k as i32)).collect()
            }
            EpsilonGrid::Exponential { first, count } => (0..count)
                .map(|k| (-((first as usize + k) as f64)).exp())
                .collect(),
        }
    }
}

/// Index of `epsilon` in a grid, matching up to a relative 1e-12.
pub(crate) fn position(grid: &[f64], epsilon: f64) -> Option<usize> {
    grid.iter()
        .position(|&e| (e - epsilon).abs() <= 1e-12 * e.max(epsilon))
}
