use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a [`QuantileTable`] is read between rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// `F(ε) = F_k` on `(ε_{k+1}, ε_k]`, left-continuous.
    Step,
    /// Linear in log-log coordinates; exact for `c·ε^{-n}`.
    PowerLaw,
}

/// A tabulated non-increasing function `F` of ε.
///
/// Rows are `(ε_k, F_k)` with ε strictly decreasing and F non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    rows: Vec<(f64, f64)>,
    interpolation: Interpolation,
}

impl QuantileTable {
    pub fn new(rows: Vec<(f64, f64)>, interpolation: Interpolation) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("quantile table has no rows".into()));
        }
        for &(e, f) in &rows {
            if !(e > 0.0 && e.is_finite() && f.is_finite() && f > 0.0) {
                return Err(Error::InvalidInput(format!("bad table row ({e}, {f})")));
            }
        }
        for w in rows.windows(2) {
            if w[1].0 >= w[0].0 {
                return Err(Error::InvalidInput("table epsilons must strictly decrease".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidInput("table values must not decrease as epsilon decreases".into()));
            }
        }
        Ok(Self { rows, interpolation })
    }

    pub fn step(rows: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(rows, Interpolation::Step)
    }

    /// Step table sampled from `f` on a decreasing grid.
    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::step(grid.iter().map(|&e| (e, f(e))).collect())
    }

    /// `F(ε) = c·ε^{-n}` sampled on a decreasing grid, read as a power law.
    pub fn power_law(c: f64, n: f64, grid: &[f64]) -> Result<Self> {
        Self::new(
            grid.iter().map(|&e| (e, c * e.powf(-n))).collect(),
            Interpolation::PowerLaw,
        )
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    /// Table of `ε ↦ F(factor·ε)`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows.iter().map(|&(e, f)| (e / factor, f)).collect(),
            interpolation: self.interpolation,
        }
    }

    /// `F(ε)`, clamped to the first and last rows outside the table range.
    pub fn eval(&self, eps: f64) -> f64 {
        let (e0, f0) = self.rows[0];
        let (el, fl) = *self.rows.last().unwrap();
        if eps >= e0 {
            return f0;
        }
        if eps <= el {
            return fl;
        }
        // rows[k+1].0 < eps <= rows[k].0
        let k = self.rows.partition_point(|&(e, _)| e >= eps) - 1;
        let (ek, fk) = self.rows[k];
        let (ek1, fk1) = self.rows[k + 1];
        match self.interpolation {
            Interpolation::Step => fk,
            Interpolation::PowerLaw => {
                let t = (eps.ln() - ek.ln()) / (ek1.ln() - ek.ln());
                (fk.ln() + t * (fk1.ln() - fk.ln())).exp()
            }
        }
    }

    fn check_range(&self, s: f64) -> Result<()> {
        let min = self.rows[0].1;
        let max = self.rows.last().unwrap().1;
        if s < min || s >= max {
            return Err(Error::OutOfRange { value: s, min, max });
        }
        Ok(())
    }

    /// `F←(s) = sup{ε : F(ε) > s}`.
    pub fn quantile_left(&self, s: f64) -> Result<f64> {
        self.check_range(s)?;
        Ok(match self.interpolation {
            Interpolation::Step => self.first_above(s).0,
            Interpolation::PowerLaw => self.power_law_inverse(s),
        })
    }

    /// `F→(s) = inf{ε : F(ε) <= s}`.
    pub fn quantile_right(&self, s: f64) -> Result<f64> {
        self.check_range(s)?;
        // For non-increasing F the sets {F > s} and {F <= s} are complementary
        // intervals, so both quantiles are their common endpoint.
        Ok(match self.interpolation {
            Interpolation::Step => self.first_above(s).0,
            Interpolation::PowerLaw => self.power_law_inverse(s),
        })
    }

    fn first_above(&self, s: f64) -> (f64, f64) {
        *self.rows.iter().find(|&&(_, f)| f > s).expect("range checked")
    }

    fn power_law_inverse(&self, s: f64) -> f64 {
        let k = self.rows.iter().position(|&(_, f)| f > s).expect("range checked");
        let (ek1, fk1) = self.rows[k];
        let (ek, fk) = self.rows[k - 1];
        if fk == s {
            return ek;
        }
        let t = (s.ln() - fk.ln()) / (fk1.ln() - fk.ln());
        (ek.ln() + t * (ek1.ln() - ek.ln())).exp()
    }
}
