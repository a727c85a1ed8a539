//! Quantitative recurrence for dynamical systems.
//!
//! Bowen metrics, finite-window shift functions and their growth rates,
//! critical neighbourhoods of periodic points, approximation constants,
//! penetration lengths and empirical closing-property checks, together with
//! three concrete systems: rotations of the torus, the one-sided Bernoulli
//! shift and geodesics in the hyperbolic plane.

pub mod bernoulli;
pub mod complexity;
pub mod dynamics;
pub mod error;
pub mod hyperbolic;
pub mod periodic;
pub mod torus;

pub use error::{Error, Result};
