//! Spectral-Galerkin toolkit for polyharmonic Navier problems
//! `(−Δ)^m u = f(x, u)` on `(0, π)^d`, `d ∈ {1, 2}`.
//!
//! Fields are expanded in the sine basis `Π sin(k_i x_i)`, which diagonalizes
//! `(−Δ)^m` under Navier conditions. Nonlinear terms are evaluated on an
//! interior node grid four times finer than the mode count.

#![no_std]

extern crate alloc;

pub mod error;
pub mod functional;
pub mod nonlinearity;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use nonlinearity::{Law, NonlinearitySpec};
pub use spectral::{Field, Grid, Order};
