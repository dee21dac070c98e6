//! Numerics for the fractional Yamabe bubble on the half space `R^{n+1}_+`.
//!
//! The crate is organised bottom up: [`quad`] and [`specfun`] supply
//! quadrature rules and special functions, [`bubble`] evaluates the
//! standard bubble and its weighted-harmonic extension, [`moments`] reduces
//! the bubble integrals to one-dimensional Fourier-Bessel moments,
//! [`pohozaev`] hosts the Pohozaev functional and the sign coefficient,
//! [`solver`] discretises the weighted operator on axisymmetric grids and
//! [`geometry`] handles Fermi-coordinate metric expansions and the eikonal
//! characteristics.

pub mod bubble;
pub mod error;
pub mod geometry;
pub mod moments;
pub mod pohozaev;
pub mod quad;
pub mod solver;
pub mod specfun;
pub mod tensor;

pub use error::{Error, Result};
pub use specfun::{Constants, ProblemIndex};
