//! Laguerre needlet frames on the positive orthant `R_+^d`.
//!
//! The crate is organised bottom-up:
//!
//! * [`special_fn`]: Laguerre polynomials, the `F`/`L`/`M` function families and
//!   the degree-`m` projection kernels.
//! * [`quadrature`]: Gauss-Laguerre rules, Christoffel functions and the
//!   level-`j` tensor cubature grids with their tiles.
//! * [`kernels`]: admissible cut-offs, dual pairs and the localized kernels.
//! * [`needlets`]: needlet systems and the analysis/synthesis operators on
//!   functions represented by Laguerre coefficients.
//! * [`spaces`]: Triebel-Lizorkin and Besov norms, sequence and continuous.

pub mod error;
pub mod io;
pub mod kernels;
pub mod needlets;
pub mod quadrature;
pub mod spaces;
pub mod special_fn;
pub mod summation;

pub use error::{Error, Result};
pub use special_fn::{AlphaVector, LaguerreFamily, MultiIndex};
