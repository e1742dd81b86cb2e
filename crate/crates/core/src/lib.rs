//! Exact arithmetic for the graded ring of quasimodular forms.
//!
//! The crate is organised bottom-up:
//!
//! - [`arith`]: big rationals, Bernoulli numbers, binomials, p-adic valuations
//!   and bounded trial-division factorization.
//! - [`qexp`]: truncated q-expansions over the rationals and over `Z/p^m`.
//! - [`qmring`]: weight-homogeneous polynomials in `P, Q, R` with the Ramanujan
//!   derivation, the theta operator, Rankin-Cohen brackets and evaluation.
//! - [`padic`]: reduction mod `p^m`, divisibility by powers of `E_{p-1}`,
//!   filtration and the ideal valuation with respect to `(A^p, p)`.
//! - [`cmtaylor`]: CM points, the Chowla-Selberg period, Taylor coefficients
//!   `t_f(tau; n)` and congruence sweeps.
//! - [`ssing`]: the Kaneko-Zagier decomposition of `E_{p-1}`, supersingular
//!   polynomials and a point-counting oracle.

pub mod arith;
pub mod cmtaylor;
mod error;
mod intpoly;
mod linalg;
pub mod padic;
pub mod qexp;
pub mod qmring;
pub mod ssing;

pub use arith::{BigInt, BigRational, FactorList, Valuation};
pub use cmtaylor::{CmPoint, Registry, Report, ReportRow, SweepMode, TaylorChain, TaylorCoeff};

pub use error::{Error, Result};
pub use padic::ModPoly;
pub use qexp::{ModQSeries, QSeries};
pub use qmring::{Kind, Monomial, QmPoly};
pub use ssing::{KzDecomposition, SsPoly};

