//! Spectral toolkit for ultradifferentiable function spaces on the positive
//! orthant.
//!
//! Functions on `[0, ∞)^d` are expanded in tensor-product Laguerre functions
//! `l_n(x) = L_n(x) e^{-x/2}`, functions on `ℝ^d` in Hermite functions. On the
//! coefficient side the crate provides:
//!
//! * spectral powers of the Laguerre operator `E` (eigenvalue `|n|`) and of the
//!   Hermite operator `H` (eigenvalue `2|n| + d`), the `η` norm built from
//!   `‖E^N f‖ / (h^N N!^α)`, and its `L^p` variants;
//! * weighted sequence-space norms with power weights `e^{h|n|^{1/(2α)}}` and
//!   flat weights `h^{|n|} n!^{1/(2σ)}`, decay fitting and membership
//!   diagnostics at finite truncation;
//! * the explicit coefficient maps between Laguerre expansions of `f` and even
//!   Hermite expansions of `f(x_1², …, x_d²)`, in both directions.
//!
//! Membership verdicts are diagnostics computed from finitely many
//! coefficients. They never claim more than the truncation can show.

pub mod basis;
pub mod error;
pub mod expansion;
pub mod multiindex;
pub mod operator;
pub mod quadrature;
pub mod seqspace;
pub mod transform;
pub mod verify;

mod numeric;

pub use error::{Error, Result};
pub use expansion::{BasisTag, CoefficientArray, FunctionHandle};
pub use multiindex::MultiIndex;
pub use quadrature::QuadratureRule;
