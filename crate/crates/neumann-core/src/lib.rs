//! Least-energy solutions of the Neumann Lane–Emden system
//!
//! ```text
//! -Δu = |v|^{q-1} v,   -Δv = |u|^{p-1} u   in Ω,   ∂_ν u = ∂_ν v = 0 on ∂Ω
//! ```
//!
//! on intervals and balls (radial class), computed through the dual level
//! `D = sup ∫ f K g / (‖f‖_α ‖g‖_β)` and `Λ = 1/D`. Also contains the sign
//! nonlinearity limit `p = 0`, the closed-form radial biharmonic solutions used
//! for the symmetry-breaking energy comparison, and scripted limit studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod dual;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod green;
pub mod grid;
pub mod oracle;
pub mod sign_limit;
pub mod special;

pub use dual::{DualPair, SolutionReport, SolverOptions};
pub use error::{Error, Result};
pub use exponents::{ExponentPair, Region};
pub use grid::{DomainMode, RadialGrid};
