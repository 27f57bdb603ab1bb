//! Exact linear programming over arbitrary-precision rationals.
//!
//! Problems are stated in bounded-variable form:
//!
//! ```text
//! maximize    c·x
//! subject to  A_eq x  = b_eq
//!             A_le x <= b_le
//!             l <= x <= u        (u may be +inf)
//! ```
//!
//! [`solve`] runs a two-phase primal simplex with Bland's smallest-index rule
//! and native bound handling. [`vertex_enumerate`] is a slow, independent
//! oracle for small instances that shares no pivoting code with the simplex.

mod enumerate;
mod linalg;
mod model;
mod simplex;

pub use enumerate::{vertex_enumerate, EnumerationGuard};
pub use model::{LinearProgram, LpError, LpSolution, LpStatus, Row};
pub use simplex::solve;

/// Exact fraction of arbitrary-precision integers, always in lowest terms.
pub type Rational = num_rational::BigRational;

/// Shorthand for building small rationals in code and tests.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}
