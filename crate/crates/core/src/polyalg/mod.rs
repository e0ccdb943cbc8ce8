//! Scalar backends and univariate polynomial algebra.

mod linalg;
mod mp;
mod poly;
mod ratfn;
mod rational;
pub mod roots;
mod scalar;

pub use linalg::{LinalgError, Matrix};
pub use mp::{Mp, NumCtx};
pub use poly::{coprime_check, distinct_roots_check, poly_from_roots, solve_linear_ode, wronskian, Poly, PolyError};
pub use ratfn::RationalFn;
pub use rational::Rational;
pub use scalar::{parse_rational, Literal, LiteralError, Scalar};
