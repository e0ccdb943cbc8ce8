//! qq-systems, Gaudin Bethe Ansatz equations and Miura opers.
//!
//! Everything is generic over a [`Scalar`] backend: [`Rational`] for exact
//! arithmetic or [`Mp`] for complex numbers at configurable precision.

pub mod backlund;
pub mod bethe;
pub mod opermat;
pub mod polyalg;
pub mod qqcore;
pub mod rootsys;

pub use polyalg::{Mp, NumCtx, Poly, Rational, RationalFn, Scalar};
pub use qqcore::{QQInstance, QQSolution, Point};
pub use rootsys::{CartanMatrix, CartanType, Family, Twist, WeylWord};
