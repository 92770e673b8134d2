//! Exact finite-difference calculus for generalized polynomial functions on
//! commutative semigroups.

pub mod aichinger;
pub mod canonical;
pub mod census;
pub mod carrier;
pub mod degrees;
pub mod diffcalc;
pub mod error;
pub mod extension;
pub mod funcspace;
pub mod serial;
pub mod verdict;

pub use carrier::{Carrier, CarrierDescriptor, Coords, Element};
pub use error::{Error, Result};
pub use funcspace::{FunctionHandle, PolyExpression, Sign};
pub use verdict::{Strategy, Verdict};
