//! Common two-dimensional block structures of pairs of Hermitian operators
//! and block-wise unambiguous discrimination of two mixed states.

pub mod comparison;
pub mod criteria;
pub mod error;
pub mod jordan;
pub mod operator;
pub mod oracle;
pub mod random;
pub mod reductions;
pub mod usd;

pub use error::{Error, Result};
pub use operator::{CMatrix, CVector, HermitianOperator, Projector, Tolerances};
