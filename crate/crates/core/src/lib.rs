//! Conjugacy invariants, centralizers and double-centralizer exponents for
//! finite linear and classical groups.

pub mod arith;
pub mod central;
pub mod cli;
pub mod error;
pub mod ff;
pub mod forms;
pub mod invariants;
pub mod linalg;
pub mod perm;
pub mod poly;

pub use error::{Error, Result};
pub use ff::{Field, FieldElem};
pub use linalg::Matrix;
pub use poly::Poly;
