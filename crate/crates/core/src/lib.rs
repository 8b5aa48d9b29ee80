//! Exact computations in the valued field of real Puiseux series: leading-term
//! structures, one-variable cell decompositions, the Jacobian property,
//! t-stratifications and their archimedean counterparts.

pub mod cells;
pub mod archimedean;
pub mod cone;
pub mod config;
pub mod corpus;
pub mod error;
pub mod formula;
pub mod jacobian;
pub mod linalg;
pub mod parse;
pub mod poly;
pub mod qpoly;
pub mod roots;
pub mod rv;
pub mod series;
pub mod tstrat;

pub use error::{Error, Result};
pub use series::{Q, Series, Value};
