//! Tau-functions of the KP hierarchy from almost intertwining matrix
//! triples `(X, Y, Z)` with `rank(XZ - YX) <= 1`.

// Negated float comparisons are how NaN gets rejected; index loops follow
// the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baker;
pub mod eigenflow;
pub mod error;
pub mod io;
pub mod matrix_kernel;
pub mod registry;
pub mod rng;
pub mod suite;
pub mod tau_engine;
pub mod time;
pub mod triples;

pub use error::{Error, Result};
