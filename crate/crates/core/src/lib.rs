//! Cusp geometry of hyperbolic knot and link complements.
// Negated float comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cusps;
pub mod error;
pub mod hmodel;
pub mod horoballs;
pub mod manifold;
pub mod surfaces;
pub mod triangulate;

pub use error::{Error, Result};
pub use manifold::Manifold;
