//! Potential theory on finite unions of real intervals and the construction of
//! integer polynomials with prescribed root distributions.

pub mod balayage;
pub mod chebyshev;
pub mod construct;
pub mod error;
pub mod interval;
pub mod lattice;
pub(crate) mod linalg;
pub mod measure;
pub mod numeric;
pub mod poly;
pub mod smyth;

pub use error::{Error, Result};
