//! Exact decomposition of integer points in the positive semidefinite and
//! second-order cones, with Chvátal-Gomory cuts built from the generators.

pub mod cli;
pub mod cuts;
pub mod error;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod psd;
pub mod soc;

pub use error::{Error, Result};
