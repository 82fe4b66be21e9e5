//! Transfer-matrix observables of the matrix-product ground states of an
//! anisotropic spin-2 chain, with a brute-force finite-chain oracle.

pub mod error;
pub mod measures;
pub mod mpstate;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod transfer;

pub use error::{Error, Result};
