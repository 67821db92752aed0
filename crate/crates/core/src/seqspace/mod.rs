//! Coefficient maps and sequence-space norms.
//!
//! The norms here are the sequence-space expressions themselves (equivalence
//! constant 1), computed exactly on finite coefficient data.

mod coeffs;
mod norms;
mod space;
mod triebel;

use thiserror::Error;

use crate::lattice::LatticeError;

pub use coeffs::CoeffMap;
pub use norms::{besov_norm, bmo_norm, norm};
pub use space::{SpaceFamily, SpaceSpec, SCALING_TOL};
pub use triebel::{triebel_integral, triebel_norm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("duplicate index {0}")]
    DuplicateIndex(String),
    #[error("non-finite coefficient at {0}")]
    NonFinite(String),
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("line {line}: cannot parse `{msg}`")]
    Parse { line: usize, msg: String },
    #[error("empty coefficient file needs an explicit dimension")]
    UnknownDimension,
}
