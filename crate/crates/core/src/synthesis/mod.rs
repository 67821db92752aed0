//! Periodic discrete wavelet transforms on dyadic grids, and synthetic
//! sequence generation from prescribed profiles and trajectories.
//!
//! Grids live on the periodic box `[0, 2^J_box)^d` sampled at spacing
//! `2^-J_fine`. Samples are read as a fine-level scaling expansion with
//! `c_k = 2^(-d J_fine / 2) g_k`, then run through a tensor-product cascade.
//! Detail coefficients come out `X`-normalized; the coarsest scaling band is
//! kept apart and never enters extraction.

mod grid;
mod sequence;
mod transform;
mod wavelet;

use thiserror::Error;

use crate::extractor::ExtractError;
use crate::lattice::LatticeError;
use crate::seqspace::SeqError;

pub use grid::{GridFunction, GridShape};
pub use sequence::{
    make_sequence, pile_up, FreshNoise, GroundTruth, NoNoise, NoiseGenerator, SyntheticSequence, Trajectory,
};
pub use transform::{analyze, synthesize, wrapping_indices, WaveletAnalysis};
pub use wavelet::WaveletFamily;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("sample count {0} is not a dyadic power for this dimension")]
    NonDyadic(usize),
    #[error("{levels} levels requested but the grid supports at most {max}")]
    LevelOverflow { levels: usize, max: usize },
    #[error("index {0} lies outside the grid range")]
    OutOfRange(String),
    #[error("bad grid shape: {0}")]
    BadShape(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("trajectories {0} and {1} are coherent; pass force to build anyway")]
    CoherentPair(usize, usize),
    #[error("{0}")]
    BadFixture(String),
}
