//! Wavelet-based profile decomposition for critical embeddings.
//!
//! The crate works entirely at the level of wavelet coefficients:
//!
//! * [`lattice`]: dyadic scale-space indices and their exact arithmetic.
//! * [`seqspace`]: coefficient maps and Besov / Triebel-Lizorkin / BMO
//!   sequence norms, plus the rescaling operator `phi -> phi_lambda`.
//! * [`mterm`]: non-increasing rearrangement, the nonlinear projector `Q_M`
//!   and best M-term error measurements.
//! * [`extractor`]: profile extraction from a finite sequence of functions.
//! * [`synthesis`]: periodic discrete wavelet transforms and fixture builders.
//! * [`harness`]: scenario files, experiment runners and output writers.

pub mod lattice;
pub mod numeric;
pub mod seqspace;
pub mod mterm;
pub mod extractor;
pub mod synthesis;
pub mod harness;
