//! Profile extraction from a finite sequence of coefficient maps.
//!
//! The sequence `u_1..u_N` is rearranged member by member, the rank-`m`
//! coefficient trajectories `n -> lambda(m, n)` are compared against the
//! anchors of the profiles found so far, and each component either joins the
//! first coherent profile or starts a new one. Limits in `n` are replaced by a
//! tail window of the last `W` members; the limit coefficient `d_m` is taken
//! as `d_{m,N}`.

mod coherence;
mod decompose;
mod reports;

use thiserror::Error;

use crate::lattice::LatticeError;
use crate::seqspace::{self, CoeffMap, SeqError, SpaceSpec};

pub use coherence::{coherence_classify, CoherenceVerdict, OrthogonalReason};
pub use decompose::{
    extract, Component, ExtractConfig, Profile, ProfileDecomposition, RemainderRow, ResolvedConfig,
    STALL_RATIO,
};
pub use reports::{
    orthogonality_report, stability_report, OrthogonalityReport, StabilityReport, STABILITY_RTOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("trajectory lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("window {0} is too small (need >= 2)")]
    WindowTooSmall(usize),
    #[error("window {window} exceeds the {members} available members")]
    WindowTooLarge { window: usize, members: usize },
    #[error("sequence has no members")]
    EmptySequence,
    #[error("spaces X = {x} and Y = {y} do not share the scaling exponent")]
    ScalingMismatch { x: String, y: String },
    #[error("M_max = {m_max} exceeds the smallest support in the window ({support})")]
    MmaxTooLarge { m_max: usize, support: usize },
    #[error("two components map to the same index {0}")]
    CoefficientCollision(String),
    #[error("unsupported space for this report: {0}")]
    UnsupportedSpace(String),
}

/// The finite family `n -> u_n` together with its spaces `X` and `Y`.
#[derive(Debug, Clone)]
pub struct FunctionSequence {
    members: Vec<CoeffMap>,
    x: SpaceSpec,
    y: SpaceSpec,
    k_bound: f64,
}

impl FunctionSequence {
    pub fn new(members: Vec<CoeffMap>, x: SpaceSpec, y: SpaceSpec) -> Result<Self, ExtractError> {
        if members.is_empty() {
            return Err(ExtractError::EmptySequence);
        }
        if !x.same_scaling(&y) {
            return Err(ExtractError::ScalingMismatch {
                x: x.to_string(),
                y: y.to_string(),
            });
        }
        for m in &members {
            if m.dim() != x.dim {
                return Err(LatticeError::DimensionMismatch(x.dim, m.dim()).into());
            }
        }
        let mut k_bound: f64 = 0.0;
        for m in &members {
            k_bound = k_bound.max(seqspace::norm(m, &x)?);
        }
        Ok(Self {
            members,
            x,
            y,
            k_bound,
        })
    }

    pub fn members(&self) -> &[CoeffMap] {
        &self.members
    }

    /// Member `u_n`, 1-based.
    pub fn member(&self, n: usize) -> &CoeffMap {
        &self.members[n - 1]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn x(&self) -> &SpaceSpec {
        &self.x
    }

    pub fn y(&self) -> &SpaceSpec {
        &self.y
    }

    /// `K = max_n ||u_n||_X`.
    pub fn k_bound(&self) -> f64 {
        self.k_bound
    }

    pub fn dim(&self) -> usize {
        self.x.dim
    }
}
