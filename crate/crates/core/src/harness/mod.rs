//! Scenario files, experiment runners and the property suite behind the CLI.
//!
//! Every run writes plain CSV/text outputs plus a `manifest.toml` (scenario
//! hash, resolved knobs, library version) into its output directory. Nothing
//! time- or host-dependent is written, so equal inputs give equal bytes.

mod output;
mod run;
mod scenario;
mod suite;

use thiserror::Error;

use crate::extractor::ExtractError;
use crate::lattice::LatticeError;
use crate::mterm::MtermError;
use crate::seqspace::SeqError;
use crate::synthesis::SynthError;

pub use run::{run_extract, run_mterm, run_norm, Knobs, RunOutcome};
pub use scenario::{
    law_map, BuiltSequence, GridSpec, LawSpec, NoiseSpec, ProfileSpec, RandomProfile, Scenario, ScenarioFile,
    ScenarioKind,
};
pub use suite::{run_property_suite, run_suite, shipped_scenarios, write_fixtures, LedgerRow};

/// Exit status for a run whose assertions all held.
pub const EXIT_PASS: i32 = 0;
/// Exit status when some assertion failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for unusable input.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Mterm(#[from] MtermError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
