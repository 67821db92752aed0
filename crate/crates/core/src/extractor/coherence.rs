use crate::lattice::{self, LatticeError, Offset, ScaleSpaceIndex};

use super::ExtractError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrthogonalReason {
    /// Scale gap reached the threshold or grew strictly over the window.
    ScaleDiverges,
    /// Renormalized position gap reached the threshold or grew strictly.
    PositionDiverges,
    /// Offsets vary without monotone growth.
    NonConstantOffset,
    /// Some offset in the window has a non-integral position part.
    Incompatible,
}

impl OrthogonalReason {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ScaleDiverges => "scale-diverges",
            Self::PositionDiverges => "position-diverges",
            Self::NonConstantOffset => "non-constant-offset",
            Self::Incompatible => "incompatible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoherenceVerdict {
    /// Constant offset `(a, b)` over the window; `orientations` holds the
    /// (constant) orientation tags of the two trajectories.
    Coherent { offset: Offset, orientations: (u16, u16) },
    Orthogonal(OrthogonalReason),
}

impl CoherenceVerdict {
    pub fn is_coherent(&self) -> bool {
        matches!(self, Self::Coherent { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Coherent { offset, .. } => {
                let b: Vec<String> = offset.b.iter().map(|x| x.to_string()).collect();
                format!("coherent(a={};b={})", offset.a, b.join(" "))
            }
            Self::Orthogonal(r) => r.label().to_string(),
        }
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Classifies `traj_a` relative to `traj_b` over the last `window` points.
///
/// Offsets are `offset_between(traj_a(n), traj_b(n))`. A constant integral
/// offset (with constant orientations) is `Coherent`; otherwise the first
/// matching reason among scale divergence, position divergence,
/// incompatibility and plain non-constancy is reported.
pub fn coherence_classify(
    traj_a: &[ScaleSpaceIndex],
    traj_b: &[ScaleSpaceIndex],
    window: usize,
    threshold: f64,
) -> Result<CoherenceVerdict, ExtractError> {
    if traj_a.len() != traj_b.len() {
        return Err(ExtractError::LengthMismatch(traj_a.len(), traj_b.len()));
    }
    let n = traj_a.len();
    if window < 2 {
        return Err(ExtractError::WindowTooSmall(window));
    }
    if window > n {
        return Err(ExtractError::WindowTooLarge { window, members: n });
    }
    let a_win = &traj_a[n - window..];
    let b_win = &traj_b[n - window..];

    let mut offsets = Vec::with_capacity(window);
    let mut incompatible = false;
    for (x, y) in a_win.iter().zip(b_win) {
        match lattice::offset_between(x, y) {
            Ok(o) => offsets.push(Some(o)),
            Err(LatticeError::Incompatible) => {
                incompatible = true;
                offsets.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let same_e = |t: &[ScaleSpaceIndex]| t.iter().all(|x| x.e() == t[0].e());
    if !incompatible && same_e(a_win) && same_e(b_win) {
        let first = offsets[0].as_ref().expect("compatible");
        if offsets.iter().all(|o| o.as_ref() == Some(first)) {
            return Ok(CoherenceVerdict::Coherent {
                offset: first.clone(),
                orientations: (a_win[0].e(), b_win[0].e()),
            });
        }
    }

    let scale_gaps: Vec<f64> = a_win
        .iter()
        .zip(b_win)
        .map(|(x, y)| (x.j() as f64 - y.j() as f64).abs())
        .collect();
    if scale_gaps[window - 1] >= threshold || strictly_increasing(&scale_gaps) {
        return Ok(CoherenceVerdict::Orthogonal(OrthogonalReason::ScaleDiverges));
    }
    let pos_gaps = a_win
        .iter()
        .zip(b_win)
        .map(|(x, y)| lattice::position_gap(x, y))
        .collect::<Result<Vec<f64>, _>>()?;
    if pos_gaps[window - 1] >= threshold || strictly_increasing(&pos_gaps) {
        return Ok(CoherenceVerdict::Orthogonal(OrthogonalReason::PositionDiverges));
    }
    if incompatible {
        return Ok(CoherenceVerdict::Orthogonal(OrthogonalReason::Incompatible));
    }
    Ok(CoherenceVerdict::Orthogonal(OrthogonalReason::NonConstantOffset))
}
