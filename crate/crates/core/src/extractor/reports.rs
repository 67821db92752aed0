use crate::lattice::ScaleSpaceIndex;
use crate::numeric::lp_norm;
use crate::seqspace::{self, SpaceFamily, SpaceSpec};

use super::{coherence_classify, CoherenceVerdict, ExtractError, ProfileDecomposition};

/// Pairwise verdicts between profile anchors over a tail window.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub window: usize,
    /// `matrix[l][l2]` for `l != l2`; the diagonal is `None`.
    pub matrix: Vec<Vec<Option<CoherenceVerdict>>>,
    /// Pairs `(l, l2)`, `l < l2`, classified coherent.
    pub violations: Vec<(usize, usize)>,
}

impl OrthogonalityReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

fn anchor_window(dec: &ProfileDecomposition, l: usize, window: usize) -> Result<Vec<ScaleSpaceIndex>, ExtractError> {
    let n = dec.members;
    dec.profiles[l].anchor_trajectory[n - window..]
        .iter()
        .map(|a| a.clone().ok_or(ExtractError::WindowTooLarge { window, members: n }))
        .collect()
}

/// Classifies every ordered pair of profile anchors over the last `window`
/// members (the extraction window when `None`).
pub fn orthogonality_report(
    dec: &ProfileDecomposition,
    window: Option<usize>,
) -> Result<OrthogonalityReport, ExtractError> {
    let window = window.unwrap_or(dec.config.window);
    if window > dec.members {
        return Err(ExtractError::WindowTooLarge {
            window,
            members: dec.members,
        });
    }
    let l_total = dec.profile_count();
    let anchors = (0..l_total)
        .map(|l| anchor_window(dec, l, window))
        .collect::<Result<Vec<_>, _>>()?;
    let mut matrix = vec![vec![None; l_total]; l_total];
    let mut violations = Vec::new();
    for l in 0..l_total {
        for l2 in 0..l_total {
            if l == l2 {
                continue;
            }
            let v = coherence_classify(&anchors[l], &anchors[l2], window, dec.config.threshold)?;
            if l < l2 && v.is_coherent() {
                violations.push((l, l2));
            }
            matrix[l][l2] = Some(v);
        }
    }
    Ok(OrthogonalityReport {
        window,
        matrix,
        violations,
    })
}

pub const STABILITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Outer exponent: `max(p, a)` for Besov, `p` for Triebel-Lizorkin.
    pub tau: f64,
    pub profile_norms: Vec<f64>,
    /// `(sum_l ||phi^l||_X^tau)^(1/tau)`.
    pub lhs: f64,
    pub k_bound: f64,
    pub ratio: f64,
    /// Whether the inequality `lhs <= K` is expected to hold for this `X`.
    pub asserted: bool,
    /// `Some(ratio <= 1 + STABILITY_RTOL)` when asserted.
    pub pass: Option<bool>,
}

/// Compares the profile energy against `K = max_n ||u_n||_X`.
///
/// `x` must be the space the decomposition was extracted with. BMO has no
/// such inequality and is rejected.
pub fn stability_report(dec: &ProfileDecomposition, x: &SpaceSpec) -> Result<StabilityReport, ExtractError> {
    if *x != dec.x {
        return Err(ExtractError::UnsupportedSpace(format!(
            "{x} differs from the extraction space {}",
            dec.x
        )));
    }
    let (tau, asserted) = match x.resolved() {
        SpaceFamily::Besov { p, a, .. } => (p.max(a), true),
        SpaceFamily::TriebelLizorkin { p, a, .. } => (p, a <= p),
        _ => return Err(ExtractError::UnsupportedSpace(x.to_string())),
    };
    let profile_norms = dec
        .profiles
        .iter()
        .map(|p| seqspace::norm(&p.relative_coeffs, x))
        .collect::<Result<Vec<_>, _>>()?;
    let lhs = lp_norm(profile_norms.iter().copied(), tau);
    let ratio = if dec.k_bound > 0.0 {
        lhs / dec.k_bound
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(StabilityReport {
        tau,
        profile_norms,
        lhs,
        k_bound: dec.k_bound,
        ratio,
        asserted,
        pass: asserted.then_some(ratio <= 1.0 + STABILITY_RTOL),
    })
}
