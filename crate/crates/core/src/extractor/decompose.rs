use rayon::prelude::*;

use crate::lattice::{LatticeError, ScaleSpaceIndex};
use crate::mterm::{self, Rearrangement};
use crate::seqspace::{self, CoeffMap, SpaceSpec};

use super::{coherence_classify, CoherenceVerdict, ExtractError, FunctionSequence};

/// Extraction knobs. `window` defaults to `max(3, N/4)` (capped at `N`),
/// `threshold` to `1 +` the largest scale spread of a window member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    pub m_max: usize,
    pub window: Option<usize>,
    pub threshold: Option<f64>,
}

impl ExtractConfig {
    pub fn new(m_max: usize) -> Self {
        Self {
            m_max,
            window: None,
            threshold: None,
        }
    }
}

/// Knob values actually used by a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedConfig {
    pub m_max: usize,
    pub window: usize,
    pub threshold: f64,
}

/// Rank-`m` component `(a, b, e) -> d_m` of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub rank: usize,
    pub relative: ScaleSpaceIndex,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    /// `lambda_l(n)` for `n = 1..=N`; `None` where member `n` has fewer ranks
    /// than the anchor component.
    pub anchor_trajectory: Vec<Option<ScaleSpaceIndex>>,
    /// Components in the order they joined.
    pub components: Vec<Component>,
    /// The profile `phi^l` as a coefficient map anchored at the origin.
    pub relative_coeffs: CoeffMap,
    pub x_norm: f64,
}

impl Profile {
    pub fn anchor(&self, n: usize) -> Option<&ScaleSpaceIndex> {
        self.anchor_trajectory.get(n.wrapping_sub(1)).and_then(|a| a.as_ref())
    }

    /// Ranks `E(l, M)` belonging to this profile among the first `m` ranks.
    pub fn ranks_upto(&self, m: usize) -> Vec<usize> {
        self.components.iter().map(|c| c.rank).filter(|&r| r <= m).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderRow {
    pub n: usize,
    /// Number of profiles subtracted.
    pub l: usize,
    pub y_norm: f64,
}

/// Remainder at `n = N` with all profiles removed counts as stalled when its
/// `Y` norm is at least this fraction of `||u_N||_Y`.
pub const STALL_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileDecomposition {
    pub config: ResolvedConfig,
    pub members: usize,
    pub x: SpaceSpec,
    pub y: SpaceSpec,
    pub k_bound: f64,
    pub profiles: Vec<Profile>,
    /// Profile (0-based) of each rank `m = 1..=M_max`.
    pub assignment: Vec<usize>,
    /// `d_m := d_{m,N}`.
    pub limit_values: Vec<f64>,
    /// `max_{n in window} |d_{m,n} - d_m|`.
    pub tail_variation: Vec<f64>,
    /// Verdicts against each existing profile, per rank, in the order tried.
    pub verdict_history: Vec<Vec<(usize, CoherenceVerdict)>>,
    /// `||r_{n,L}||_Y` for `L = 0..=L(M_max)` and every `n` where all anchors
    /// up to `L` are defined and lattice-compatible.
    pub remainder_norms: Vec<RemainderRow>,
    /// `||R_{M_max} u_N||_X`: mass left out of the profiles.
    pub dropped_x_norm: f64,
    /// Remainder at `N` does not decay relative to `||u_N||_Y`.
    pub remainder_stalled: bool,
}

impl ProfileDecomposition {
    pub fn profile_count(&self) -> usize {
        self.profiles.len()
    }

    /// `L(M)`: profiles touched by the first `m` ranks.
    pub fn profile_count_at(&self, m: usize) -> usize {
        self.assignment[..m.min(self.assignment.len())]
            .iter()
            .map(|&l| l + 1)
            .max()
            .unwrap_or(0)
    }

    /// Partition `E(l, M)` of `{1..M}` as one rank list per profile.
    pub fn groups(&self, m: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.profile_count_at(m)];
        for (i, &l) in self.assignment[..m.min(self.assignment.len())].iter().enumerate() {
            out[l].push(i + 1);
        }
        out
    }

    pub fn window_range(&self) -> std::ops::RangeInclusive<usize> {
        (self.members - self.config.window + 1)..=self.members
    }

    /// `sum_{l <= L} phi^l_{lambda_l(n)}`, accumulated in profile order.
    pub fn profile_sum(&self, n: usize, l_count: usize) -> Result<CoeffMap, ExtractError> {
        let dim = self.x.dim;
        let mut entries = Vec::new();
        for p in self.profiles.iter().take(l_count) {
            let anchor = p.anchor(n).ok_or(ExtractError::WindowTooLarge {
                window: self.members - n + 1,
                members: self.members,
            })?;
            let shifted = p.relative_coeffs.rescale(anchor)?;
            entries.extend(shifted.iter().map(|(i, v)| (i.clone(), v)));
        }
        Ok(CoeffMap::accumulate(dim, entries)?)
    }

    /// `r_{n,L} = u_n - sum_{l <= L} phi^l_{lambda_l(n)}`.
    pub fn remainder(&self, seq: &FunctionSequence, n: usize, l_count: usize) -> Result<CoeffMap, ExtractError> {
        Ok(seq.member(n).sub(&self.profile_sum(n, l_count)?)?)
    }

    pub fn remainder_norm(&self, n: usize, l_count: usize) -> Option<f64> {
        self.remainder_norms
            .iter()
            .find(|r| r.n == n && r.l == l_count)
            .map(|r| r.y_norm)
    }
}

fn scale_spread(c: &CoeffMap) -> i64 {
    let lo = c.indices().map(|i| i.j()).min();
    let hi = c.indices().map(|i| i.j()).max();
    match (lo, hi) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0,
    }
}

/// Runs the extraction on `seq`.
pub fn extract(seq: &FunctionSequence, cfg: &ExtractConfig) -> Result<ProfileDecomposition, ExtractError> {
    let n_members = seq.len();
    let window = cfg.window.unwrap_or_else(|| (n_members / 4).max(3).min(n_members));
    if window < 2 {
        return Err(ExtractError::WindowTooSmall(window));
    }
    if window > n_members {
        return Err(ExtractError::WindowTooLarge {
            window,
            members: n_members,
        });
    }
    let win = n_members - window..n_members;

    let rearranged: Vec<Rearrangement> = seq.members().par_iter().map(mterm::rearrange).collect();
    let support = rearranged[win.clone()].iter().map(|r| r.len()).min().unwrap_or(0);
    if cfg.m_max > support {
        return Err(ExtractError::MmaxTooLarge {
            m_max: cfg.m_max,
            support,
        });
    }
    let spread = seq.members()[win.clone()].iter().map(scale_spread).max().unwrap_or(0);
    let threshold = cfg.threshold.unwrap_or(1.0 + spread as f64);
    let config = ResolvedConfig {
        m_max: cfg.m_max,
        window,
        threshold,
    };

    let last = &rearranged[n_members - 1];
    let mut limit_values = Vec::with_capacity(cfg.m_max);
    let mut tail_variation = Vec::with_capacity(cfg.m_max);
    let mut assignment = Vec::with_capacity(cfg.m_max);
    let mut verdict_history = Vec::with_capacity(cfg.m_max);
    let mut profiles: Vec<Profile> = Vec::new();

    for m in 1..=cfg.m_max {
        let d_m = last.rank(m).expect("checked against support").value;
        let variation = rearranged[win.clone()]
            .iter()
            .map(|r| (r.rank(m).map_or(0.0, |e| e.value) - d_m).abs())
            .fold(0.0, f64::max);
        limit_values.push(d_m);
        tail_variation.push(variation);

        let trajectory: Vec<Option<ScaleSpaceIndex>> =
            rearranged.iter().map(|r| r.rank(m).map(|e| e.index.clone())).collect();
        let traj_win: Vec<ScaleSpaceIndex> =
            trajectory[win.clone()].iter().map(|x| x.clone().expect("defined in window")).collect();

        let mut history = Vec::new();
        let mut joined = None;
        for (l, p) in profiles.iter().enumerate() {
            let anchor_win: Vec<ScaleSpaceIndex> = p.anchor_trajectory[win.clone()]
                .iter()
                .map(|x| x.clone().expect("anchor defined in window"))
                .collect();
            let verdict = coherence_classify(&traj_win, &anchor_win, window, threshold)?;
            let coherent = match &verdict {
                CoherenceVerdict::Coherent { offset, orientations } => Some(offset.to_index(orientations.0)?),
                CoherenceVerdict::Orthogonal(_) => None,
            };
            history.push((l, verdict));
            if let Some(rel) = coherent {
                joined = Some((l, rel));
                break;
            }
        }
        match joined {
            Some((l, relative)) => {
                if profiles[l].components.iter().any(|c| c.relative == relative) {
                    return Err(ExtractError::CoefficientCollision(relative.to_string()));
                }
                profiles[l].components.push(Component {
                    rank: m,
                    relative,
                    value: d_m,
                });
                assignment.push(l);
            }
            None => {
                let e = traj_win[window - 1].e();
                let origin = ScaleSpaceIndex::new(0, vec![0i64; seq.dim()], e)?;
                profiles.push(Profile {
                    anchor_trajectory: trajectory,
                    components: vec![Component {
                        rank: m,
                        relative: origin,
                        value: d_m,
                    }],
                    relative_coeffs: CoeffMap::empty(seq.dim()),
                    x_norm: 0.0,
                });
                assignment.push(profiles.len() - 1);
            }
        }
        verdict_history.push(history);
    }

    for p in &mut profiles {
        p.relative_coeffs = CoeffMap::from_entries(
            seq.dim(),
            p.components.iter().map(|c| (c.relative.clone(), c.value)),
        )?;
        p.x_norm = seqspace::norm(&p.relative_coeffs, seq.x())?;
    }

    let last_member = seq.member(n_members);
    let dropped_x_norm = seqspace::norm(&mterm::project(last_member, cfg.m_max).1, seq.x())?;

    let mut dec = ProfileDecomposition {
        config,
        members: n_members,
        x: *seq.x(),
        y: *seq.y(),
        k_bound: seq.k_bound(),
        profiles,
        assignment,
        limit_values,
        tail_variation,
        verdict_history,
        remainder_norms: Vec::new(),
        dropped_x_norm,
        remainder_stalled: false,
    };

    let l_total = dec.profile_count();
    let cells: Vec<(usize, usize)> = (1..=n_members)
        .flat_map(|n| (0..=l_total).map(move |l| (n, l)))
        .collect();
    let in_window = |n: usize| n > n_members - window;
    let rows = cells
        .par_iter()
        .map(|&(n, l)| -> Result<Option<RemainderRow>, ExtractError> {
            if dec.profiles[..l].iter().any(|p| p.anchor(n).is_none()) {
                return Ok(None);
            }
            match dec.remainder(seq, n, l) {
                Ok(r) => Ok(Some(RemainderRow {
                    n,
                    l,
                    y_norm: seqspace::norm(&r, seq.y())?,
                })),
                Err(ExtractError::Seq(seqspace::SeqError::Lattice(
                    LatticeError::Incompatible | LatticeError::Overflow,
                ))) if !in_window(n) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    dec.remainder_norms = rows.into_iter().flatten().collect();

    let full = dec.remainder_norm(n_members, 0).unwrap_or(0.0);
    let rest = dec.remainder_norm(n_members, l_total).unwrap_or(0.0);
    dec.remainder_stalled = full > 0.0 && rest >= STALL_RATIO * full;
    Ok(dec)
}
