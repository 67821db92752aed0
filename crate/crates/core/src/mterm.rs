//! Non-increasing rearrangement, the nonlinear projector `Q_M` and best
//! M-term error measurements.

use itertools::Itertools;
use thiserror::Error;

use crate::lattice::ScaleSpaceIndex;
use crate::numeric::{lp_norm, ls_slope, CompensatedSum};
use crate::seqspace::{self, CoeffMap, SeqError, SpaceSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MtermError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("M grid must be strictly increasing with at least 2 points")]
    BadGrid,
    #[error("exhaustive oracle supports at most {max} entries, got {got}")]
    SupportTooLarge { got: usize, max: usize },
    #[error("need 1 <= p <= q, got p = {p}, q = {q}")]
    BadExponents { p: f64, q: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    /// 1-based rank.
    pub rank: usize,
    pub value: f64,
    pub index: ScaleSpaceIndex,
}

/// Coefficients sorted by non-increasing modulus, ties in lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    entries: Vec<RankedEntry>,
}

impl Rearrangement {
    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry of rank `m` (1-based).
    pub fn rank(&self, m: usize) -> Option<&RankedEntry> {
        m.checked_sub(1).and_then(|i| self.entries.get(i))
    }
}

pub fn rearrange(c: &CoeffMap) -> Rearrangement {
    let mut v: Vec<(&ScaleSpaceIndex, f64)> = c.iter().collect();
    // `c` iterates in lattice order and the sort is stable, so equal moduli
    // keep lattice order.
    v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    Rearrangement {
        entries: v
            .into_iter()
            .enumerate()
            .map(|(i, (ix, value))| RankedEntry {
                rank: i + 1,
                value,
                index: ix.clone(),
            })
            .collect(),
    }
}

/// Chooses the retained set `E_M(f)` of a nonlinear projector.
///
/// Implementations must return exactly `min(M, #supp f)` support indices and
/// be nested: `select(f, M)` is a subset of `select(f, M + 1)`.
pub trait SubsetSelector {
    fn select(&self, c: &CoeffMap, m: usize) -> Vec<ScaleSpaceIndex>;
}

/// The `M` largest moduli, ties broken by lattice order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl SubsetSelector for Greedy {
    fn select(&self, c: &CoeffMap, m: usize) -> Vec<ScaleSpaceIndex> {
        rearrange(c)
            .entries
            .into_iter()
            .take(m)
            .map(|e| e.index)
            .collect()
    }
}

/// `(Q_M f, R_M f)` for the greedy projector.
pub fn project(c: &CoeffMap, m: usize) -> (CoeffMap, CoeffMap) {
    project_with(&Greedy, c, m)
}

pub fn project_with<S: SubsetSelector + ?Sized>(selector: &S, c: &CoeffMap, m: usize) -> (CoeffMap, CoeffMap) {
    let mut keep = selector.select(c, m);
    keep.sort();
    let head = c.filter(|ix, _| keep.binary_search(ix).is_ok());
    let tail = c.filter(|ix, _| keep.binary_search(ix).is_err());
    (head, tail)
}

/// Outcome of `||f - Q_M f||_{l^q} <= M^-(1/p - 1/q) ||f||_{l^p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub m: usize,
    pub tail: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Relative slack allowed for floating-point roundoff in the bound check.
pub const BOUND_RTOL: f64 = 1e-12;

fn bound_value(m: usize, p: f64, q: f64, lp: f64) -> f64 {
    if m == 0 {
        return f64::INFINITY;
    }
    (m as f64).powf(-(1.0 / p - 1.0 / q)) * lp
}

fn check_pq(p: f64, q: f64) -> Result<(), MtermError> {
    if p >= 1.0 && p.is_finite() && q >= p {
        Ok(())
    } else {
        Err(MtermError::BadExponents { p, q })
    }
}

pub fn mterm_error_bound_check(c: &CoeffMap, p: f64, q: f64, m: usize) -> Result<BoundReport, MtermError> {
    check_pq(p, q)?;
    let (_, tail) = project(c, m);
    let tail = lp_norm(tail.values(), q);
    let bound = bound_value(m, p, q, lp_norm(c.values(), p));
    Ok(BoundReport {
        m,
        tail,
        bound,
        pass: tail <= bound * (1.0 + BOUND_RTOL),
    })
}

/// [`mterm_error_bound_check`] for every `M = 0..=#supp`, using suffix sums
/// over the rearrangement instead of rebuilding each tail.
pub fn mterm_bound_sweep(c: &CoeffMap, p: f64, q: f64) -> Result<Vec<BoundReport>, MtermError> {
    check_pq(p, q)?;
    let r = rearrange(c);
    let mods: Vec<f64> = r.entries.iter().map(|e| e.value.abs()).collect();
    let n = mods.len();
    let lp = lp_norm(mods.iter().copied(), p);
    let mut tails = vec![0.0; n + 1];
    if q.is_infinite() {
        for m in 0..n {
            tails[m] = mods[m];
        }
    } else {
        let mut acc = CompensatedSum::new();
        for m in (0..n).rev() {
            acc.add(mods[m].powf(q));
            tails[m] = acc.value().powf(1.0 / q);
        }
    }
    Ok((0..=n)
        .map(|m| {
            let bound = bound_value(m, p, q, lp);
            BoundReport {
                m,
                tail: tails[m],
                bound,
                pass: tails[m] <= bound * (1.0 + BOUND_RTOL),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    /// Log-log errors are consistent with a power law.
    Polynomial,
    /// Local log-log slopes keep steepening (geometric-type tails).
    Superpolynomial,
    /// No measurable decay, `sigma_hat` near zero.
    Stalled,
    /// Fewer than two positive errors: no fit possible.
    Undefined,
}

/// Errors `e(M) = ||R_M f||_Y` over a grid and the fitted log-log rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub points: Vec<(usize, f64)>,
    /// `-slope` of `log e(M)` against `log M`; `None` when undefined.
    pub sigma_hat: Option<f64>,
    pub class: DecayClass,
    /// Whether the smallest grid point was dropped as preasymptotic.
    pub dropped_first: bool,
}

/// `|sigma_hat|` below this is reported as [`DecayClass::Stalled`].
pub const STALL_RATE: f64 = 0.05;

pub fn decay_rate(f: &CoeffMap, y: &SpaceSpec, grid: &[usize]) -> Result<DecayFit, MtermError> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MtermError::BadGrid);
    }
    let r = rearrange(f);
    let error_at = |m: usize| -> Result<f64, MtermError> {
        let mut tail: Vec<(ScaleSpaceIndex, f64)> =
            r.entries.iter().skip(m).map(|e| (e.index.clone(), e.value)).collect();
        tail.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(seqspace::norm(&CoeffMap::from_sorted_unchecked(f.dim(), tail), y)?)
    };
    let points = grid
        .iter()
        .map(|&m| Ok((m, error_at(m)?)))
        .collect::<Result<Vec<_>, MtermError>>()?;

    let e1 = if grid[0] == 1 { points[0].1 } else { error_at(1)? };
    let dropped_first = points[0].1 == e1 && points[0].1 > 0.0 && grid[0] > 1;
    let fit: Vec<(f64, f64)> = points
        .iter()
        .skip(usize::from(dropped_first))
        .filter(|p| p.1 > 0.0 && p.0 > 0)
        .map(|&(m, e)| ((m as f64).ln(), e.ln()))
        .collect();

    let sigma_hat = ls_slope(&fit).map(|s| -s);
    let class = match sigma_hat {
        None => DecayClass::Undefined,
        Some(s) if s.abs() < STALL_RATE => DecayClass::Stalled,
        Some(_) => {
            let local: Vec<f64> = fit
                .windows(2)
                .map(|w| -(w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                .collect();
            let (first, last) = (local[0], local[local.len() - 1]);
            if local.len() >= 2 && last > 2.0 * first.max(0.0) && last > 1.0 {
                DecayClass::Superpolynomial
            } else {
                DecayClass::Polynomial
            }
        }
    };
    Ok(DecayFit {
        points,
        sigma_hat,
        class,
        dropped_first,
    })
}

impl DecayFit {
    /// True when the measured decay is faster than `rate`: either
    /// superpolynomial or a fitted exponent above it.
    pub fn above(&self, rate: f64) -> bool {
        match (self.class, self.sigma_hat) {
            (DecayClass::Superpolynomial, _) => true,
            (_, Some(s)) => s > rate,
            _ => false,
        }
    }
}

/// Largest support handled by [`oracle_best_subset`].
pub const ORACLE_MAX_SUPPORT: usize = 16;

/// Exhaustive best M-term approximation: the `M`-subset whose complement has
/// the smallest `Y` norm. Ties go to the lexicographically least subset (in
/// lattice order of the support).
pub fn oracle_best_subset(
    c: &CoeffMap,
    m: usize,
    y: &SpaceSpec,
) -> Result<(Vec<ScaleSpaceIndex>, f64), MtermError> {
    let n = c.len();
    if n > ORACLE_MAX_SUPPORT {
        return Err(MtermError::SupportTooLarge {
            got: n,
            max: ORACLE_MAX_SUPPORT,
        });
    }
    let entries: Vec<(ScaleSpaceIndex, f64)> = c.iter().map(|(i, v)| (i.clone(), v)).collect();
    let m = m.min(n);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in (0..n).combinations(m) {
        let mut chosen = vec![false; n];
        for &i in &subset {
            chosen[i] = true;
        }
        let rest: Vec<(ScaleSpaceIndex, f64)> = entries
            .iter()
            .zip(&chosen)
            .filter(|(_, &picked)| !picked)
            .map(|(e, _)| e.clone())
            .collect();
        let err = seqspace::norm(&CoeffMap::from_sorted_unchecked(c.dim(), rest), y)?;
        if best.as_ref().map_or(true, |b| err < b.1) {
            best = Some((subset, err));
        }
    }
    let (subset, err) = best.expect("at least one subset");
    Ok((subset.into_iter().map(|i| entries[i].0.clone()).collect(), err))
}
