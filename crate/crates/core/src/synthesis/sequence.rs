use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::extractor::{coherence_classify, FunctionSequence};
use crate::lattice::{orientation_count, ScaleSpaceIndex};
use crate::seqspace::{CoeffMap, SpaceSpec};

use super::SynthError;

/// `n -> lambda(n)` for `n = 1..=N`; `None` where the profile is absent.
pub type Trajectory = Vec<Option<ScaleSpaceIndex>>;

/// Per-member noise `epsilon_n`. `occupied` is the profile part of member `n`.
pub trait NoiseGenerator: Sync {
    fn noise(&self, n: usize, occupied: &CoeffMap) -> CoeffMap;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl NoiseGenerator for NoNoise {
    fn noise(&self, _n: usize, occupied: &CoeffMap) -> CoeffMap {
        CoeffMap::empty(occupied.dim())
    }
}

/// `count` entries of total `l^1` mass `decay^n` on random indices not
/// already occupied by the profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreshNoise {
    pub count: usize,
    pub decay: f64,
    /// Inclusive level range.
    pub levels: (i64, i64),
    /// Positions drawn from `[-span, span]` per axis.
    pub span: i64,
    pub seed: u64,
}

impl FreshNoise {
    pub fn mass(&self, n: usize) -> f64 {
        self.decay.powi(n as i32)
    }
}

impl NoiseGenerator for FreshNoise {
    fn noise(&self, n: usize, occupied: &CoeffMap) -> CoeffMap {
        let dim = occupied.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(n as u64);
        let mut picked: Vec<ScaleSpaceIndex> = Vec::with_capacity(self.count);
        let mut attempts = 0;
        while picked.len() < self.count && attempts < 64 * (self.count + 1) {
            attempts += 1;
            let j = rng.gen_range(self.levels.0..=self.levels.1);
            let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-self.span..=self.span)).collect();
            let e = rng.gen_range(1..=orientation_count(dim));
            let ix = ScaleSpaceIndex::new(j, k, e).expect("valid by construction");
            if !occupied.contains_index(&ix) && !picked.contains(&ix) {
                picked.push(ix);
            }
        }
        let weights: Vec<f64> = picked
            .iter()
            .map(|_| {
                let w: f64 = rng.gen_range(0.5..1.0);
                if rng.gen_bool(0.5) {
                    w
                } else {
                    -w
                }
            })
            .collect();
        let total: f64 = weights.iter().map(|w| w.abs()).sum();
        let mass = self.mass(n);
        CoeffMap::from_entries(dim, picked.into_iter().zip(weights.into_iter().map(|w| w / total * mass)))
            .expect("distinct finite entries")
    }
}

/// What a synthetic sequence was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub profiles: Vec<CoeffMap>,
    pub trajectories: Vec<Trajectory>,
    /// The noise term of each member, `n = 1..=N`.
    pub noise: Vec<CoeffMap>,
    /// Trajectory pairs `(l, l2)` that classify as coherent on their common
    /// tail; non-empty only for forced fixtures.
    pub coherent_pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub sequence: FunctionSequence,
    pub truth: GroundTruth,
}

fn common_tail(a: &Trajectory, b: &Trajectory) -> (Vec<ScaleSpaceIndex>, Vec<ScaleSpaceIndex>) {
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    for (x, y) in a.iter().zip(b).rev() {
        match (x, y) {
            (Some(x), Some(y)) => {
                ta.push(x.clone());
                tb.push(y.clone());
            }
            _ => break,
        }
    }
    ta.reverse();
    tb.reverse();
    (ta, tb)
}

/// Builds `u_n = sum_l phi^l_{lambda_l(n)} + epsilon_n` for `n = 1..=N`.
///
/// Trajectory pairs are classified both ways over their whole common tail
/// (divergence by growth only, no threshold); a pair coherent in either
/// direction is refused unless `force`.
pub fn make_sequence(
    profiles: Vec<CoeffMap>,
    trajectories: Vec<Trajectory>,
    n_members: usize,
    noise: &dyn NoiseGenerator,
    x: SpaceSpec,
    y: SpaceSpec,
    force: bool,
) -> Result<SyntheticSequence, SynthError> {
    if profiles.len() != trajectories.len() {
        return Err(SynthError::BadFixture(format!(
            "{} profiles but {} trajectories",
            profiles.len(),
            trajectories.len()
        )));
    }
    if let Some(t) = trajectories.iter().find(|t| t.len() != n_members) {
        return Err(SynthError::BadFixture(format!("trajectory of length {} for N = {n_members}", t.len())));
    }
    if let Some(p) = profiles.iter().find(|p| p.dim() != x.dim) {
        return Err(crate::lattice::LatticeError::DimensionMismatch(x.dim, p.dim()).into());
    }

    let mut coherent_pairs = Vec::new();
    for l in 0..trajectories.len() {
        for l2 in l + 1..trajectories.len() {
            let (a, b) = common_tail(&trajectories[l], &trajectories[l2]);
            if a.len() < 2 {
                continue;
            }
            let w = a.len();
            if coherence_classify(&a, &b, w, f64::INFINITY)?.is_coherent()
                || coherence_classify(&b, &a, w, f64::INFINITY)?.is_coherent()
            {
                if !force {
                    return Err(SynthError::CoherentPair(l, l2));
                }
                coherent_pairs.push((l, l2));
            }
        }
    }

    let built = (1..=n_members)
        .into_par_iter()
        .map(|n| -> Result<(CoeffMap, CoeffMap), SynthError> {
            let mut entries = Vec::new();
            for (p, t) in profiles.iter().zip(&trajectories) {
                if let Some(lam) = &t[n - 1] {
                    entries.extend(p.rescale(lam)?.iter().map(|(i, v)| (i.clone(), v)));
                }
            }
            let occupied = CoeffMap::accumulate(x.dim, entries)?;
            let eps = noise.noise(n, &occupied);
            Ok((occupied.add(&eps)?, eps))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (members, noise): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    let sequence = FunctionSequence::new(members, x, y)?;
    Ok(SyntheticSequence {
        sequence,
        truth: GroundTruth {
            profiles,
            trajectories,
            noise,
            coherent_pairs,
        },
    })
}

/// `u_n = sum_{j=0..n} (unit entry at (j, 0))` for `n = 1..=N`, built as
/// `N + 1` forced, mutually coherent one-entry profiles.
pub fn pile_up(n_members: usize, x: SpaceSpec, y: SpaceSpec) -> Result<SyntheticSequence, SynthError> {
    let dim = x.dim;
    let at = |j: i64| ScaleSpaceIndex::new(j, vec![0i64; dim], 1).expect("valid");
    let unit = CoeffMap::from_entries(dim, [(at(0), 1.0)])?;
    let profiles = vec![unit; n_members + 1];
    let trajectories = (0..=n_members)
        .map(|l| (1..=n_members).map(|n| (l <= n).then(|| at(l as i64))).collect())
        .collect();
    make_sequence(profiles, trajectories, n_members, &NoNoise, x, y, true)
}
