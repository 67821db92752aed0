use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::extractor::FunctionSequence;
use crate::lattice::{orientation_count, ScaleSpaceIndex};
use crate::seqspace::{CoeffMap, SpaceFamily, SpaceSpec};
use crate::synthesis::{
    self, analyze, make_sequence, wrapping_indices, FreshNoise, GridFunction, GridShape, GroundTruth, NoNoise,
    NoiseGenerator, Trajectory, WaveletFamily,
};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// A single coefficient map from a fixed law; as a sequence it is constant.
    Law,
    /// Profiles moving along trajectories, plus optional noise.
    Profiles,
    /// `u_n = sum_{j <= n}` unit entries at `(j, 0)`.
    Pileup,
    /// Dilated samples of a formula, analyzed per member.
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum LawSpec {
    Geometric { ratio: f64, count: usize },
    Power { beta: f64, count: usize },
    Pileup { count: usize },
    List { values: Vec<f64> },
}

/// `j(n) = j[0] + j[1] n`; per axis `k(n) = k0 + kl n + kc kb^n` from
/// `[k0, kl, kc, kb]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub j: [i64; 2],
    pub k: Vec<[i64; 4]>,
    #[serde(default = "one_u16")]
    pub e: u16,
    /// Explicit entries `"j:k1,k2/e value"` relative to the profile origin.
    pub entries: Option<Vec<String>>,
    pub random: Option<RandomProfile>,
}

/// Random profile: a leading entry at the origin and `count - 1` others of
/// modulus in `[0.2, 0.9]` at relative levels `0..=levels` inside the
/// origin cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomProfile {
    pub count: usize,
    pub levels: i64,
    pub lead: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub count: usize,
    pub decay: f64,
    pub levels: [i64; 2],
    pub span: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// `bump` (Gaussian) or `step` (indicator of `[0, width)^d`).
    pub formula: String,
    pub family: String,
    pub j_box: u32,
    pub j_fine: i64,
    pub levels: usize,
    pub center: f64,
    pub width: f64,
}

fn one() -> usize {
    1
}

fn one_u16() -> u16 {
    1
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub kind: ScenarioKind,
    pub x: String,
    pub y: String,
    #[serde(default = "one")]
    pub dim: usize,
    /// Number of members `N`.
    pub n: Option<usize>,
    pub m_max: Option<usize>,
    pub window: Option<usize>,
    pub threshold: Option<f64>,
    pub m_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    /// Build the fixture even if trajectories are coherent.
    #[serde(default)]
    pub force: bool,
    pub law: Option<LawSpec>,
    #[serde(default)]
    pub profile: Vec<ProfileSpec>,
    pub noise: Option<NoiseSpec>,
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub x: SpaceSpec,
    pub y: SpaceSpec,
    /// Hex SHA-256 of the scenario source text.
    pub hash: String,
}

/// A built sequence with whatever ground truth the generator knows.
#[derive(Debug, Clone)]
pub struct BuiltSequence {
    pub sequence: FunctionSequence,
    pub truth: Option<GroundTruth>,
    pub warnings: Vec<String>,
}

fn input(msg: impl Into<String>) -> HarnessError {
    HarnessError::Input(msg.into())
}

fn space(text: &str, dim: usize) -> Result<SpaceSpec, HarnessError> {
    let fam: SpaceFamily = text.parse()?;
    Ok(SpaceSpec::new(fam, dim)?)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| input(format!("scenario: {e}")))?;
        let x = space(&file.x, file.dim)?;
        let y = space(&file.y, file.dim)?;
        if !x.same_scaling(&y) {
            return Err(input(format!(
                "X and Y scaling exponents differ ({} vs {})",
                x.scaling_exponent(),
                y.scaling_exponent()
            )));
        }
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(input(format!("kind `{:?}` needs {what}", file.kind).to_lowercase()))
            }
        };
        match file.kind {
            ScenarioKind::Law => need(file.law.is_some(), "a [law] table")?,
            ScenarioKind::Profiles => need(!file.profile.is_empty(), "[[profile]] tables")?,
            ScenarioKind::Pileup => {}
            ScenarioKind::Grid => need(file.grid.is_some(), "a [grid] table")?,
        }
        let hash = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(Self { file, x, y, hash })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn dim(&self) -> usize {
        self.file.dim
    }

    pub fn members(&self) -> usize {
        self.file.n.unwrap_or(12)
    }

    /// The single function studied by `mterm`: the law itself, or member `N`.
    pub fn target(&self, seed: u64) -> Result<CoeffMap, HarnessError> {
        match (&self.file.kind, &self.file.law) {
            (ScenarioKind::Law, Some(law)) => law_map(law, self.dim()),
            _ => {
                let built = self.build_sequence(seed)?;
                Ok(built.sequence.member(built.sequence.len()).clone())
            }
        }
    }

    /// Default `M_max`: total profile entries for profile fixtures, else the
    /// smallest support among the members.
    pub fn default_m_max(&self, built: &BuiltSequence) -> usize {
        if let Some(t) = &built.truth {
            if self.file.kind == ScenarioKind::Profiles && !self.file.force {
                return t.profiles.iter().map(|p| p.len()).sum();
            }
        }
        built.sequence.members().iter().map(|m| m.len()).min().unwrap_or(0)
    }

    pub fn build_sequence(&self, seed: u64) -> Result<BuiltSequence, HarnessError> {
        let n = self.members();
        if n == 0 {
            return Err(input("n must be >= 1"));
        }
        let (x, y) = (self.x, self.y);
        match self.file.kind {
            ScenarioKind::Law => {
                let f = law_map(self.file.law.as_ref().expect("validated"), self.dim())?;
                Ok(BuiltSequence {
                    sequence: FunctionSequence::new(vec![f; n], x, y)?,
                    truth: None,
                    warnings: Vec::new(),
                })
            }
            ScenarioKind::Pileup => {
                let s = synthesis::pile_up(n, x, y)?;
                Ok(BuiltSequence {
                    sequence: s.sequence,
                    truth: Some(s.truth),
                    warnings: Vec::new(),
                })
            }
            ScenarioKind::Profiles => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut profiles = Vec::new();
                let mut trajectories = Vec::new();
                for (l, spec) in self.file.profile.iter().enumerate() {
                    profiles.push(profile_map(spec, self.dim(), &mut rng).map_err(|e| input(format!("profile {}: {e}", l + 1)))?);
                    trajectories.push(trajectory(spec, self.dim(), n)?);
                }
                let noise: Box<dyn NoiseGenerator> = match &self.file.noise {
                    Some(ns) => Box::new(FreshNoise {
                        count: ns.count,
                        decay: ns.decay,
                        levels: (ns.levels[0], ns.levels[1]),
                        span: ns.span,
                        seed: seed ^ 0x6e6f_6973_65,
                    }),
                    None => Box::new(NoNoise),
                };
                let s = make_sequence(profiles, trajectories, n, noise.as_ref(), x, y, self.file.force)?;
                Ok(BuiltSequence {
                    sequence: s.sequence,
                    truth: Some(s.truth),
                    warnings: Vec::new(),
                })
            }
            ScenarioKind::Grid => self.grid_sequence(),
        }
    }

    fn grid_sequence(&self) -> Result<BuiltSequence, HarnessError> {
        let g = self.file.grid.as_ref().expect("validated");
        let dim = self.dim();
        if dim > 2 {
            return Err(input("grid scenarios support d = 1, 2"));
        }
        let family: WaveletFamily = g.family.parse()?;
        let shape = GridShape::new(dim, g.j_box, g.j_fine)?;
        let r = self.x.scaling_exponent();
        let (c, w) = (g.center, g.width);
        let profile: Box<dyn Fn(&[f64]) -> f64 + Sync> = match g.formula.as_str() {
            "bump" => Box::new(move |y: &[f64]| (-y.iter().map(|t| t * t).sum::<f64>() / (w * w)).exp()),
            "step" => Box::new(move |y: &[f64]| if y.iter().all(|t| (0.0..w).contains(t)) { 1.0 } else { 0.0 }),
            other => return Err(input(format!("unknown grid formula `{other}`"))),
        };
        let mut members = Vec::new();
        let mut warnings = Vec::new();
        for n in 1..=self.members() {
            let s = (n as f64).exp2();
            let amp = (r * n as f64).exp2();
            let grid = GridFunction::from_fn(shape, |p| {
                let y: Vec<f64> = p.iter().map(|t| s * (t - c)).collect();
                amp * profile(&y)
            });
            let a = analyze(&grid, family, g.levels, &self.x)?;
            for ix in wrapping_indices(&a.details, family, shape).iter().take(1) {
                warnings.push(format!("member {n}: support of {ix} wraps around the box"));
            }
            members.push(a.details);
        }
        Ok(BuiltSequence {
            sequence: FunctionSequence::new(members, self.x, self.y)?,
            truth: None,
            warnings,
        })
    }
}

/// Law entries sit at `(0, [m-1, 0, ...])`; the pile-up law at `(m-1, 0)`.
pub fn law_map(law: &LawSpec, dim: usize) -> Result<CoeffMap, HarnessError> {
    let at = |j: i64, k0: i64| {
        let mut k = vec![0i64; dim];
        k[0] = k0;
        ScaleSpaceIndex::new(j, k, 1).expect("valid")
    };
    let entries: Vec<(ScaleSpaceIndex, f64)> = match law {
        LawSpec::Geometric { ratio, count } => {
            if !(0.0 < *ratio && *ratio < 1.0) {
                return Err(input("geometric ratio must lie in (0, 1)"));
            }
            (0..*count).map(|m| (at(0, m as i64), ratio.powi(m as i32))).collect()
        }
        LawSpec::Power { beta, count } => {
            if !(*beta > 0.0) {
                return Err(input("power exponent must be positive"));
            }
            (1..=*count).map(|m| (at(0, m as i64 - 1), (m as f64).powf(-beta))).collect()
        }
        LawSpec::Pileup { count } => (0..*count).map(|m| (at(m as i64, 0), 1.0)).collect(),
        LawSpec::List { values } => values.iter().enumerate().map(|(m, &v)| (at(0, m as i64), v)).collect(),
    };
    Ok(CoeffMap::from_entries(dim, entries)?)
}

fn profile_map(spec: &ProfileSpec, dim: usize, rng: &mut ChaCha8Rng) -> Result<CoeffMap, HarnessError> {
    match (&spec.entries, &spec.random) {
        (Some(list), None) => {
            let mut entries = Vec::new();
            for item in list {
                let (ix, v) = item
                    .trim()
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| input(format!("entry `{item}` needs `index value`")))?;
                let ix: ScaleSpaceIndex = ix.parse()?;
                let v: f64 = v.trim().parse().map_err(|_| input(format!("bad value in `{item}`")))?;
                entries.push((ix, v));
            }
            Ok(CoeffMap::from_entries(dim, entries)?)
        }
        (None, Some(r)) => random_profile(r, dim, spec.e, rng),
        _ => Err(input("give exactly one of `entries` or `random`")),
    }
}

fn random_profile(r: &RandomProfile, dim: usize, e0: u16, rng: &mut ChaCha8Rng) -> Result<CoeffMap, HarnessError> {
    if r.count == 0 || r.levels < 0 || r.levels > 20 {
        return Err(input("random profile needs count >= 1 and 0 <= levels <= 20"));
    }
    if !(r.lead > 0.9) {
        return Err(input("random profile lead must exceed 0.9"));
    }
    let origin = ScaleSpaceIndex::new(0, vec![0i64; dim], e0)?;
    let mut entries = vec![(origin, r.lead)];
    let mut attempts = 0;
    while entries.len() < r.count {
        attempts += 1;
        if attempts > 1000 * r.count {
            return Err(input("random profile: not enough room for distinct entries"));
        }
        let j = rng.gen_range(0..=r.levels);
        let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..1i64 << j)).collect();
        let e = rng.gen_range(1..=orientation_count(dim));
        let ix = ScaleSpaceIndex::new(j, k, e)?;
        let mag: f64 = rng.gen_range(0.2..0.9);
        let v = if rng.gen_bool(0.5) { mag } else { -mag };
        if entries.iter().all(|(i, w)| *i != ix && w.abs() != mag) {
            entries.push((ix, v));
        }
    }
    Ok(CoeffMap::from_entries(dim, entries)?)
}

fn trajectory(spec: &ProfileSpec, dim: usize, n_members: usize) -> Result<Trajectory, HarnessError> {
    if spec.k.len() != dim {
        return Err(input(format!("trajectory has {} position laws for d = {dim}", spec.k.len())));
    }
    let overflow = || input("trajectory leaves the i64 range");
    (1..=n_members as i64)
        .map(|n| {
            let j = spec.j[1].checked_mul(n).and_then(|v| v.checked_add(spec.j[0])).ok_or_else(overflow)?;
            let k = spec
                .k
                .iter()
                .map(|&[k0, kl, kc, kb]| {
                    let pow = kb.checked_pow(n as u32)?;
                    kc.checked_mul(pow)?.checked_add(kl.checked_mul(n)?)?.checked_add(k0)
                })
                .collect::<Option<Vec<i64>>>()
                .ok_or_else(overflow)?;
            Ok(Some(ScaleSpaceIndex::new(j, k, spec.e)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"
name = "t"
kind = "profiles"
x = "besov 0.5 1 1"
y = "besov 0 2 2"
n = 6

[[profile]]
j = [0, 1]
k = [[0, 0, 0, 0]]
entries = ["0:0/1 1.0", "1:1/1 -0.5"]

[[profile]]
j = [0, 0]
k = [[0, 0, 1, 4]]
random = { count = 4, levels = 2, lead = 0.97 }
"#;

    #[test]
    fn parses_and_builds() {
        let s = Scenario::parse(THREE).unwrap();
        assert_eq!(s.hash.len(), 64);
        let b = s.build_sequence(1).unwrap();
        assert_eq!(b.sequence.len(), 6);
        let t = b.truth.unwrap();
        assert_eq!(t.trajectories[1][2], Some(ScaleSpaceIndex::d1(0, 64)));
        assert_eq!(t.profiles[1].len(), 4);
        assert_eq!(s.build_sequence(1).unwrap().sequence.members(), b.sequence.members());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Scenario::parse("name = 1").is_err());
        let bad_scaling = THREE.replace("besov 0 2 2", "besov 0 4 4");
        assert!(Scenario::parse(&bad_scaling).is_err());
        let unknown = format!("{THREE}\nbogus = 3\n");
        assert!(Scenario::parse(&unknown).is_err());
        let no_law = "name='a'\nkind='law'\nx='lebesgue 2'\ny='lebesgue 2'\n";
        assert!(Scenario::parse(no_law).is_err());
    }

    #[test]
    fn laws() {
        let m = law_map(&LawSpec::Power { beta: 1.0, count: 4 }, 1).unwrap();
        assert_eq!(m.values().collect::<Vec<_>>(), vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        let p = law_map(&LawSpec::Pileup { count: 3 }, 1).unwrap();
        assert_eq!(p.indices().map(|i| i.j()).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(law_map(&LawSpec::Geometric { ratio: 1.5, count: 3 }, 1).is_err());
    }
}
