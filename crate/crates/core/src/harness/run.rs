use std::path::Path;

use serde::Serialize;

use crate::extractor::{
    extract, orthogonality_report, stability_report, ExtractConfig, ExtractError, ProfileDecomposition,
};
use crate::mterm::{decay_rate, DecayClass, BOUND_RTOL};
use crate::seqspace::{self, CoeffMap, SpaceFamily, SpaceSpec};

use super::output::{num, write_csv, write_text, write_toml};
use super::{HarnessError, Scenario, ScenarioKind, EXIT_FAIL, EXIT_PASS};

/// Command-line overrides of scenario knobs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Knobs {
    pub seed: Option<u64>,
    pub window: Option<usize>,
    pub threshold: Option<f64>,
    pub m_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Named assertions and whether they held.
    pub checks: Vec<(String, bool)>,
    pub notes: Vec<String>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    scenario: &'a str,
    scenario_sha256: &'a str,
    version: &'a str,
    seed: u64,
    knobs: ManifestKnobs,
}

#[derive(Serialize)]
struct ManifestKnobs {
    kind: ScenarioKind,
    x: String,
    y: String,
    dim: usize,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m_grid: Option<Vec<usize>>,
    force: bool,
}

fn manifest_knobs(s: &Scenario) -> ManifestKnobs {
    ManifestKnobs {
        kind: s.file.kind,
        x: s.x.family.to_string(),
        y: s.y.family.to_string(),
        dim: s.dim(),
        n: s.members(),
        m_max: None,
        window: None,
        threshold: None,
        m_grid: None,
        force: s.file.force,
    }
}

fn write_manifest(out: &Path, command: &str, s: &Scenario, seed: u64, knobs: ManifestKnobs) -> Result<(), HarnessError> {
    write_toml(
        &out.join("manifest.toml"),
        &Manifest {
            command,
            scenario: s.name(),
            scenario_sha256: &s.hash,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            knobs,
        },
    )
}

/// Norm of the coefficient file contents `text` in the space `space`
/// (`besov s p a`, `triebel s p a`, `lebesgue q` or `bmo`).
pub fn run_norm(text: &str, space: &str, dim: Option<usize>) -> Result<f64, HarnessError> {
    let c = CoeffMap::from_text(text, dim)?;
    let fam: SpaceFamily = space.parse()?;
    let spec = SpaceSpec::new(fam, c.dim())?;
    Ok(seqspace::norm(&c, &spec)?)
}

/// Powers of two up to the support size, at least `[1, 2]`.
fn default_grid(support: usize) -> Vec<usize> {
    let mut g = vec![1, 2];
    while g[g.len() - 1] * 2 <= support {
        g.push(g[g.len() - 1] * 2);
    }
    g
}

/// Whether `||R_M f||_Y <= M^-sigma ||f||_X` follows from the sequence norms:
/// `X = B_{p,a}` with `a <= p`, `Y = B_{q,b}` with `b >= q >= p`.
fn bound_applies(x: &SpaceSpec, y: &SpaceSpec) -> bool {
    match (x.resolved(), y.resolved()) {
        (SpaceFamily::Besov { p, a, .. }, SpaceFamily::Besov { p: q, a: b, .. }) => a <= p && b >= q && q >= p,
        _ => false,
    }
}

/// Best M-term errors of the scenario target over `M_grid`, with the
/// `M^-sigma ||f||_X` envelope and the fitted rate.
pub fn run_mterm(s: &Scenario, out: &Path, knobs: &Knobs) -> Result<RunOutcome, HarnessError> {
    let seed = knobs.seed.unwrap_or(s.file.seed);
    let f = s.target(seed)?;
    let grid = s.file.m_grid.clone().unwrap_or_else(|| default_grid(f.len()));
    let fit = decay_rate(&f, &s.y, &grid)?;
    let x_norm = seqspace::norm(&f, &s.x)?;
    let sigma = (s.x.smoothness() - s.y.smoothness()) / s.dim() as f64;
    let asserted = bound_applies(&s.x, &s.y);

    let mut rows = Vec::new();
    let mut within = true;
    for &(m, err) in &fit.points {
        let bound = (m as f64).powf(-sigma) * x_norm;
        within &= err <= bound * (1.0 + BOUND_RTOL);
        rows.push(vec![m.to_string(), num(err), num(bound)]);
    }
    write_csv(&out.join("mterm.csv"), &["M", "error", "bound"], &rows)?;
    let class = match fit.class {
        DecayClass::Polynomial => "polynomial",
        DecayClass::Superpolynomial => "superpolynomial",
        DecayClass::Stalled => "stalled",
        DecayClass::Undefined => "undefined",
    };
    let fit_rows = vec![
        vec!["sigma_hat".into(), fit.sigma_hat.map_or("none".into(), num)],
        vec!["class".into(), class.into()],
        vec!["dropped_first".into(), fit.dropped_first.to_string()],
        vec!["sigma".into(), num(sigma)],
        vec!["x_norm".into(), num(x_norm)],
        vec!["bound_asserted".into(), asserted.to_string()],
        vec!["bound_holds".into(), within.to_string()],
    ];
    write_csv(&out.join("mterm_fit.csv"), &["key", "value"], &fit_rows)?;

    let mut mk = manifest_knobs(s);
    mk.m_grid = Some(grid);
    write_manifest(out, "mterm", s, seed, mk)?;

    let mut checks = Vec::new();
    if asserted {
        checks.push(("mterm_bound".to_string(), within));
    }
    Ok(RunOutcome {
        checks,
        notes: vec![format!("sigma_hat = {} ({class})", fit.sigma_hat.map_or("none".into(), num))],
    })
}

fn sorted_texts(maps: &[&CoeffMap]) -> Vec<String> {
    let mut v: Vec<String> = maps.iter().map(|m| m.to_text()).collect();
    v.sort();
    v
}

/// Runs the extractor on the scenario sequence and writes the decomposition.
pub fn run_extract(s: &Scenario, out: &Path, knobs: &Knobs) -> Result<RunOutcome, HarnessError> {
    let seed = knobs.seed.unwrap_or(s.file.seed);
    let built = s.build_sequence(seed)?;
    let seq = &built.sequence;
    let m_max = knobs.m_max.or(s.file.m_max).unwrap_or_else(|| s.default_m_max(&built));
    let cfg = ExtractConfig {
        m_max,
        window: knobs.window.or(s.file.window),
        threshold: knobs.threshold.or(s.file.threshold),
    };
    let dec = extract(seq, &cfg)?;
    let n = seq.len();
    let l_total = dec.profile_count();
    let mut checks = Vec::new();
    let mut notes = built.warnings.clone();

    let recon = dec.profile_sum(n, l_total)?.add(&dec.remainder(seq, n, l_total)?)? == *seq.member(n);
    checks.push(("reconstruction".to_string(), recon));

    let orth = orthogonality_report(&dec, None)?;
    checks.push(("orthogonality".to_string(), orth.pass()));

    let stability = match stability_report(&dec, &s.x) {
        Ok(r) => {
            if let Some(p) = r.pass {
                checks.push(("stability".to_string(), p));
            }
            Some(r)
        }
        Err(ExtractError::UnsupportedSpace(msg)) => {
            notes.push(format!("stability not evaluated: {msg}"));
            None
        }
        Err(e) => return Err(e.into()),
    };

    let mut truth_coherent = 0;
    if let Some(t) = &built.truth {
        truth_coherent = t.coherent_pairs.len();
        if s.file.kind == ScenarioKind::Profiles && !s.file.force {
            let got: Vec<&CoeffMap> = dec.profiles.iter().map(|p| &p.relative_coeffs).collect();
            let want: Vec<&CoeffMap> = t.profiles.iter().collect();
            checks.push(("truth_recovered".to_string(), sorted_texts(&got) == sorted_texts(&want)));
        }
        if truth_coherent > 0 {
            notes.push(format!("fixture forced with {truth_coherent} coherent trajectory pairs"));
        }
    }
    if dec.remainder_stalled {
        notes.push("remainder does not vanish: non-compactness flag raised".into());
    }

    write_decomposition(out, &dec, s.dim())?;
    if let Some(r) = &stability {
        let norms: Vec<String> = r.profile_norms.iter().map(|&v| num(v)).collect();
        let text = format!(
            "tau = {}\nprofile_norms = {}\nlhs = {}\nk_bound = {}\nratio = {}\nasserted = {}\npass = {}\n",
            num(r.tau),
            norms.join(" "),
            num(r.lhs),
            num(r.k_bound),
            num(r.ratio),
            r.asserted,
            r.pass.map_or("n/a".to_string(), |p| p.to_string()),
        );
        write_text(&out.join("stability.txt"), &text)?;
    }
    let orth_rows: Vec<Vec<String>> = orth
        .matrix
        .iter()
        .enumerate()
        .flat_map(|(l, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(l2, v)| v.as_ref().map(|v| vec![(l + 1).to_string(), (l2 + 1).to_string(), v.label()]))
        })
        .collect();
    write_csv(&out.join("orthogonality.csv"), &["l", "l2", "verdict"], &orth_rows)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        profiles: usize,
        m_max: usize,
        window: usize,
        threshold: f64,
        k_bound: f64,
        dropped_x_norm: f64,
        remainder_final: f64,
        remainder_stalled: bool,
        truth_coherent_pairs: usize,
        checks: std::collections::BTreeMap<&'a str, bool>,
    }
    write_toml(
        &out.join("summary.toml"),
        &Summary {
            profiles: l_total,
            m_max,
            window: dec.config.window,
            threshold: dec.config.threshold,
            k_bound: dec.k_bound,
            dropped_x_norm: dec.dropped_x_norm,
            remainder_final: dec.remainder_norm(n, l_total).unwrap_or(f64::NAN),
            remainder_stalled: dec.remainder_stalled,
            truth_coherent_pairs: truth_coherent,
            checks: checks.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
        },
    )?;

    let mut mk = manifest_knobs(s);
    mk.m_max = Some(m_max);
    mk.window = Some(dec.config.window);
    mk.threshold = Some(dec.config.threshold);
    write_manifest(out, "extract", s, seed, mk)?;
    Ok(RunOutcome { checks, notes })
}

fn write_decomposition(out: &Path, dec: &ProfileDecomposition, dim: usize) -> Result<(), HarnessError> {
    for (l, p) in dec.profiles.iter().enumerate() {
        write_text(&out.join("profiles").join(format!("profile_{}.coeffs", l + 1)), &p.relative_coeffs.to_text())?;
    }
    let mut header = vec!["l".to_string(), "n".to_string(), "j".to_string()];
    header.extend((1..=dim).map(|i| format!("k{i}")));
    header.push("e".into());
    let mut rows = Vec::new();
    for (l, p) in dec.profiles.iter().enumerate() {
        for (i, a) in p.anchor_trajectory.iter().enumerate() {
            if let Some(a) = a {
                let mut r = vec![(l + 1).to_string(), (i + 1).to_string(), a.j().to_string()];
                r.extend(a.k().iter().map(|k| k.to_string()));
                r.push(a.e().to_string());
                rows.push(r);
            }
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&out.join("trajectories.csv"), &header, &rows)?;

    let groups: Vec<Vec<String>> = dec
        .profiles
        .iter()
        .enumerate()
        .flat_map(|(l, p)| {
            p.components.iter().map(move |c| {
                vec![
                    c.rank.to_string(),
                    (l + 1).to_string(),
                    c.relative.to_string(),
                    num(c.value),
                    num(dec.tail_variation[c.rank - 1]),
                ]
            })
        })
        .collect();
    let mut groups = groups;
    groups.sort_by_key(|r| r[0].parse::<usize>().unwrap_or(0));
    write_csv(&out.join("groups.csv"), &["m", "profile", "relative", "value", "tail_variation"], &groups)?;

    let rem: Vec<Vec<String>> = dec
        .remainder_norms
        .iter()
        .map(|r| vec![r.n.to_string(), r.l.to_string(), num(r.y_norm)])
        .collect();
    write_csv(&out.join("remainders.csv"), &["n", "L", "y_norm"], &rem)
}
