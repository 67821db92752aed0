use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::extractor::{extract, ExtractConfig};
use crate::lattice::{orientation_count, ScaleSpaceIndex};
use crate::mterm::{self, mterm_bound_sweep, oracle_best_subset};
use crate::numeric::lp_norm;
use crate::seqspace::{self, triebel_integral, CoeffMap, SpaceSpec};
use crate::synthesis::{analyze, GridFunction, GridShape, WaveletFamily};

use super::output::{write_csv, write_text};
use super::run::{run_extract, run_mterm, Knobs, RunOutcome};
use super::{HarnessError, Scenario, ScenarioKind};

/// Scenario files shipped with the crate, as `(file name, contents)`.
pub fn shipped_scenarios() -> Vec<(&'static str, &'static str)> {
    vec![
        ("coherent-forced.toml", include_str!("../../scenarios/coherent-forced.toml")),
        ("constant.toml", include_str!("../../scenarios/constant.toml")),
        ("geometric.toml", include_str!("../../scenarios/geometric.toml")),
        ("pileup.toml", include_str!("../../scenarios/pileup.toml")),
        ("power-law.toml", include_str!("../../scenarios/power-law.toml")),
        ("step-grid.toml", include_str!("../../scenarios/step-grid.toml")),
        ("three-profiles.toml", include_str!("../../scenarios/three-profiles.toml")),
        ("triebel-2d.toml", include_str!("../../scenarios/triebel-2d.toml")),
    ]
}

/// Writes the shipped scenarios to `out/scenarios/` and, for sequence
/// fixtures with stored truth, the members and true profiles under
/// `out/fixtures/<name>/`.
pub fn write_fixtures(out: &Path, seed: Option<u64>) -> Result<(), HarnessError> {
    for (file, text) in shipped_scenarios() {
        write_text(&out.join("scenarios").join(file), text)?;
        let s = Scenario::parse(text)?;
        if !matches!(s.file.kind, ScenarioKind::Profiles | ScenarioKind::Pileup) {
            continue;
        }
        let built = s.build_sequence(seed.unwrap_or(s.file.seed))?;
        let dir = out.join("fixtures").join(s.name());
        for (n, m) in built.sequence.members().iter().enumerate() {
            write_text(&dir.join("members").join(format!("u_{}.coeffs", n + 1)), &m.to_text())?;
        }
        if let Some(t) = &built.truth {
            for (l, p) in t.profiles.iter().enumerate() {
                write_text(&dir.join("truth").join(format!("profile_{}.coeffs", l + 1)), &p.to_text())?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerRow {
    pub property: &'static str,
    pub cases: usize,
    pub failures: usize,
}

impl LedgerRow {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

fn random_map(rng: &mut ChaCha8Rng, dim: usize, max_len: usize, levels: i64, span: i64) -> CoeffMap {
    let len = rng.gen_range(0..=max_len);
    let entries: Vec<(ScaleSpaceIndex, f64)> = (0..len)
        .map(|_| {
            let j = rng.gen_range(0..=levels);
            let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-span..=span)).collect();
            let e = rng.gen_range(1..=orientation_count(dim));
            (ScaleSpaceIndex::new(j, k, e).expect("valid"), rng.gen_range(-1.0..1.0))
        })
        .collect();
    CoeffMap::accumulate(dim, entries).expect("finite")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn split_groups(rng: &mut ChaCha8Rng, c: &CoeffMap, groups: usize) -> Vec<CoeffMap> {
    let labels: Vec<usize> = (0..c.len()).map(|_| rng.gen_range(0..groups)).collect();
    (0..groups)
        .map(|g| {
            let mut i = 0;
            c.filter(|_, _| {
                let keep = labels[i] == g;
                i += 1;
                keep
            })
        })
        .collect()
}

type Case = dyn Fn(&mut ChaCha8Rng) -> Result<bool, HarnessError> + Sync;

fn run_cases(name: &'static str, seed: u64, count: usize, case: &Case) -> Result<LedgerRow, HarnessError> {
    let outcomes = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            case(&mut rng)
        })
        .collect::<Result<Vec<bool>, _>>()?;
    Ok(LedgerRow {
        property: name,
        cases: count,
        failures: outcomes.iter().filter(|ok| !**ok).count(),
    })
}

/// Randomized property checks; `count` cases per property, zero means a
/// vacuous pass.
pub fn run_property_suite(seed: u64, count: usize) -> Result<Vec<LedgerRow>, HarnessError> {
    let mut rows = Vec::new();

    rows.push(run_cases("shift_invariance", seed, count, &|rng| {
        let dim = rng.gen_range(1..=2);
        let c = random_map(rng, dim, 12, 4, 6);
        let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-40..=40)).collect();
        let lam = ScaleSpaceIndex::new(rng.gen_range(-3..=5), k, 1)?;
        let moved = c.rescale(&lam)?;
        let spaces = [
            SpaceSpec::besov(0.3, 2.0, 3.0, dim)?,
            SpaceSpec::triebel(0.1, 3.0, 2.0, dim)?,
            SpaceSpec::bmo(dim)?,
        ];
        for sp in &spaces {
            if !rel_close(seqspace::norm(&c, sp)?, seqspace::norm(&moved, sp)?, 1e-12) {
                return Ok(false);
            }
        }
        Ok(true)
    })?);

    rows.push(run_cases("triebel_superadditivity", seed, count, &|rng| {
        let c = random_map(rng, 1, 24, 5, 8);
        let groups = rng.gen_range(1..=8);
        let parts = split_groups(rng, &c, groups);
        let sum: f64 = parts.iter().map(|p| triebel_integral(p, 4.0, 2.0)).sum();
        let whole = triebel_integral(&c, 4.0, 2.0);
        Ok(sum <= whole * (1.0 + 1e-9) + f64::MIN_POSITIVE)
    })?);

    rows.push(run_cases("besov_stability", seed, count, &|rng| {
        let c = random_map(rng, 1, 24, 5, 8);
        let groups = rng.gen_range(1..=8);
        let parts = split_groups(rng, &c, groups);
        for (p, a) in [(2.0, 4.0), (2.0, f64::INFINITY), (4.0, 2.0)] {
            let sp = SpaceSpec::besov(0.0, p, a, 1)?;
            let norms = parts.iter().map(|g| seqspace::norm(g, &sp)).collect::<Result<Vec<_>, _>>()?;
            if lp_norm(norms, p.max(a)) > seqspace::norm(&c, &sp)? * (1.0 + 1e-9) {
                return Ok(false);
            }
        }
        Ok(true)
    })?);

    rows.push(run_cases("greedy_oracle", seed, count, &|rng| {
        let c = random_map(rng, 1, 10, 3, 3);
        let q = [1.0, 2.0, f64::INFINITY][rng.gen_range(0..3)];
        let y = SpaceSpec::besov(0.0, q, q, 1)?;
        for m in 0..=c.len() {
            let greedy = seqspace::norm(&mterm::project(&c, m).1, &y)?;
            let (_, best) = oracle_best_subset(&c, m, &y)?;
            if (greedy - best).abs() > 1e-12 {
                return Ok(false);
            }
        }
        Ok(true)
    })?);

    rows.push(run_cases("greedy_nested", seed, count, &|rng| {
        let c = random_map(rng, 2, 30, 3, 4);
        let mut prev = CoeffMap::empty(2);
        for m in 0..=c.len() {
            let (head, _) = mterm::project(&c, m);
            if head.len() != m || prev.indices().any(|i| !head.contains_index(i)) {
                return Ok(false);
            }
            prev = head;
        }
        Ok(true)
    })?);

    rows.push(run_cases("mterm_bound", seed, count, &|rng| {
        let c = random_map(rng, 1, 200, 6, 50);
        for p in [1.0, 2.0] {
            for q in [2.0, 4.0, f64::INFINITY] {
                if mterm_bound_sweep(&c, p, q)?.iter().any(|r| !r.pass) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })?);

    rows.push(run_cases("transform_round_trip", seed, count, &|rng| {
        let dim = rng.gen_range(1..=2);
        let fam = WaveletFamily::ALL[rng.gen_range(0..2)];
        let shape = GridShape::new(dim, rng.gen_range(0..=1), if dim == 1 { 7 } else { 4 })?;
        let samples: Vec<f64> = (0..shape.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = GridFunction::new(shape, samples)?;
        let x = SpaceSpec::lebesgue(2.0, dim)?;
        let a = analyze(&g, fam, shape.max_levels(), &x)?;
        let back = a.reconstruct()?;
        let e2 = g.l2_norm().powi(2);
        Ok(g.max_abs_diff(&back) <= 1e-10 && rel_close(a.l2_energy(), e2, 1e-12))
    })?);

    let shipped: Vec<Scenario> = if count == 0 {
        Vec::new()
    } else {
        shipped_scenarios()
            .into_iter()
            .map(|(_, t)| Scenario::parse(t))
            .collect::<Result<_, _>>()?
    };
    let recon = shipped
        .par_iter()
        .map(|s| -> Result<bool, HarnessError> {
            let built = s.build_sequence(seed)?;
            let seq = &built.sequence;
            let cfg = ExtractConfig {
                m_max: s.file.m_max.unwrap_or_else(|| s.default_m_max(&built)),
                window: s.file.window,
                threshold: s.file.threshold,
            };
            let dec = extract(seq, &cfg)?;
            let (n, l) = (seq.len(), dec.profile_count());
            Ok(dec.profile_sum(n, l)?.add(&dec.remainder(seq, n, l)?)? == *seq.member(n))
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.push(LedgerRow {
        property: "reconstruction_identity",
        cases: recon.len(),
        failures: recon.iter().filter(|ok| !**ok).count(),
    });

    // Negative control: a forced coherent fixture must be flagged, and the
    // extractor must merge what the fixture claims are separate profiles.
    let forced: Vec<&Scenario> = shipped.iter().filter(|s| s.file.force).collect();
    let flagged = forced
        .iter()
        .map(|s| -> Result<bool, HarnessError> {
            let built = s.build_sequence(seed)?;
            let truth = built.truth.as_ref().expect("profile fixture");
            let dec = extract(&built.sequence, &ExtractConfig::new(s.default_m_max(&built)))?;
            Ok(!truth.coherent_pairs.is_empty() && dec.profile_count() < truth.profiles.len())
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.push(LedgerRow {
        property: "negative_control",
        cases: flagged.len(),
        failures: flagged.iter().filter(|ok| !**ok).count(),
    });
    Ok(rows)
}

/// Property suite plus `mterm` and `extract` on every shipped scenario,
/// written under `out`. Runs on a pool of `jobs` threads (0 = all cores);
/// the output bytes do not depend on `jobs`.
pub fn run_suite(out: &Path, seed: u64, count: usize, jobs: usize) -> Result<RunOutcome, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::Input(format!("thread pool: {e}")))?;
    pool.install(|| {
        let ledger = run_property_suite(seed, count)?;
        let rows: Vec<Vec<String>> = ledger
            .iter()
            .map(|r| {
                vec![
                    r.property.to_string(),
                    r.cases.to_string(),
                    r.failures.to_string(),
                    if r.pass() { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        write_csv(&out.join("ledger.csv"), &["property", "cases", "failures", "status"], &rows)?;

        let knobs = Knobs {
            seed: Some(seed),
            ..Knobs::default()
        };
        let scenarios = shipped_scenarios()
            .into_iter()
            .map(|(_, t)| Scenario::parse(t))
            .collect::<Result<Vec<_>, _>>()?;
        let runs = scenarios
            .par_iter()
            .map(|s| -> Result<Vec<(String, bool)>, HarnessError> {
                let dir = out.join("scenarios").join(s.name());
                let mut checks = Vec::new();
                for (cmd, r) in [
                    ("mterm", run_mterm(s, &dir.join("mterm"), &knobs)?),
                    ("extract", run_extract(s, &dir.join("extract"), &knobs)?),
                ] {
                    checks.extend(r.checks.into_iter().map(|(k, v)| (format!("{}/{cmd}/{k}", s.name()), v)));
                }
                Ok(checks)
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut checks: Vec<(String, bool)> =
            ledger.iter().map(|r| (format!("property/{}", r.property), r.pass())).collect();
        checks.extend(runs.into_iter().flatten());
        let status: Vec<Vec<String>> = checks
            .iter()
            .map(|(k, v)| vec![k.clone(), if *v { "PASS" } else { "FAIL" }.to_string()])
            .collect();
        write_csv(&out.join("suite.csv"), &["check", "status"], &status)?;
        Ok(RunOutcome {
            checks,
            notes: Vec::new(),
        })
    })
}
