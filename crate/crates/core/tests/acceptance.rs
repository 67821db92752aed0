//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! verdict lines always reach the terminal.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use profdec::extractor::{extract, orthogonality_report, CoherenceVerdict, ExtractConfig};
use profdec::harness::{run_suite, shipped_scenarios, Scenario};
use profdec::lattice::ScaleSpaceIndex;
use profdec::mterm::{decay_rate, mterm_bound_sweep, project};
use profdec::seqspace::{norm, CoeffMap, SpaceFamily, SpaceSpec};
use profdec::synthesis::{analyze, GridFunction, GridShape, WaveletFamily};

type Outcome = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lq(v: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        v.fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn random_map(rng: &mut ChaCha8Rng, count: usize, levels: std::ops::Range<i64>) -> CoeffMap {
    let entries: Vec<_> = (0..count)
        .map(|_| {
            let j = rng.gen_range(levels.clone());
            let k = rng.gen_range(-(1i64 << 12)..(1i64 << 12));
            (ScaleSpaceIndex::d1(j, k), rng.gen_range(-1.0..1.0))
        })
        .collect();
    CoeffMap::accumulate(1, entries).unwrap()
}

fn shipped() -> Vec<Scenario> {
    shipped_scenarios()
        .into_iter()
        .map(|(_, text)| Scenario::parse(text).unwrap())
        .collect()
}

fn scenario(name: &str) -> Scenario {
    shipped().into_iter().find(|s| s.name() == name).unwrap()
}

fn mterm_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let size = rng.gen_range(1..=500);
        let c = random_map(&mut rng, size, -4..12);
        let mut mods: Vec<f64> = c.values().map(f64::abs).collect();
        mods.sort_by(|a, b| b.total_cmp(a));
        for p in [1.0, 2.0] {
            let lp = lq(mods.iter().copied(), p);
            for q in [2.0, 4.0, f64::INFINITY] {
                // tails by reverse accumulation over the sorted moduli
                let mut tails = vec![0.0; mods.len() + 1];
                for m in (0..mods.len()).rev() {
                    tails[m] = if q.is_infinite() { mods[m] } else { tails[m + 1] + mods[m].powf(q) };
                }
                let sweep = mterm_bound_sweep(&c, p, q).map_err(|e| e.to_string())?;
                for r in sweep.iter().skip(1) {
                    let tail = if q.is_infinite() { tails[r.m] } else { tails[r.m].powf(1.0 / q) };
                    let bound = (r.m as f64).powf(-(1.0 / p - 1.0 / q)) * lp;
                    ensure(tail <= bound * (1.0 + 1e-12) && r.pass, || {
                        format!("case {case}, p={p}, q={q}, M={}: {tail} > {bound}", r.m)
                    })?;
                    ensure((r.tail - tail).abs() <= 1e-12 * tail.max(1e-300), || {
                        format!("case {case}: reported tail {} vs {tail}", r.tail)
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn rate_fit() -> Outcome {
    let count = 1usize << 18;
    let grid: Vec<usize> = (4..=14).map(|e| 1 << e).collect();
    for beta in [1.2, 2.0] {
        // tail sums first, summed from the small end
        let mut suffix = vec![0.0; count + 1];
        for m in (1..=count).rev() {
            suffix[m - 1] = suffix[m] + (m as f64).powf(-2.0 * beta);
        }
        let oracle: Vec<f64> = grid.iter().map(|&m| suffix[m].sqrt()).collect();

        let c = CoeffMap::from_entries(
            1,
            (1..=count).map(|m| (ScaleSpaceIndex::d1(0, m as i64), (m as f64).powf(-beta))),
        )
        .unwrap();
        let y = SpaceSpec::besov(0.0, 2.0, 2.0, 1).unwrap();
        let fit = decay_rate(&c, &y, &grid).map_err(|e| e.to_string())?;
        for (&(m, e), o) in fit.points.iter().zip(&oracle) {
            ensure((e - o).abs() <= 1e-9 * o, || format!("beta={beta}, M={m}: {e} vs oracle {o}"))?;
        }
        let s = fit.sigma_hat.ok_or("no fit")?;
        ensure((s - (beta - 0.5)).abs() <= 0.05, || format!("beta={beta}: sigma_hat {s}"))?;
    }
    Ok(())
}

fn profile_recovery() -> Outcome {
    let s = scenario("three-profiles");
    let built = s.build_sequence(s.file.seed).map_err(|e| e.to_string())?;
    let truth = built.truth.as_ref().ok_or("no truth")?;
    let seq = &built.sequence;
    let (n, w) = (seq.len(), s.file.window.unwrap_or(0));
    ensure(n == 12 && w == 4, || format!("fixture has N={n}, W={w}"))?;
    ensure(truth.profiles.len() == 3 && truth.profiles.iter().all(|p| (5..=10).contains(&p.len())), || {
        "fixture shape".into()
    })?;
    let m_max = s.file.m_max.unwrap_or_else(|| s.default_m_max(&built));
    let cfg = ExtractConfig {
        m_max,
        window: Some(w),
        threshold: s.file.threshold,
    };
    let dec = extract(seq, &cfg).map_err(|e| e.to_string())?;
    ensure(dec.profile_count() == 3, || format!("{} profiles", dec.profile_count()))?;

    let mut unmatched: Vec<&CoeffMap> = truth.profiles.iter().collect();
    for p in &dec.profiles {
        let pos = unmatched
            .iter()
            .position(|t| **t == p.relative_coeffs)
            .ok_or_else(|| format!("extracted profile not in truth:\n{}", p.relative_coeffs.to_text()))?;
        unmatched.remove(pos);
    }

    let orth = orthogonality_report(&dec, None).map_err(|e| e.to_string())?;
    for l in 0..3 {
        for l2 in 0..3 {
            if l != l2 {
                let v = orth.matrix[l][l2].as_ref().ok_or("missing verdict")?;
                ensure(matches!(v, CoherenceVerdict::Orthogonal(_)), || format!("({l},{l2}) {}", v.label()))?;
            }
        }
    }

    let eps_n = (-(n as f64)).exp2();
    let r = dec.remainder(seq, n, 3).map_err(|e| e.to_string())?;
    for y in [
        SpaceSpec::besov(0.0, 2.0, 2.0, 1).unwrap(),
        SpaceSpec::besov(-0.25, 4.0, 4.0, 1).unwrap(),
        SpaceSpec::lebesgue(2.0, 1).unwrap(),
    ] {
        let v = norm(&r, &y).map_err(|e| e.to_string())?;
        ensure(v <= 2.0 * eps_n, || format!("{y}: remainder {v} > {}", 2.0 * eps_n))?;
    }
    Ok(())
}

fn reconstruction() -> Outcome {
    for s in shipped() {
        let built = s.build_sequence(s.file.seed).map_err(|e| e.to_string())?;
        let seq = &built.sequence;
        let cfg = ExtractConfig {
            m_max: s.file.m_max.unwrap_or_else(|| s.default_m_max(&built)),
            window: s.file.window,
            threshold: s.file.threshold,
        };
        let dec = extract(seq, &cfg).map_err(|e| e.to_string())?;
        let (n, l) = (seq.len(), dec.profile_count());
        let sum = dec.profile_sum(n, l).map_err(|e| e.to_string())?;
        let rem = dec.remainder(seq, n, l).map_err(|e| e.to_string())?;
        ensure(sum.add(&rem).map_err(|e| e.to_string())? == *seq.member(n), || {
            format!("{}: profiles + remainder != member N", s.name())
        })?;
    }
    Ok(())
}

/// Random disjoint split of `c` into at most `max_groups` non-empty groups.
fn partition(rng: &mut ChaCha8Rng, c: &CoeffMap, max_groups: usize) -> Vec<CoeffMap> {
    let groups = rng.gen_range(1..=max_groups.min(c.len()).max(1));
    let mut labels: Vec<usize> = (0..c.len()).map(|i| if i < groups { i } else { rng.gen_range(0..groups) }).collect();
    labels.shuffle(rng);
    (0..groups)
        .map(|g| {
            let entries = c.iter().zip(&labels).filter(|(_, &l)| l == g).map(|((i, v), _)| (i.clone(), v));
            CoeffMap::from_entries(c.dim(), entries.collect::<Vec<_>>()).unwrap()
        })
        .collect()
}

/// `l^a` over levels of `l^p` within each level.
fn besov_oracle(c: &CoeffMap, p: f64, a: f64) -> f64 {
    let mut levels: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (ix, v) in c.iter() {
        levels.entry(ix.j()).or_default().push(v);
    }
    lq(levels.values().map(|v| lq(v.iter().copied(), p)), a)
}

fn besov_stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs = [(2.0, 4.0), (2.0, f64::INFINITY), (4.0, 2.0)];
    for case in 0..1000 {
        let (p, a) = pairs[case % pairs.len()];
        let size = rng.gen_range(1..=60);
        let c = random_map(&mut rng, size, 0..6);
        let parts = partition(&mut rng, &c, 8);
        let x = SpaceSpec::besov(0.7, p, a, 1).unwrap();
        let tau = p.max(a);
        let whole = norm(&c, &x).map_err(|e| e.to_string())?;
        ensure((whole - besov_oracle(&c, p, a)).abs() <= 1e-12 * whole, || format!("case {case}: norm mismatch"))?;
        let norms: Vec<f64> = parts.iter().map(|g| norm(g, &x).unwrap()).collect();
        let lhs = lq(norms.into_iter(), tau);
        ensure(lhs <= whole * (1.0 + 1e-9), || format!("case {case} (p={p}, a={a}): {lhs} > {whole}"))?;
    }
    Ok(())
}

const TREE_DEPTH: i64 = 5;

/// `int (sum |d|^a 2^{j a/p} 1_Q)^{p/a}` over `[0, 1)`, cell by cell at the
/// finest level present.
fn triebel_integral(c: &CoeffMap, p: f64, a: f64) -> f64 {
    let cells = 1usize << TREE_DEPTH;
    let mut chi = vec![0.0; cells];
    for (ix, v) in c.iter() {
        let width = 1usize << (TREE_DEPTH - ix.j());
        let start = ix.k()[0] as usize * width;
        let w = v.abs().powf(a) * (ix.j() as f64 * a / p).exp2();
        for x in &mut chi[start..start + width] {
            *x += w;
        }
    }
    chi.iter().map(|x| x.powf(p / a)).sum::<f64>() / cells as f64
}

fn triebel_superadditivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (p, a) = (4.0, 2.0);
    let x = SpaceSpec::triebel(0.3, p, a, 1).unwrap();
    for case in 0..500 {
        let size = rng.gen_range(1..=40);
        let entries: Vec<_> = (0..size)
            .map(|_| {
                let j = rng.gen_range(0..=TREE_DEPTH);
                (ScaleSpaceIndex::d1(j, rng.gen_range(0..1i64 << j)), rng.gen_range(-1.0..1.0))
            })
            .collect();
        let c = CoeffMap::accumulate(1, entries).unwrap();
        let parts = partition(&mut rng, &c, 8);
        let total = triebel_integral(&c, p, a);
        let lib = norm(&c, &x).map_err(|e| e.to_string())?.powf(p);
        ensure((lib - total).abs() <= 1e-12 * total.max(1e-300), || {
            format!("case {case}: tree evaluation {lib} vs cell sum {total}")
        })?;
        let split: f64 = parts.iter().map(|g| triebel_integral(g, p, a)).sum();
        ensure(split <= total * (1.0 + 1e-9), || format!("case {case}: {split} > {total}"))?;
        let split_lib: f64 = parts.iter().map(|g| norm(g, &x).unwrap().powf(p)).sum();
        ensure(split_lib <= lib * (1.0 + 1e-9), || format!("case {case}: {split_lib} > {lib}"))?;
    }
    Ok(())
}

fn exhaustive_best(values: &[f64], m: usize, q: f64) -> f64 {
    let n = values.len();
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| lq((0..n).filter(|i| mask & (1 << i) == 0).map(|i| values[i]), q))
        .fold(f64::INFINITY, f64::min)
}

fn greedy_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let q = [1.0, 2.0, f64::INFINITY][case % 3];
        let y = SpaceSpec::besov(0.5, q, q, 1).unwrap();
        let size = rng.gen_range(1..=12);
        let c = random_map(&mut rng, size, -2..4);
        let values: Vec<f64> = c.values().collect();
        for m in 0..=c.len() {
            let greedy = norm(&project(&c, m).1, &y).map_err(|e| e.to_string())?;
            let best = exhaustive_best(&values, m, q);
            ensure((greedy - best).abs() <= 1e-12 * best.max(1.0), || {
                format!("case {case}, q={q}, M={m}: {greedy} vs {best}")
            })?;
        }
    }
    Ok(())
}

fn pile_up() -> Outcome {
    let s = scenario("pileup");
    ensure(matches!(s.y.family, SpaceFamily::Besov { a, .. } if a.is_infinite()), || format!("Y = {}", s.y))?;
    let built = s.build_sequence(s.file.seed).map_err(|e| e.to_string())?;
    let seq = &built.sequence;
    let m_max = s.file.m_max.ok_or("no m_max")?;
    let cfg = ExtractConfig {
        m_max,
        window: s.file.window,
        threshold: s.file.threshold,
    };
    let dec = extract(seq, &cfg).map_err(|e| e.to_string())?;
    let l = dec.profile_count();
    for n in (m_max + 1)..=seq.len() {
        let r = dec.remainder(seq, n, l).map_err(|e| e.to_string())?;
        let v = norm(&r, &s.y).map_err(|e| e.to_string())?;
        ensure(v == 1.0, || format!("n={n}: remainder {v}"))?;
    }
    ensure(dec.remainder_stalled, || "remainder flag not raised".into())
}

fn transforms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for family in WaveletFamily::ALL {
        for dim in [1, 2] {
            for case in 0..10 {
                let j_fine = if dim == 1 { rng.gen_range(3..11) } else { rng.gen_range(2..6) };
                let shape = GridShape::new(dim, rng.gen_range(0..3), j_fine).unwrap();
                let samples = (0..shape.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let g = GridFunction::new(shape, samples).unwrap();
                let x = SpaceSpec::besov(0.5, 2.0, 2.0, dim).unwrap();
                let levels = rng.gen_range(1..=shape.max_levels());
                let a = analyze(&g, family, levels, &x).map_err(|e| e.to_string())?;
                let back = a.reconstruct().map_err(|e| e.to_string())?;
                let err = back.max_abs_diff(&g);
                ensure(err <= 1e-10, || format!("{family} d={dim} #{case}: round trip {err}"))?;
                let e = g.l2_norm().powi(2);
                let rel = (a.l2_energy() - e).abs() / e;
                ensure(rel <= 1e-12, || format!("{family} d={dim} #{case}: Parseval {rel}"))?;
            }
        }
    }
    Ok(())
}

fn collect(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect(&path, root, out);
        } else {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.insert(rel, std::fs::read(&path).unwrap());
        }
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for (run, jobs) in [(0, 1), (1, 0)] {
        let out = dir.path().join(format!("run{run}"));
        let outcome = run_suite(&out, 42, 64, jobs).map_err(|e| e.to_string())?;
        ensure(outcome.pass(), || format!("suite run {run} failed: {:?}", outcome.checks))?;
        let mut files = BTreeMap::new();
        collect(&out, &out, &mut files);
        trees.push(files);
    }
    ensure(!trees[0].is_empty(), || "suite wrote nothing".into())?;
    let differing: Vec<&String> = trees[0]
        .iter()
        .filter(|(k, v)| trees[1].get(*k) != Some(v))
        .map(|(k, _)| k)
        .collect();
    ensure(trees[0].len() == trees[1].len() && differing.is_empty(), || format!("differs: {differing:?}"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("mterm_bound", Duration::from_secs(10), mterm_bound),
        ("rate_fit", Duration::from_secs(5), rate_fit),
        ("profile_recovery", Duration::from_secs(5), profile_recovery),
        ("reconstruction_identity", Duration::from_secs(1), reconstruction),
        ("besov_stability", Duration::from_secs(10), besov_stability),
        ("triebel_superadditivity", Duration::from_secs(20), triebel_superadditivity),
        ("greedy_oracle", Duration::from_secs(30), greedy_oracle),
        ("pile_up", Duration::from_secs(1), pile_up),
        ("transform_round_trip", Duration::from_secs(10), transforms),
        ("determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let verdict = match result {
            Ok(()) if took <= *limit => Ok(()),
            Ok(()) => Err(format!("took {:.2?}, limit {limit:?}", took)),
            Err(e) => Err(e),
        };
        match verdict {
            Ok(()) => println!("PASS {:>2} {name} ({:.3} s)", i + 1, took.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({:.3} s): {e}", i + 1, took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
