use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use profdec::lattice::{orientation_count, ScaleSpaceIndex};
use profdec::seqspace::{norm, CoeffMap, SpaceSpec};
use profdec::synthesis::{
    analyze, make_sequence, pile_up, synthesize, FreshNoise, GridFunction, GridShape, NoNoise, SynthError,
    WaveletFamily,
};

fn random_coeffs(rng: &mut ChaCha8Rng, shape: GridShape, count: usize) -> CoeffMap {
    let entries: Vec<_> = (0..count)
        .map(|_| {
            let j = rng.gen_range(shape.coarsest_level()..shape.j_fine);
            let side = 1i64 << (shape.j_box as i64 + j);
            let k: Vec<i64> = (0..shape.dim).map(|_| rng.gen_range(0..side)).collect();
            let e = rng.gen_range(1..=orientation_count(shape.dim));
            (ScaleSpaceIndex::new(j, k, e).unwrap(), rng.gen_range(-1.0..1.0))
        })
        .collect();
    CoeffMap::accumulate(shape.dim, entries).unwrap()
}

fn max_diff(a: &CoeffMap, b: &CoeffMap) -> f64 {
    a.sub(b).unwrap().values().fold(0.0, |m, v| m.max(v.abs()))
}

#[test]
fn fifty_entry_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for family in WaveletFamily::ALL {
        for (dim, j_box, j_fine) in [(1, 2, 8), (2, 0, 5), (2, 1, 4)] {
            let shape = GridShape::new(dim, j_box, j_fine).unwrap();
            let x = SpaceSpec::besov(0.5, 2.0, 2.0, dim).unwrap();
            let c = random_coeffs(&mut rng, shape, 50);
            let g = synthesize(&c, family, shape, &x).unwrap();
            let a = analyze(&g, family, shape.max_levels(), &x).unwrap();
            assert!(max_diff(&a.details, &c) <= 1e-10, "{family} d={dim}");
            assert!(a.coarse.iter().all(|v| v.abs() <= 1e-10));
        }
    }
}

/// Haar coefficients of the piecewise-constant interpolant, summed cell by
/// cell against the analytic Haar wavelet.
fn haar_quadrature(samples: &[f64], j_fine: i64, j: i64, k: i64) -> f64 {
    let h = (-j_fine as f64).exp2();
    let width = (-j as f64).exp2();
    let (lo, mid, hi) = (k as f64 * width, (k as f64 + 0.5) * width, (k as f64 + 1.0) * width);
    let amp = (j as f64 / 2.0).exp2();
    samples
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = (i as f64 + 0.5) * h;
            let psi = if x >= lo && x < mid {
                amp
            } else if x >= mid && x < hi {
                -amp
            } else {
                0.0
            };
            v * psi * h
        })
        .sum()
}

#[test]
fn haar_bump_matches_quadrature() {
    let j_fine = 10;
    let shape = GridShape::new(1, 0, j_fine).unwrap();
    let g = GridFunction::from_fn(shape, |p| (-p[0] * p[0]).exp());
    for x in [SpaceSpec::lebesgue(2.0, 1).unwrap(), SpaceSpec::besov(1.0, 2.0, 2.0, 1).unwrap()] {
        let a = analyze(&g, WaveletFamily::Haar, 8, &x).unwrap();
        let r = x.scaling_exponent();
        for j in (j_fine - 8)..j_fine {
            for k in 0..(1i64 << j) {
                let l2 = haar_quadrature(g.samples(), j_fine, j, k);
                let expected = l2 * ((0.5 - r) * j as f64).exp2();
                let got = a.details.get(&ScaleSpaceIndex::d1(j, k)).unwrap_or(0.0);
                assert!((got - expected).abs() <= 1e-8, "({j},{k}): {got} vs {expected}");
            }
        }
    }
}

#[test]
fn parseval_on_random_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for family in WaveletFamily::ALL {
        for (dim, j_box, j_fine) in [(1, 0, 9), (1, 3, 6), (2, 1, 5)] {
            let shape = GridShape::new(dim, j_box, j_fine).unwrap();
            let samples = (0..shape.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = GridFunction::new(shape, samples).unwrap();
            let x = SpaceSpec::triebel(0.25, 3.0, 2.0, dim).unwrap();
            for levels in [1, shape.max_levels()] {
                let a = analyze(&g, family, levels, &x).unwrap();
                let e = g.l2_norm().powi(2);
                assert!((a.l2_energy() - e).abs() <= 1e-12 * e);
                assert!(a.reconstruct().unwrap().max_abs_diff(&g) <= 1e-10);
            }
        }
    }
}

proptest! {
    #[test]
    fn single_wavelets_have_unit_norm(
        s in 0.0f64..1.5, p in 1.0f64..4.0, j in 0i64..6, k in 0i64..64, db4 in any::<bool>(),
    ) {
        let family = if db4 { WaveletFamily::Daubechies4 } else { WaveletFamily::Haar };
        let shape = GridShape::new(1, 0, 7).unwrap();
        let x = SpaceSpec::besov(s, p, p, 1).unwrap();
        let unit = CoeffMap::from_entries(1, [(ScaleSpaceIndex::d1(j, k % (1 << j)), 1.0)]).unwrap();
        let g = synthesize(&unit, family, shape, &x).unwrap();
        let a = analyze(&g, family, 7, &x).unwrap();
        let v = norm(&a.details.prune(1e-13), &x).unwrap();
        prop_assert!((v - 1.0).abs() <= 1e-8, "{v}");
    }
}

#[test]
fn entries_outside_the_box_are_rejected() {
    let shape = GridShape::new(1, 0, 4).unwrap();
    let x = SpaceSpec::lebesgue(2.0, 1).unwrap();
    for (j, k) in [(4, 0), (-1, 0), (2, 4)] {
        let c = CoeffMap::from_entries(1, [(ScaleSpaceIndex::d1(j, k), 1.0)]).unwrap();
        assert!(matches!(synthesize(&c, WaveletFamily::Haar, shape, &x), Err(SynthError::OutOfRange(_))));
    }
}

#[test]
fn two_unit_profiles_build_the_expected_members() {
    let x = SpaceSpec::besov(0.5, 1.0, 1.0, 1).unwrap();
    let y = SpaceSpec::besov(0.0, 2.0, 2.0, 1).unwrap();
    let unit = CoeffMap::from_entries(1, [(ScaleSpaceIndex::d1(0, 0), 1.0)]).unwrap();
    let n = 6;
    let t1 = (1..=n).map(|n| Some(ScaleSpaceIndex::d1(n as i64, 0))).collect();
    let t2 = (1..=n).map(|n| Some(ScaleSpaceIndex::d1(0, (n * n) as i64))).collect();
    let s = make_sequence(vec![unit.clone(), unit], vec![t1, t2], n, &NoNoise, x, y, false).unwrap();
    for m in 1..=n {
        let u = s.sequence.member(m);
        let expected = CoeffMap::from_entries(
            1,
            [(ScaleSpaceIndex::d1(m as i64, 0), 1.0), (ScaleSpaceIndex::d1(0, (m * m) as i64), 1.0)],
        )
        .unwrap();
        assert_eq!(u, &expected);
    }
    assert!(s.truth.coherent_pairs.is_empty());
}

#[test]
fn coherent_pairs_need_force() {
    let x = SpaceSpec::besov(0.5, 1.0, 1.0, 1).unwrap();
    let y = SpaceSpec::besov(0.0, 2.0, 2.0, 1).unwrap();
    let unit = CoeffMap::from_entries(1, [(ScaleSpaceIndex::d1(0, 0), 1.0)]).unwrap();
    let n = 5;
    let t1: Vec<_> = (1..=n).map(|n| Some(ScaleSpaceIndex::d1(n as i64, 0))).collect();
    let t2: Vec<_> = (1..=n).map(|n| Some(ScaleSpaceIndex::d1(n as i64, 3))).collect();
    let profiles = vec![unit.clone(), unit];
    let refused = make_sequence(profiles.clone(), vec![t1.clone(), t2.clone()], n, &NoNoise, x, y, false);
    assert!(matches!(refused, Err(SynthError::CoherentPair(0, 1))));
    let forced = make_sequence(profiles, vec![t1, t2], n, &NoNoise, x, y, true).unwrap();
    assert_eq!(forced.truth.coherent_pairs, vec![(0, 1)]);
}

#[test]
fn noise_mass_follows_its_law_and_is_reproducible() {
    let x = SpaceSpec::besov(0.5, 1.0, 1.0, 1).unwrap();
    let y = SpaceSpec::besov(0.0, 2.0, 2.0, 1).unwrap();
    let unit = CoeffMap::from_entries(1, [(ScaleSpaceIndex::d1(0, 0), 1.0)]).unwrap();
    let noise = FreshNoise {
        count: 4,
        decay: 0.5,
        levels: (0, 5),
        span: 32,
        seed: 11,
    };
    let traj = (1..=8).map(|n| Some(ScaleSpaceIndex::d1(n, 0))).collect::<Vec<_>>();
    let build = || make_sequence(vec![unit.clone()], vec![traj.clone()], 8, &noise, x, y, false).unwrap();
    let (a, b) = (build(), build());
    assert_eq!(a.sequence.members(), b.sequence.members());
    for (n, eps) in a.truth.noise.iter().enumerate() {
        let l1: f64 = eps.values().map(f64::abs).sum();
        assert!((l1 - 0.5f64.powi(n as i32 + 1)).abs() <= 1e-12);
    }
}

#[test]
fn pile_up_members_are_level_stacks() {
    let x = SpaceSpec::besov(0.0, 2.0, f64::INFINITY, 1).unwrap();
    let y = SpaceSpec::besov(0.5, 1.0, f64::INFINITY, 1).unwrap();
    let s = pile_up(5, x, y).unwrap();
    for n in 1..=5 {
        let u = s.sequence.member(n);
        let expected = CoeffMap::from_entries(1, (0..=n as i64).map(|j| (ScaleSpaceIndex::d1(j, 0), 1.0))).unwrap();
        assert_eq!(u, &expected);
        assert!((norm(u, &x).unwrap() - 1.0).abs() <= 1e-14);
    }
}
