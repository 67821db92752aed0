//! Builds a three-profile sequence with decaying noise and recovers the
//! profiles, their trajectories and the remainders.

use profdec::extractor::{extract, orthogonality_report, stability_report, ExtractConfig};
use profdec::lattice::ScaleSpaceIndex;
use profdec::seqspace::{CoeffMap, SpaceSpec};
use profdec::synthesis::{make_sequence, FreshNoise, Trajectory};

fn law(n: usize, f: impl Fn(i64) -> (i64, i64)) -> Trajectory {
    (1..=n as i64)
        .map(|n| {
            let (j, k) = f(n);
            Some(ScaleSpaceIndex::d1(j, k))
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = SpaceSpec::besov(0.5, 1.0, 1.0, 1)?;
    let y = SpaceSpec::besov(0.0, 2.0, 2.0, 1)?;
    let at = |j, k| ScaleSpaceIndex::d1(j, k);
    let profiles = vec![
        CoeffMap::from_entries(1, [(at(0, 0), 1.0), (at(1, 1), 0.5), (at(2, 0), -0.25)])?,
        CoeffMap::from_entries(1, [(at(0, 0), -0.9), (at(0, 1), 0.4)])?,
        CoeffMap::from_entries(1, [(at(0, 0), 0.8), (at(3, 5), 0.3)])?,
    ];
    let n = 12;
    let trajectories = vec![
        law(n, |n| (n, 0)),
        law(n, |n| (0, 4i64.pow(n as u32))),
        law(n, |n| (2 * n, 1 << n)),
    ];
    let noise = FreshNoise {
        count: 3,
        decay: 0.5,
        levels: (0, 6),
        span: 64,
        seed: 3,
    };
    let s = make_sequence(profiles, trajectories, n, &noise, x, y, false)?;

    let dec = extract(&s.sequence, &ExtractConfig::new(7))?;
    println!("window {}, threshold {}", dec.config.window, dec.config.threshold);
    for (l, p) in dec.profiles.iter().enumerate() {
        println!("profile {}: anchor at N = {}", l + 1, p.anchor(n).expect("defined at N"));
        print!("{}", p.relative_coeffs.to_text());
    }
    for l in 0..=dec.profile_count() {
        println!("||r_N,{l}||_Y = {:.3e}", dec.remainder_norm(n, l).unwrap_or(f64::NAN));
    }
    println!("orthogonal: {}", orthogonality_report(&dec, None)?.pass());
    let st = stability_report(&dec, &x)?;
    println!("stability ratio {:.4} (tau = {})", st.ratio, st.tau);
    Ok(())
}
