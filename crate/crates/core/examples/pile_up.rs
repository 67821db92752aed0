//! One unit wavelet per scale: bounded in X, but no finite set of profiles
//! makes the Y remainder small.

use profdec::extractor::{extract, ExtractConfig};
use profdec::seqspace::SpaceSpec;
use profdec::synthesis::pile_up;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = SpaceSpec::besov(0.5, 1.0, f64::INFINITY, 1)?;
    let y = SpaceSpec::besov(0.0, 2.0, f64::INFINITY, 1)?;
    let n = 12;
    let s = pile_up(n, x, y)?;
    let dec = extract(&s.sequence, &ExtractConfig::new(6))?;
    let l = dec.profile_count();
    for m in dec.window_range() {
        println!("n = {m:>2}: ||r_n,{l}||_Y = {}", dec.remainder_norm(m, l).unwrap_or(f64::NAN));
    }
    println!("stalled: {}", dec.remainder_stalled);
    Ok(())
}
