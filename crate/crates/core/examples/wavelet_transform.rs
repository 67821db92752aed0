//! Analyzes a sampled bump with Haar and Daubechies-4, compares coefficient
//! norms and checks the round trip.

use profdec::seqspace::{norm, SpaceSpec};
use profdec::synthesis::{analyze, GridFunction, GridShape, WaveletFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let shape = GridShape::new(1, 0, 12)?;
    let g = GridFunction::from_fn(shape, |p| (-200.0 * (p[0] - 0.5).powi(2)).exp());
    let x = SpaceSpec::besov(1.0, 2.0, 2.0, 1)?;
    for family in WaveletFamily::ALL {
        let a = analyze(&g, family, 10, &x)?;
        let big = a.details.values().filter(|v| v.abs() > 1e-6).count();
        let back = a.reconstruct()?;
        println!(
            "{family:>4}: {} details, {big} above 1e-6, |x| = {:.4}, coarse {:.4}, round trip {:.1e}",
            a.details.len(),
            norm(&a.details, &x)?,
            a.coarse_mass(),
            back.max_abs_diff(&g)
        );
    }
    Ok(())
}
