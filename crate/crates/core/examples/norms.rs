//! Sequence norms of one small coefficient map in every supported space.

use profdec::lattice::ScaleSpaceIndex;
use profdec::seqspace::{norm, CoeffMap, SpaceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = CoeffMap::from_entries(
        1,
        [
            (ScaleSpaceIndex::d1(0, 0), 3.0),
            (ScaleSpaceIndex::d1(1, 0), -1.0),
            (ScaleSpaceIndex::d1(1, 1), 2.0),
            (ScaleSpaceIndex::d1(4, 9), 4.0),
        ],
    )?;
    print!("{}", c.to_text());

    let inf = f64::INFINITY;
    for y in [
        SpaceSpec::besov(0.5, 1.0, 1.0, 1)?,
        SpaceSpec::besov(0.0, 2.0, 2.0, 1)?,
        SpaceSpec::besov(0.0, 2.0, inf, 1)?,
        SpaceSpec::triebel(0.25, 4.0, 2.0, 1)?,
        SpaceSpec::lebesgue(2.0, 1)?,
        SpaceSpec::bmo(1)?,
    ] {
        println!("{:<28} {:.6}", y.to_string(), norm(&c, &y)?);
    }

    // the norm does not see where or at which scale the map sits
    let moved = c.rescale(&ScaleSpaceIndex::d1(7, -300))?;
    let y = SpaceSpec::triebel(0.25, 4.0, 2.0, 1)?;
    println!("rescaled triebel: {:.6}", norm(&moved, &y)?);
    Ok(())
}
