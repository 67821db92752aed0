//! Best M-term errors of a power-law sequence: the constant-1 tail bound and
//! the fitted decay rate.

use profdec::lattice::ScaleSpaceIndex;
use profdec::mterm::{decay_rate, mterm_bound_sweep};
use profdec::seqspace::{CoeffMap, SpaceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let beta = 1.5;
    let c = CoeffMap::from_entries(
        1,
        (1..=1i64 << 16).map(|m| (ScaleSpaceIndex::d1(m.ilog2() as i64, m), (m as f64).powf(-beta))),
    )?;

    let sweep = mterm_bound_sweep(&c, 1.0, 2.0)?;
    println!("bound holds for every M: {}", sweep.iter().all(|r| r.pass));
    for r in sweep.iter().filter(|r| r.m.is_power_of_two() && r.m <= 1024) {
        println!("M = {:>5}  tail {:.3e}  bound {:.3e}", r.m, r.tail, r.bound);
    }

    let grid: Vec<usize> = (4..=12).map(|e| 1 << e).collect();
    let fit = decay_rate(&c, &SpaceSpec::lebesgue(2.0, 1)?, &grid)?;
    println!(
        "sigma_hat = {:.4} (expected {}), class {:?}",
        fit.sigma_hat.unwrap_or(f64::NAN),
        beta - 0.5,
        fit.class
    );
    Ok(())
}
