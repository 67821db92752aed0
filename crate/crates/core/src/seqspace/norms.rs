use std::collections::HashMap;

use crate::lattice::Cube;
use crate::numeric::{lp_norm, CompensatedSum};

use super::triebel::triebel_norm;
use super::{CoeffMap, SeqError, SpaceFamily, SpaceSpec};

fn check_exponent(name: &str, x: f64) -> Result<(), SeqError> {
    if x >= 1.0 {
        Ok(())
    } else {
        Err(SeqError::InvalidExponent(format!("{name} = {x} (need >= 1)")))
    }
}

/// `(sum_j (sum_{|lambda|=j} |d_lambda|^q)^(b/q))^(1/b)`, suprema for
/// infinite exponents.
pub fn besov_norm(c: &CoeffMap, q: f64, b: f64) -> Result<f64, SeqError> {
    check_exponent("q", q)?;
    check_exponent("b", b)?;
    let levels = level_sums(c, q);
    Ok(lp_norm(levels, b))
}

/// Per-level `l^q` norms in ascending level order.
fn level_sums(c: &CoeffMap, q: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut it = c.iter().peekable();
    while let Some((ix, v)) = it.next() {
        let j = ix.j();
        let mut vals = vec![v];
        while let Some((nx, nv)) = it.peek() {
            if nx.j() != j {
                break;
            }
            vals.push(*nv);
            it.next();
        }
        out.push(lp_norm(vals, q));
    }
    out
}

/// `max_lambda (2^(d|lambda|) sum_{mu in lambda} |d_mu|^2 2^(-d|mu|))^(1/2)`.
///
/// The maximum runs over support cubes and their ancestors down to the level
/// `l*` where every chain has reached a quadrant root (`k` in `{-1,0}^d`).
/// Coarser cubes contain the same support set as their level-`l*` descendant
/// and carry an extra factor `2^-d` per level, so they cannot win.
pub fn bmo_norm(c: &CoeffMap) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let d = c.dim() as f64;
    let floor_level = c
        .indices()
        .map(|ix| {
            let mut cube = ix.cube();
            while !cube.is_quadrant_root() {
                cube = cube.parent();
            }
            cube.j
        })
        .min()
        .unwrap_or(0);

    let mut acc: HashMap<Cube, CompensatedSum> = HashMap::new();
    for (ix, v) in c.iter() {
        let energy = v * v;
        let mut cube: Cube = ix.cube();
        loop {
            let gap = (ix.j() - cube.j) as f64;
            acc.entry(cube.clone()).or_default().add(energy * (-d * gap).exp2());
            if cube.j <= floor_level {
                break;
            }
            cube = cube.parent();
        }
    }
    acc.values().map(|s| s.value()).fold(0.0, f64::max).sqrt()
}

/// Sequence norm of `c` in `space`. Lebesgue spaces resolve to
/// `F^0_{q,2}`; coefficients are taken against `space`-normalized wavelets.
pub fn norm(c: &CoeffMap, space: &SpaceSpec) -> Result<f64, SeqError> {
    if c.dim() != space.dim {
        return Err(crate::lattice::LatticeError::DimensionMismatch(space.dim, c.dim()).into());
    }
    match space.resolved() {
        SpaceFamily::Besov { p, a, .. } => besov_norm(c, p, a),
        SpaceFamily::TriebelLizorkin { p, a, .. } => triebel_norm(c, p, a),
        SpaceFamily::Bmo => Ok(bmo_norm(c)),
        SpaceFamily::Lebesgue { .. } => unreachable!("resolved above"),
    }
}
