//! Exact Triebel-Lizorkin sequence norm.
//!
//! The integrand `(sum_lambda |d_lambda chi_lambda|^b)^(1/b)` is constant on
//! each cube of the support minus its maximal sub-cubes from the support, so
//! the `L^q` integral is a finite sum over support cubes. Every quantity is
//! expressed relative to the level of the cube being integrated, which keeps
//! the computation free of `2^(dj/q)` overflow and makes it exactly invariant
//! under lattice shifts.

use std::collections::{BTreeMap, HashMap};

use crate::lattice::Cube;
use crate::numeric::CompensatedSum;

use super::{CoeffMap, SeqError};

struct Node {
    level: i64,
    /// `sum_e |d|^b` (or `sum_e |d|` when `b = inf`) over orientations on this cube.
    weight: f64,
    parent: Option<usize>,
    /// `sum over direct support children of 2^(-d (j_child - j))`.
    covered: CompensatedSum,
}

/// `|| (sum_lambda |d_lambda chi_lambda|^b)^(1/b) ||_{L^q}` with
/// `chi_lambda = 2^(dj/q) 1_{cube(lambda)}`. For `b = inf` the inner
/// expression is `sup_j sum_{|lambda|=j} |d_lambda chi_lambda|`.
pub fn triebel_norm(c: &CoeffMap, q: f64, b: f64) -> Result<f64, SeqError> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(SeqError::InvalidExponent(format!("q = {q} (need 1 <= q < inf)")));
    }
    if !(b >= 1.0) {
        return Err(SeqError::InvalidExponent(format!("b = {b} (need b >= 1)")));
    }
    if c.is_empty() {
        return Ok(0.0);
    }
    Ok(triebel_integral(c, q, b).powf(1.0 / q))
}

/// `triebel_norm(c, q, b)^q` evaluated without the final root.
pub fn triebel_integral(c: &CoeffMap, q: f64, b: f64) -> f64 {
    let d = c.dim() as f64;
    let sup_mode = b.is_infinite();

    // Group orientations per cube; BTreeMap keeps coarse cubes first.
    let mut cubes: BTreeMap<Cube, f64> = BTreeMap::new();
    for (ix, v) in c.iter() {
        let w = if sup_mode { v.abs() } else { v.abs().powf(b) };
        *cubes.entry(ix.cube()).or_insert(0.0) += w;
    }
    let min_level = cubes.keys().next().map(|c| c.j).unwrap_or(0);

    let slot: HashMap<&Cube, usize> = cubes.keys().enumerate().map(|(i, c)| (c, i)).collect();
    let mut nodes: Vec<Node> = Vec::with_capacity(cubes.len());
    for (cube, &weight) in &cubes {
        let mut parent = None;
        let mut up = cube.clone();
        while up.j > min_level {
            up = up.parent();
            if let Some(&p) = slot.get(&up) {
                parent = Some(p);
                break;
            }
        }
        nodes.push(Node {
            level: cube.j,
            weight,
            parent,
            covered: CompensatedSum::new(),
        });
    }
    for i in 0..nodes.len() {
        if let Some(p) = nodes[i].parent {
            let frac = (-d * (nodes[i].level - nodes[p].level) as f64).exp2();
            nodes[p].covered.add(frac);
        }
    }

    // Accumulated inner value relative to the node's own level.
    let mut acc = vec![0.0f64; nodes.len()];
    let mut total = CompensatedSum::new();
    for i in 0..nodes.len() {
        let own = nodes[i].weight;
        acc[i] = match nodes[i].parent {
            None => own,
            Some(p) => {
                let gap = (nodes[i].level - nodes[p].level) as f64;
                if sup_mode {
                    own.max(acc[p] * (-d * gap / q).exp2())
                } else {
                    own + acc[p] * (-d * gap * b / q).exp2()
                }
            }
        };
        let free = (1.0 - nodes[i].covered.value()).max(0.0);
        if free > 0.0 {
            let value_q = if sup_mode {
                acc[i].powf(q)
            } else {
                acc[i].powf(q / b)
            };
            total.add(free * value_q);
        }
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ScaleSpaceIndex;

    fn ix(j: i64, k: i64) -> ScaleSpaceIndex {
        ScaleSpaceIndex::d1(j, k)
    }

    fn map(entries: &[((i64, i64), f64)]) -> CoeffMap {
        CoeffMap::from_entries(1, entries.iter().map(|&((j, k), v)| (ix(j, k), v))).unwrap()
    }

    /// Midpoint Riemann sum at resolution 2^-res over [lo, hi) in d = 1.
    fn grid_oracle(entries: &[((i64, i64), f64)], q: f64, b: f64, res: i64, lo: f64, hi: f64) -> f64 {
        let h = (-(res as f64)).exp2();
        let n = ((hi - lo) / h).round() as usize;
        let mut sum = 0.0;
        for i in 0..n {
            let x = lo + (i as f64 + 0.5) * h;
            let mut per_level: BTreeMap<i64, f64> = BTreeMap::new();
            let mut inner = 0.0;
            for &((j, k), v) in entries {
                let s = (j as f64).exp2();
                if x * s >= k as f64 && x * s < (k + 1) as f64 {
                    let chi = (j as f64 / q).exp2();
                    if b.is_infinite() {
                        *per_level.entry(j).or_insert(0.0) += v.abs() * chi;
                    } else {
                        inner += (v.abs() * chi).powf(b);
                    }
                }
            }
            let f = if b.is_infinite() {
                per_level.values().cloned().fold(0.0, f64::max)
            } else {
                inner.powf(1.0 / b)
            };
            sum += f.powf(q) * h;
        }
        sum.powf(1.0 / q)
    }

    #[test]
    fn single_entry_is_one() {
        for (j, k) in [(0, 0), (7, -3), (-4, 11)] {
            for (q, b) in [(1.0, 1.0), (2.0, 2.0), (3.5, f64::INFINITY), (4.0, 1.5)] {
                let v = triebel_norm(&map(&[((j, k), 1.0)]), q, b).unwrap();
                assert!((v - 1.0).abs() < 1e-15, "{j} {k} {q} {b}: {v}");
            }
        }
    }

    #[test]
    fn disjoint_supports_add_in_lq_power() {
        let v = triebel_norm(&map(&[((0, 0), 1.0), ((0, 5), 1.0)]), 2.0, 2.0).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nested_pair_matches_grid_oracle() {
        let entries = [((0, 0), 1.0), ((1, 0), 1.0)];
        // On [0,1/2): (1 + 2)^(1/2) squared = 3; on [1/2,1): 1. Integral = 2.
        let oracle = grid_oracle(&entries, 2.0, 2.0, 12, 0.0, 1.0);
        assert!((oracle - 2f64.sqrt()).abs() < 1e-12);
        let v = triebel_norm(&map(&entries), 2.0, 2.0).unwrap();
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn mixed_configurations_match_grid_oracle() {
        let entries = [
            ((0, 0), 0.8),
            ((1, 1), -0.5),
            ((2, 1), 0.3),
            ((3, 7), 1.1),
            ((3, 0), 0.2),
            ((1, 3), 0.9),
            ((-1, 0), 0.4),
        ];
        for (q, b) in [(1.0, 1.0), (2.0, 2.0), (3.0, 1.5), (2.0, f64::INFINITY), (4.0, 2.0)] {
            let oracle = grid_oracle(&entries, q, b, 12, 0.0, 2.0);
            let v = triebel_norm(&map(&entries), q, b).unwrap();
            assert!((v - oracle).abs() < 1e-9, "q={q} b={b}: {v} vs {oracle}");
        }
    }

    #[test]
    fn orientations_share_the_cube() {
        let c = CoeffMap::from_entries(
            2,
            [
                (ScaleSpaceIndex::new(0, [0, 0], 1).unwrap(), 1.0),
                (ScaleSpaceIndex::new(0, [0, 0], 2).unwrap(), 1.0),
            ],
        )
        .unwrap();
        // inner value sqrt(2) on the unit square
        assert!((triebel_norm(&c, 2.0, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // b = inf: per-level sum = 2
        assert!((triebel_norm(&c, 2.0, f64::INFINITY).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_nesting() {
        // Parent unit square value 1, child quarter value 1, q = b = 2:
        // quarter: 1 + 4 = 5 over area 1/4, rest: 1 over 3/4 => 2.
        let c = CoeffMap::from_entries(
            2,
            [
                (ScaleSpaceIndex::new(0, [0, 0], 1).unwrap(), 1.0),
                (ScaleSpaceIndex::new(1, [1, 0], 3).unwrap(), 1.0),
            ],
        )
        .unwrap();
        assert!((triebel_norm(&c, 2.0, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn extreme_levels_do_not_overflow() {
        let c = map(&[((2000, 0), 1.0), ((1990, 0), 1.0), ((-2000, 0), 1.0)]);
        let v = triebel_norm(&c, 2.0, 2.0).unwrap();
        assert!(v.is_finite() && v > 1.0);
    }

    #[test]
    fn rejects_bad_exponents() {
        let c = map(&[((0, 0), 1.0)]);
        assert!(triebel_norm(&c, f64::INFINITY, 2.0).is_err());
        assert!(triebel_norm(&c, 0.5, 2.0).is_err());
        assert!(triebel_norm(&c, 2.0, 0.5).is_err());
    }
}
