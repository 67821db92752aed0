//! Dyadic scale-space lattice `Z x Z^d` with orientation tags.
//!
//! An index `(j, k, e)` names the wavelet living on the dyadic cube
//! `2^-j (k + [0,1]^d)` with orientation `e`. All index arithmetic is exact
//! integer arithmetic; offsets are carried as big integers because
//! `2^a k` routinely leaves the native range when trajectories drift apart.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use smallvec::SmallVec;
use thiserror::Error;

/// Position vector storage; inline for `d <= 2`.
pub type Position = SmallVec<[i64; 2]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("orientation {e} out of range 1..={max} for dimension {d}")]
    BadOrientation { e: u16, d: usize, max: u16 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("index arithmetic overflowed")]
    Overflow,
    #[error("offset position is not an integer vector")]
    Incompatible,
    #[error("cannot parse index `{0}`")]
    Parse(String),
}

/// A point `(j, k, e)` of the dyadic lattice.
///
/// The derived ordering is lexicographic on `(j, k, e)` and is the tie-break
/// used everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaleSpaceIndex {
    j: i64,
    k: Position,
    e: u16,
}

/// Number of orientations for dimension `d`, i.e. `2^d - 1`.
pub fn orientation_count(d: usize) -> u16 {
    ((1u32 << d) - 1) as u16
}

impl ScaleSpaceIndex {
    pub fn new(j: i64, k: impl Into<Position>, e: u16) -> Result<Self, LatticeError> {
        let k = k.into();
        let d = k.len();
        if d == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        if d > 15 {
            return Err(LatticeError::Overflow);
        }
        let max = orientation_count(d);
        if e == 0 || e > max {
            return Err(LatticeError::BadOrientation { e, d, max });
        }
        Ok(Self { j, k, e })
    }

    /// One-dimensional index with the single orientation tag.
    pub fn d1(j: i64, k: i64) -> Self {
        Self {
            j,
            k: SmallVec::from_slice(&[k]),
            e: 1,
        }
    }

    pub fn j(&self) -> i64 {
        self.j
    }

    pub fn k(&self) -> &[i64] {
        &self.k
    }

    pub fn e(&self) -> u16 {
        self.e
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn with_orientation(&self, e: u16) -> Result<Self, LatticeError> {
        Self::new(self.j, self.k.clone(), e)
    }

    /// The dyadic cube `(j, k)` this index lives on, orientation dropped.
    pub fn cube(&self) -> Cube {
        Cube {
            j: self.j,
            k: self.k.clone(),
        }
    }
}

impl fmt::Display for ScaleSpaceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.j)?;
        for (i, k) in self.k.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "/{}", self.e)
    }
}

impl FromStr for ScaleSpaceIndex {
    type Err = LatticeError;

    /// Parses the `j:k1,k2,.../e` rendering.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LatticeError::Parse(s.to_string());
        let (j, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let (ks, e) = rest.split_once('/').ok_or_else(bad)?;
        let j = j.trim().parse::<i64>().map_err(|_| bad())?;
        let e = e.trim().parse::<u16>().map_err(|_| bad())?;
        let k = ks
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Position, _>>()?;
        Self::new(j, k, e)
    }
}

/// A dyadic cube `2^-j (k + [0,1]^d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub j: i64,
    pub k: Position,
}

impl Cube {
    /// The cube one level coarser containing this one.
    pub fn parent(&self) -> Cube {
        Cube {
            j: self.j - 1,
            k: self.k.iter().map(|&x| x >> 1).collect(),
        }
    }

    /// True when the cube does not change under repeated halving, i.e. every
    /// position component is `0` or `-1`.
    pub fn is_quadrant_root(&self) -> bool {
        self.k.iter().all(|&x| x == 0 || x == -1)
    }
}

/// Scale/position offset `(a, b)` relating two indices: `lambda = shift((a, b), lambda')`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Offset {
    pub a: i64,
    pub b: Vec<BigInt>,
}

impl Offset {
    pub fn zero(d: usize) -> Self {
        Self {
            a: 0,
            b: vec![BigInt::zero(); d],
        }
    }

    /// Offset obtained by applying `self` first and `then` second:
    /// `(a1 + a2, b2 + 2^a2 b1)`.
    pub fn then(&self, then: &Offset) -> Result<Offset, LatticeError> {
        if self.b.len() != then.b.len() {
            return Err(LatticeError::DimensionMismatch(self.b.len(), then.b.len()));
        }
        let a = self.a.checked_add(then.a).ok_or(LatticeError::Overflow)?;
        let b = self
            .b
            .iter()
            .zip(&then.b)
            .map(|(b1, b2)| Ok(b2 + mul_pow2(b1, then.a)?))
            .collect::<Result<Vec<_>, LatticeError>>()?;
        Ok(Offset { a, b })
    }

    /// The relative index `(a, b, e)`; fails when `b` leaves the `i64` range.
    pub fn to_index(&self, e: u16) -> Result<ScaleSpaceIndex, LatticeError> {
        let k = self
            .b
            .iter()
            .map(|x| x.to_i64().ok_or(LatticeError::Overflow))
            .collect::<Result<Position, _>>()?;
        ScaleSpaceIndex::new(self.a, k, e)
    }

    /// Largest position component in modulus, as a float (may be infinite).
    pub fn position_magnitude(&self) -> f64 {
        self.b
            .iter()
            .map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

const MAX_SHIFT: i64 = 1 << 20;

/// `x * 2^p` for integer `x`; `p < 0` requires exact divisibility.
fn mul_pow2(x: &BigInt, p: i64) -> Result<BigInt, LatticeError> {
    if p.abs() > MAX_SHIFT {
        return Err(LatticeError::Overflow);
    }
    if p >= 0 {
        Ok(x << (p as usize))
    } else {
        let s = (-p) as usize;
        let q: BigInt = x >> s;
        if (&q << s) == *x {
            Ok(q)
        } else {
            Err(LatticeError::Incompatible)
        }
    }
}

fn check_dims(a: &ScaleSpaceIndex, b: &ScaleSpaceIndex) -> Result<(), LatticeError> {
    if a.dim() != b.dim() {
        Err(LatticeError::DimensionMismatch(a.dim(), b.dim()))
    } else {
        Ok(())
    }
}

/// Offset `(a, b)` with `a = j(lambda) - j(lambda')` and
/// `b = k(lambda) - 2^a k(lambda')`.
///
/// Returns [`LatticeError::Incompatible`] when `a < 0` and `b` is not an
/// integer vector. Orientations do not enter the arithmetic.
pub fn offset_between(
    lambda: &ScaleSpaceIndex,
    lambda_prime: &ScaleSpaceIndex,
) -> Result<Offset, LatticeError> {
    check_dims(lambda, lambda_prime)?;
    let a = lambda
        .j
        .checked_sub(lambda_prime.j)
        .ok_or(LatticeError::Overflow)?;
    // For a < 0, b = k - k'/2^-a is integral iff 2^-a divides k'.
    let b = lambda
        .k
        .iter()
        .zip(&lambda_prime.k)
        .map(|(&k, &kp)| Ok(BigInt::from(k) - mul_pow2(&BigInt::from(kp), a)?))
        .collect::<Result<Vec<_>, LatticeError>>()?;
    Ok(Offset { a, b })
}

/// Renormalized position gap `max_i |k_i - 2^a k'_i|` evaluated exactly as a
/// rational and rounded to `f64`. Defined for every pair, including the
/// ones [`offset_between`] rejects as incompatible.
pub fn position_gap(
    lambda: &ScaleSpaceIndex,
    lambda_prime: &ScaleSpaceIndex,
) -> Result<f64, LatticeError> {
    check_dims(lambda, lambda_prime)?;
    let a = lambda
        .j
        .checked_sub(lambda_prime.j)
        .ok_or(LatticeError::Overflow)?;
    if a.abs() > MAX_SHIFT {
        return Ok(f64::INFINITY);
    }
    let mut gap = 0.0f64;
    for (&k, &kp) in lambda.k.iter().zip(&lambda_prime.k) {
        let g = if a >= 0 {
            (BigInt::from(k) - (BigInt::from(kp) << (a as usize)))
                .abs()
                .to_f64()
                .unwrap_or(f64::INFINITY)
        } else {
            let s = (-a) as usize;
            let num = ((BigInt::from(k) << s) - BigInt::from(kp)).abs();
            let num = num.to_f64().unwrap_or(f64::INFINITY);
            num * (-(s as f64)).exp2()
        };
        gap = gap.max(g);
    }
    Ok(gap)
}

/// Index of `phi_lambda`'s component `mu`: for `mu = (i, m, e)` and
/// `lambda = (j, k)` returns `(i + j, m + 2^i k, e)`.
pub fn shift(mu: &ScaleSpaceIndex, lambda: &ScaleSpaceIndex) -> Result<ScaleSpaceIndex, LatticeError> {
    check_dims(mu, lambda)?;
    let j = mu.j.checked_add(lambda.j).ok_or(LatticeError::Overflow)?;
    let k = mu
        .k
        .iter()
        .zip(&lambda.k)
        .map(|(&m, &k)| {
            let scaled = scale_pow2(k, mu.j)?;
            m.checked_add(scaled).ok_or(LatticeError::Overflow)
        })
        .collect::<Result<Position, _>>()?;
    Ok(ScaleSpaceIndex { j, k, e: mu.e })
}

fn scale_pow2(k: i64, p: i64) -> Result<i64, LatticeError> {
    if k == 0 {
        return Ok(0);
    }
    if p >= 0 {
        if p >= 63 {
            return Err(LatticeError::Overflow);
        }
        k.checked_mul(1i64 << p).ok_or(LatticeError::Overflow)
    } else {
        let s = -p;
        if s >= 63 {
            return Err(LatticeError::Incompatible);
        }
        let q = k >> s;
        if q << s == k {
            Ok(q)
        } else {
            Err(LatticeError::Incompatible)
        }
    }
}

/// Whether the cube of `mu` lies inside the cube of `lambda`. Orientations are
/// ignored.
pub fn contains(lambda: &ScaleSpaceIndex, mu: &ScaleSpaceIndex) -> Result<bool, LatticeError> {
    check_dims(lambda, mu)?;
    Ok(cube_contains(&lambda.cube(), &mu.cube()))
}

pub(crate) fn cube_contains(outer: &Cube, inner: &Cube) -> bool {
    if inner.j < outer.j {
        return false;
    }
    let delta = (inner.j - outer.j).min(63) as u32;
    outer
        .k
        .iter()
        .zip(&inner.k)
        .all(|(&ko, &ki)| (ki >> delta) == ko)
}

/// Chain of enclosing cubes at levels `j(lambda) - 1` down to `up_to_level`,
/// finest first. Orientation is inherited.
pub fn ancestors(lambda: &ScaleSpaceIndex, up_to_level: i64) -> Vec<ScaleSpaceIndex> {
    let mut out = Vec::new();
    let mut cur = lambda.clone();
    while cur.j > up_to_level {
        cur = ScaleSpaceIndex {
            j: cur.j - 1,
            k: cur.k.iter().map(|&x| x >> 1).collect(),
            e: cur.e,
        };
        out.push(cur.clone());
    }
    out
}
