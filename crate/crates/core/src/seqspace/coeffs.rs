use std::fmt::Write as _;

use crate::lattice::{self, LatticeError, Position, ScaleSpaceIndex};

use super::SeqError;

/// Finite wavelet expansion `f = sum d_lambda psi_lambda`.
///
/// Entries are kept sorted in lattice order with no stored zeros, so two maps
/// representing the same function compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMap {
    dim: usize,
    entries: Vec<(ScaleSpaceIndex, f64)>,
}

impl CoeffMap {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds a map from distinct indices; zeros are dropped.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, SeqError>
    where
        I: IntoIterator<Item = (ScaleSpaceIndex, f64)>,
    {
        let mut v: Vec<_> = Vec::new();
        for (ix, val) in entries {
            Self::validate(dim, &ix, val)?;
            if val != 0.0 {
                v.push((ix, val));
            }
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = v.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(SeqError::DuplicateIndex(w[0].0.to_string()));
        }
        Ok(Self { dim, entries: v })
    }

    /// Builds a map adding the values of repeated indices, in input order.
    pub fn accumulate<I>(dim: usize, entries: I) -> Result<Self, SeqError>
    where
        I: IntoIterator<Item = (ScaleSpaceIndex, f64)>,
    {
        let mut v: Vec<(usize, ScaleSpaceIndex, f64)> = Vec::new();
        for (pos, (ix, val)) in entries.into_iter().enumerate() {
            Self::validate(dim, &ix, val)?;
            v.push((pos, ix, val));
        }
        // Stable on input position so the addition order is the input order.
        v.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut out: Vec<(ScaleSpaceIndex, f64)> = Vec::with_capacity(v.len());
        for (_, ix, val) in v {
            match out.last_mut() {
                Some(last) if last.0 == ix => last.1 += val,
                _ => out.push((ix, val)),
            }
        }
        out.retain(|e| e.1 != 0.0);
        Ok(Self { dim, entries: out })
    }

    fn validate(dim: usize, ix: &ScaleSpaceIndex, val: f64) -> Result<(), SeqError> {
        if ix.dim() != dim {
            return Err(LatticeError::DimensionMismatch(dim, ix.dim()).into());
        }
        if !val.is_finite() {
            return Err(SeqError::NonFinite(ix.to_string()));
        }
        Ok(())
    }

    /// Internal constructor for already-sorted, zero-free, distinct entries.
    pub(crate) fn from_sorted_unchecked(dim: usize, entries: Vec<(ScaleSpaceIndex, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|e| e.1 != 0.0));
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&ScaleSpaceIndex, f64)> + Clone + '_ {
        self.entries.iter().map(|(i, v)| (i, *v))
    }

    pub fn indices(&self) -> impl Iterator<Item = &ScaleSpaceIndex> + '_ {
        self.entries.iter().map(|e| &e.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn get(&self, ix: &ScaleSpaceIndex) -> Option<f64> {
        self.entries
            .binary_search_by(|e| e.0.cmp(ix))
            .ok()
            .map(|p| self.entries[p].1)
    }

    pub fn contains_index(&self, ix: &ScaleSpaceIndex) -> bool {
        self.get(ix).is_some()
    }

    /// Entries whose index satisfies `keep`.
    pub fn filter<F: FnMut(&ScaleSpaceIndex, f64) -> bool>(&self, mut keep: F) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|(i, v)| keep(i, *v))
                .cloned()
                .collect(),
        }
    }

    /// Drops entries with modulus at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        self.filter(|_, v| v.abs() > tol)
    }

    /// Entry-wise `self + other`.
    pub fn add(&self, other: &CoeffMap) -> Result<Self, SeqError> {
        self.combine(other, |a, b| a + b)
    }

    /// Entry-wise `self - other`.
    pub fn sub(&self, other: &CoeffMap) -> Result<Self, SeqError> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &CoeffMap, op: impl Fn(f64, f64) -> f64) -> Result<Self, SeqError> {
        if self.dim != other.dim {
            return Err(LatticeError::DimensionMismatch(self.dim, other.dim).into());
        }
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(x), None) => (x.0.clone(), op(x.1, 0.0), true, false),
                (None, Some(y)) => (y.0.clone(), op(0.0, y.1), false, true),
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    std::cmp::Ordering::Less => (x.0.clone(), op(x.1, 0.0), true, false),
                    std::cmp::Ordering::Greater => (y.0.clone(), op(0.0, y.1), false, true),
                    std::cmp::Ordering::Equal => (x.0.clone(), op(x.1, y.1), true, true),
                },
            };
            if next.2 {
                a.next();
            }
            if next.3 {
                b.next();
            }
            if next.1 != 0.0 {
                out.push((next.0, next.1));
            }
        }
        Ok(Self {
            dim: self.dim,
            entries: out,
        })
    }

    /// Realizes `phi -> phi_lambda`: every index is shifted by `lambda`,
    /// values are unchanged.
    pub fn rescale(&self, lambda: &ScaleSpaceIndex) -> Result<Self, SeqError> {
        if lambda.dim() != self.dim {
            return Err(LatticeError::DimensionMismatch(self.dim, lambda.dim()).into());
        }
        let mut out = self
            .entries
            .iter()
            .map(|(i, v)| Ok((lattice::shift(i, lambda)?, *v)))
            .collect::<Result<Vec<_>, LatticeError>>()?;
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self {
            dim: self.dim,
            entries: out,
        })
    }

    /// Text rendering: one `j k1 [k2 ...] e value` line per entry, lattice order,
    /// shortest round-trip decimal values.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (ix, v) in self.iter() {
            let _ = write!(s, "{}", ix.j());
            for k in ix.k() {
                let _ = write!(s, " {k}");
            }
            let _ = writeln!(s, " {} {:?}", ix.e(), v);
        }
        s
    }

    /// Parses [`CoeffMap::to_text`] output. Blank lines and `#` comments are
    /// skipped. The dimension is inferred from the column count unless given.
    pub fn from_text(text: &str, dim: Option<usize>) -> Result<Self, SeqError> {
        let mut entries = Vec::new();
        let mut inferred = dim;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || SeqError::Parse {
                line: lineno + 1,
                msg: line.to_string(),
            };
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() < 4 {
                return Err(bad());
            }
            let d = cols.len() - 3;
            match inferred {
                None => inferred = Some(d),
                Some(expected) if expected != d => return Err(bad()),
                _ => {}
            }
            let j = cols[0].parse::<i64>().map_err(|_| bad())?;
            let k = cols[1..=d]
                .iter()
                .map(|c| c.parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Position, _>>()?;
            let e = cols[d + 1].parse::<u16>().map_err(|_| bad())?;
            let v = cols[d + 2].parse::<f64>().map_err(|_| bad())?;
            let ix = ScaleSpaceIndex::new(j, k, e).map_err(|_| bad())?;
            entries.push((ix, v));
        }
        let dim = inferred.ok_or(SeqError::UnknownDimension)?;
        Self::from_entries(dim, entries)
    }
}
