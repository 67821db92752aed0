use std::fmt;
use std::str::FromStr;

use super::SeqError;

/// Function-space family. Exponents use `f64::INFINITY` for `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceFamily {
    Besov { s: f64, p: f64, a: f64 },
    TriebelLizorkin { s: f64, p: f64, a: f64 },
    Bmo,
    /// Alias for `TriebelLizorkin { s: 0, p: q, a: 2 }`.
    Lebesgue { q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceSpec {
    pub family: SpaceFamily,
    pub dim: usize,
}

/// Relative tolerance for comparing scaling exponents of two spaces.
pub const SCALING_TOL: f64 = 1e-12;

impl SpaceSpec {
    pub fn new(family: SpaceFamily, dim: usize) -> Result<Self, SeqError> {
        let spec = Self { family, dim };
        spec.validate()?;
        Ok(spec)
    }

    pub fn besov(s: f64, p: f64, a: f64, dim: usize) -> Result<Self, SeqError> {
        Self::new(SpaceFamily::Besov { s, p, a }, dim)
    }

    pub fn triebel(s: f64, p: f64, a: f64, dim: usize) -> Result<Self, SeqError> {
        Self::new(SpaceFamily::TriebelLizorkin { s, p, a }, dim)
    }

    pub fn lebesgue(q: f64, dim: usize) -> Result<Self, SeqError> {
        Self::new(SpaceFamily::Lebesgue { q }, dim)
    }

    pub fn bmo(dim: usize) -> Result<Self, SeqError> {
        Self::new(SpaceFamily::Bmo, dim)
    }

    fn validate(&self) -> Result<(), SeqError> {
        if self.dim == 0 {
            return Err(SeqError::InvalidSpace("dimension must be >= 1".into()));
        }
        let fine = |p: f64, a: f64, finite_p: bool| -> Result<(), SeqError> {
            if !(p >= 1.0) || (finite_p && p.is_infinite()) {
                return Err(SeqError::InvalidSpace(format!("need 1 <= p < inf, got {p}")));
            }
            if !(a >= 1.0) {
                return Err(SeqError::InvalidSpace(format!("need 1 <= a <= inf, got {a}")));
            }
            Ok(())
        };
        match self.family {
            SpaceFamily::Besov { s, p, a } | SpaceFamily::TriebelLizorkin { s, p, a } => {
                if !s.is_finite() {
                    return Err(SeqError::InvalidSpace("smoothness must be finite".into()));
                }
                // Besov targets may take p = inf; the integral form cannot.
                fine(p, a, !self.is_besov())
            }
            SpaceFamily::Lebesgue { q } => fine(q, 2.0, true),
            SpaceFamily::Bmo => Ok(()),
        }
    }

    /// Lebesgue resolved to its Triebel-Lizorkin form; other families unchanged.
    pub fn resolved(&self) -> SpaceFamily {
        match self.family {
            SpaceFamily::Lebesgue { q } => SpaceFamily::TriebelLizorkin { s: 0.0, p: q, a: 2.0 },
            f => f,
        }
    }

    /// Smoothness index (`0` for Lebesgue and BMO).
    pub fn smoothness(&self) -> f64 {
        match self.resolved() {
            SpaceFamily::Besov { s, .. } | SpaceFamily::TriebelLizorkin { s, .. } => s,
            _ => 0.0,
        }
    }

    /// Integrability index (`inf` for BMO).
    pub fn integrability(&self) -> f64 {
        match self.resolved() {
            SpaceFamily::Besov { p, .. } | SpaceFamily::TriebelLizorkin { p, .. } => p,
            _ => f64::INFINITY,
        }
    }

    /// `r = d/p - s` (`-s` when `p = inf`), zero for BMO.
    pub fn scaling_exponent(&self) -> f64 {
        match self.resolved() {
            SpaceFamily::Besov { s, p, .. } | SpaceFamily::TriebelLizorkin { s, p, .. } => {
                self.dim as f64 / p - s
            }
            _ => 0.0,
        }
    }

    /// Whether `self` and `other` share dimension and scaling exponent.
    pub fn same_scaling(&self, other: &SpaceSpec) -> bool {
        let (r1, r2) = (self.scaling_exponent(), other.scaling_exponent());
        self.dim == other.dim && (r1 - r2).abs() <= SCALING_TOL * r1.abs().max(r2.abs()).max(1.0)
    }

    pub fn is_besov(&self) -> bool {
        matches!(self.family, SpaceFamily::Besov { .. })
    }
}

fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:?}")
    }
}

fn parse_exp(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "Inf" | "infinity" => Some(f64::INFINITY),
        t => t.parse::<f64>().ok(),
    }
}

impl fmt::Display for SpaceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceFamily::Besov { s, p, a } => {
                write!(f, "besov {} {} {}", fmt_exp(s), fmt_exp(p), fmt_exp(a))
            }
            SpaceFamily::TriebelLizorkin { s, p, a } => {
                write!(f, "triebel {} {} {}", fmt_exp(s), fmt_exp(p), fmt_exp(a))
            }
            SpaceFamily::Lebesgue { q } => write!(f, "lebesgue {}", fmt_exp(q)),
            SpaceFamily::Bmo => f.write_str("bmo"),
        }
    }
}

impl FromStr for SpaceFamily {
    type Err = SeqError;

    /// Parses `besov s p a`, `triebel s p a`, `lebesgue q` or `bmo`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || SeqError::InvalidSpace(format!("cannot parse space `{text}`"));
        let toks: Vec<&str> = text.split_whitespace().collect();
        let nums = |n: usize| -> Result<Vec<f64>, SeqError> {
            if toks.len() != n + 1 {
                return Err(bad());
            }
            toks[1..].iter().map(|t| parse_exp(t).ok_or_else(bad)).collect()
        };
        match toks.first().map(|t| t.to_ascii_lowercase()).as_deref() {
            Some("besov") | Some("b") => {
                let v = nums(3)?;
                Ok(SpaceFamily::Besov { s: v[0], p: v[1], a: v[2] })
            }
            Some("triebel") | Some("f") => {
                let v = nums(3)?;
                Ok(SpaceFamily::TriebelLizorkin { s: v[0], p: v[1], a: v[2] })
            }
            Some("lebesgue") | Some("l") => Ok(SpaceFamily::Lebesgue { q: nums(1)?[0] }),
            Some("bmo") if toks.len() == 1 => Ok(SpaceFamily::Bmo),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (d={})", self.family, self.dim)
    }
}
