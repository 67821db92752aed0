use std::fmt::Write as _;

use super::{SynthError, WaveletFamily};

/// Grid on `[0, 2^j_box)^d` with spacing `2^-j_fine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    pub dim: usize,
    pub j_box: u32,
    pub j_fine: i64,
}

/// Keeps sample counts addressable and transforms cheap enough to be useful.
const MAX_SAMPLES_LOG2: i64 = 26;

impl GridShape {
    pub fn new(dim: usize, j_box: u32, j_fine: i64) -> Result<Self, SynthError> {
        if dim == 0 {
            return Err(SynthError::BadShape("dimension must be >= 1".into()));
        }
        let side_log2 = j_box as i64 + j_fine;
        if side_log2 < 0 {
            return Err(SynthError::BadShape(format!("j_box + j_fine = {side_log2} < 0")));
        }
        if side_log2 * dim as i64 > MAX_SAMPLES_LOG2 {
            return Err(SynthError::BadShape(format!("2^{} samples is too many", side_log2 * dim as i64)));
        }
        Ok(Self { dim, j_box, j_fine })
    }

    /// `log2` of the samples per axis.
    pub fn side_log2(&self) -> u32 {
        (self.j_box as i64 + self.j_fine) as u32
    }

    pub fn side(&self) -> usize {
        1usize << self.side_log2()
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Most cascade levels the grid allows (down to one coefficient per axis).
    pub fn max_levels(&self) -> usize {
        self.side_log2() as usize
    }

    /// Coarsest detail level reachable.
    pub fn coarsest_level(&self) -> i64 {
        -(self.j_box as i64)
    }

    /// Sample spacing `2^-j_fine`.
    pub fn spacing(&self) -> f64 {
        (-self.j_fine as f64).exp2()
    }

    /// Coordinates of sample `flat` (row-major, first axis slowest).
    pub fn coords(&self, flat: usize) -> Vec<usize> {
        let side = self.side();
        let mut out = vec![0; self.dim];
        let mut rest = flat;
        for c in out.iter_mut().rev() {
            *c = rest % side;
            rest /= side;
        }
        out
    }

    pub fn flat(&self, coords: &[usize]) -> usize {
        let side = self.side();
        coords.iter().fold(0, |acc, &c| acc * side + c)
    }

    /// Left-corner position of sample `flat` in the box.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.coords(flat).into_iter().map(|c| c as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    shape: GridShape,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(shape: GridShape, samples: Vec<f64>) -> Result<Self, SynthError> {
        if samples.len() != shape.len() {
            return Err(SynthError::NonDyadic(samples.len()));
        }
        Ok(Self { shape, samples })
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            samples: vec![0.0; shape.len()],
        }
    }

    /// Samples `f` at the left corners of the grid cells.
    pub fn from_fn(shape: GridShape, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples = (0..shape.len()).map(|i| f(&shape.point(i))).collect();
        Self { shape, samples }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// `L^2` norm of the piecewise-constant interpolant.
    pub fn l2_norm(&self) -> f64 {
        let cell = (-(self.shape.dim as f64) * self.shape.j_fine as f64).exp2();
        (self.samples.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Header `grid d j_box j_fine family`, then one row per line (rows run
    /// along the last axis).
    pub fn to_text(&self, family: WaveletFamily) -> String {
        let s = &self.shape;
        let mut out = format!("grid {} {} {} {}\n", s.dim, s.j_box, s.j_fine, family);
        for row in self.samples.chunks(s.side()) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    /// Parses either the headed format of [`GridFunction::to_text`] or a plain
    /// numeric grid. Plain input with one value per line is 1-d; a square
    /// block of rows is 2-d. Plain grids get `j_box = 0`.
    pub fn from_text(text: &str) -> Result<(Self, Option<WaveletFamily>), SynthError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let header = match lines.peek() {
            Some((_, l)) if l.starts_with("grid") => Some(lines.next().expect("peeked")),
            _ => None,
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, l) in lines {
            let row = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| SynthError::Parse { line, msg: e.to_string() })?;
            rows.push(row);
        }
        let samples: Vec<f64> = rows.iter().flatten().copied().collect();
        if let Some((line, h)) = header {
            let t: Vec<&str> = h.split_whitespace().collect();
            let bad = |msg: &str| SynthError::Parse { line, msg: msg.into() };
            if t.len() != 5 {
                return Err(bad("expected `grid d j_box j_fine family`"));
            }
            let dim: usize = t[1].parse().map_err(|_| bad("bad dimension"))?;
            let j_box: u32 = t[2].parse().map_err(|_| bad("bad j_box"))?;
            let j_fine: i64 = t[3].parse().map_err(|_| bad("bad j_fine"))?;
            let family: WaveletFamily = t[4].parse()?;
            let shape = GridShape::new(dim, j_box, j_fine)?;
            return Ok((Self::new(shape, samples)?, Some(family)));
        }
        let dim = if rows.iter().all(|r| r.len() == 1) {
            1
        } else if rows.iter().all(|r| r.len() == rows.len()) {
            2
        } else {
            return Err(SynthError::BadShape("plain grid is neither a column nor a square block".into()));
        };
        let side = if dim == 1 { samples.len() } else { rows.len() };
        if !side.is_power_of_two() {
            return Err(SynthError::NonDyadic(samples.len()));
        }
        let shape = GridShape::new(dim, 0, side.trailing_zeros() as i64)?;
        Ok((Self::new(shape, samples)?, None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_arithmetic() {
        let s = GridShape::new(2, 1, 3).unwrap();
        assert_eq!(s.side(), 16);
        assert_eq!(s.len(), 256);
        assert_eq!(s.max_levels(), 4);
        assert_eq!(s.coarsest_level(), -1);
        assert_eq!(s.coords(s.flat(&[3, 9])), vec![3, 9]);
        assert_eq!(s.point(s.flat(&[4, 1])), vec![0.5, 0.125]);
        assert!(GridShape::new(1, 0, -1).is_err());
        assert!(GridShape::new(2, 0, 20).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = GridShape::new(2, 0, 2).unwrap();
        let g = GridFunction::from_fn(s, |x| x[0] - 0.1 * x[1]);
        let (back, fam) = GridFunction::from_text(&g.to_text(WaveletFamily::Daubechies4)).unwrap();
        assert_eq!(back, g);
        assert_eq!(fam, Some(WaveletFamily::Daubechies4));
    }

    #[test]
    fn plain_grids() {
        let (g, fam) = GridFunction::from_text("1\n2\n3\n4\n").unwrap();
        assert_eq!(g.shape(), GridShape::new(1, 0, 2).unwrap());
        assert_eq!(fam, None);
        let (g, _) = GridFunction::from_text("1 2\n3 4\n").unwrap();
        assert_eq!(g.shape().dim, 2);
        assert_eq!(g.samples(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(GridFunction::from_text("1\n2\n3\n"), Err(SynthError::NonDyadic(3))));
        assert!(GridFunction::from_text("1 2\n3\n").is_err());
        assert!(GridFunction::from_text("grid 1 0 2 haar\n1 2 3\n").is_err());
    }

    #[test]
    fn l2_norm_of_constant() {
        let s = GridShape::new(1, 2, 3).unwrap();
        let g = GridFunction::from_fn(s, |_| 3.0);
        // |box| = 4
        assert!((g.l2_norm() - 6.0).abs() < 1e-14);
    }
}
