use crate::lattice::ScaleSpaceIndex;
use crate::seqspace::{CoeffMap, SpaceSpec};

use super::wavelet::{analysis_step, synthesis_step};
use super::{GridFunction, GridShape, SynthError, WaveletFamily};

/// Output of [`analyze`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletAnalysis {
    pub shape: GridShape,
    pub family: WaveletFamily,
    pub space: SpaceSpec,
    pub levels: usize,
    /// Level of the retained scaling band.
    pub coarse_level: i64,
    /// `L^2`-normalized scaling coefficients at `coarse_level`, row-major.
    pub coarse: Vec<f64>,
    /// `X`-normalized detail coefficients.
    pub details: CoeffMap,
}

impl WaveletAnalysis {
    /// `||coarse||^2 + sum |d^{L2}|^2`.
    pub fn l2_energy(&self) -> f64 {
        let coarse: f64 = self.coarse.iter().map(|v| v * v).sum();
        let details: f64 = self
            .details
            .iter()
            .map(|(ix, v)| {
                let w = v * to_l2_factor(&self.space, ix.j());
                w * w
            })
            .sum();
        coarse + details
    }

    /// `l^2` norm of the coarse band.
    pub fn coarse_mass(&self) -> f64 {
        self.coarse.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Inverse transform including the coarse band.
    pub fn reconstruct(&self) -> Result<GridFunction, SynthError> {
        let fine = inverse(self.shape, self.family, &self.space, self.coarse_level, self.coarse.clone(), &self.details)?;
        Ok(to_samples(self.shape, fine))
    }
}

/// `d^{L2} = d^X 2^{(r - d/2) j}`.
fn to_l2_factor(space: &SpaceSpec, j: i64) -> f64 {
    ((space.scaling_exponent() - space.dim as f64 / 2.0) * j as f64).exp2()
}

fn check_space(shape: GridShape, space: &SpaceSpec) -> Result<(), SynthError> {
    if shape.dim != space.dim {
        return Err(crate::lattice::LatticeError::DimensionMismatch(shape.dim, space.dim).into());
    }
    Ok(())
}

/// Samples in flat order for a grid of `side^dim` points.
fn lines(side: usize, dim: usize, axis: usize) -> impl Iterator<Item = usize> {
    let stride = side.pow((dim - 1 - axis) as u32);
    (0..side.pow(dim as u32)).filter(move |p| (p / stride) % side == 0)
}

fn forward_level(a: &mut [f64], side: usize, dim: usize, h: &[f64], g: &[f64]) {
    let half = side / 2;
    let (mut buf, mut lo, mut hi) = (vec![0.0; side], vec![0.0; half], vec![0.0; half]);
    for axis in 0..dim {
        let stride = side.pow((dim - 1 - axis) as u32);
        for start in lines(side, dim, axis) {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = a[start + i * stride];
            }
            analysis_step(&buf, h, g, &mut lo, &mut hi);
            for k in 0..half {
                a[start + k * stride] = lo[k];
                a[start + (k + half) * stride] = hi[k];
            }
        }
    }
}

fn inverse_level(a: &mut [f64], side: usize, dim: usize, h: &[f64], g: &[f64]) {
    let half = side / 2;
    let mut out = vec![0.0; side];
    let (mut lo, mut hi) = (vec![0.0; half], vec![0.0; half]);
    for axis in (0..dim).rev() {
        let stride = side.pow((dim - 1 - axis) as u32);
        for start in lines(side, dim, axis) {
            for k in 0..half {
                lo[k] = a[start + k * stride];
                hi[k] = a[start + (k + half) * stride];
            }
            synthesis_step(&lo, &hi, h, g, &mut out);
            for (i, v) in out.iter().enumerate() {
                a[start + i * stride] = *v;
            }
        }
    }
}

fn unflatten(mut p: usize, side: usize, dim: usize) -> Vec<usize> {
    let mut c = vec![0; dim];
    for x in c.iter_mut().rev() {
        *x = p % side;
        p /= side;
    }
    c
}

fn flatten(c: &[usize], side: usize) -> usize {
    c.iter().fold(0, |acc, &x| acc * side + x)
}

/// Periodic cascade over `levels` levels; details re-normalized to `x`.
pub fn analyze(
    g: &GridFunction,
    family: WaveletFamily,
    levels: usize,
    x: &SpaceSpec,
) -> Result<WaveletAnalysis, SynthError> {
    let shape = g.shape();
    check_space(shape, x)?;
    if levels > shape.max_levels() {
        return Err(SynthError::LevelOverflow {
            levels,
            max: shape.max_levels(),
        });
    }
    let (h, hp) = (family.lowpass(), family.highpass());
    let dim = shape.dim;
    let scale = (-(dim as f64) * shape.j_fine as f64 / 2.0).exp2();
    let mut approx: Vec<f64> = g.samples().iter().map(|v| v * scale).collect();
    let mut side = shape.side();
    let mut entries = Vec::new();
    for step in 0..levels {
        let j = shape.j_fine - 1 - step as i64;
        forward_level(&mut approx, side, dim, &h, &hp);
        let half = side / 2;
        let to_x = 1.0 / to_l2_factor(x, j);
        let mut next = vec![0.0; half.pow(dim as u32)];
        for (p, &v) in approx.iter().enumerate() {
            let c = unflatten(p, side, dim);
            let e = c.iter().enumerate().fold(0u16, |acc, (i, &ci)| acc | (((ci >= half) as u16) << i));
            let k: Vec<usize> = c.iter().map(|&ci| ci % half).collect();
            if e == 0 {
                next[flatten(&k, half)] = v;
            } else if v != 0.0 {
                let kk: Vec<i64> = k.iter().map(|&x| x as i64).collect();
                entries.push((ScaleSpaceIndex::new(j, kk, e)?, v * to_x));
            }
        }
        approx = next;
        side = half;
    }
    Ok(WaveletAnalysis {
        shape,
        family,
        space: *x,
        levels,
        coarse_level: shape.j_fine - levels as i64,
        coarse: approx,
        details: CoeffMap::from_entries(dim, entries)?,
    })
}

fn check_range(shape: GridShape, ix: &ScaleSpaceIndex, coarse_level: i64) -> Result<(), SynthError> {
    let j = ix.j();
    let out = || SynthError::OutOfRange(ix.to_string());
    if j < coarse_level || j >= shape.j_fine {
        return Err(out());
    }
    let side = 1i64 << (shape.j_box as i64 + j);
    if ix.k().iter().any(|&k| k < 0 || k >= side) {
        return Err(out());
    }
    Ok(())
}

fn inverse(
    shape: GridShape,
    family: WaveletFamily,
    x: &SpaceSpec,
    coarse_level: i64,
    coarse: Vec<f64>,
    details: &CoeffMap,
) -> Result<Vec<f64>, SynthError> {
    let dim = shape.dim;
    for (ix, _) in details.iter() {
        check_range(shape, ix, coarse_level)?;
    }
    let (h, hp) = (family.lowpass(), family.highpass());
    let mut approx = coarse;
    let mut entries = details.iter().peekable();
    for j in coarse_level..shape.j_fine {
        let half = 1usize << (shape.j_box as i64 + j);
        let side = 2 * half;
        let mut a = vec![0.0; side.pow(dim as u32)];
        for (p, &v) in approx.iter().enumerate() {
            a[flatten(&unflatten(p, half, dim), side)] = v;
        }
        let factor = to_l2_factor(x, j);
        while let Some((ix, v)) = entries.next_if(|(ix, _)| ix.j() == j) {
            let c: Vec<usize> = ix
                .k()
                .iter()
                .enumerate()
                .map(|(i, &k)| k as usize + if ix.e() >> i & 1 == 1 { half } else { 0 })
                .collect();
            a[flatten(&c, side)] = v * factor;
        }
        inverse_level(&mut a, side, dim, &h, &hp);
        approx = a;
    }
    Ok(approx)
}

fn to_samples(shape: GridShape, fine: Vec<f64>) -> GridFunction {
    let scale = ((shape.dim as f64) * shape.j_fine as f64 / 2.0).exp2();
    GridFunction::new(shape, fine.into_iter().map(|v| v * scale).collect()).expect("shape-consistent")
}

/// Renders `c` (read against `x`-normalized wavelets) on a grid of `shape`,
/// with a zero coarse band.
pub fn synthesize(
    c: &CoeffMap,
    family: WaveletFamily,
    shape: GridShape,
    x: &SpaceSpec,
) -> Result<GridFunction, SynthError> {
    check_space(shape, x)?;
    if c.dim() != shape.dim {
        return Err(crate::lattice::LatticeError::DimensionMismatch(shape.dim, c.dim()).into());
    }
    let Some(j0) = c.indices().map(|ix| ix.j()).min() else {
        return Ok(GridFunction::zeros(shape));
    };
    if j0 < shape.coarsest_level() {
        let bad = c.indices().find(|ix| ix.j() == j0).expect("min exists");
        return Err(SynthError::OutOfRange(bad.to_string()));
    }
    let coarse = vec![0.0; (1usize << (shape.j_box as i64 + j0)).pow(shape.dim as u32)];
    let fine = inverse(shape, family, x, j0, coarse, c)?;
    Ok(to_samples(shape, fine))
}

/// Indices whose wavelet support crosses the periodic seam of the box.
pub fn wrapping_indices(c: &CoeffMap, family: WaveletFamily, shape: GridShape) -> Vec<ScaleSpaceIndex> {
    let reach = family.filter_len() as i64 - 1;
    c.indices()
        .filter(|ix| {
            let side_log2 = shape.j_box as i64 + ix.j();
            (0..=62).contains(&side_log2) && ix.k().iter().any(|&k| k + reach > 1i64 << side_log2)
        })
        .cloned()
        .collect()
}
