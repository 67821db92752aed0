use std::fmt;
use std::str::FromStr;

use super::SynthError;

/// Orthonormal compactly supported families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletFamily {
    Haar,
    /// Daubechies with two vanishing moments (filter length 4).
    Daubechies4,
}

impl WaveletFamily {
    pub const ALL: [WaveletFamily; 2] = [WaveletFamily::Haar, WaveletFamily::Daubechies4];

    /// Scaling (low-pass) filter `h`.
    pub fn lowpass(&self) -> Vec<f64> {
        match self {
            Self::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            Self::Daubechies4 => {
                let s3 = 3f64.sqrt();
                let den = 4.0 * std::f64::consts::SQRT_2;
                vec![(1.0 + s3) / den, (3.0 + s3) / den, (3.0 - s3) / den, (1.0 - s3) / den]
            }
        }
    }

    /// Wavelet (high-pass) filter `g[i] = (-1)^i h[L-1-i]`.
    pub fn highpass(&self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|i| if i % 2 == 0 { h[l - 1 - i] } else { -h[l - 1 - i] })
            .collect()
    }

    pub fn filter_len(&self) -> usize {
        self.lowpass().len()
    }

    pub fn vanishing_moments(&self) -> usize {
        self.filter_len() / 2
    }

    /// Largest violation of the orthonormal filter-bank identities
    /// (unit norm, even-shift orthogonality, `sum h = sqrt 2`, `sum g = 0`,
    /// `h` orthogonal to every even shift of `g`).
    pub fn filter_defect(&self) -> f64 {
        let (h, g) = (self.lowpass(), self.highpass());
        let l = h.len() as isize;
        let corr = |a: &[f64], b: &[f64], shift: isize| -> f64 {
            (0..l)
                .filter(|&i| i + shift >= 0 && i + shift < l)
                .map(|i| a[i as usize] * b[(i + shift) as usize])
                .sum()
        };
        let mut worst: f64 = 0.0;
        let mut shift = -(l - 1) / 2 * 2;
        while shift < l {
            let target = if shift == 0 { 1.0 } else { 0.0 };
            worst = worst.max((corr(&h, &h, shift) - target).abs());
            worst = worst.max((corr(&g, &g, shift) - target).abs());
            worst = worst.max(corr(&h, &g, shift).abs());
            shift += 2;
        }
        worst = worst.max((h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs());
        worst.max(g.iter().sum::<f64>().abs())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Haar => "haar",
            Self::Daubechies4 => "db4",
        }
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveletFamily {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(Self::Haar),
            "db4" | "daubechies4" | "d4" => Ok(Self::Daubechies4),
            other => Err(SynthError::BadShape(format!("unknown wavelet family `{other}`"))),
        }
    }
}

/// One periodic analysis step on `x` (even length): returns (low, high).
pub(crate) fn analysis_step(x: &[f64], h: &[f64], g: &[f64], lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len();
    for k in 0..n / 2 {
        let (mut a, mut d) = (0.0, 0.0);
        for (i, (hv, gv)) in h.iter().zip(g).enumerate() {
            let v = x[(2 * k + i) % n];
            a += hv * v;
            d += gv * v;
        }
        lo[k] = a;
        hi[k] = d;
    }
}

/// Adjoint of [`analysis_step`]; writes the reconstruction into `out`.
pub(crate) fn synthesis_step(lo: &[f64], hi: &[f64], h: &[f64], g: &[f64], out: &mut [f64]) {
    let n = out.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..n / 2 {
        for (i, (hv, gv)) in h.iter().zip(g).enumerate() {
            out[(2 * k + i) % n] += hv * lo[k] + gv * hi[k];
        }
    }
}
