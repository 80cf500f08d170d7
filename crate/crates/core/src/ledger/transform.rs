use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use super::WavenumberMap;
use crate::sequences::{radical_inverse, Family};

fn level_of(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

/// Normalized fast Walsh–Hadamard transform in natural (Hadamard) order:
/// `out[κ] = 2^-m Σ_i values[i] (-1)^{popcount(i & κ)}`.
pub fn fwht(values: &[f64]) -> Result<Vec<f64>> {
    let m = level_of(values.len())?;
    let mut data = values.to_vec();
    let n = data.len();
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    let scale = (-(m as f64)).exp2();
    data.iter_mut().for_each(|v| *v *= scale);
    Ok(data)
}

/// Map from ledger index `κ` to DFT frequency `κ'` at level `m`.
///
/// Built level by level: the two level-`m` indices `κ` and `κ + 2^{m-1}` share
/// the level-`(m-1)` frequency `c` modulo `2^{m-1}`, and the lower index gets
/// whichever of `c`, `c + 2^{m-1}` is closer to zero modulo `2^m`. Conjugate
/// frequencies of a real integrand thus sit at comparable indices.
pub fn lattice_frequency_map(m: u32) -> Vec<usize> {
    let mut map = vec![0usize];
    for level in 1..=m {
        let half = 1usize << (level - 1);
        let quarter2 = half; // 2·(2^level / 4)
        let mut next = vec![0usize; 2 * half];
        for (k, &c) in map.iter().enumerate() {
            // c ≤ 2^level/4  ⇔  2c ≤ half
            let (low, high) = if 2 * c <= quarter2 { (c, c + half) } else { (c + half, c) };
            next[k] = low;
            next[k + half] = high;
        }
        map = next;
    }
    map
}

/// Lattice discrete Fourier coefficients of data given in van der Corput
/// sequence order, normalized by `2^-m` and returned in ledger (`κ`) order.
pub fn lattice_dft(values: &[f64]) -> Result<Vec<Complex64>> {
    let buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    lattice_dft_complex(&buf)
}

/// Complex-input form of [`lattice_dft`].
pub fn lattice_dft_complex(values: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = level_of(values.len())?;
    let n = values.len();
    let mut natural: Vec<Complex64> = (0..n).map(|j| values[radical_inverse(j as u64, m) as usize]).collect();
    if n > 1 {
        FftPlanner::new().plan_fft_forward(n).process(&mut natural);
    }
    let scale = 1.0 / n as f64;
    let map = lattice_frequency_map(m);
    Ok(map.iter().map(|&f| natural[f] * scale).collect())
}

/// Signed (digital) or complex (lattice) discrete coefficients, in transform
/// order unless [`Spectrum::permuted`].
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Walsh(Vec<f64>),
    Fourier(Vec<Complex64>),
}

impl Spectrum {
    pub fn compute(values: &[f64], family: Family) -> Result<Spectrum> {
        Ok(match family {
            Family::Digital => Spectrum::Walsh(fwht(values)?),
            Family::Lattice => Spectrum::Fourier(lattice_dft(values)?),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Spectrum::Walsh(v) => v.len(),
            Spectrum::Fourier(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, kappa: usize) -> Complex64 {
        match self {
            Spectrum::Walsh(v) => Complex64::new(v[kappa], 0.0),
            Spectrum::Fourier(v) => v[kappa],
        }
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        match self {
            Spectrum::Walsh(v) => v.iter().map(|x| x.abs()).collect(),
            Spectrum::Fourier(v) => v.iter().map(|x| x.norm()).collect(),
        }
    }

    /// The coefficients rearranged into the order of `map`.
    pub fn permuted(&self, map: &WavenumberMap) -> Spectrum {
        match self {
            Spectrum::Walsh(v) => Spectrum::Walsh(map.apply(v)),
            Spectrum::Fourier(v) => Spectrum::Fourier(map.apply(v)),
        }
    }
}
