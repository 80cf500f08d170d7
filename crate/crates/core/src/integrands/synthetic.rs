//! Synthetic integrands with known integrals, including ones built to break
//! the steady-decay assumption.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Integrand;
use crate::ledger::SparseSpectrum;
use crate::sequences::Family;

/// `Π_j (1 + a (x_j − ½))`, integral 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothProduct {
    pub dimension: usize,
    pub amplitude: f64,
}

impl SmoothProduct {
    pub fn new(dimension: usize) -> Self {
        SmoothProduct { dimension, amplitude: 0.1 }
    }

    pub fn integral(&self) -> f64 {
        1.0
    }
}

impl Integrand for SmoothProduct {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x.iter().map(|&v| 1.0 + self.amplitude * (v - 0.5)).product();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub dimension: usize,
    pub value: f64,
}

impl Integrand for Constant {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = self.value;
    }
}

const SPIKY_TERMS: usize = 64;
const SPIKY_SEED: u64 = 0x5350_494b;
/// Frequencies of the lattice noise.
const COMB_BAND: std::ops::Range<i64> = 33..64;
/// The lattice comb has period `2^-COMB_LEVEL` in `x_1`.
const COMB_LEVEL: i32 = 10;

/// `x_1` plus high-wavenumber noise in `x_1`.
///
/// For the digital family the noise is a sum of Walsh functions with
/// wavenumbers in `[2^10, 2^11)`. Linear scrambling keeps the leading digit of
/// a wavenumber, so from level 11 on the noise sits in tier 11 only, while at
/// level 10 it aliases into lower tiers that depend on the scrambling.
///
/// For the lattice family the noise is `t(x_1) (1 + q(2^10 x_1))` where `t` is
/// a sum of cosines with frequencies in `[33, 64)` and `q` the unit square
/// wave. On the 2^10 nodes `q` is constant, so depending on the shift the
/// noise is either doubled or exactly absent. On 2^11 nodes it alternates and
/// the noise shows up in full. In the second case the level-10 data look
/// smooth while tier 7 jumps at level 11.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikySpectrum {
    dimension: usize,
    noise: SparseSpectrum,
    comb: bool,
}

impl SpikySpectrum {
    pub fn new(family: Family, dimension: usize) -> Self {
        let dimension = dimension.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(SPIKY_SEED);
        let embed = |k: i64| {
            let mut v = vec![0i64; dimension];
            v[0] = k;
            v
        };
        match family {
            Family::Digital => {
                let amp = 1.0 / SPIKY_TERMS as f64;
                let terms = (0..SPIKY_TERMS)
                    .map(|_| {
                        let k = rng.random_range(1024..2048u64);
                        let sign = if rng.random::<bool>() { amp } else { -amp };
                        let mut v = vec![0u64; dimension];
                        v[0] = k;
                        (v, sign)
                    })
                    .collect();
                SpikySpectrum { dimension, noise: SparseSpectrum::Walsh(terms), comb: false }
            }
            Family::Lattice => {
                let terms = COMB_BAND
                    .map(|k| {
                        let phase = rng.random::<f64>() * std::f64::consts::TAU;
                        (embed(k), Complex64::from_polar(1.0 / 16.0, phase))
                    })
                    .collect();
                SpikySpectrum { dimension, noise: SparseSpectrum::Fourier(terms), comb: true }
            }
        }
    }

    /// The square wave is orthogonal to every noise frequency, so the noise
    /// integrates to zero either way.
    pub fn integral(&self) -> f64 {
        0.5
    }

    pub fn noise(&self) -> &SparseSpectrum {
        &self.noise
    }
}

impl Integrand for SpikySpectrum {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        let mut noise = self.noise.value(x);
        if self.comb {
            let u = (x[0] * 2f64.powi(COMB_LEVEL)).fract();
            noise *= if u < 0.5 { 2.0 } else { 0.0 };
        }
        out[0] = x[0] + noise;
    }
}

/// `1 + h Π_j max(0, 1 − |x_j − c_j|/w)`: a narrow tent that sparse samples
/// easily miss. Integral `1 + h w^d` while the tent stays inside the cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Needle {
    pub center: Vec<f64>,
    pub width: f64,
    pub height: f64,
}

impl Needle {
    /// Tent of unit mass and half-width 0.01 at `(0.37, 0.71, ...)`.
    pub fn new(dimension: usize) -> Self {
        let center = (0..dimension).map(|j| if j % 2 == 0 { 0.37 } else { 0.71 }).collect();
        let width: f64 = 0.01;
        Needle { center, width, height: width.powi(-(dimension as i32)) }
    }

    pub fn integral(&self) -> f64 {
        1.0 + self.height * self.width.powi(self.center.len() as i32)
    }
}

impl Integrand for Needle {
    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        let tent: f64 =
            x.iter().zip(&self.center).map(|(&xj, &cj)| (1.0 - (xj - cj).abs() / self.width).max(0.0)).product();
        out[0] = 1.0 + self.height * tent;
    }
}
