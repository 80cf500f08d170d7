use std::f64::consts::TAU;

use num_complex::Complex64;

use super::transform::{lattice_frequency_map, Spectrum};
use super::CoefficientLedger;
use crate::error::{Error, Result};
use crate::integrands::Integrand;
use crate::sequences::{Generator, PRECISION};

/// One-dimensional Walsh function `wal_k(x) = (-1)^{Σ_t k_t x_{t+1}}`, where
/// `x_{t+1}` is the `(t+1)`-th binary digit of `x`.
pub fn walsh(k: u64, x: f64) -> f64 {
    let digits = (x * (1u64 << PRECISION) as f64) as u64;
    // bit t of the reversed word is digit t+1 of x
    let reversed = digits.reverse_bits() >> (64 - PRECISION);
    if (k & reversed).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn reversed_digits(k: u64) -> u64 {
    k.reverse_bits() >> (64 - PRECISION)
}

/// A finite sum of basis functions with known true coefficients.
///
/// `Walsh` terms are `c · Π_j wal_{k_j}(x_j)`. `Fourier` terms are
/// `Re(c · e^{2πi k·x})`, so the integrand is real and its spectrum holds
/// `c/2` at `k` and `conj(c)/2` at `-k`.
#[derive(Debug, Clone, PartialEq)]
pub enum SparseSpectrum {
    Walsh(Vec<(Vec<u64>, f64)>),
    Fourier(Vec<(Vec<i64>, Complex64)>),
}

impl SparseSpectrum {
    pub fn dimension(&self) -> usize {
        match self {
            SparseSpectrum::Walsh(t) => t.first().map_or(1, |(k, _)| k.len()),
            SparseSpectrum::Fourier(t) => t.first().map_or(1, |(k, _)| k.len()),
        }
    }

    /// Integral over the unit cube (the zero-wavenumber coefficient).
    pub fn mean(&self) -> f64 {
        match self {
            SparseSpectrum::Walsh(t) => t.iter().filter(|(k, _)| k.iter().all(|&v| v == 0)).map(|(_, c)| c).sum(),
            SparseSpectrum::Fourier(t) => {
                t.iter().filter(|(k, _)| k.iter().all(|&v| v == 0)).map(|(_, c)| c.re).sum()
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SparseSpectrum::Walsh(terms) => terms
                .iter()
                .map(|(k, c)| c * k.iter().zip(x).map(|(&kj, &xj)| walsh(kj, xj)).product::<f64>())
                .sum(),
            SparseSpectrum::Fourier(terms) => terms
                .iter()
                .map(|(k, c)| {
                    let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
                    (c * Complex64::cis(TAU * phase)).re
                })
                .sum(),
        }
    }

    /// Discrete coefficients the aliasing identity predicts at level `m` for
    /// data sampled from `generator`, in ledger (`κ`) order.
    pub fn predicted(&self, generator: &Generator, m: u32) -> Result<Vec<Complex64>> {
        let n = 1usize << m;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        match (self, generator) {
            (SparseSpectrum::Walsh(terms), Generator::Digital(g)) => {
                for (k, c) in terms {
                    check_dim(k.len(), g.dimension())?;
                    let mut kappa = 0usize;
                    let mut sign = 1.0;
                    for (j, &kj) in k.iter().enumerate() {
                        let rk = reversed_digits(kj);
                        for b in 0..m {
                            if (rk & g.digits(1 << b, j)).count_ones() % 2 == 1 {
                                kappa ^= 1 << b;
                            }
                        }
                        if (rk & g.shift()[j]).count_ones() % 2 == 1 {
                            sign = -sign;
                        }
                    }
                    out[kappa] += Complex64::new(sign * c, 0.0);
                }
            }
            (SparseSpectrum::Fourier(terms), Generator::Lattice(g)) => {
                let map = lattice_frequency_map(m);
                let mut index_of = vec![0usize; n];
                for (kappa, &f) in map.iter().enumerate() {
                    index_of[f] = kappa;
                }
                for (k, c) in terms {
                    check_dim(k.len(), g.dimension())?;
                    for (w, coef) in [(1i64, c * 0.5), (-1i64, c.conj() * 0.5)] {
                        let mut dot = 0i128;
                        let mut shift_phase = 0.0;
                        for (j, &kj) in k.iter().enumerate() {
                            dot += (w * kj) as i128 * g.vector()[j] as i128;
                            shift_phase += (w * kj) as f64 * g.shift()[j];
                        }
                        // on the first 2^m nodes, k·z_i ≡ jm·(k·g)/2^m (mod 1)
                        let freq = dot.rem_euclid(1i128 << m) as usize;
                        out[index_of[freq]] += coef * Complex64::cis(TAU * shift_phase);
                    }
                }
            }
            _ => return Err(Error::InvalidInput("spectrum kind does not match the generator family".into())),
        }
        Ok(out)
    }
}

fn check_dim(k: usize, available: usize) -> Result<()> {
    if k > available {
        Err(Error::Capacity { requested: k, available })
    } else {
        Ok(())
    }
}

impl Integrand for SparseSpectrum {
    fn dimension(&self) -> usize {
        SparseSpectrum::dimension(self)
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.value(x);
    }
}

/// Largest deviation between the ledger's discrete coefficients and the
/// aliasing-identity prediction from the true sparse spectrum. Both the signed
/// (or complex) coefficients and the stored magnitudes are compared.
pub fn aliasing_check(ledger: &CoefficientLedger, generator: &Generator, spectrum: &SparseSpectrum) -> Result<f64> {
    let m = ledger.level();
    let predicted = spectrum.predicted(generator, m)?;
    let coord = ledger.coordinate(0);
    let actual = Spectrum::compute(coord.values(), ledger.family())?;
    let mut worst = 0.0f64;
    for (kappa, p) in predicted.iter().enumerate() {
        worst = worst.max((actual.get(kappa) - p).norm());
        worst = worst.max((coord.natural_magnitudes()[kappa] - p.norm()).abs());
    }
    Ok(worst)
}
