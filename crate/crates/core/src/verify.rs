//! Direct-definition oracles and the self-test suites run by `qmcube selftest`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{optimal_estimate, sup_tolerance, tolerance_value, Tolerance};
use crate::error::{Error, Result};
use crate::ledger::{aliasing_check, fwht, lattice_dft, lattice_frequency_map, CoefficientLedger, SparseSpectrum};
use crate::experiments::Sources;
use crate::sequences::{radical_inverse, Family};

/// `out[κ] = 2^-m Σ_i v_i (−1)^{popcount(i & κ)}`, O(n²).
pub fn naive_walsh_hadamard(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(i, v)| if (i & k).count_ones() % 2 == 0 { *v } else { -*v })
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Lattice coefficients by direct summation, O(n²). `values[i]` sits at node
/// `φ₂(i)`; the result is in ledger (`κ`) order.
pub fn naive_lattice_dft(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let m = n.trailing_zeros();
    lattice_frequency_map(m)
        .into_iter()
        .map(|freq| {
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let node = radical_inverse(i as u64, m) as usize;
                    // reduce the product first so the phase argument stays small
                    let phase = ((node * freq) % n) as f64 / n as f64;
                    v * Complex64::cis(-TAU * phase)
                })
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Transforms,
    Aliasing,
    Estimator,
    Parseval,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Transforms, Suite::Aliasing, Suite::Estimator, Suite::Parseval];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Transforms => "transforms",
            Suite::Aliasing => "aliasing",
            Suite::Estimator => "estimator",
            Suite::Parseval => "parseval",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Suite::Transforms => 1e-12,
            Suite::Aliasing => 1e-10,
            Suite::Estimator => 1e-9,
            Suite::Parseval => 1e-12,
        }
    }

    pub fn run(self, seed: u64) -> Result<SuiteReport> {
        self.run_with(seed, &Sources::default())
    }

    /// Runs the suite with generators drawn from `sources`.
    pub fn run_with(self, seed: u64, sources: &Sources) -> Result<SuiteReport> {
        let (max_deviation, cases, invariant_failures) = match self {
            Suite::Transforms => transforms(seed)?,
            Suite::Aliasing => aliasing(seed, sources)?,
            Suite::Estimator => estimator(seed)?,
            Suite::Parseval => parseval(seed)?,
        };
        Ok(SuiteReport { suite: self, max_deviation, tolerance: self.tolerance(), cases, invariant_failures })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub cases: usize,
    /// Cases breaking a qualitative invariant (membership, shrinkage).
    pub invariant_failures: usize,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance && self.invariant_failures == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<11} {} cases={} max_dev={:.3e} tol={:.0e}",
            self.suite.as_str(),
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.max_deviation,
            self.tolerance
        )?;
        if self.invariant_failures > 0 {
            write!(f, " invariant_failures={}", self.invariant_failures)?;
        }
        Ok(())
    }
}

type Outcome = Result<(f64, usize, usize)>;

fn transforms(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in 1..=8u32 {
        for _ in 0..100 {
            let v: Vec<f64> = (0..1usize << m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = fwht(&v)?;
            for (a, b) in fast.iter().zip(naive_walsh_hadamard(&v)) {
                worst = worst.max((a - b).abs());
            }
            let fast = lattice_dft(&v)?;
            for (a, b) in fast.iter().zip(naive_lattice_dft(&v)) {
                worst = worst.max((a - b).norm());
            }
            cases += 1;
        }
    }
    Ok((worst, cases, 0))
}

/// A random sparse spectrum with at most 8 terms and wavenumbers below
/// `2^{m+3}` in each coordinate.
pub fn random_spectrum(rng: &mut impl Rng, family: Family, dimension: usize, m: u32) -> SparseSpectrum {
    let terms = rng.random_range(1..=8);
    let bound = 1i64 << (m + 3);
    match family {
        Family::Digital => SparseSpectrum::Walsh(
            (0..terms)
                .map(|_| {
                    let k = (0..dimension).map(|_| rng.random_range(0..bound as u64)).collect();
                    (k, rng.random_range(-1.0..1.0))
                })
                .collect(),
        ),
        Family::Lattice => SparseSpectrum::Fourier(
            (0..terms)
                .map(|_| {
                    let k = (0..dimension).map(|_| rng.random_range(-bound + 1..bound)).collect();
                    (k, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                })
                .collect(),
        ),
    }
}

fn aliasing(seed: u64, sources: &Sources) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..50 {
        for family in [Family::Digital, Family::Lattice] {
            let d = rng.random_range(1..=3);
            for m in 4..=8u32 {
                let spectrum = random_spectrum(&mut rng, family, d, m);
                let generator = sources.generator(family, d, rng.random())?;
                let ledger = CoefficientLedger::build(&spectrum, &generator, m, None)?;
                worst = worst.max(aliasing_check(&ledger, &generator, &spectrum)?);
                cases += 1;
            }
        }
    }
    Ok((worst, cases, 0))
}

/// Worst-case tolerance over `[lo, hi]` for the estimate `v_hat`, evaluated on
/// a uniform grid plus the points where the tolerance changes formula.
pub fn grid_sup_tolerance(lo: f64, hi: f64, v_hat: f64, tol: &Tolerance, points: usize) -> f64 {
    let mut worst = tolerance_value(lo, v_hat, tol).max(tolerance_value(hi, v_hat, tol));
    if tol.rel() > 0.0 {
        let kink = tol.abs() / tol.rel();
        for k in [kink, -kink] {
            if lo < k && k < hi {
                worst = worst.max(tolerance_value(k, v_hat, tol));
            }
        }
    }
    for i in 1..points {
        let v = lo + (hi - lo) * i as f64 / points as f64;
        worst = worst.max(tolerance_value(v, v_hat, tol));
    }
    worst
}

/// Draws a random interval and tolerance for the estimator checks.
pub fn random_estimator_case(rng: &mut impl Rng) -> (f64, f64, Tolerance) {
    let a = rng.random_range(-3.0..3.0);
    let b = rng.random_range(-3.0..3.0);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let abs = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) };
    let rel = if abs > 0.0 && rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.01..0.99) };
    (lo, hi, Tolerance::new(abs, rel).expect("sampled tolerance is valid"))
}

fn estimator(seed: u64) -> Outcome {
    const CANDIDATES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..1000 {
        let (lo, hi, tol) = random_estimator_case(&mut rng);
        let v = optimal_estimate(lo, hi, &tol);
        let sup = sup_tolerance(lo, hi, &tol);
        let (t_lo, t_hi) = (tolerance_value(lo, v, &tol), tolerance_value(hi, v, &tol));
        let scale = sup.max(1.0);
        worst = worst.max((t_lo - t_hi).abs() / scale).max((t_lo - sup).abs() / scale);
        let mut best = f64::INFINITY;
        for c in 0..=CANDIDATES {
            let cand = lo + (hi - lo) * c as f64 / CANDIDATES as f64;
            best = best.min(grid_sup_tolerance(lo, hi, cand, &tol, 50));
        }
        worst = worst.max((sup - best).max(0.0) / scale);
        let mid = 0.5 * (lo + hi);
        let member = lo <= v && v <= hi;
        let shrinks = v.abs() <= mid.abs() + 1e-15 && (v == 0.0 || v.signum() == mid.signum());
        if !(member && shrinks) {
            failures += 1;
        }
    }
    Ok((worst, 1000, failures))
}

fn parseval(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in 0..=14u32 {
        for _ in 0..8 {
            let v: Vec<f64> = (0..1usize << m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let energy = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
            let walsh: f64 = fwht(&v)?.iter().map(|c| c * c).sum();
            let fourier: f64 = lattice_dft(&v)?.iter().map(|c| c.norm_sqr()).sum();
            worst = worst.max((walsh - energy).abs() / energy).max((fourier - energy).abs() / energy);
            cases += 1;
        }
    }
    Ok((worst, cases, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_transforms_on_tiny_inputs() {
        assert_eq!(naive_walsh_hadamard(&[1.0, 3.0]), vec![2.0, -1.0]);
        let c = naive_lattice_dft(&[1.0, 3.0]);
        assert!((c[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((c[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn all_suites_pass() {
        for s in Suite::ALL {
            let r = s.run(1).unwrap();
            assert!(r.passed(), "{r}");
        }
    }
}
