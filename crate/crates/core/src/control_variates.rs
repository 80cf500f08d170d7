//! Control variates fitted on high-wavenumber discrete coefficients.
//!
//! The integrand `h_β = f + βᵀ(μ_g − g)` has the same integral as `f` for any
//! `β`. Choosing `β` to shrink the coefficients that drive the error bound
//! differs from the variance-minimising Monte Carlo choice.

use crate::cone::ConeParams;
use crate::engine::{adaptive_loop, CubatureResult, Identity, Tolerance};
use crate::error::{Error, Result};
use crate::integrands::Integrand;
use crate::ledger::{sample, CoefficientLedger, Spectrum, WavenumberMap};
use crate::sequences::{Family, Generator};

/// When `β` is (re)estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaPolicy {
    /// Fit once on the first level and keep it.
    #[default]
    Freeze,
    /// Refit on every level.
    Refresh,
}

/// Objective used to fit `β` on the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaSolver {
    #[default]
    LeastSquares,
    /// Sum of absolute deviations, by iteratively reweighted least squares.
    LeastAbsolute,
}

/// Known means of the `q` controls and the fitting policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVariateSpec {
    pub means: Vec<f64>,
    pub policy: BetaPolicy,
    pub solver: BetaSolver,
}

impl ControlVariateSpec {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidInput("at least one control variate is required".into()));
        }
        if let Some(k) = means.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidInput(format!("control mean {k} is not finite")));
        }
        Ok(ControlVariateSpec { means, policy: BetaPolicy::default(), solver: BetaSolver::default() })
    }

    pub fn with_policy(mut self, policy: BetaPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_solver(mut self, solver: BetaSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn controls(&self) -> usize {
        self.means.len()
    }
}

/// A fitted coefficient vector. `degenerate` marks a singular system, in
/// which case `beta` is all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaFit {
    pub beta: Vec<f64>,
    pub degenerate: bool,
}

impl BetaFit {
    fn zero(q: usize) -> Self {
        BetaFit { beta: vec![0.0; q], degenerate: true }
    }
}

/// Solves the symmetric positive semidefinite system `a x = b` by Cholesky.
/// Returns `None` when a pivot falls below `1e-12` of the largest diagonal.
fn solve_spd(a: &[f64], b: &[f64], q: usize) -> Option<Vec<f64>> {
    let scale = (0..q).map(|i| a[i * q + i]).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let mut l = vec![0.0; q * q];
    for i in 0..q {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * q + k] * l[j * q + k]).sum();
            if i == j {
                let p = a[i * q + i] - s;
                if p <= 1e-12 * scale {
                    return None;
                }
                l[i * q + i] = p.sqrt();
            } else {
                l[i * q + j] = (a[i * q + j] - s) / l[j * q + j];
            }
        }
    }
    let mut y = vec![0.0; q];
    for i in 0..q {
        y[i] = (b[i] - (0..i).map(|k| l[i * q + k] * y[k]).sum::<f64>()) / l[i * q + i];
    }
    let mut x = vec![0.0; q];
    for i in (0..q).rev() {
        x[i] = (y[i] - (i + 1..q).map(|k| l[k * q + i] * x[k]).sum::<f64>()) / l[i * q + i];
    }
    Some(x)
}

/// Rows of the stacked real least-squares problem: for each `κ` in range,
/// the real part and (lattice only) the imaginary part.
fn stacked_rows(f: &Spectrum, g: &[Spectrum], lo: usize, hi: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut y = Vec::new();
    let mut rows = Vec::new();
    let complex = matches!(f, Spectrum::Fourier(_));
    for kappa in lo..hi {
        let fv = f.get(kappa);
        y.push(fv.re);
        rows.push(g.iter().map(|s| s.get(kappa).re).collect());
        if complex {
            y.push(fv.im);
            rows.push(g.iter().map(|s| s.get(kappa).im).collect());
        }
    }
    (y, rows)
}

fn weighted_least_squares(y: &[f64], rows: &[Vec<f64>], w: &[f64], q: usize) -> Option<Vec<f64>> {
    let mut a = vec![0.0; q * q];
    let mut b = vec![0.0; q];
    for ((row, &yi), &wi) in rows.iter().zip(y).zip(w) {
        for i in 0..q {
            b[i] += wi * row[i] * yi;
            for j in 0..q {
                a[i * q + j] += wi * row[i] * row[j];
            }
        }
    }
    solve_spd(&a, &b, q)
}

fn kappa_range(m: u32, r: u32, len: usize) -> Result<(usize, usize)> {
    if len != 1 << m {
        return Err(Error::InvalidInput(format!("expected 2^{m} coefficients, got {len}")));
    }
    let lo = if m > r { 1usize << (m - r - 1) } else { 0 };
    Ok((lo, len))
}

/// `β = argmin Σ_κ |f̃_κ − bᵀ g̃_κ|²` over `κ ∈ [⌊2^{m−r−1}⌋, 2^m)`.
pub fn beta_qmc(f: &Spectrum, g: &[Spectrum], m: u32, r: u32) -> Result<BetaFit> {
    let (lo, hi) = kappa_range(m, r, f.len())?;
    if g.is_empty() || g.iter().any(|s| s.len() != f.len()) {
        return Err(Error::InvalidInput("control spectra must match the integrand spectrum".into()));
    }
    let (y, rows) = stacked_rows(f, g, lo, hi);
    let w = vec![1.0; y.len()];
    Ok(match weighted_least_squares(&y, &rows, &w, g.len()) {
        Some(beta) => BetaFit { beta, degenerate: false },
        None => BetaFit::zero(g.len()),
    })
}

const IRLS_ITERATIONS: usize = 100;

/// `β = argmin Σ_κ |f̃_κ − bᵀ g̃_κ|` over the same range, by iteratively
/// reweighted least squares started from [`beta_qmc`].
pub fn beta_qmc_l1(f: &Spectrum, g: &[Spectrum], m: u32, r: u32) -> Result<BetaFit> {
    let start = beta_qmc(f, g, m, r)?;
    if start.degenerate {
        return Ok(start);
    }
    let (lo, hi) = kappa_range(m, r, f.len())?;
    let (y, rows) = stacked_rows(f, g, lo, hi);
    let per_kappa = y.len() / (hi - lo);
    let q = g.len();
    let floor = 1e-12 * y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut beta = start.beta;
    for _ in 0..IRLS_ITERATIONS {
        let resid: Vec<f64> = rows
            .iter()
            .zip(&y)
            .map(|(row, yi)| yi - row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let w: Vec<f64> = resid
            .chunks(per_kappa)
            .flat_map(|c| {
                let modulus = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                std::iter::repeat_n(1.0 / modulus.max(floor), per_kappa)
            })
            .collect();
        match weighted_least_squares(&y, &rows, &w, q) {
            Some(next) => {
                let change = next.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                beta = next;
                if change <= 1e-12 * beta.iter().map(|b| b.abs()).fold(1.0, f64::max) {
                    break;
                }
            }
            None => break,
        }
    }
    Ok(BetaFit { beta, degenerate: false })
}

/// Monte Carlo choice `β = var(g)⁻¹ cov(g, f)` from sample values.
pub fn beta_mc(f: &[f64], g: &[Vec<f64>]) -> Result<BetaFit> {
    let n = f.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
    }
    if g.is_empty() || g.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidInput("control samples must match the integrand samples".into()));
    }
    let q = g.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let fm = mean(f);
    let gm: Vec<f64> = g.iter().map(|v| mean(v)).collect();
    let mut cov = vec![0.0; q * q];
    let mut cross = vec![0.0; q];
    for i in 0..n {
        for a in 0..q {
            let da = g[a][i] - gm[a];
            cross[a] += da * (f[i] - fm);
            for b in 0..q {
                cov[a * q + b] += da * (g[b][i] - gm[b]);
            }
        }
    }
    Ok(match solve_spd(&cov, &cross, q) {
        Some(beta) => BetaFit { beta, degenerate: false },
        None => BetaFit::zero(q),
    })
}

/// Result of a control-variate run.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub result: CubatureResult,
    /// `β` in force at termination.
    pub beta: Vec<f64>,
    /// Whether any fit fell back to `β = 0`.
    pub degenerate: bool,
}

/// Adaptive integration of `h_β` where `joint` evaluates `(f, g_1, ..., g_q)`.
pub fn cv_integrate(
    joint: &dyn Integrand,
    spec: &ControlVariateSpec,
    tol: &Tolerance,
    cone: &ConeParams,
    family: Family,
    seed: u64,
) -> Result<CvResult> {
    let generator = Generator::randomized(family, joint.dimension().max(1), seed)?;
    cv_integrate_with(joint, spec, tol, cone, &generator)
}

/// [`cv_integrate`] on a caller-supplied generator.
pub fn cv_integrate_with(
    joint: &dyn Integrand,
    spec: &ControlVariateSpec,
    tol: &Tolerance,
    cone: &ConeParams,
    generator: &Generator,
) -> Result<CvResult> {
    let q = spec.controls();
    if joint.outputs() != q + 1 {
        return Err(Error::InvalidInput(format!(
            "joint integrand has {} outputs, expected 1 + {q}",
            joint.outputs()
        )));
    }
    let family = generator.family();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); q + 1];
    let mut beta: Option<Vec<f64>> = None;
    let mut degenerate = false;
    let mut previous: Option<CoefficientLedger> = None;
    let result = adaptive_loop(generator, joint.dimension(), &Identity, tol, cone, |m| {
        let have = values[0].len();
        let fresh = sample(joint, generator, have as u64, (1usize << m) - have)?;
        for (j, new) in fresh.into_iter().enumerate() {
            if let Some(i) = new.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { index: (have + i) as u64, output: j });
            }
            values[j].extend(new);
        }
        if beta.is_none() || spec.policy == BetaPolicy::Refresh {
            let (f, g) = ordered_spectra(&values, family)?;
            let fit = match spec.solver {
                BetaSolver::LeastSquares => beta_qmc(&f, &g, m, cone.r)?,
                BetaSolver::LeastAbsolute => beta_qmc_l1(&f, &g, m, cone.r)?,
            };
            if fit.degenerate {
                log::warn!("control variate system is singular at level {m}; using beta = 0");
            }
            degenerate |= fit.degenerate;
            beta = Some(fit.beta);
        }
        let b = beta.as_deref().unwrap_or_default();
        let h = apply_controls(&values, b, &spec.means);
        let ledger = CoefficientLedger::from_values(family, vec![h])?.with_adaptive_order(previous.as_ref(), cone.r)?;
        previous = Some(ledger.clone());
        Ok(ledger)
    })?;
    Ok(CvResult { result, beta: beta.unwrap_or_else(|| vec![0.0; q]), degenerate })
}

/// Spectra of `f` and the controls, all arranged in the order that sorts
/// the coefficients of `f`, so the fitting range skips the largest of them.
pub fn ordered_spectra(values: &[Vec<f64>], family: Family) -> Result<(Spectrum, Vec<Spectrum>)> {
    let f = Spectrum::compute(&values[0], family)?;
    let order = WavenumberMap::sorted(&f.magnitudes())?;
    let g = values[1..]
        .iter()
        .map(|v| Ok(Spectrum::compute(v, family)?.permuted(&order)))
        .collect::<Result<Vec<_>>>()?;
    Ok((f.permuted(&order), g))
}

/// `h_i = f_i + Σ_k β_k (μ_k − g_{k,i})`.
pub fn apply_controls(values: &[Vec<f64>], beta: &[f64], means: &[f64]) -> Vec<f64> {
    let mut h = values[0].clone();
    for ((g, b), mu) in values[1..].iter().zip(beta).zip(means) {
        for (hi, gi) in h.iter_mut().zip(g) {
            *hi += b * (mu - gi);
        }
    }
    h
}
