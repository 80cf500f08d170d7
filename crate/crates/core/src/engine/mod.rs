//! The adaptive cubature loop and the optimal estimator it reports.

mod baselines;
mod estimator;

use std::fmt;
use std::io::Write;
use std::time::Instant;

pub use baselines::{heuristic_baseline, BaselineEstimate, Strategy, DEFAULT_INFLATION};
pub use estimator::{optimal_estimate, scalar_estimate, sup_tolerance, tolerance_value, Criterion, Tolerance};

use crate::cone::{error_bound, necessary_condition, ConeParams, ConeViolation, IntervalEstimate};
use crate::error::{Error, Result};
use crate::integrands::Integrand;
use crate::ledger::CoefficientLedger;
use crate::sequences::{Family, Generator};

/// A function `v` of the `p` integrals together with its extreme values over
/// a box of possible integral vectors.
pub trait SolutionFunctional: Sync {
    fn outputs(&self) -> usize;

    fn value(&self, mu: &[f64]) -> f64;

    /// `(v−, v+)`: the infimum and supremum of `v` over the box
    /// `[μ̂ − err, μ̂ + err]` intersected with the domain of `v`.
    fn bounds(&self, mu_hat: &[f64], err: &[f64]) -> (f64, f64);
}

/// `v(μ) = μ` for a single integral.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl SolutionFunctional for Identity {
    fn outputs(&self) -> usize {
        1
    }

    fn value(&self, mu: &[f64]) -> f64 {
        mu[0]
    }

    fn bounds(&self, mu_hat: &[f64], err: &[f64]) -> (f64, f64) {
        (mu_hat[0] - err[0], mu_hat[0] + err[0])
    }
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ToleranceMet,
    BudgetExhausted,
}

/// Reported run status. A run that met its tolerance but saw a failed
/// necessary condition on the way is reported as flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    ToleranceMet,
    BudgetExhausted,
    ConeViolationFlagged,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::ToleranceMet => "tolerance-met",
            Status::BudgetExhausted => "budget-exhausted",
            Status::ConeViolationFlagged => "cone-violation-flagged",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct CubatureResult {
    pub v_hat: f64,
    pub v_lo: f64,
    pub v_hi: f64,
    pub n: u64,
    pub level: u32,
    pub estimates: Vec<IntervalEstimate>,
    pub sup_tol: f64,
    pub termination: Termination,
    pub violations: Vec<ConeViolation>,
    pub wall_ms: f64,
    pub seed: Option<u64>,
    pub family: Family,
    pub dimension: usize,
}

/// Column names of [`CubatureResult::write_csv_row`].
pub const CSV_HEADER: [&str; 9] = ["seed", "family", "d", "p", "n", "v_hat", "sup_tol", "status", "wall_ms"];

impl CubatureResult {
    pub fn status(&self) -> Status {
        if !self.violations.is_empty() {
            Status::ConeViolationFlagged
        } else if self.termination == Termination::ToleranceMet {
            Status::ToleranceMet
        } else {
            Status::BudgetExhausted
        }
    }

    pub fn tolerance_met(&self) -> bool {
        self.termination == Termination::ToleranceMet
    }

    /// The experiment-log fields in [`CSV_HEADER`] order. With `timing` off
    /// the wall time is left empty so reruns compare byte for byte.
    pub fn csv_fields(&self, timing: bool) -> Vec<String> {
        vec![
            self.seed.map_or(String::new(), |s| s.to_string()),
            self.family.to_string(),
            self.dimension.to_string(),
            self.estimates.len().to_string(),
            self.n.to_string(),
            self.v_hat.to_string(),
            self.sup_tol.to_string(),
            self.status().to_string(),
            if timing { format!("{:.3}", self.wall_ms) } else { String::new() },
        ]
    }

    pub fn write_csv_row<W: Write>(&self, w: &mut csv::Writer<W>, timing: bool) -> Result<()> {
        w.write_record(self.csv_fields(timing))?;
        Ok(())
    }
}

/// Integrates `f` with a freshly randomized generator of the given family.
pub fn integrate(
    f: &dyn Integrand,
    functional: &dyn SolutionFunctional,
    tol: &Tolerance,
    cone: &ConeParams,
    family: Family,
    seed: u64,
) -> Result<CubatureResult> {
    let generator = Generator::randomized(family, f.dimension().max(1), seed)?;
    integrate_with(f, functional, tol, cone, &generator)
}

/// [`integrate`] for `v(μ) = μ`.
pub fn integrate_scalar(
    f: &dyn Integrand,
    tol: &Tolerance,
    cone: &ConeParams,
    family: Family,
    seed: u64,
) -> Result<CubatureResult> {
    integrate(f, &Identity, tol, cone, family, seed)
}

/// [`integrate`] on a caller-supplied generator.
pub fn integrate_with(
    f: &dyn Integrand,
    functional: &dyn SolutionFunctional,
    tol: &Tolerance,
    cone: &ConeParams,
    generator: &Generator,
) -> Result<CubatureResult> {
    if f.outputs() != functional.outputs() {
        return Err(Error::InvalidInput(format!(
            "integrand has {} outputs but the functional expects {}",
            f.outputs(),
            functional.outputs()
        )));
    }
    let mut ledger: Option<CoefficientLedger> = None;
    adaptive_loop(generator, f.dimension(), functional, tol, cone, |m| {
        let next =
            CoefficientLedger::build(f, generator, m, ledger.as_ref())?.with_adaptive_order(ledger.as_ref(), cone.r)?;
        ledger = Some(next.clone());
        Ok(next)
    })
}

/// The doubling loop over any source of ledgers.
///
/// `ledger_at(m)` is called for `m = ℓ*+r, ℓ*+r+1, ...` in order and must
/// return the level-`m` ledger of the integrand being estimated.
pub(crate) fn adaptive_loop(
    generator: &Generator,
    dimension: usize,
    functional: &dyn SolutionFunctional,
    tol: &Tolerance,
    cone: &ConeParams,
    mut ledger_at: impl FnMut(u32) -> Result<CoefficientLedger>,
) -> Result<CubatureResult> {
    cone.validate()?;
    let start = Instant::now();
    let m_max = cone.m_max.min(generator.max_level());
    let mut m = cone.min_level();
    if m > m_max {
        return Err(Error::InvalidCone(format!(
            "minimum level {m} exceeds the generator's capacity 2^{}",
            generator.max_level()
        )));
    }
    let mut previous: Option<CoefficientLedger> = None;
    let mut violations = Vec::new();
    loop {
        let ledger = ledger_at(m)?;
        let estimates = error_bound(&ledger, cone)?;
        if let Some(prev) = &previous {
            violations.extend(necessary_condition(prev, &ledger, m - cone.r, cone)?.violations);
        }
        let mu: Vec<f64> = estimates.iter().map(|e| e.mu_hat).collect();
        let err: Vec<f64> = estimates.iter().map(|e| e.err).collect();
        let (v_lo, v_hi) = functional.bounds(&mu, &err);
        let sup_tol = sup_tolerance(v_lo, v_hi, tol);
        let termination = if sup_tol <= 1.0 {
            Some(Termination::ToleranceMet)
        } else if m >= m_max {
            Some(Termination::BudgetExhausted)
        } else {
            None
        };
        if let Some(termination) = termination {
            for v in &violations {
                log::warn!("{v}");
            }
            return Ok(CubatureResult {
                v_hat: optimal_estimate(v_lo, v_hi, tol),
                v_lo,
                v_hi,
                n: 1 << m,
                level: m,
                estimates,
                sup_tol,
                termination,
                violations,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
                seed: generator.seed(),
                family: generator.family(),
                dimension,
            });
        }
        previous = Some(ledger);
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::FnIntegrand;

    #[test]
    fn constant_stops_at_minimum() {
        let f = FnIntegrand::new(3, |_| 2.5);
        let tol = Tolerance::new(1e-8, 0.0).unwrap();
        for family in [Family::Digital, Family::Lattice] {
            let r = integrate_scalar(&f, &tol, &ConeParams::default(), family, 9).unwrap();
            assert_eq!(r.n, 1024);
            assert_eq!(r.v_hat, 2.5);
            assert_eq!(r.estimates[0].err, 0.0);
            assert_eq!(r.status(), Status::ToleranceMet);
        }
    }

    #[test]
    fn product_converges() {
        // periodic for the lattice, merely smooth for the digital family
        let product = FnIntegrand::new(3, |x| x.iter().map(|v| 2.0 * v).product());
        let periodic = FnIntegrand::new(3, |x| x.iter().map(|v| 1.0 + 0.5 * (std::f64::consts::TAU * v).sin()).product());
        let tol = Tolerance::new(1e-3, 0.0).unwrap();
        for (family, f) in [(Family::Digital, &product as &dyn Integrand), (Family::Lattice, &periodic)] {
            let r = integrate_scalar(f, &tol, &ConeParams::default(), family, 1).unwrap();
            assert!(r.tolerance_met());
            assert!(r.sup_tol <= 1.0);
            assert!(tolerance_value(1.0, r.v_hat, &tol) <= 1.0, "{family}: {}", r.v_hat);
            assert!(r.v_lo <= r.v_hat && r.v_hat <= r.v_hi);
        }
    }

    #[test]
    fn budget_exhaustion() {
        let f = FnIntegrand::new(2, |x| (40.0 * x[0]).sin() * x[1]);
        let tol = Tolerance::new(1e-12, 0.0).unwrap();
        let cone = ConeParams { m_max: 11, ..ConeParams::default() };
        let r = integrate_scalar(&f, &tol, &cone, Family::Digital, 3).unwrap();
        assert_eq!(r.termination, Termination::BudgetExhausted);
        assert_eq!(r.n, 2048);
        assert!(r.sup_tol > 1.0);
    }

    #[test]
    fn mismatched_functional() {
        let f = FnIntegrand::new(1, |x| x[0]);
        let tol = Tolerance::new(1e-3, 0.0).unwrap();
        let err = integrate(&f, &crate::integrands::sobol_index::SobolIndexFunctional, &tol, &ConeParams::default(), Family::Digital, 0);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn csv_row_layout() {
        let f = FnIntegrand::new(2, |x| x[0] + x[1]);
        let tol = Tolerance::new(1e-2, 0.0).unwrap();
        let r = integrate_scalar(&f, &tol, &ConeParams::default(), Family::Lattice, 77).unwrap();
        let fields = r.csv_fields(false);
        assert_eq!(fields.len(), CSV_HEADER.len());
        assert_eq!(fields[0], "77");
        assert_eq!(fields[1], "lattice");
        assert_eq!(fields[2], "2");
        assert_eq!(fields[8], "");
    }
}
