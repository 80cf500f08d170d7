use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the absolute and relative tolerances combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Met when the error is within either tolerance.
    Hybrid,
    /// Met only when the error is within both. Not supported.
    Both,
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "hybrid" => Ok(Criterion::Hybrid),
            "min" | "both" => Ok(Criterion::Both),
            other => Err(Error::InvalidTolerance(format!("unknown criterion '{other}'"))),
        }
    }
}

/// Error tolerance `(ε_a, ε_r) ∈ [0,∞) × [0,1)`, not both zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs: f64,
    rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        Self::with_criterion(abs, rel, Criterion::Hybrid)
    }

    pub fn with_criterion(abs: f64, rel: f64, criterion: Criterion) -> Result<Self> {
        if criterion == Criterion::Both {
            return Err(Error::InvalidTolerance(
                "unsupported mode: the min(abs, rel) criterion is not implemented; use the hybrid criterion".into(),
            ));
        }
        if !(abs.is_finite() && abs >= 0.0) {
            return Err(Error::InvalidTolerance(format!("absolute tolerance {abs} must be finite and >= 0")));
        }
        if !(0.0..1.0).contains(&rel) {
            return Err(Error::InvalidTolerance(format!("relative tolerance {rel} must lie in [0, 1)")));
        }
        if abs == 0.0 && rel == 0.0 {
            return Err(Error::InvalidTolerance("absolute and relative tolerances cannot both be zero".into()));
        }
        Ok(Tolerance { abs, rel })
    }

    pub fn abs(&self) -> f64 {
        self.abs
    }

    pub fn rel(&self) -> f64 {
        self.rel
    }

    /// `max(ε_a, ε_r |v|)`
    pub fn scale(&self, v: f64) -> f64 {
        self.abs.max(self.rel * v.abs())
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "abs={} rel={}", self.abs, self.rel)
    }
}

/// `tol(v, v̂) = (v − v̂)² / max(ε_a², ε_r² v²)`.
pub fn tolerance_value(v: f64, v_hat: f64, tol: &Tolerance) -> f64 {
    let diff = v - v_hat;
    let s = tol.scale(v);
    if s == 0.0 {
        return if diff == 0.0 { 0.0 } else { f64::INFINITY };
    }
    diff * diff / (s * s)
}

/// The estimate minimising the worst-case tolerance over `[v−, v+]`.
pub fn optimal_estimate(v_lo: f64, v_hi: f64, tol: &Tolerance) -> f64 {
    let (s_hi, s_lo) = (tol.scale(v_hi), tol.scale(v_lo));
    let den = s_hi + s_lo;
    if den == 0.0 {
        return 0.0;
    }
    // relative scale at both ends of an interval around zero: the weights
    // cancel exactly, which rounding would not reproduce
    let relative = |v: f64| tol.rel() * v.abs() >= tol.abs();
    if v_lo < 0.0 && v_hi > 0.0 && relative(v_lo) && relative(v_hi) {
        return 0.0;
    }
    (v_lo * s_hi + v_hi * s_lo) / den
}

/// Worst-case tolerance over `[v−, v+]` attained by [`optimal_estimate`].
pub fn sup_tolerance(v_lo: f64, v_hi: f64, tol: &Tolerance) -> f64 {
    let den = tol.scale(v_hi) + tol.scale(v_lo);
    if den == 0.0 {
        return 0.0;
    }
    let w = v_hi - v_lo;
    w * w / (den * den)
}

/// Scalar special case: estimate and stopping value from `(μ̂, err)`.
pub fn scalar_estimate(mu_hat: f64, err: f64, tol: &Tolerance) -> (f64, f64) {
    let (lo, hi) = (mu_hat - err, mu_hat + err);
    (optimal_estimate(lo, hi, tol), sup_tolerance(lo, hi, tol))
}
