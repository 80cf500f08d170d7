//! Cone parameters, the data-based error bound and the necessary condition
//! for cone membership.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ledger::CoefficientLedger;

/// Parameters of the cone of integrands whose coefficient tiers decay steadily.
///
/// `𝔠(m) = c_scale · 2^{-m}` multiplies the tier sum in the error bound, and
/// `ρ(a) = min(rho_scale · 2^{-a}, 0.99)` stands for the product of the two
/// decay-rate functions, which is all the necessary condition consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    pub l_star: u32,
    pub r: u32,
    pub c_scale: f64,
    pub rho_scale: f64,
    pub m_max: u32,
}

const RHO_CAP: f64 = 0.99;

impl Default for ConeParams {
    fn default() -> Self {
        ConeParams { l_star: 6, r: 4, c_scale: 5.0, rho_scale: 5.0, m_max: 24 }
    }
}

impl ConeParams {
    pub fn validate(&self) -> Result<()> {
        if self.l_star < 1 || self.r < 1 {
            return Err(Error::InvalidCone(format!("l_star = {} and r = {} must be at least 1", self.l_star, self.r)));
        }
        if self.m_max < self.min_level() {
            return Err(Error::InvalidCone(format!(
                "m_max = {} is below l_star + r = {}",
                self.m_max,
                self.min_level()
            )));
        }
        if !(self.c_scale.is_finite() && self.c_scale > 0.0) {
            return Err(Error::InvalidCone(format!("C_scale = {} must be positive", self.c_scale)));
        }
        if !(self.rho_scale.is_finite() && self.rho_scale >= 0.0) {
            return Err(Error::InvalidCone(format!("rho_scale = {} must be nonnegative", self.rho_scale)));
        }
        if self.rho(self.r) >= 1.0 {
            return Err(Error::InvalidCone(format!("rho(r) = {} must be below 1", self.rho(self.r))));
        }
        Ok(())
    }

    /// First level at which the error bound is defined.
    pub fn min_level(&self) -> u32 {
        self.l_star + self.r
    }

    pub fn bound_factor(&self, m: u32) -> f64 {
        self.c_scale * (-(m as f64)).exp2()
    }

    pub fn rho(&self, a: u32) -> f64 {
        (self.rho_scale * (-(a as f64)).exp2()).min(RHO_CAP)
    }

    /// Flat `key=value` block, one entry per line.
    pub fn to_text(&self) -> String {
        format!(
            "l_star={}\nr={}\nC_scale={}\nrho_scale={}\nm_max={}\n",
            self.l_star, self.r, self.c_scale, self.rho_scale, self.m_max
        )
    }
}

impl fmt::Display for ConeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for ConeParams {
    type Err = Error;

    /// Parses a [`ConeParams::to_text`] block; missing keys keep their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = ConeParams::default();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| parse_err(format!("expected key=value, got '{line}'")))?;
            let value = value.trim();
            let int = || value.parse::<u32>().map_err(|e| parse_err(format!("{key}: {e}")));
            let real = || value.parse::<f64>().map_err(|e| parse_err(format!("{key}: {e}")));
            match key.trim() {
                "l_star" => p.l_star = int()?,
                "r" => p.r = int()?,
                "C_scale" => p.c_scale = real()?,
                "rho_scale" => p.rho_scale = real()?,
                "m_max" => p.m_max = int()?,
                other => return Err(parse_err(format!("unknown key '{other}'"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// Sample mean and data-based error bound for one output coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEstimate {
    pub mu_hat: f64,
    pub err: f64,
    pub n: u64,
}

impl IntervalEstimate {
    pub fn lower(&self) -> f64 {
        self.mu_hat - self.err
    }

    pub fn upper(&self) -> f64 {
        self.mu_hat + self.err
    }

    pub fn contains(&self, mu: f64) -> bool {
        (self.lower()..=self.upper()).contains(&mu)
    }
}

/// `err = 𝔠(m) S̃_{m−r,m}` for every output coordinate of the ledger.
pub fn error_bound(ledger: &CoefficientLedger, params: &ConeParams) -> Result<Vec<IntervalEstimate>> {
    let m = ledger.level();
    if m < params.min_level() {
        return Err(Error::LevelTooLow { level: m, minimum: params.min_level() });
    }
    let factor = params.bound_factor(m);
    Ok(ledger
        .coordinates()
        .iter()
        .map(|c| IntervalEstimate { mu_hat: c.mean(), err: factor * c.tiers().get(m - params.r), n: 1 << m })
        .collect())
}

/// One failed instance of the necessary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeViolation {
    pub coordinate: usize,
    pub l: u32,
    pub m: u32,
    pub m_prime: u32,
    /// `S̃_{ℓ,m} / (1 + ρ(m−ℓ))`
    pub left: f64,
    /// `S̃_{ℓ,m'} / (1 − ρ(m'−ℓ))`
    pub right: f64,
}

impl fmt::Display for ConeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cone violation at output {} (l={}, m={}, m'={}): {:.6e} > {:.6e}",
            self.coordinate, self.l, self.m, self.m_prime, self.left, self.right
        )
    }
}

/// Outcome of the necessary condition on every output coordinate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConeCheck {
    pub violations: Vec<ConeViolation>,
}

impl ConeCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `S̃_{ℓ,m}/(1+ρ(m−ℓ)) ≤ S̃_{ℓ,m'}/(1−ρ(m'−ℓ))` in both directions
/// between two ledgers of the same integrand. Failures are reported, not
/// raised; an error means the arguments themselves are inconsistent.
pub fn necessary_condition(
    small: &CoefficientLedger,
    large: &CoefficientLedger,
    l: u32,
    params: &ConeParams,
) -> Result<ConeCheck> {
    let (m, mp) = (small.level(), large.level());
    if l < params.l_star || l > m.min(mp) {
        return Err(Error::InvalidInput(format!("tier {l} outside [{}, {}]", params.l_star, m.min(mp))));
    }
    if small.outputs() != large.outputs() || small.family() != large.family() {
        return Err(Error::InvalidInput("ledgers describe different integrands".into()));
    }
    let mut check = ConeCheck::default();
    for (j, (a, b)) in small.coordinates().iter().zip(large.coordinates()).enumerate() {
        for (x, mx, y, my) in [(a, m, b, mp), (b, mp, a, m)] {
            let rho_y = params.rho(my - l);
            if rho_y >= 1.0 {
                continue;
            }
            let left = x.tiers().get(l) / (1.0 + params.rho(mx - l));
            let right = y.tiers().get(l) / (1.0 - rho_y);
            if left > right {
                check.violations.push(ConeViolation { coordinate: j, l, m: mx, m_prime: my, left, right });
            }
        }
        if m == mp {
            break;
        }
    }
    Ok(check)
}
