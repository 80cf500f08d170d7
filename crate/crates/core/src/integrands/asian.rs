//! Discretely monitored Asian call options under geometric Brownian motion.

use super::eigen::jacobi_eigen;
use super::normal::{norm_cdf, norm_inv_cdf_unchecked};
use super::Integrand;
use crate::error::{Error, Result};

/// Smallest coordinate value fed to `Φ⁻¹`.
pub const NUDGE: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsianOption {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub volatility: f64,
    pub maturity: f64,
    pub steps: usize,
}

impl Default for AsianOption {
    /// Weekly monitoring over one year, at the money, 50% volatility.
    fn default() -> Self {
        AsianOption { spot: 100.0, strike: 100.0, rate: 0.02, volatility: 0.5, maturity: 1.0, steps: 52 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payoff {
    Arithmetic,
    Geometric,
}

impl AsianOption {
    pub fn validate(&self) -> Result<()> {
        let ok = self.spot > 0.0
            && self.strike >= 0.0
            && self.rate.is_finite()
            && self.volatility >= 0.0
            && self.maturity > 0.0
            && self.steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid option parameters {self:?}")))
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (1..=self.steps).map(|j| j as f64 * self.maturity / self.steps as f64).collect()
    }

    /// Row-major `A` with `A Aᵀ = (min(t_i, t_j))`, columns in decreasing
    /// eigenvalue order.
    pub fn path_matrix(&self) -> Result<Vec<f64>> {
        let t = self.times();
        let d = self.steps;
        let c: Vec<f64> = (0..d * d).map(|k| t[k / d].min(t[k % d])).collect();
        let eig = jacobi_eigen(&c, d)?;
        let mut a = eig.vectors;
        for col in 0..d {
            let s = eig.values[col].max(0.0).sqrt();
            for row in 0..d {
                a[row * d + col] *= s;
            }
        }
        Ok(a)
    }

    /// Exact price of the geometric-mean call: the log of the discrete
    /// geometric mean is normal with the moments below.
    pub fn geometric_price(&self) -> f64 {
        let t = self.times();
        let d = self.steps as f64;
        let mean_t = t.iter().sum::<f64>() / d;
        let m = self.spot.ln() + (self.rate - 0.5 * self.volatility * self.volatility) * mean_t;
        let cov_sum: f64 = t.iter().map(|&ti| t.iter().map(|&tj| ti.min(tj)).sum::<f64>()).sum();
        let v = self.volatility * self.volatility * cov_sum / (d * d);
        let discount = (-self.rate * self.maturity).exp();
        if v == 0.0 {
            return discount * (m.exp() - self.strike).max(0.0);
        }
        if self.strike == 0.0 {
            return discount * (m + 0.5 * v).exp();
        }
        let d1 = (m - self.strike.ln() + v) / v.sqrt();
        let d2 = d1 - v.sqrt();
        discount * ((m + 0.5 * v).exp() * norm_cdf(d1) - self.strike * norm_cdf(d2))
    }

    pub fn payoffs(&self) -> Result<AsianPayoffs> {
        self.validate()?;
        let t = self.times();
        let drift = t.iter().map(|&tj| (self.rate - 0.5 * self.volatility * self.volatility) * tj).collect();
        Ok(AsianPayoffs {
            option: *self,
            a: self.path_matrix()?,
            drift,
            discount: (-self.rate * self.maturity).exp(),
            selection: None,
        })
    }
}

/// Both discounted payoffs of one option, sharing the path construction.
///
/// By default the integrand has two outputs, arithmetic then geometric;
/// [`AsianPayoffs::only`] restricts it to one.
#[derive(Debug, Clone)]
pub struct AsianPayoffs {
    option: AsianOption,
    a: Vec<f64>,
    drift: Vec<f64>,
    discount: f64,
    selection: Option<Payoff>,
}

impl AsianPayoffs {
    pub fn option(&self) -> &AsianOption {
        &self.option
    }

    pub fn only(mut self, payoff: Payoff) -> Self {
        self.selection = Some(payoff);
        self
    }

    /// `(arithmetic, geometric)` discounted payoffs at `x`.
    pub fn value(&self, x: &[f64]) -> (f64, f64) {
        let d = self.option.steps;
        let z: Vec<f64> = x[..d]
            .iter()
            .map(|&u| {
                let u = if u < NUDGE {
                    log::debug!("coordinate {u} nudged to 2^-53 before inversion");
                    NUDGE
                } else {
                    u
                };
                norm_inv_cdf_unchecked(u)
            })
            .collect();
        let sigma = self.option.volatility;
        let mut arith = 0.0;
        let mut log_sum = 0.0;
        for j in 0..d {
            let row = &self.a[j * d..(j + 1) * d];
            let path: f64 = row.iter().zip(&z).map(|(a, z)| a * z).sum();
            let log_s = self.drift[j] + sigma * path;
            arith += log_s.exp();
            log_sum += log_s;
        }
        let s0 = self.option.spot;
        let k = self.option.strike;
        let arith_mean = s0 * arith / d as f64;
        let geo_mean = s0 * (log_sum / d as f64).exp();
        (self.discount * (arith_mean - k).max(0.0), self.discount * (geo_mean - k).max(0.0))
    }
}

impl Integrand for AsianPayoffs {
    fn dimension(&self) -> usize {
        self.option.steps
    }

    fn outputs(&self) -> usize {
        if self.selection.is_some() {
            1
        } else {
            2
        }
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        let (a, g) = self.value(x);
        match self.selection {
            None => {
                out[0] = a;
                out[1] = g;
            }
            Some(Payoff::Arithmetic) => out[0] = a,
            Some(Payoff::Geometric) => out[0] = g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_matrix_reconstructs_covariance() {
        let opt = AsianOption::default();
        let a = opt.path_matrix().unwrap();
        let t = opt.times();
        let d = opt.steps;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let s: f64 = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum();
                worst = worst.max((s - t[i].min(t[j])).abs());
            }
        }
        assert!(worst < 1e-8, "{worst}");
        let norms: Vec<f64> = (0..d).map(|k| (0..d).map(|i| a[i * d + k].powi(2)).sum()).collect();
        assert!(norms.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_volatility_is_deterministic() {
        let opt = AsianOption { volatility: 0.0, ..AsianOption::default() };
        let p = opt.payoffs().unwrap();
        let disc = (-opt.rate * opt.maturity).exp();
        let expected = disc * (opt.times().iter().map(|t| 100.0 * (opt.rate * t).exp()).sum::<f64>() / 52.0 - 100.0);
        let (a, _) = p.value(&[0.3; 52]);
        assert!((a - expected).abs() < 1e-10);
        let (a2, g2) = p.value(&[0.9; 52]);
        assert!((a2 - a).abs() < 1e-12);
        assert!((g2 - opt.geometric_price()).abs() < 1e-10);
    }

    #[test]
    fn arithmetic_dominates_geometric() {
        let p = AsianOption::default().payoffs().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let x: Vec<f64> = (0..52).map(|_| rng.random()).collect();
            let (a, g) = p.value(&x);
            assert!(a >= g && g >= 0.0);
        }
    }

    #[test]
    fn zero_coordinate_is_nudged() {
        let p = AsianOption::default().payoffs().unwrap();
        let (a, g) = p.value(&[0.0; 52]);
        assert!(a.is_finite() && g.is_finite());
    }

    #[test]
    fn geometric_price_matches_single_step_black_scholes() {
        // one monitoring date reduces to a European call with maturity T
        let opt = AsianOption { steps: 1, ..AsianOption::default() };
        let (s, k, r, v, t) = (100.0f64, 100.0f64, 0.02f64, 0.5f64, 1.0f64);
        let d1 = ((s / k).ln() + (r + 0.5 * v * v) * t) / (v * t.sqrt());
        let bs = s * norm_cdf(d1) - k * (-r * t).exp() * norm_cdf(d1 - v * t.sqrt());
        assert!((opt.geometric_price() - bs).abs() < 1e-12);
    }
}
