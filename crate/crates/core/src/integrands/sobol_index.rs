//! First-order Sobol' indices as a function of three integrals.

use super::Integrand;
use crate::engine::SolutionFunctional;

/// Test function of Bratley, Fox and Niederreiter:
/// `g(x) = Σ_i (-1)^i Π_{j≤i} x_j`.
pub fn bratley_g(x: &[f64]) -> f64 {
    let mut product = 1.0;
    let mut sum = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        product *= xi;
        sum += if i % 2 == 0 { -product } else { product };
    }
    sum
}

/// Closed-form first-order indices of [`bratley_g`] in dimension `d`.
///
/// `E[g | X_j]` is affine in `x_j` with slope `c_j = Σ_{i≥j} (-1)^i 2^{1-i}`
/// (1-based), so the index is `c_j² / (12 Var g)`.
pub fn bratley_reference_indices(d: usize) -> Vec<f64> {
    let sign = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mean: f64 = (1..=d).map(|i| sign(i) * 0.5f64.powi(i as i32)).sum();
    // E[g²] = Σ_{i,k} (-1)^{i+k} E[Π_{j≤i} x_j Π_{j≤k} x_j]
    let mut second = 0.0;
    for i in 1..=d {
        for k in 1..=d {
            let (lo, hi) = (i.min(k), i.max(k));
            second += sign(i + k) * (1.0f64 / 3.0).powi(lo as i32) * 0.5f64.powi((hi - lo) as i32);
        }
    }
    let variance = second - mean * mean;
    (1..=d)
        .map(|j| {
            let c: f64 = (j..=d).map(|i| sign(i) * 0.5f64.powi(i as i32 - 1)).sum();
            c * c / 12.0 / variance
        })
        .collect()
}

/// The three-output integrand over `[0,1)^{2d}` whose integrals are
/// `(μ₁, μ₂, μ₃)`: the first `d` coordinates are `x`, the rest `x'`.
pub struct SobolIndexIntegrand<G> {
    model: G,
    dimension: usize,
    coordinate: usize,
}

impl<G: Fn(&[f64]) -> f64 + Sync> SobolIndexIntegrand<G> {
    /// `coordinate` is zero-based.
    pub fn new(model: G, dimension: usize, coordinate: usize) -> Self {
        assert!(coordinate < dimension, "coordinate {coordinate} out of range for dimension {dimension}");
        SobolIndexIntegrand { model, dimension, coordinate }
    }

    pub fn coordinate(&self) -> usize {
        self.coordinate
    }
}

impl<G: Fn(&[f64]) -> f64 + Sync> Integrand for SobolIndexIntegrand<G> {
    fn dimension(&self) -> usize {
        2 * self.dimension
    }

    fn outputs(&self) -> usize {
        3
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        let (x, xp) = x.split_at(self.dimension);
        let gx = (self.model)(x);
        let gxp = (self.model)(xp);
        let mut mixed = xp.to_vec();
        mixed[self.coordinate] = x[self.coordinate];
        let gmixed = (self.model)(&mixed);
        out[0] = (gmixed - gxp) * gx;
        out[1] = gx * gx;
        out[2] = gx;
    }
}

/// `v(μ) = μ₁ / (μ₂ − μ₃²)` with extreme values over a box.
///
/// The domain drops the sign restriction on `μ₃`, so the oracle also covers
/// models with negative mean: the square term is bounded by the largest and
/// smallest `μ₃²` over the interval rather than by its endpoints in order.
#[derive(Debug, Clone, Copy, Default)]
pub struct SobolIndexFunctional;

impl SolutionFunctional for SobolIndexFunctional {
    fn outputs(&self) -> usize {
        3
    }

    fn value(&self, mu: &[f64]) -> f64 {
        mu[0] / (mu[1] - mu[2] * mu[2])
    }

    fn bounds(&self, mu: &[f64], err: &[f64]) -> (f64, f64) {
        let (n_lo, n_hi) = (mu[0] - err[0], mu[0] + err[0]);
        let (m3_lo, m3_hi) = (mu[2] - err[2], mu[2] + err[2]);
        let sq_max = (m3_lo * m3_lo).max(m3_hi * m3_hi);
        let sq_min = if m3_lo <= 0.0 && m3_hi >= 0.0 { 0.0 } else { (m3_lo * m3_lo).min(m3_hi * m3_hi) };
        let den_min = mu[1] - err[1] - sq_max;
        let den_max = mu[1] + err[1] - sq_min;
        let upper = if n_hi <= 0.0 {
            0.0
        } else if n_hi > den_min.max(0.0) {
            1.0
        } else {
            n_hi / den_min
        };
        let lower = if n_lo <= 0.0 {
            0.0
        } else if n_lo > den_max.max(0.0) {
            1.0
        } else {
            n_lo / den_max
        };
        (lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bratley_corners() {
        assert_eq!(bratley_g(&[1.0; 6]), 0.0);
        assert_eq!(bratley_g(&[0.0; 6]), 0.0);
        assert_eq!(bratley_g(&[0.5, 1.0, 1.0, 1.0, 1.0, 1.0]), -0.5 + 0.5 - 0.5 + 0.5 - 0.5 + 0.5);
    }

    #[test]
    fn reference_indices_match_published_values() {
        let v = bratley_reference_indices(6);
        let published = [0.6529, 0.1791, 0.0370, 0.0133, 0.0015, 0.0015];
        for (a, b) in v.iter().zip(published) {
            assert!((a - b).abs() < 5e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn reference_indices_match_grid_estimate() {
        // E[g|x_1] and Var g by tensor midpoint rules in d = 3, where the
        // integrand is a low-degree polynomial and midpoint error is tiny.
        let d = 3;
        let k = 200;
        let pts: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect();
        let (mut s1, mut s2) = (0.0, 0.0);
        let mut cond = vec![0.0; k];
        for (a, &x1) in pts.iter().enumerate() {
            for &x2 in &pts {
                for &x3 in &pts {
                    let g = bratley_g(&[x1, x2, x3]);
                    s1 += g;
                    s2 += g * g;
                    cond[a] += g;
                }
            }
        }
        let n = (k * k * k) as f64;
        let (mean, var) = (s1 / n, s2 / n - (s1 / n).powi(2));
        let cond_var = cond.iter().map(|c| (c / (k * k) as f64 - mean).powi(2)).sum::<f64>() / k as f64;
        let v = bratley_reference_indices(d);
        assert!((cond_var / var - v[0]).abs() < 1e-4);
    }

    #[test]
    fn integrand_outputs() {
        let f = SobolIndexIntegrand::new(bratley_g, 6, 0);
        let mut out = [0.0; 3];
        let x: Vec<f64> = (0..12).map(|i| (i as f64 + 1.0) / 13.0).collect();
        f.evaluate(&x, &mut out);
        let gx = bratley_g(&x[..6]);
        let mut mixed = x[6..].to_vec();
        mixed[0] = x[0];
        assert_eq!(out, [(bratley_g(&mixed) - bratley_g(&x[6..])) * gx, gx * gx, gx]);
    }

    #[test]
    fn bound_examples() {
        let (lo, hi) = SobolIndexFunctional.bounds(&[0.2, 1.0, 0.5], &[0.3, 0.1, 0.1]);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.5 / (0.9 - 0.36)).abs() < 1e-15);
        let (lo, hi) = SobolIndexFunctional.bounds(&[0.3, 1.0, 0.0], &[0.0; 3]);
        assert_eq!((lo, hi), (0.3, 0.3));
    }

    #[test]
    fn negative_mean_box() {
        // μ₃ < 0: the smallest denominator uses the endpoint farther from zero
        let (lo, hi) = SobolIndexFunctional.bounds(&[0.03, 0.16, -0.33], &[0.001, 0.001, 0.01]);
        let den_min = 0.159 - 0.34f64 * 0.34;
        let den_max = 0.161 - 0.32f64 * 0.32;
        assert!((hi - 0.031 / den_min).abs() < 1e-12);
        assert!((lo - 0.029 / den_max).abs() < 1e-12);
    }
}
