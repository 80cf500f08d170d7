//! Multivariate normal rectangle probabilities via sequential conditioning.

use std::path::Path;

use super::normal::{norm_cdf, norm_inv_cdf_unchecked, norm_pdf};
use super::quadrature::integrate_adaptive;
use super::Integrand;
use crate::error::{Error, Result};

/// `P(a ≤ X ≤ b)` for `X ~ N(0, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MvnProblem {
    lower: Vec<f64>,
    upper: Vec<f64>,
    covariance: Vec<f64>,
    cholesky: Vec<f64>,
}

impl MvnProblem {
    /// `covariance` is row-major `d×d`. Infinite limits are allowed.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let d = upper.len();
        if lower.len() != d || covariance.len() != d * d {
            return Err(Error::InvalidInput(format!(
                "limits have lengths {} and {}, covariance has {} entries",
                lower.len(),
                d,
                covariance.len()
            )));
        }
        if let Some(i) = (0..d).find(|&i| lower[i].is_nan() || upper[i].is_nan() || lower[i] > upper[i]) {
            return Err(Error::InvalidInput(format!("limits at coordinate {i} are not ordered")));
        }
        let cholesky = cholesky(&covariance, d)?;
        Ok(MvnProblem { lower, upper, covariance, cholesky })
    }

    /// Unit-variance equicorrelated covariance with lower limits `-∞`.
    pub fn equicorrelated(sigma: f64, upper: Vec<f64>) -> Result<Self> {
        let d = upper.len();
        let cov = (0..d * d).map(|k| if k / d == k % d { 1.0 } else { sigma }).collect();
        MvnProblem::new(vec![f64::NEG_INFINITY; d], upper, cov)
    }

    pub fn dimension(&self) -> usize {
        self.upper.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    /// Lower-triangular factor, row-major.
    pub fn cholesky(&self) -> &[f64] {
        &self.cholesky
    }

    /// The transformed integrand over `[0,1)^{d-1}`.
    pub fn genz(&self) -> GenzIntegrand<'_> {
        GenzIntegrand { problem: self }
    }
}

fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            if (a[i * d + j] - a[j * d + i]).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("covariance is not symmetric at ({i},{j})")));
            }
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let diag = a[i * d + i] - s;
                if diag.is_nan() || diag <= 0.0 {
                    return Err(Error::Domain(format!("covariance is not positive definite (pivot {i})")));
                }
                l[i * d + i] = diag.sqrt();
            } else {
                l[i * d + j] = (a[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Genz's sequentially conditioned integrand; its integral over `[0,1)^{d-1}`
/// is the rectangle probability.
#[derive(Debug, Clone, Copy)]
pub struct GenzIntegrand<'a> {
    problem: &'a MvnProblem,
}

// keeps Φ⁻¹ finite when a conditional interval has collapsed to an endpoint
const U_MIN: f64 = f64::MIN_POSITIVE;
const U_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

impl GenzIntegrand<'_> {
    pub fn value(&self, x: &[f64]) -> f64 {
        let p = self.problem;
        let d = p.dimension();
        let l = &p.cholesky;
        let mut y = Vec::with_capacity(d);
        let mut product = 1.0;
        for i in 0..d {
            let shift: f64 = (0..i).map(|j| l[i * d + j] * y[j]).sum();
            let diag = l[i * d + i];
            let e = norm_cdf((p.upper[i] - shift) / diag);
            let lo = norm_cdf((p.lower[i] - shift) / diag);
            let width = e - lo;
            if width <= 0.0 {
                return 0.0;
            }
            product *= width;
            if i + 1 < d {
                let u = (lo + x[i] * width).clamp(U_MIN, U_MAX);
                y.push(norm_inv_cdf_unchecked(u));
            }
        }
        product
    }
}

impl Integrand for GenzIntegrand<'_> {
    fn dimension(&self) -> usize {
        self.problem.dimension().saturating_sub(1)
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.value(x);
    }
}

/// Equicorrelated probability `P(X ≤ b)` reduced to a single integral,
/// `∫ φ(t) Π_j Φ((b_j + √σ t)/√(1-σ)) dt` over `[-8, 8]`.
pub fn mvn_equicorrelated_oracle(sigma: f64, upper: &[f64]) -> Result<f64> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::Domain(format!("equicorrelation must lie in [0,1), got {sigma}")));
    }
    if sigma == 0.0 || upper.len() <= 1 {
        return Ok(upper.iter().map(|&b| norm_cdf(b)).product());
    }
    let (a, s) = (sigma.sqrt(), (1.0 - sigma).sqrt());
    let integrand = |t: f64| norm_pdf(t) * upper.iter().map(|&b| norm_cdf((b + a * t) / s)).product::<f64>();
    Ok(integrate_adaptive(integrand, -8.0, 8.0, 1e-12))
}

/// Reads a row-major numeric matrix from CSV. A leading non-numeric row is
/// taken as a header.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Parse { line: i + 1, message: e.to_string() }),
        }
    }
    Ok(rows)
}

/// Reads a vector stored either as one row or as one column.
pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let rows = read_matrix_csv(path)?;
    if rows.len() == 1 {
        return Ok(rows.into_iter().next().unwrap());
    }
    if rows.iter().all(|r| r.len() == 1) {
        return Ok(rows.into_iter().map(|r| r[0]).collect());
    }
    Err(Error::InvalidInput(format!("{} is neither a single row nor a single column", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::normal::norm_inv_cdf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cholesky_reconstructs() {
        let p = MvnProblem::equicorrelated(0.3, vec![1.0; 5]).unwrap();
        let l = p.cholesky();
        for i in 0..5 {
            assert!(l[i * 5 + i] > 0.0);
            for j in 0..5 {
                let s: f64 = (0..5).map(|k| l[i * 5 + k] * l[j * 5 + k]).sum();
                assert!((s - p.covariance()[i * 5 + j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(MvnProblem::new(vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(matches!(
            MvnProblem::new(vec![0.0; 2], vec![1.0; 2], vec![1.0, 2.0, 2.0, 1.0]),
            Err(Error::Domain(_))
        ));
        assert!(mvn_equicorrelated_oracle(1.0, &[0.0]).is_err());
    }

    #[test]
    fn one_dimension_is_constant() {
        let p = MvnProblem::new(vec![-0.5], vec![1.5], vec![1.0]).unwrap();
        let g = p.genz();
        assert_eq!(g.dimension(), 0);
        assert_eq!(g.value(&[]), norm_cdf(1.5) - norm_cdf(-0.5));
    }

    #[test]
    fn independent_quadrant() {
        let p = MvnProblem::new(vec![f64::NEG_INFINITY; 2], vec![0.0; 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let g = p.genz();
        for x in [0.1, 0.5, 0.9] {
            assert!((g.value(&[x]) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_limits() {
        let b = [0.3, -0.2, 1.1];
        let indep: f64 = b.iter().map(|&v| norm_cdf(v)).product();
        assert_eq!(mvn_equicorrelated_oracle(0.0, &b).unwrap(), indep);
        assert_eq!(mvn_equicorrelated_oracle(0.7, &[0.4]).unwrap(), norm_cdf(0.4));
        // the reduction holds for small σ too, where it should approach independence
        let near = mvn_equicorrelated_oracle(1e-9, &b).unwrap();
        assert!((near - indep).abs() < 1e-6);
    }

    #[test]
    fn oracle_agrees_with_bivariate_closed_form() {
        // P(X ≤ 0, Y ≤ 0) = 1/4 + asin(ρ)/(2π)
        for rho in [0.1, 0.5, 0.9] {
            let v = mvn_equicorrelated_oracle(rho, &[0.0, 0.0]).unwrap();
            let exact = 0.25 + rho.asin() / std::f64::consts::TAU;
            assert!((v - exact).abs() < 1e-10, "{rho}: {v} vs {exact}");
        }
    }

    #[test]
    fn genz_values_are_probabilities() {
        let p = MvnProblem::equicorrelated(0.6, vec![0.5, 1.0, 2.0, -0.3]).unwrap();
        let g = p.genz();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random()).collect();
            let v = g.value(&x);
            assert!((0.0..=1.0).contains(&v));
        }
        assert!((0.0..=1.0).contains(&g.value(&[0.0, 0.0, 0.0])));
    }

    #[test]
    fn oracle_matches_monte_carlo() {
        let (sigma, b) = (0.25, [0.5; 4]);
        let oracle = mvn_equicorrelated_oracle(sigma, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000_000;
        let (a, s) = (sigma.sqrt(), (1.0 - sigma).sqrt());
        let mut hits = 0u64;
        for _ in 0..n {
            let common = norm_inv_cdf(rng.random_range(f64::EPSILON..1.0)).unwrap();
            let inside = b.iter().all(|&bj| {
                let z = norm_inv_cdf(rng.random_range(f64::EPSILON..1.0)).unwrap();
                a * common + s * z <= bj
            });
            hits += inside as u64;
        }
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - oracle).abs() <= 4.0 * se, "mc {p} oracle {oracle} se {se}");
    }

    #[test]
    fn csv_loaders() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("cov.csv");
        std::fs::write(&m, "a,b\n1,0.5\n0.5,2\n").unwrap();
        assert_eq!(read_matrix_csv(&m).unwrap(), vec![vec![1.0, 0.5], vec![0.5, 2.0]]);
        let v = dir.path().join("b.csv");
        std::fs::write(&v, "1\n2\n3\n").unwrap();
        assert_eq!(read_vector_csv(&v).unwrap(), vec![1.0, 2.0, 3.0]);
        std::fs::write(&v, "1,2\n3,x\n").unwrap();
        assert!(matches!(read_matrix_csv(&v), Err(Error::Parse { line: 2, .. })));
    }
}
