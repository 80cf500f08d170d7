//! Replication-based error heuristics, kept for comparison with the
//! guaranteed loop. None of them is a guaranteed bound.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrands::{evaluate_points, Integrand};
use crate::sequences::{Family, Generator};

pub const DEFAULT_INFLATION: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// `R` independent randomizations, `n` points each.
    IidReplications,
    /// One randomization split into `R` consecutive blocks of `n` points.
    InternalReplications,
    /// One `R·d`-dimensional sequence whose coordinate blocks act as replicates.
    QuasiStandardError,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::IidReplications => "iid-replications",
            Strategy::InternalReplications => "internal-replications",
            Strategy::QuasiStandardError => "quasi-standard-error",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid-replications" | "iid" => Ok(Strategy::IidReplications),
            "internal-replications" | "internal" => Ok(Strategy::InternalReplications),
            "quasi-standard-error" | "qse" => Ok(Strategy::QuasiStandardError),
            other => Err(Error::InvalidInput(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Pooled estimate, replicate means and the claimed (unguaranteed) bound
/// `inflation × sample standard deviation of the replicate means`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEstimate {
    pub strategy: Strategy,
    pub mu_hat: f64,
    pub replicates: Vec<f64>,
    pub claimed_bound: f64,
    pub inflation: f64,
    pub n: usize,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs one heuristic on the scalar integrand `f`.
pub fn heuristic_baseline(
    f: &dyn Integrand,
    family: Family,
    strategy: Strategy,
    replications: usize,
    n: usize,
    inflation: f64,
    seed: u64,
) -> Result<BaselineEstimate> {
    if replications < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 replications, got {replications}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("replicate sample size must be positive".into()));
    }
    if f.outputs() != 1 {
        return Err(Error::InvalidInput("baselines take scalar integrands".into()));
    }
    let d = f.dimension().max(1);
    let replicates: Vec<f64> = match strategy {
        Strategy::IidReplications => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..replications)
                .map(|_| {
                    let g = Generator::randomized(family, d, rng.random())?;
                    Ok(mean(&evaluate_points(f, &g.points(0, n, d)?)?[0]))
                })
                .collect::<Result<_>>()?
        }
        Strategy::InternalReplications => {
            let g = Generator::randomized(family, d, seed)?;
            let values = evaluate_points(f, &g.points(0, n * replications, d)?)?.remove(0);
            values.chunks_exact(n).map(mean).collect()
        }
        Strategy::QuasiStandardError => {
            let wide = d * replications;
            let g = Generator::randomized(family, wide, seed)?;
            let batch = g.points(0, n, wide)?;
            let mut sums = vec![0.0; replications];
            let mut out = [0.0];
            for row in batch.rows() {
                for (r, block) in row.chunks_exact(d).enumerate() {
                    f.evaluate(&block[..f.dimension()], &mut out);
                    sums[r] += out[0];
                }
            }
            sums.iter().map(|s| s / n as f64).collect()
        }
    };
    for (r, v) in replicates.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { index: r as u64, output: 0 });
        }
    }
    let mu_hat = mean(&replicates);
    let var = replicates.iter().map(|v| (v - mu_hat).powi(2)).sum::<f64>() / (replications - 1) as f64;
    Ok(BaselineEstimate {
        strategy,
        mu_hat,
        claimed_bound: inflation * var.sqrt(),
        replicates,
        inflation,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::FnIntegrand;

    #[test]
    fn constant_integrand_is_exact() {
        let f = FnIntegrand::new(2, |_| 4.0);
        for s in [Strategy::IidReplications, Strategy::InternalReplications, Strategy::QuasiStandardError] {
            for fam in [Family::Digital, Family::Lattice] {
                let b = heuristic_baseline(&f, fam, s, 4, 64, DEFAULT_INFLATION, 1).unwrap();
                assert_eq!(b.mu_hat, 4.0);
                assert_eq!(b.claimed_bound, 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = FnIntegrand::new(1, |x| x[0]);
        assert!(heuristic_baseline(&f, Family::Digital, Strategy::IidReplications, 1, 64, 1.2, 0).is_err());
        let wide = FnIntegrand::new(3000, |x| x[0]);
        assert!(matches!(
            heuristic_baseline(&wide, Family::Lattice, Strategy::QuasiStandardError, 2, 16, 1.2, 0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn internal_blocks_pool_to_full_mean() {
        let f = FnIntegrand::new(2, |x| x[0] * x[1]);
        let b = heuristic_baseline(&f, Family::Digital, Strategy::InternalReplications, 8, 128, 1.2, 5).unwrap();
        let g = Generator::randomized(Family::Digital, 2, 5).unwrap();
        let all = evaluate_points(&f, &g.points(0, 1024, 2).unwrap()).unwrap();
        assert!((b.mu_hat - mean(&all[0])).abs() < 1e-14);
    }
}
