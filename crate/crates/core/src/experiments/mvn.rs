//! Random equicorrelated normal probabilities against the one-dimensional oracle.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{fmt_opt, header, Config};
use crate::engine::{integrate_with, tolerance_value, CubatureResult, Identity};
use crate::error::{Error, Result};
use crate::integrands::mvn::{mvn_equicorrelated_oracle, read_matrix_csv, read_vector_csv, MvnProblem};

pub const DEFAULT_D_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvnOptions {
    pub d_cap: usize,
    /// Fixes `d` instead of drawing it.
    pub dimension: Option<usize>,
}

impl Default for MvnOptions {
    fn default() -> Self {
        MvnOptions { d_cap: DEFAULT_D_CAP, dimension: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub sigma: f64,
    pub upper: Vec<f64>,
}

/// `σ ~ U[0,1)`, `d = ⌊d_cap^D⌋` with `D ~ U[0,1)`, `b_j ~ U[0, √d]`.
pub fn draw_instance(rng: &mut impl Rng, opts: &MvnOptions) -> Instance {
    let sigma = rng.random::<f64>();
    let d = match opts.dimension {
        Some(d) => d,
        None => ((opts.d_cap as f64).powf(rng.random::<f64>()).floor() as usize).max(1),
    };
    let root = (d as f64).sqrt();
    let upper = (0..d).map(|_| rng.random::<f64>() * root).collect();
    Instance { sigma, upper }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvnRecord {
    pub run: usize,
    pub instance: Instance,
    pub reference: Option<f64>,
    /// `tol(μ, v̂)` when a reference exists.
    pub tol_true: Option<f64>,
    pub result: CubatureResult,
}

impl MvnRecord {
    pub fn success(&self) -> bool {
        self.tol_true.is_some_and(|t| t <= 1.0)
    }
}

fn run_one(cfg: &Config, opts: &MvnOptions, run: usize) -> Result<MvnRecord> {
    let seed = cfg.run_seed(run);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (instance, reference) = loop {
        let inst = draw_instance(&mut rng, opts);
        match mvn_equicorrelated_oracle(inst.sigma, &inst.upper) {
            Ok(mu) => break (inst, mu),
            Err(e) => log::info!("run {run}: resampling instance, oracle unavailable: {e}"),
        }
    };
    let problem = MvnProblem::equicorrelated(instance.sigma, instance.upper.clone())?;
    let f = problem.genz();
    let generator = cfg.sources.generator(cfg.family, problem.dimension(), seed)?;
    let mut result = integrate_with(&f, &Identity, &cfg.tol, &cfg.cone, &generator)?;
    result.dimension = problem.dimension();
    let tol_true = tolerance_value(reference, result.v_hat, &cfg.tol);
    Ok(MvnRecord { run, instance, reference: Some(reference), tol_true: Some(tol_true), result })
}

pub fn run(cfg: &Config, opts: &MvnOptions) -> Result<Vec<MvnRecord>> {
    if opts.d_cap < 2 && opts.dimension.is_none() {
        return Err(Error::InvalidInput(format!("d_cap must be at least 2, got {}", opts.d_cap)));
    }
    if opts.dimension == Some(0) {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    (0..cfg.runs).into_par_iter().map(|run| run_one(cfg, opts, run)).collect()
}

/// A single problem read from files; there is no reference value.
pub fn run_files(cfg: &Config, covariance: &Path, upper: &Path, lower: Option<&Path>) -> Result<MvnRecord> {
    let cov = read_matrix_csv(covariance)?;
    let d = cov.len();
    if cov.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidInput("covariance matrix must be square".into()));
    }
    let upper = read_vector_csv(upper)?;
    let lower = match lower {
        Some(p) => read_vector_csv(p)?,
        None => vec![f64::NEG_INFINITY; d],
    };
    let problem = MvnProblem::new(lower, upper.clone(), cov.concat())?;
    let f = problem.genz();
    let generator = cfg.sources.generator(cfg.family, problem.dimension(), cfg.seed)?;
    let mut result = integrate_with(&f, &Identity, &cfg.tol, &cfg.cone, &generator)?;
    result.dimension = d;
    Ok(MvnRecord { run: 0, instance: Instance { sigma: f64::NAN, upper }, reference: None, tol_true: None, result })
}

pub fn success_fraction(records: &[MvnRecord]) -> f64 {
    records.iter().filter(|r| r.success()).count() as f64 / records.len().max(1) as f64
}

pub fn write_csv<W: Write>(out: W, cfg: &Config, records: &[MvnRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(&["run", "sigma", "reference", "tol_true"]))?;
    for r in records {
        let mut row = r.result.csv_fields(cfg.timing);
        row.push(r.run.to_string());
        row.push(if r.instance.sigma.is_nan() { String::new() } else { r.instance.sigma.to_string() });
        row.push(fmt_opt(r.reference));
        row.push(fmt_opt(r.tol_true));
        row.extend(cfg.fields());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeParams;
    use crate::engine::Tolerance;
    use crate::integrands::normal::norm_cdf;
    use crate::sequences::Family;

    fn config(runs: usize) -> Config {
        Config::new(11, runs, Tolerance::new(0.01, 0.05).unwrap(), Family::Digital, ConeParams::default()).unwrap()
    }

    #[test]
    fn instances_respect_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let opts = MvnOptions::default();
        for _ in 0..200 {
            let inst = draw_instance(&mut rng, &opts);
            assert!((0.0..1.0).contains(&inst.sigma));
            assert!((1..opts.d_cap).contains(&inst.upper.len()));
            let root = (inst.upper.len() as f64).sqrt();
            assert!(inst.upper.iter().all(|&b| (0.0..root).contains(&b)));
        }
    }

    #[test]
    fn forced_one_dimension() {
        let opts = MvnOptions { dimension: Some(1), ..MvnOptions::default() };
        let recs = run(&config(1), &opts).unwrap();
        let r = &recs[0];
        let phi = norm_cdf(r.instance.upper[0]);
        assert!(tolerance_value(phi, r.result.v_hat, &config(1).tol) <= 1.0);
        assert!(r.success());
    }

    #[test]
    fn small_batch_succeeds_and_is_ordered() {
        let recs = run(&config(6), &MvnOptions { d_cap: 16, dimension: None }).unwrap();
        assert_eq!(recs.iter().map(|r| r.run).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
        assert_eq!(success_fraction(&recs), 1.0);
    }
}
