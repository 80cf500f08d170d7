//! Replication heuristics next to the guaranteed loop on test integrands
//! with known integrals.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use super::{header, Config};
use crate::engine::{heuristic_baseline, integrate_with, BaselineEstimate, CubatureResult, Identity, Strategy};
use crate::error::{Error, Result};
use crate::integrands::synthetic::{Constant, Needle, SmoothProduct, SpikySpectrum};
use crate::integrands::Integrand;
use crate::sequences::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestIntegrand {
    Constant,
    Smooth,
    Spiky,
    Needle,
}

impl TestIntegrand {
    pub const ALL: [TestIntegrand; 4] =
        [TestIntegrand::Constant, TestIntegrand::Smooth, TestIntegrand::Spiky, TestIntegrand::Needle];

    pub fn as_str(self) -> &'static str {
        match self {
            TestIntegrand::Constant => "constant",
            TestIntegrand::Smooth => "smooth",
            TestIntegrand::Spiky => "spiky",
            TestIntegrand::Needle => "needle",
        }
    }

    /// The integrand and its exact integral.
    pub fn build(self, family: Family, dimension: usize) -> (Box<dyn Integrand>, f64) {
        match self {
            TestIntegrand::Constant => (Box::new(Constant { dimension, value: 1.5 }), 1.5),
            TestIntegrand::Smooth => {
                let f = SmoothProduct::new(dimension);
                let mu = f.integral();
                (Box::new(f), mu)
            }
            TestIntegrand::Spiky => {
                let f = SpikySpectrum::new(family, dimension);
                let mu = f.integral();
                (Box::new(f), mu)
            }
            TestIntegrand::Needle => {
                let f = Needle::new(dimension);
                let mu = f.integral();
                (Box::new(f), mu)
            }
        }
    }
}

impl fmt::Display for TestIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestIntegrand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestIntegrand::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown integrand '{s}' (constant, smooth, spiky, needle)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineOptions {
    pub strategy: Strategy,
    pub integrand: TestIntegrand,
    pub dimension: usize,
    pub replications: usize,
    /// Points per replicate.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRecord {
    pub run: usize,
    pub exact: f64,
    pub heuristic: BaselineEstimate,
    pub engine: CubatureResult,
}

impl BaselineRecord {
    pub fn heuristic_error(&self) -> f64 {
        (self.heuristic.mu_hat - self.exact).abs()
    }

    pub fn heuristic_covers(&self) -> bool {
        self.heuristic_error() <= self.heuristic.claimed_bound
    }

    /// The engine's bound on `|μ − μ̂_n|`.
    pub fn engine_bound(&self) -> f64 {
        self.engine.estimates[0].err
    }

    pub fn engine_error(&self) -> f64 {
        (self.engine.estimates[0].mu_hat - self.exact).abs()
    }

    pub fn engine_covers(&self) -> bool {
        self.engine_error() <= self.engine_bound()
    }
}

pub fn run(cfg: &Config, opts: &BaselineOptions) -> Result<Vec<BaselineRecord>> {
    if opts.dimension == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let (f, exact) = opts.integrand.build(cfg.family, opts.dimension);
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let seed = cfg.run_seed(run);
            let heuristic =
                heuristic_baseline(&*f, cfg.family, opts.strategy, opts.replications, opts.n, crate::engine::DEFAULT_INFLATION, seed)?;
            let generator = cfg.sources.generator(cfg.family, opts.dimension, seed)?;
            let engine = integrate_with(&*f, &Identity, &cfg.tol, &cfg.cone, &generator)?;
            Ok(BaselineRecord { run, exact, heuristic, engine })
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, cfg: &Config, opts: &BaselineOptions, records: &[BaselineRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(&[
        "integrand",
        "strategy",
        "replications",
        "n_replicate",
        "exact",
        "heuristic_mu",
        "claimed_bound",
        "heuristic_error",
        "heuristic_covers",
        "engine_bound",
        "engine_error",
        "engine_covers",
    ]))?;
    for r in records {
        let mut row = r.engine.csv_fields(cfg.timing);
        row.extend([
            opts.integrand.to_string(),
            opts.strategy.to_string(),
            opts.replications.to_string(),
            opts.n.to_string(),
            r.exact.to_string(),
            r.heuristic.mu_hat.to_string(),
            r.heuristic.claimed_bound.to_string(),
            r.heuristic_error().to_string(),
            r.heuristic_covers().to_string(),
            r.engine_bound().to_string(),
            r.engine_error().to_string(),
            r.engine_covers().to_string(),
        ]);
        row.extend(cfg.fields());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
