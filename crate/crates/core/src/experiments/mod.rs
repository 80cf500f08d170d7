//! Experiment drivers behind the `qmcube` subcommands.
//!
//! Each driver returns typed records so tests can inspect them, and has a
//! matching `write_csv`. Runs that are independent execute in parallel with
//! per-run seeds `seed ^ run`; records always come back in run order.

pub mod asian;
pub mod baselines;
pub mod mvn;
pub mod sobol;

use std::fs;
use std::path::Path;

use crate::cone::ConeParams;
use crate::engine::{Tolerance, CSV_HEADER};
use crate::error::{Error, Result};
use crate::sequences::{DirectionNumbers, Family, Generator, LatticeGenerator};

/// Lattice modulus exponent used for user-supplied generating vectors.
pub const CUSTOM_LATTICE_M_MAX: u32 = 20;

/// Where generators come from: the embedded tables unless files override them.
#[derive(Debug, Clone, Default)]
pub struct Sources {
    direction_numbers: Option<DirectionNumbers>,
    lattice_vector: Option<Vec<u64>>,
}

impl Sources {
    pub fn load(dirnum_file: Option<&Path>, lattice_vector: Option<&Path>) -> Result<Self> {
        let direction_numbers = dirnum_file.map(|p| DirectionNumbers::parse(&fs::read_to_string(p)?)).transpose()?;
        let lattice_vector = lattice_vector.map(|p| LatticeGenerator::parse_vector(&fs::read_to_string(p)?)).transpose()?;
        if lattice_vector.as_ref().is_some_and(|v| v.is_empty()) {
            return Err(Error::InvalidInput("lattice vector file is empty".into()));
        }
        Ok(Sources { direction_numbers, lattice_vector })
    }

    pub fn generator(&self, family: Family, dimension: usize, seed: u64) -> Result<Generator> {
        let dimension = dimension.max(1);
        match family {
            Family::Digital => match &self.direction_numbers {
                Some(dn) => Ok(Generator::Digital(dn.generator(dimension)?.randomize(seed))),
                None => Generator::randomized(family, dimension, seed),
            },
            Family::Lattice => match &self.lattice_vector {
                Some(v) => {
                    if dimension > v.len() {
                        return Err(Error::Capacity { requested: dimension, available: v.len() });
                    }
                    let g = LatticeGenerator::new(v[..dimension].to_vec(), CUSTOM_LATTICE_M_MAX)?;
                    Ok(Generator::Lattice(g.randomize(seed)))
                }
                None => Generator::randomized(family, dimension, seed),
            },
        }
    }
}

/// Resolved settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Config {
    pub seed: u64,
    pub runs: usize,
    pub tol: Tolerance,
    pub family: Family,
    pub cone: ConeParams,
    /// Record wall times. Off makes output byte-identical across reruns.
    pub timing: bool,
    pub sources: Sources,
}

impl Config {
    pub fn new(seed: u64, runs: usize, tol: Tolerance, family: Family, cone: ConeParams) -> Result<Self> {
        cone.validate()?;
        if runs == 0 {
            return Err(Error::InvalidInput("runs must be positive".into()));
        }
        Ok(Config { seed, runs, tol, family, cone, timing: true, sources: Sources::default() })
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed ^ run as u64
    }

    pub fn describe(&self) -> String {
        format!(
            "seed={} runs={} family={} abs_tol={} rel_tol={} l_star={} r={} C_scale={} rho_scale={} m_max={} timing={}",
            self.seed,
            self.runs,
            self.family,
            self.tol.abs(),
            self.tol.rel(),
            self.cone.l_star,
            self.cone.r,
            self.cone.c_scale,
            self.cone.rho_scale,
            self.cone.m_max,
            self.timing
        )
    }

    /// Config columns appended to every CSV row.
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.tol.abs().to_string(),
            self.tol.rel().to_string(),
            self.cone.l_star.to_string(),
            self.cone.r.to_string(),
            self.cone.m_max.to_string(),
        ]
    }
}

pub const CONFIG_HEADER: [&str; 5] = ["abs_tol", "rel_tol", "l_star", "r", "m_max"];

/// `CSV_HEADER ++ extra ++ CONFIG_HEADER`
pub fn header(extra: &[&str]) -> Vec<String> {
    CSV_HEADER.iter().chain(extra).chain(CONFIG_HEADER.iter()).map(|s| s.to_string()).collect()
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}
