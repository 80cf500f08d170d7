//! Low-discrepancy node sequences over `[0,1)^d`.
//!
//! Both families share the same algebra: the unshifted nodes `z_0 = 0, z_1, ...`
//! form a group under an addition `⊕` (digit-wise XOR for digital sequences,
//! addition modulo one for lattices) and every prefix of length `2^m` is a
//! subgroup. Data sites are `x_i = z_i ⊕ Δ` for a random shift `Δ`.

mod digital;
mod lattice;

use std::fmt;
use std::str::FromStr;

pub use digital::{DigitalGenerator, DirectionNumbers, PRECISION};
pub use lattice::{radical_inverse, LatticeGenerator};

use crate::error::{Error, Result};

/// PRNG stream used for the scramble matrices and digital shift.
pub const SCRAMBLE_STREAM: u64 = 0x5343_5241_4d42_4c45;
/// PRNG stream used for lattice shifts.
pub const LATTICE_SHIFT_STREAM: u64 = 0x4c41_5453_4849_4654;

/// Which kind of node sequence drives the cubature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Digital,
    Lattice,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Digital => "digital",
            Family::Lattice => "lattice",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "digital" | "sobol" => Ok(Family::Digital),
            "lattice" => Ok(Family::Lattice),
            other => Err(Error::InvalidInput(format!("unknown family '{other}'"))),
        }
    }
}

/// A block of consecutive points `x_{start}, ..., x_{start+count-1}`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBatch {
    pub start: u64,
    pub count: usize,
    pub dimension: usize,
    data: Vec<f64>,
}

impl PointBatch {
    pub(crate) fn new(start: u64, count: usize, dimension: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), count * dimension);
        PointBatch { start, count, dimension, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dimension)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// Either node family behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Digital(DigitalGenerator),
    Lattice(LatticeGenerator),
}

impl Generator {
    /// Randomized generator of the given family from the embedded tables.
    pub fn randomized(family: Family, dimension: usize, seed: u64) -> Result<Generator> {
        Ok(match family {
            Family::Digital => Generator::Digital(DigitalGenerator::sobol(dimension)?.randomize(seed)),
            Family::Lattice => Generator::Lattice(LatticeGenerator::default_vector(dimension)?.randomize(seed)),
        })
    }

    pub fn family(&self) -> Family {
        match self {
            Generator::Digital(_) => Family::Digital,
            Generator::Lattice(_) => Family::Lattice,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Generator::Digital(g) => g.dimension(),
            Generator::Lattice(g) => g.dimension(),
        }
    }

    /// Largest `m` for which `2^m` points can be generated.
    pub fn max_level(&self) -> u32 {
        match self {
            Generator::Digital(_) => PRECISION,
            Generator::Lattice(g) => g.m_max(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Generator::Digital(g) => g.seed(),
            Generator::Lattice(g) => g.seed(),
        }
    }

    pub fn points(&self, start: u64, count: usize, dimension: usize) -> Result<PointBatch> {
        match self {
            Generator::Digital(g) => g.points(start, count, dimension),
            Generator::Lattice(g) => g.points(start, count, dimension),
        }
    }
}

impl From<DigitalGenerator> for Generator {
    fn from(g: DigitalGenerator) -> Self {
        Generator::Digital(g)
    }
}

impl From<LatticeGenerator> for Generator {
    fn from(g: LatticeGenerator) -> Self {
        Generator::Lattice(g)
    }
}
