use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PointBatch, LATTICE_SHIFT_STREAM};
use crate::error::{Error, Result};

static DEFAULT_VECTOR_TEXT: &str = include_str!("../../data/lattice-ckn-3600-m20.txt");
static DEFAULT_VECTOR: OnceLock<Vec<u64>> = OnceLock::new();
const DEFAULT_M_MAX: u32 = 20;

/// Base-2 radical inverse of the low `bits` bits of `i`, as an integer in `[0, 2^bits)`.
pub fn radical_inverse(i: u64, bits: u32) -> u64 {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (64 - bits)
    }
}

/// Shifted rank-1 lattice node sequence in van der Corput order:
/// `x_i = frac(φ₂(i)·g + Δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGenerator {
    vector: Vec<u64>,
    m_max: u32,
    shift: Vec<f64>,
    seed: Option<u64>,
}

impl LatticeGenerator {
    /// Unshifted generator from an explicit generating vector.
    pub fn new(vector: Vec<u64>, m_max: u32) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::InvalidInput("empty generating vector".into()));
        }
        if m_max == 0 || m_max > 52 {
            return Err(Error::InvalidInput(format!("m_max {m_max} outside 1..=52")));
        }
        let modulus = 1u64 << m_max;
        let vector: Vec<u64> = vector.into_iter().map(|g| g % modulus).collect();
        let d = vector.len();
        Ok(LatticeGenerator { vector, m_max, shift: vec![0.0; d], seed: None })
    }

    /// Parses a vector file: one decimal integer per line, blank lines ignored.
    pub fn parse_vector(text: &str) -> Result<Vec<u64>> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim().parse::<u64>().map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })
            })
            .collect()
    }

    /// First `dimension` components of the embedded 3600-dimensional vector
    /// (modulus `2^20`).
    pub fn default_vector(dimension: usize) -> Result<Self> {
        let full = DEFAULT_VECTOR
            .get_or_init(|| Self::parse_vector(DEFAULT_VECTOR_TEXT).expect("embedded lattice vector is valid"));
        if dimension == 0 || dimension > full.len() {
            return Err(Error::Capacity { requested: dimension, available: full.len() });
        }
        Self::new(full[..dimension].to_vec(), DEFAULT_M_MAX)
    }

    pub fn dimension(&self) -> usize {
        self.vector.len()
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn vector(&self) -> &[u64] {
        &self.vector
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Uniform random shift. Components are multiples of `2^-53`, so adding a
    /// node (a multiple of `2^-m_max`) is exact in binary64.
    pub fn randomize(&self, seed: u64) -> LatticeGenerator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(LATTICE_SHIFT_STREAM);
        let shift = (0..self.dimension())
            .map(|_| (rng.random::<u64>() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
            .collect();
        LatticeGenerator { shift, seed: Some(seed), ..self.clone() }
    }

    pub fn with_shift(&self, shift: Vec<f64>) -> Result<LatticeGenerator> {
        if shift.len() != self.dimension() || shift.iter().any(|s| !(0.0..1.0).contains(s)) {
            return Err(Error::InvalidInput("shift must have one component in [0,1) per coordinate".into()));
        }
        Ok(LatticeGenerator { shift, seed: None, ..self.clone() })
    }

    /// Integer numerator of the unshifted node: `z_i = node(i, j) / 2^m_max`.
    pub fn node(&self, index: u64, coordinate: usize) -> u64 {
        let modulus_mask = (1u64 << self.m_max) - 1;
        let j = radical_inverse(index, self.m_max) as u128;
        ((j * self.vector[coordinate] as u128) as u64) & modulus_mask
    }

    pub fn points(&self, start: u64, count: usize, dimension: usize) -> Result<PointBatch> {
        if dimension == 0 || dimension > self.dimension() {
            return Err(Error::Capacity { requested: dimension, available: self.dimension() });
        }
        let end = start
            .checked_add(count as u64)
            .filter(|&e| e <= 1u64 << self.m_max)
            .ok_or(Error::IndexOverflow { start, end: start.saturating_add(count as u64), bits: self.m_max })?;
        let scale = 1.0 / (1u64 << self.m_max) as f64;
        let mut data = Vec::with_capacity(count * dimension);
        for i in start..end {
            for j in 0..dimension {
                let x = self.node(i, j) as f64 * scale + self.shift[j];
                data.push(if x >= 1.0 { x - 1.0 } else { x });
            }
        }
        Ok(PointBatch::new(start, count, dimension, data))
    }
}
