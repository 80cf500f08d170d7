use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PointBatch, SCRAMBLE_STREAM};
use crate::error::{Error, Result};

/// Number of output digits per coordinate; every coordinate is `k · 2^-52`.
pub const PRECISION: u32 = 52;

const SCALE: f64 = 1.0 / (1u64 << PRECISION) as f64;
const MASK: u64 = (1u64 << PRECISION) - 1;

static JOE_KUO_TEXT: &str = include_str!("../../data/new-joe-kuo-6.21201.txt");
static JOE_KUO: OnceLock<DirectionNumbers> = OnceLock::new();

#[derive(Debug, Clone, PartialEq)]
struct Primitive {
    degree: u32,
    coefficients: u32,
    initial: Vec<u64>,
}

/// A parsed direction-number table in the Joe–Kuo layout.
///
/// The first line is a header and is skipped. Every other non-blank line reads
/// `d s a m_1 ... m_s`. Dimension 1 is implicit (the radical inverse).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionNumbers {
    rows: Vec<Primitive>,
}

impl DirectionNumbers {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate().skip(1) {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields = trimmed
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
            let err = |message: String| Error::Parse { line: line_no, message };
            if fields.len() < 4 {
                return Err(err(format!("expected at least 4 fields, found {}", fields.len())));
            }
            let (dim, degree, coefficients) = (fields[0], fields[1], fields[2]);
            let expected_dim = rows.len() as u64 + 2;
            if dim != expected_dim {
                return Err(err(format!("expected dimension {expected_dim}, found {dim}")));
            }
            if degree == 0 || degree > 32 {
                return Err(err(format!("invalid degree {degree}")));
            }
            if fields.len() != 3 + degree as usize {
                return Err(err(format!("degree {degree} needs {degree} initial numbers, found {}", fields.len() - 3)));
            }
            if degree > 1 && coefficients >= 1 << (degree - 1) || degree == 1 && coefficients != 0 {
                return Err(err(format!("coefficient word {coefficients} too wide for degree {degree}")));
            }
            let initial = fields[3..].to_vec();
            for (k, &m) in initial.iter().enumerate() {
                if m % 2 == 0 || m >= 1 << (k + 1) {
                    return Err(err(format!("m_{} = {m} must be odd and below 2^{}", k + 1, k + 1)));
                }
            }
            rows.push(Primitive { degree: degree as u32, coefficients: coefficients as u32, initial });
        }
        Ok(DirectionNumbers { rows })
    }

    /// The embedded 21201-dimension table.
    pub fn joe_kuo() -> &'static DirectionNumbers {
        JOE_KUO.get_or_init(|| DirectionNumbers::parse(JOE_KUO_TEXT).expect("embedded direction numbers are valid"))
    }

    /// Number of coordinates the table supports, including the implicit first.
    pub fn dimensions(&self) -> usize {
        self.rows.len() + 1
    }

    /// Unscrambled, unshifted generator for the first `dimension` coordinates.
    pub fn generator(&self, dimension: usize) -> Result<DigitalGenerator> {
        if dimension == 0 || dimension > self.dimensions() {
            return Err(Error::Capacity { requested: dimension, available: self.dimensions() });
        }
        let mut columns = Vec::with_capacity(dimension);
        columns.push((0..PRECISION).map(|b| 1u64 << (PRECISION - 1 - b)).collect::<Vec<_>>());
        for row in &self.rows[..dimension - 1] {
            columns.push(direction_columns(row));
        }
        Ok(DigitalGenerator { base: columns.clone(), columns, shift: vec![0; dimension], scramble: None, seed: None })
    }
}

fn direction_columns(p: &Primitive) -> Vec<u64> {
    let s = p.degree as usize;
    let mut v = vec![0u64; PRECISION as usize];
    for b in 0..PRECISION as usize {
        v[b] = if b < s {
            p.initial[b] << (PRECISION as usize - 1 - b)
        } else {
            let mut x = v[b - s] ^ (v[b - s] >> s);
            for k in 1..s {
                if (p.coefficients >> (s - 1 - k)) & 1 == 1 {
                    x ^= v[b - k];
                }
            }
            x
        };
    }
    v
}

/// Base-2 digital sequence with optional linear matrix scrambling and a
/// digital shift.
///
/// `columns[j][b]` is the image of input bit `b` for coordinate `j`, stored as a
/// 52-bit integer whose most significant bit is the `2^-1` digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalGenerator {
    base: Vec<Vec<u64>>,
    columns: Vec<Vec<u64>>,
    shift: Vec<u64>,
    scramble: Option<Vec<Vec<u64>>>,
    seed: Option<u64>,
}

impl DigitalGenerator {
    /// Unrandomized Sobol' generator from the embedded Joe–Kuo table.
    pub fn sobol(dimension: usize) -> Result<Self> {
        DirectionNumbers::joe_kuo().generator(dimension)
    }

    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// The 52-bit digital shift, one integer per coordinate.
    pub fn shift(&self) -> &[u64] {
        &self.shift
    }

    /// Rows of the scramble matrix for `coordinate`, if scrambled. Row `t`
    /// (0-based) is a bit mask over the input digits feeding output digit `t+1`.
    pub fn scramble_rows(&self, coordinate: usize) -> Option<&[u64]> {
        self.scramble.as_ref().map(|s| s[coordinate].as_slice())
    }

    /// Draws a random lower-triangular unit-diagonal scramble and a digital
    /// shift for every coordinate. Always starts from the unscrambled matrices,
    /// so re-randomizing a randomized generator does not compound.
    pub fn randomize(&self, seed: u64) -> DigitalGenerator {
        let base = &self.base;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SCRAMBLE_STREAM);
        let mut scramble = Vec::with_capacity(base.len());
        let mut shift = Vec::with_capacity(base.len());
        for _ in 0..base.len() {
            let rows: Vec<u64> = (0..PRECISION)
                .map(|t| {
                    let diag = 1u64 << (PRECISION - 1 - t);
                    // digits above the diagonal sit in the higher bits
                    let above = !((diag << 1) - 1) & MASK;
                    diag | (rng.random::<u64>() & above)
                })
                .collect();
            scramble.push(rows);
            shift.push(rng.random::<u64>() & MASK);
        }
        let columns = base
            .iter()
            .zip(&scramble)
            .map(|(cols, rows)| cols.iter().map(|&c| apply_scramble(rows, c)).collect())
            .collect();
        DigitalGenerator { base: self.base.clone(), columns, shift, scramble: Some(scramble), seed: Some(seed) }
    }

    /// Same generator with the given digital shift and no scrambling.
    pub fn with_shift(&self, shift: Vec<u64>) -> Result<DigitalGenerator> {
        if shift.len() != self.dimension() {
            return Err(Error::InvalidInput(format!(
                "shift has {} coordinates, generator has {}",
                shift.len(),
                self.dimension()
            )));
        }
        Ok(DigitalGenerator {
            base: self.base.clone(),
            columns: self.base.clone(),
            shift: shift.into_iter().map(|s| s & MASK).collect(),
            scramble: None,
            seed: None,
        })
    }

    /// Unshifted integer digits `z_i` for one coordinate.
    pub fn digits(&self, index: u64, coordinate: usize) -> u64 {
        let cols = &self.columns[coordinate];
        let mut z = 0u64;
        let mut i = index;
        let mut b = 0;
        while i != 0 {
            if i & 1 == 1 {
                z ^= cols[b];
            }
            i >>= 1;
            b += 1;
        }
        z
    }

    /// Rows `x_i = z_i ⊕ Δ` for `i = start..start+count`, natural order.
    pub fn points(&self, start: u64, count: usize, dimension: usize) -> Result<PointBatch> {
        if dimension == 0 || dimension > self.dimension() {
            return Err(Error::Capacity { requested: dimension, available: self.dimension() });
        }
        let end = start
            .checked_add(count as u64)
            .filter(|&e| e <= 1u64 << PRECISION)
            .ok_or(Error::IndexOverflow { start, end: start.saturating_add(count as u64), bits: PRECISION })?;
        let mut data = Vec::with_capacity(count * dimension);
        if count == 0 {
            return Ok(PointBatch::new(start, 0, dimension, data));
        }
        let mut z: Vec<u64> = (0..dimension).map(|j| self.digits(start, j)).collect();
        for i in start..end {
            if i > start {
                // bits flipped between i-1 and i
                let mut flipped = (i - 1) ^ i;
                let mut b = 0;
                while flipped != 0 {
                    if flipped & 1 == 1 {
                        for (j, zj) in z.iter_mut().enumerate() {
                            *zj ^= self.columns[j][b];
                        }
                    }
                    flipped >>= 1;
                    b += 1;
                }
            }
            data.extend(z.iter().zip(&self.shift).map(|(&zj, &s)| (zj ^ s) as f64 * SCALE));
        }
        Ok(PointBatch::new(start, count, dimension, data))
    }
}

fn apply_scramble(rows: &[u64], column: u64) -> u64 {
    rows.iter().enumerate().fold(0u64, |acc, (t, &row)| {
        let bit = ((row & column).count_ones() & 1) as u64;
        acc | bit << (PRECISION as usize - 1 - t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn first_coordinate_is_radical_inverse() {
        let g = DigitalGenerator::sobol(1).unwrap();
        let p = g.points(0, 4, 1).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.5, 0.25, 0.75]);
    }

    #[test]
    fn xor_of_z1_and_z2_is_z3() {
        let g = DigitalGenerator::sobol(1).unwrap();
        assert_eq!(g.digits(1, 0) ^ g.digits(2, 0), g.digits(3, 0));
        assert_eq!((g.digits(3, 0) as f64) * SCALE, 0.75);
    }

    #[test]
    fn second_coordinate_matches_known_sobol_points() {
        let g = DigitalGenerator::sobol(3).unwrap();
        let p = g.points(0, 4, 3).unwrap();
        // natural-order Sobol' points for dimensions 2 and 3
        assert_eq!(p.row(1), &[0.5, 0.5, 0.5]);
        assert_eq!(p.row(2), &[0.25, 0.75, 0.75]);
        assert_eq!(p.row(3), &[0.75, 0.25, 0.25]);
    }

    #[test]
    fn full_table_is_accepted() {
        assert_eq!(DirectionNumbers::joe_kuo().dimensions(), 21201);
        let g = DirectionNumbers::joe_kuo().generator(21201).unwrap();
        assert_eq!(g.dimension(), 21201);
    }

    #[test]
    fn capacity_error() {
        let err = DirectionNumbers::joe_kuo().generator(21202).unwrap_err();
        assert_eq!(err, Error::Capacity { requested: 21202, available: 21201 });
    }

    #[test]
    fn malformed_line_names_line_number() {
        let text = "d s a m_i\n2 1 0 1\n3 2 1 1 x\n";
        match DirectionNumbers::parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let even = "d s a m_i\n2 1 0 2\n";
        assert!(matches!(DirectionNumbers::parse(even), Err(Error::Parse { line: 2, .. })));
        let short = "d s a m_i\n2 2 0 1\n";
        assert!(matches!(DirectionNumbers::parse(short), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn first_point_is_the_shift() {
        let g = DigitalGenerator::sobol(4).unwrap().randomize(11);
        let p = g.points(0, 1, 4).unwrap();
        for (x, &s) in p.row(0).iter().zip(g.shift()) {
            assert_eq!(*x, s as f64 * SCALE);
        }
    }

    #[test]
    fn randomization_is_deterministic() {
        let base = DigitalGenerator::sobol(5).unwrap();
        let a = base.randomize(42).points(0, 256, 5).unwrap();
        let b = base.randomize(42).points(0, 256, 5).unwrap();
        assert_eq!(a, b);
        let c = base.randomize(43).points(0, 256, 5).unwrap();
        assert_ne!(a, c);
        assert_eq!(base.randomize(42), base.randomize(42).randomize(42));
    }

    #[test]
    fn scramble_has_unit_diagonal_and_is_lower_triangular() {
        let g = DigitalGenerator::sobol(3).unwrap().randomize(5);
        for j in 0..3 {
            let rows = g.scramble_rows(j).unwrap();
            for (t, &row) in rows.iter().enumerate() {
                let diag = 1u64 << (PRECISION as usize - 1 - t);
                assert_ne!(row & diag, 0);
                assert_eq!(row & (diag - 1), 0, "row {t} reads digits below the diagonal");
            }
        }
    }

    #[test]
    fn scrambled_prefixes_are_xor_closed() {
        let g = DigitalGenerator::sobol(3).unwrap().randomize(9);
        for m in 0..=8u32 {
            let n = 1u64 << m;
            for j in 0..3 {
                let set: HashSet<u64> = (0..n).map(|i| g.digits(i, j)).collect();
                assert_eq!(set.len() as u64, n, "digits not distinct");
                for a in 0..n {
                    for b in 0..n {
                        assert!(set.contains(&(g.digits(a, j) ^ g.digits(b, j))));
                    }
                }
            }
        }
    }

    #[test]
    fn batch_matches_direct_digits() {
        let g = DigitalGenerator::sobol(6).unwrap().randomize(1);
        let p = g.points(1000, 300, 6).unwrap();
        for (r, row) in p.rows().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let direct = (g.digits(1000 + r as u64, j) ^ g.shift()[j]) as f64 * SCALE;
                assert_eq!(x, direct);
            }
        }
    }

    #[test]
    fn index_overflow() {
        let g = DigitalGenerator::sobol(1).unwrap();
        assert!(matches!(g.points((1 << 52) - 1, 2, 1), Err(Error::IndexOverflow { .. })));
        assert!(g.points((1 << 52) - 1, 1, 1).is_ok());
    }

    #[test]
    fn scrambled_means_are_uniform() {
        let base = DigitalGenerator::sobol(4).unwrap();
        for seed in 0..5u64 {
            let g = base.randomize(seed);
            for m in 0..=16u32 {
                let n = 1usize << m;
                let p = g.points(0, n, 4).unwrap();
                let bound = 3.0 / (12.0 * n as f64).sqrt();
                for j in 0..4 {
                    let mean = p.rows().map(|r| r[j]).sum::<f64>() / n as f64;
                    assert!((mean - 0.5).abs() <= bound, "seed {seed} m {m} j {j} mean {mean}");
                }
            }
        }
    }
}
