//! Discrete Walsh/Fourier coefficients of sampled data and their tier sums.

mod aliasing;
mod transform;

use std::io::Write;

pub use aliasing::{aliasing_check, walsh, SparseSpectrum};
pub use transform::{fwht, lattice_dft, lattice_dft_complex, lattice_frequency_map, Spectrum};

use crate::error::{Error, Result};
use crate::integrands::{evaluate_points, Integrand};
use crate::sequences::{Family, Generator};

/// Coefficient downsampling threshold for CSV dumps.
pub const DUMP_LIMIT: usize = 1 << 14;

/// `S̃_{ℓ,m}` for `ℓ = 0..=m`: sums of coefficient magnitudes over
/// `κ ∈ [⌊2^{ℓ-1}⌋, 2^ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TierSums(Vec<f64>);

impl TierSums {
    pub fn from_magnitudes(magnitudes: &[f64]) -> Self {
        let m = magnitudes.len().trailing_zeros();
        let mut sums = Vec::with_capacity(m as usize + 1);
        sums.push(magnitudes[0]);
        for l in 1..=m {
            let lo = 1usize << (l - 1);
            sums.push(magnitudes[lo..2 * lo].iter().sum());
        }
        TierSums(sums)
    }

    pub fn get(&self, tier: u32) -> f64 {
        self.0[tier as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// An ordering `κ ↦ transform bin` of the discrete coefficients.
///
/// The identity is the transform's own order. [`WavenumberMap::sorted`]
/// moves larger coefficients to smaller `κ`: for `ℓ = m−1` down to `1`, bin
/// pairs `(κ, κ + 2^ℓ)` are swapped when the later one is larger, and the
/// same swap is applied to every pair congruent modulo `2^{ℓ+1}`, which keeps
/// the coset structure between levels. When the level grows, only the top
/// `depth` levels are re-sorted so low tiers keep their meaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavenumberMap(Vec<usize>);

impl WavenumberMap {
    pub fn natural(m: u32) -> Self {
        WavenumberMap((0..1usize << m).collect())
    }

    pub fn sorted(magnitudes: &[f64]) -> Result<Self> {
        let n = magnitudes.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let m = n.trailing_zeros();
        let mut map = Self::natural(m);
        for l in (1..m).rev() {
            map.flip(magnitudes, l);
        }
        Ok(map)
    }

    /// The level-`m+1` map: bins `κ` and `κ + 2^m` inherit bin `κ` of the
    /// level-`m` map, then levels `m` down to `m+1−depth` are re-sorted.
    pub fn extended(&self, magnitudes: &[f64], depth: u32) -> Result<Self> {
        let half = self.0.len();
        if magnitudes.len() != 2 * half {
            return Err(Error::InvalidInput(format!(
                "map of length {half} extends to {} coefficients, got {}",
                2 * half,
                magnitudes.len()
            )));
        }
        let mut next = self.0.clone();
        next.extend(self.0.iter().map(|p| p + half));
        let mut map = WavenumberMap(next);
        let m = magnitudes.len().trailing_zeros();
        for l in (m.saturating_sub(depth).max(1)..m).rev() {
            map.flip(magnitudes, l);
        }
        Ok(map)
    }

    fn flip(&mut self, magnitudes: &[f64], l: u32) {
        let nl = 1usize << l;
        let n = self.0.len();
        let flips: Vec<usize> = (1..nl).filter(|&p| magnitudes[self.0[p + nl]] > magnitudes[self.0[p]]).collect();
        for p in flips {
            for block in (0..n).step_by(2 * nl) {
                self.0.swap(block + p, block + p + nl);
            }
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `out[κ] = data[map[κ]]`
    pub fn apply<T: Copy>(&self, data: &[T]) -> Vec<T> {
        self.0.iter().map(|&p| data[p]).collect()
    }
}

/// Cached values and coefficient data for one output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateLedger {
    values: Vec<f64>,
    natural: Vec<f64>,
    map: WavenumberMap,
    magnitudes: Vec<f64>,
    mean: f64,
    tiers: TierSums,
}

impl CoordinateLedger {
    fn new(values: Vec<f64>, family: Family) -> Result<Self> {
        let spectrum = Spectrum::compute(&values, family)?;
        let natural = spectrum.magnitudes();
        // bin 0 of either transform is the sample mean; the lattice value is real
        let mean = spectrum.get(0).re;
        let map = WavenumberMap::natural(natural.len().trailing_zeros());
        let tiers = TierSums::from_magnitudes(&natural);
        Ok(CoordinateLedger { values, magnitudes: natural.clone(), natural, map, mean, tiers })
    }

    fn reorder(&mut self, map: WavenumberMap) {
        self.magnitudes = map.apply(&self.natural);
        self.tiers = TierSums::from_magnitudes(&self.magnitudes);
        self.map = map;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Magnitudes in `κ` order, the order the tier sums use.
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Magnitudes in transform order.
    pub fn natural_magnitudes(&self) -> &[f64] {
        &self.natural
    }

    pub fn map(&self) -> &WavenumberMap {
        &self.map
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn tiers(&self) -> &TierSums {
        &self.tiers
    }
}

/// Level-`m` coefficient ledger for every output coordinate of an integrand.
///
/// Only function values carry over between levels; the transform is redone
/// from scratch on all `2^m` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientLedger {
    level: u32,
    family: Family,
    coordinates: Vec<CoordinateLedger>,
}

impl CoefficientLedger {
    /// Builds a ledger from per-coordinate values in sequence order.
    pub fn from_values(family: Family, values: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = values.first() else {
            return Err(Error::InvalidInput("ledger needs at least one output coordinate".into()));
        };
        let n = first.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if values.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidInput("output coordinates have different lengths".into()));
        }
        for (output, v) in values.iter().enumerate() {
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFiniteValue { index: index as u64, output });
            }
        }
        let coordinates = values
            .into_iter()
            .map(|v| CoordinateLedger::new(v, family))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoefficientLedger { level: n.trailing_zeros(), family, coordinates })
    }

    /// Samples `f` at the first `2^level` points of `generator`. With a
    /// level-`(level-1)` ledger supplied, only the second half is evaluated.
    pub fn build(
        f: &dyn Integrand,
        generator: &Generator,
        level: u32,
        previous: Option<&CoefficientLedger>,
    ) -> Result<Self> {
        let n = 1usize << level;
        let mut values: Vec<Vec<f64>> = match previous {
            Some(prev) => {
                if prev.level + 1 != level || prev.family != generator.family() || prev.outputs() != f.outputs() {
                    return Err(Error::InvalidInput(format!(
                        "previous ledger (level {}, {} family, {} outputs) cannot be extended to level {level}",
                        prev.level,
                        prev.family,
                        prev.outputs()
                    )));
                }
                prev.coordinates
                    .iter()
                    .map(|c| {
                        let mut v = Vec::with_capacity(n);
                        v.extend_from_slice(&c.values);
                        v
                    })
                    .collect()
            }
            None => vec![Vec::with_capacity(n); f.outputs()],
        };
        let start = values[0].len();
        let fresh = sample(f, generator, start as u64, n - start)?;
        for (v, new) in values.iter_mut().zip(fresh) {
            v.extend(new);
        }
        Self::from_values(generator.family(), values)
    }

    /// Re-sorts every coordinate with a data-driven [`WavenumberMap`]. With
    /// the previous level's ledger supplied, its maps are extended and only
    /// the top `depth` levels are re-sorted; otherwise all levels are.
    pub fn with_adaptive_order(mut self, previous: Option<&CoefficientLedger>, depth: u32) -> Result<Self> {
        if let Some(prev) = previous {
            if prev.level + 1 != self.level || prev.outputs() != self.outputs() {
                return Err(Error::InvalidInput(format!(
                    "level-{} ledger cannot order a level-{} ledger",
                    prev.level, self.level
                )));
            }
        }
        for (j, c) in self.coordinates.iter_mut().enumerate() {
            let map = match previous {
                Some(prev) => prev.coordinates[j].map.extended(&c.natural, depth)?,
                None => WavenumberMap::sorted(&c.natural)?,
            };
            c.reorder(map);
        }
        Ok(self)
    }

    /// The next level, reusing every cached value.
    pub fn extend(&self, f: &dyn Integrand, generator: &Generator) -> Result<Self> {
        Self::build(f, generator, self.level + 1, Some(self))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n(&self) -> usize {
        1 << self.level
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn outputs(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinate(&self, output: usize) -> &CoordinateLedger {
        &self.coordinates[output]
    }

    pub fn coordinates(&self) -> &[CoordinateLedger] {
        &self.coordinates
    }

    /// Writes `coordinate,kappa,magnitude` rows, thinning to a uniform stride
    /// once a coordinate has more than [`DUMP_LIMIT`] coefficients.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["coordinate", "kappa", "magnitude"])?;
        let stride = (self.n() / DUMP_LIMIT).max(1);
        for (j, c) in self.coordinates.iter().enumerate() {
            for (k, mag) in c.magnitudes.iter().enumerate().step_by(stride) {
                w.write_record([j.to_string(), k.to_string(), mag.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates `f` at points `start..start+count`, one vector per output.
pub(crate) fn sample(f: &dyn Integrand, generator: &Generator, start: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    let dim = f.dimension();
    if dim > generator.dimension() {
        return Err(Error::Capacity { requested: dim, available: generator.dimension() });
    }
    let batch = generator.points(start, count, dim.max(1))?;
    evaluate_points(f, &batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::FnIntegrand;
    use crate::sequences::DigitalGenerator;

    fn sobol(d: usize, seed: u64) -> Generator {
        Generator::Digital(DigitalGenerator::sobol(d).unwrap().randomize(seed))
    }

    #[test]
    fn constant_integrand_has_empty_tiers() {
        let f = FnIntegrand::new(3, |_| 7.0);
        let l = CoefficientLedger::build(&f, &sobol(3, 1), 10, None).unwrap();
        let c = l.coordinate(0);
        assert_eq!(c.mean(), 7.0);
        for tier in 1..=10 {
            assert_eq!(c.tiers().get(tier), 0.0);
        }
    }

    #[test]
    fn incremental_equals_fresh() {
        let f = FnIntegrand::new(4, |x| x.iter().map(|v| (3.0 * v).sin()).product::<f64>());
        for g in [sobol(4, 5), Generator::randomized(Family::Lattice, 4, 5).unwrap()] {
            let l10 = CoefficientLedger::build(&f, &g, 10, None).unwrap();
            let inc = l10.extend(&f, &g).unwrap();
            let fresh = CoefficientLedger::build(&f, &g, 11, None).unwrap();
            assert_eq!(inc, fresh);
            assert_eq!(&inc.coordinate(0).values()[..1024], l10.coordinate(0).values());
        }
    }

    #[test]
    fn single_walsh_function() {
        let g = Generator::Digital(DigitalGenerator::sobol(1).unwrap());
        let f = FnIntegrand::new(1, |x| walsh(37, x[0]));
        let l = CoefficientLedger::build(&f, &g, 8, None).unwrap();
        for (k, &mag) in l.coordinate(0).magnitudes().iter().enumerate() {
            let expected = if k == 37 { 1.0 } else { 0.0 };
            assert!((mag - expected).abs() < 1e-12, "bin {k}: {mag}");
        }
    }

    #[test]
    fn non_finite_value_reports_index() {
        let g = Generator::Digital(DigitalGenerator::sobol(1).unwrap());
        let f = FnIntegrand::new(1, |x| if x[0] == 0.75 { f64::NAN } else { 1.0 });
        let err = CoefficientLedger::build(&f, &g, 4, None).unwrap_err();
        assert_eq!(err, Error::NonFiniteValue { index: 3, output: 0 });
    }

    #[test]
    fn mismatched_previous_level_is_rejected() {
        let f = FnIntegrand::new(1, |x| x[0]);
        let g = sobol(1, 0);
        let l = CoefficientLedger::build(&f, &g, 4, None).unwrap();
        assert!(CoefficientLedger::build(&f, &g, 6, Some(&l)).is_err());
    }

    #[test]
    fn tier_sums_partition_the_spectrum() {
        let f = FnIntegrand::new(2, |x| (x[0] - 0.3).abs() + x[1] * x[1]);
        let l = CoefficientLedger::build(&f, &sobol(2, 3), 9, None).unwrap();
        let c = l.coordinate(0);
        let total: f64 = c.magnitudes().iter().sum();
        assert!((c.tiers().total() - total).abs() <= 1e-12 * total);
        assert!(c.tiers().as_slice().iter().all(|&s| s >= 0.0));
        let mean = c.values().iter().sum::<f64>() / c.values().len() as f64;
        assert!((c.mean() - mean).abs() <= 1e-14 * mean.abs());
    }

    #[test]
    fn csv_dump_downsamples() {
        let f = FnIntegrand::new(1, |x| x[0]);
        let l = CoefficientLedger::build(&f, &sobol(1, 0), 15, None).unwrap();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), DUMP_LIMIT + 1);
        assert!(text.starts_with("coordinate,kappa,magnitude\n0,0,"));
        assert!(text.lines().nth(2).unwrap().starts_with("0,2,"));
    }

    #[test]
    fn sorted_map_puts_the_larger_partner_first() {
        // only the pair (1, 3) is eligible at level 2
        let map = WavenumberMap::sorted(&[9.0, 1.0, 0.5, 4.0]).unwrap();
        assert_eq!(map.as_slice(), &[0, 3, 2, 1]);
        let m = WavenumberMap::sorted(&[0.0, 5.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0]).unwrap();
        let mags = m.apply(&[0.0, 5.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.as_slice()[0], 0);
        assert_eq!(mags[1], 5.0);
    }

    #[test]
    fn zero_bin_never_moves() {
        let map = WavenumberMap::sorted(&[0.0, 0.0, 0.0, 0.0, 10.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(map.as_slice()[0], 0);
        assert_eq!(map.as_slice()[4], 4);
    }

    #[test]
    fn extension_keeps_aliases_together() {
        let small = WavenumberMap::sorted(&[1.0, 0.1, 0.2, 0.3]).unwrap();
        let next = small.extended(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(next.as_slice()[..4], *small.as_slice());
        assert_eq!(next.as_slice()[4..], *small.as_slice().iter().map(|p| p + 4).collect::<Vec<_>>());
        assert!(small.extended(&[0.0; 4], 2).is_err());
    }
}
