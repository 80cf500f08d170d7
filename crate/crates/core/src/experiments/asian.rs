//! Arithmetic Asian call with and without the geometric control variate.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::{header, Config, Sources};
use crate::control_variates::{apply_controls, beta_mc, beta_qmc, cv_integrate_with, ordered_spectra, ControlVariateSpec};
use crate::engine::{integrate_with, CubatureResult, Identity};
use crate::error::{Error, Result};
use crate::integrands::asian::{AsianOption, Payoff};
use crate::integrands::evaluate_points;
use crate::ledger::{sample, CoefficientLedger};
use crate::sequences::Family;

/// Sample-size exponent of the reference run.
pub const REFERENCE_LEVEL: u32 = 20;
const REFERENCE_CHUNK: usize = 1 << 14;
/// Seed offset of the reference run, kept away from the experiment seeds.
pub const REFERENCE_SEED: u64 = 0x0A51_A4EF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMode {
    Off,
    On,
    Both,
}

impl FromStr for CvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(CvMode::Off),
            "on" => Ok(CvMode::On),
            "both" => Ok(CvMode::Both),
            other => Err(Error::InvalidInput(format!("--cv expects on, off or both, got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsianRecord {
    pub run: usize,
    pub cv: bool,
    /// Empty without control variates.
    pub beta: Vec<f64>,
    pub reference: f64,
    pub result: CubatureResult,
}

impl AsianRecord {
    pub fn abs_error(&self) -> f64 {
        (self.result.v_hat - self.reference).abs()
    }
}

/// Plain sample mean of the arithmetic payoff over `2^level` points.
pub fn reference_price(option: &AsianOption, sources: &Sources, family: Family, level: u32, seed: u64) -> Result<f64> {
    let f = option.payoffs()?.only(Payoff::Arithmetic);
    let generator = sources.generator(family, option.steps, seed)?;
    let n = 1usize << level;
    let mut sum = 0.0;
    let mut start = 0;
    while start < n {
        let count = REFERENCE_CHUNK.min(n - start);
        let batch = generator.points(start as u64, count, option.steps)?;
        sum += evaluate_points(&f, &batch)?[0].iter().sum::<f64>();
        start += count;
    }
    Ok(sum / n as f64)
}

pub fn run(cfg: &Config, option: &AsianOption, mode: CvMode) -> Result<Vec<AsianRecord>> {
    let reference = reference_price(option, &cfg.sources, cfg.family, REFERENCE_LEVEL, REFERENCE_SEED)?;
    log::info!("reference price {reference} from 2^{REFERENCE_LEVEL} points");
    let arithmetic = option.payoffs()?.only(Payoff::Arithmetic);
    let joint = option.payoffs()?;
    let spec = ControlVariateSpec::new(vec![option.geometric_price()])?;
    let modes: &[bool] = match mode {
        CvMode::Off => &[false],
        CvMode::On => &[true],
        CvMode::Both => &[false, true],
    };
    let jobs: Vec<(usize, bool)> = (0..cfg.runs).flat_map(|run| modes.iter().map(move |&cv| (run, cv))).collect();
    jobs.into_par_iter()
        .map(|(run, cv)| {
            let generator = cfg.sources.generator(cfg.family, option.steps, cfg.run_seed(run))?;
            let (result, beta) = if cv {
                let r = cv_integrate_with(&joint, &spec, &cfg.tol, &cfg.cone, &generator)?;
                (r.result, r.beta)
            } else {
                (integrate_with(&arithmetic, &Identity, &cfg.tol, &cfg.cone, &generator)?, Vec::new())
            };
            Ok(AsianRecord { run, cv, beta, reference, result })
        })
        .collect()
}

/// Coefficient magnitudes of `f` and of `h_β` at level `m`, with `β` fitted
/// on the same level, plus the Monte Carlo `β` for comparison.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub plain: CoefficientLedger,
    pub controlled: CoefficientLedger,
    pub beta_qmc: f64,
    pub beta_mc: f64,
}

pub fn spectral_pair(option: &AsianOption, sources: &Sources, family: Family, m: u32, r: u32, seed: u64) -> Result<SpectralPair> {
    let joint = option.payoffs()?;
    let generator = sources.generator(family, option.steps, seed)?;
    let values = sample(&joint, &generator, 0, 1 << m)?;
    let (f, g) = ordered_spectra(&values, family)?;
    let fit = beta_qmc(&f, &g, m, r)?;
    let mc = beta_mc(&values[0], &values[1..])?;
    let h = apply_controls(&values, &fit.beta, &[option.geometric_price()]);
    Ok(SpectralPair {
        plain: CoefficientLedger::from_values(family, vec![values[0].clone()])?.with_adaptive_order(None, r)?,
        controlled: CoefficientLedger::from_values(family, vec![h])?.with_adaptive_order(None, r)?,
        beta_qmc: fit.beta[0],
        beta_mc: mc.beta[0],
    })
}

/// Writes `<prefix>-plain.csv` and `<prefix>-cv.csv`.
pub fn write_spectral_dumps(pair: &SpectralPair, prefix: &Path) -> Result<()> {
    let name = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        std::path::PathBuf::from(s)
    };
    pair.plain.write_csv(BufWriter::new(File::create(name("-plain.csv"))?))?;
    pair.controlled.write_csv(BufWriter::new(File::create(name("-cv.csv"))?))?;
    Ok(())
}

pub fn write_csv<W: Write>(out: W, cfg: &Config, records: &[AsianRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(&["run", "cv", "beta", "reference", "abs_error"]))?;
    for r in records {
        let mut row = r.result.csv_fields(cfg.timing);
        row.extend([
            r.run.to_string(),
            if r.cv { "on" } else { "off" }.to_string(),
            r.beta.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(";"),
            r.reference.to_string(),
            r.abs_error().to_string(),
        ]);
        row.extend(cfg.fields());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `(seed, n_plain, n_cv, beta, err_plain, err_cv)` rows for runs that have both modes.
pub fn write_comparison_csv<W: Write>(out: W, records: &[AsianRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "n_plain", "n_cv", "beta", "err_plain", "err_cv"])?;
    for plain in records.iter().filter(|r| !r.cv) {
        if let Some(cv) = records.iter().find(|r| r.cv && r.run == plain.run) {
            w.write_record([
                plain.result.seed.map_or(String::new(), |s| s.to_string()),
                plain.result.n.to_string(),
                cv.result.n.to_string(),
                cv.beta.first().map_or(String::new(), |b| b.to_string()),
                plain.abs_error().to_string(),
                cv.abs_error().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!("both".parse::<CvMode>().unwrap(), CvMode::Both);
        assert!("yes".parse::<CvMode>().is_err());
    }

    #[test]
    fn control_shrinks_high_tiers() {
        let option = AsianOption::default();
        let pair = spectral_pair(&option, &Sources::default(), Family::Digital, 10, 4, 3).unwrap();
        let (f, h) = (pair.plain.coordinate(0).tiers(), pair.controlled.coordinate(0).tiers());
        assert!(h.get(6) < f.get(6));
        assert!((0.9..1.2).contains(&pair.beta_qmc), "{}", pair.beta_qmc);
    }
}
