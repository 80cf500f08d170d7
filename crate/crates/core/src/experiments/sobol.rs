//! First-order Sobol' indices of the Bratley function.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use super::{header, Config};
use crate::engine::{integrate_with, tolerance_value, CubatureResult, SolutionFunctional};
use crate::error::Result;
use crate::integrands::sobol_index::{bratley_g, bratley_reference_indices, SobolIndexFunctional, SobolIndexIntegrand};

pub const BRATLEY_DIMENSION: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SobolRecord {
    /// One-based coordinate.
    pub j: usize,
    pub reference: f64,
    /// `v(μ̂_n)`, the plug-in estimate.
    pub plug_in: f64,
    pub tol_optimal: f64,
    pub tol_plug_in: f64,
    pub result: CubatureResult,
}

pub fn run(cfg: &Config) -> Result<Vec<SobolRecord>> {
    let reference = bratley_reference_indices(BRATLEY_DIMENSION);
    (1..=BRATLEY_DIMENSION)
        .into_par_iter()
        .map(|j| {
            let f = SobolIndexIntegrand::new(bratley_g, BRATLEY_DIMENSION, j - 1);
            let generator = cfg.sources.generator(cfg.family, 2 * BRATLEY_DIMENSION, cfg.seed)?;
            let result = integrate_with(&f, &SobolIndexFunctional, &cfg.tol, &cfg.cone, &generator)?;
            let mu: Vec<f64> = result.estimates.iter().map(|e| e.mu_hat).collect();
            let plug_in = SobolIndexFunctional.value(&mu);
            let v = reference[j - 1];
            Ok(SobolRecord {
                j,
                reference: v,
                plug_in,
                tol_optimal: tolerance_value(v, result.v_hat, &cfg.tol),
                tol_plug_in: tolerance_value(v, plug_in, &cfg.tol),
                result,
            })
        })
        .collect()
}

/// Human-readable table, one column per coordinate.
pub fn table(records: &[SobolRecord]) -> String {
    let mut s = String::new();
    let row = |s: &mut String, name: &str, cell: &dyn Fn(&SobolRecord) -> String| {
        let _ = write!(s, "{name:<14}");
        for r in records {
            let _ = write!(s, "{:>10}", cell(r));
        }
        s.push('\n');
    };
    row(&mut s, "j", &|r| r.j.to_string());
    row(&mut s, "n", &|r| r.result.n.to_string());
    row(&mut s, "v", &|r| format!("{:.4}", r.reference));
    row(&mut s, "v_hat", &|r| format!("{:.4}", r.result.v_hat));
    row(&mut s, "v(mu_hat)", &|r| format!("{:.4}", r.plug_in));
    row(&mut s, "tol(v,v_hat)", &|r| format!("{:.4}", r.tol_optimal));
    row(&mut s, "tol(v,plug-in)", &|r| format!("{:.4}", r.tol_plug_in));
    s
}

pub fn write_csv<W: Write>(out: W, cfg: &Config, records: &[SobolRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(&["j", "reference", "plug_in", "tol_optimal", "tol_plug_in"]))?;
    for r in records {
        let mut row = r.result.csv_fields(cfg.timing);
        row.extend([
            r.j.to_string(),
            r.reference.to_string(),
            r.plug_in.to_string(),
            r.tol_optimal.to_string(),
            r.tol_plug_in.to_string(),
        ]);
        row.extend(cfg.fields());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
