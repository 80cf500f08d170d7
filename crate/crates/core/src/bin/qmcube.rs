use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmcube::engine::Strategy;
use qmcube::experiments::asian::{self, CvMode};
use qmcube::experiments::baselines::{self, BaselineOptions, TestIntegrand};
use qmcube::experiments::mvn::{self, MvnOptions};
use qmcube::experiments::{sobol, Config, Sources};
use qmcube::integrands::asian::AsianOption;
use qmcube::verify::Suite;
use qmcube::{ConeParams, Error, Family, Tolerance};

#[derive(Parser)]
#[command(name = "qmcube", version, about = "Guaranteed adaptive quasi-Monte Carlo cubature experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Node family: digital or lattice.
    #[arg(long, global = true, default_value = "digital")]
    family: Family,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of independent runs (seeds `seed ^ run`).
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    m_max: Option<u32>,
    #[arg(long, global = true)]
    cone_lstar: Option<u32>,
    #[arg(long, global = true)]
    cone_r: Option<u32>,
    /// CSV output path; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Direction numbers in the `d s a m_i` text format.
    #[arg(long, global = true)]
    dirnum_file: Option<PathBuf>,
    /// Lattice generating vector, one integer per line (modulus 2^20).
    #[arg(long, global = true)]
    lattice_vector: Option<PathBuf>,
    /// Leave wall_ms empty so reruns are byte-identical.
    #[arg(long, global = true)]
    omit_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Transform, aliasing, estimator and Parseval self-checks.
    Selftest {
        #[arg(long)]
        suite: Option<Suite>,
    },
    /// Random equicorrelated normal probabilities against a 1-D quadrature oracle.
    Mvn {
        #[arg(long, default_value_t = mvn::DEFAULT_D_CAP)]
        d_cap: usize,
        /// Fix the dimension instead of drawing it.
        #[arg(long)]
        dim: Option<usize>,
        /// Covariance matrix CSV; runs one problem from files instead.
        #[arg(long, requires = "upper")]
        covariance: Option<PathBuf>,
        #[arg(long, requires = "covariance")]
        upper: Option<PathBuf>,
        #[arg(long, requires = "covariance")]
        lower: Option<PathBuf>,
    },
    /// First-order Sobol' indices of the six-dimensional Bratley function.
    SobolIndices,
    /// Arithmetic Asian call with and without the geometric control variate.
    Asian {
        #[arg(long, default_value = "both")]
        cv: CvMode,
        /// Write coefficient dumps `<prefix>-plain.csv` and `<prefix>-cv.csv`.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Write per-seed `(seed, n_plain, n_cv, beta, err_plain, err_cv)` rows.
        #[arg(long)]
        comparison: Option<PathBuf>,
    },
    /// Replication heuristics next to the guaranteed loop.
    Baselines {
        #[arg(long, default_value = "iid")]
        strategy: Strategy,
        #[arg(long, default_value = "smooth")]
        integrand: TestIntegrand,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Replicates per heuristic estimate.
        #[arg(long, default_value_t = 8)]
        replications: usize,
        /// Points per replicate.
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
}

enum Outcome {
    Success,
    Failure,
}

fn config(common: &Common, abs: f64, rel: f64, runs: usize) -> qmcube::Result<Config> {
    let tol = Tolerance::new(common.abs_tol.unwrap_or(abs), common.rel_tol.unwrap_or(rel))?;
    let defaults = ConeParams::default();
    let cone = ConeParams {
        l_star: common.cone_lstar.unwrap_or(defaults.l_star),
        r: common.cone_r.unwrap_or(defaults.r),
        m_max: common.m_max.unwrap_or(defaults.m_max),
        ..defaults
    };
    let mut cfg = Config::new(common.seed, common.runs.unwrap_or(runs), tol, common.family, cone)?;
    cfg.timing = !common.omit_timing;
    cfg.sources = Sources::load(common.dirnum_file.as_deref(), common.lattice_vector.as_deref())?;
    Ok(cfg)
}

fn open_out(path: Option<&Path>) -> qmcube::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Summaries go to stdout when the CSV goes to a file, else to stderr.
fn report(to_stdout: bool, text: &str) {
    if to_stdout {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn run(cli: Cli) -> qmcube::Result<Outcome> {
    let c = &cli.common;
    let to_stdout = c.out.is_some();
    match cli.command {
        Command::Selftest { suite } => {
            let sources = Sources::load(c.dirnum_file.as_deref(), c.lattice_vector.as_deref())?;
            let suites = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let mut ok = true;
            for s in suites {
                let r = s.run_with(c.seed, &sources)?;
                println!("{r}");
                ok &= r.passed();
            }
            Ok(if ok { Outcome::Success } else { Outcome::Failure })
        }
        Command::Mvn { d_cap, dim, covariance, upper, lower } => {
            let cfg = config(c, 0.01, 0.05, 50)?;
            report(to_stdout, &format!("# mvn d_cap={d_cap} dim={dim:?} {}", cfg.describe()));
            if let (Some(cov), Some(up)) = (covariance, upper) {
                let rec = mvn::run_files(&cfg, &cov, &up, lower.as_deref())?;
                mvn::write_csv(open_out(c.out.as_deref())?, &cfg, std::slice::from_ref(&rec))?;
                report(to_stdout, &format!("v_hat={} n={} status={}", rec.result.v_hat, rec.result.n, rec.result.status()));
                return Ok(Outcome::Success);
            }
            let records = mvn::run(&cfg, &MvnOptions { d_cap, dimension: dim })?;
            mvn::write_csv(open_out(c.out.as_deref())?, &cfg, &records)?;
            let frac = mvn::success_fraction(&records);
            report(to_stdout, &format!("success fraction {frac} ({} runs, family {})", records.len(), cfg.family));
            Ok(if frac == 1.0 { Outcome::Success } else { Outcome::Failure })
        }
        Command::SobolIndices => {
            let cfg = config(c, 5e-3, 0.0, 1)?;
            report(to_stdout, &format!("# sobol-indices {}", cfg.describe()));
            let records = sobol::run(&cfg)?;
            sobol::write_csv(open_out(c.out.as_deref())?, &cfg, &records)?;
            report(to_stdout, sobol::table(&records).trim_end());
            let ok = records.iter().all(|r| r.tol_optimal <= 1.0);
            Ok(if ok { Outcome::Success } else { Outcome::Failure })
        }
        Command::Asian { cv, dump, comparison } => {
            let cfg = config(c, 0.01, 0.0, 1)?;
            report(to_stdout, &format!("# asian cv={cv:?} {}", cfg.describe()));
            let option = AsianOption::default();
            let records = asian::run(&cfg, &option, cv)?;
            asian::write_csv(open_out(c.out.as_deref())?, &cfg, &records)?;
            if let Some(path) = comparison {
                asian::write_comparison_csv(BufWriter::new(File::create(path)?), &records)?;
            }
            if let Some(prefix) = dump {
                let pair = asian::spectral_pair(&option, &cfg.sources, cfg.family, cfg.cone.min_level(), cfg.cone.r, cfg.seed)?;
                asian::write_spectral_dumps(&pair, &prefix)?;
                report(to_stdout, &format!("beta_qmc={} beta_mc={}", pair.beta_qmc, pair.beta_mc));
            }
            for r in &records {
                report(
                    to_stdout,
                    &format!(
                        "run {} cv={} n={} v_hat={:.4} reference={:.4} status={}",
                        r.run,
                        if r.cv { "on" } else { "off" },
                        r.result.n,
                        r.result.v_hat,
                        r.reference,
                        r.result.status()
                    ),
                );
            }
            Ok(Outcome::Success)
        }
        Command::Baselines { strategy, integrand, dim, replications, n } => {
            let cfg = config(c, 1e-3, 0.0, 10)?;
            report(to_stdout, &format!("# baselines {strategy} {integrand} {}", cfg.describe()));
            let opts = BaselineOptions { strategy, integrand, dimension: dim, replications, n };
            let records = baselines::run(&cfg, &opts)?;
            baselines::write_csv(open_out(c.out.as_deref())?, &cfg, &opts, &records)?;
            let missed = records.iter().filter(|r| !r.heuristic_covers()).count();
            let engine_missed = records.iter().filter(|r| !r.engine_covers()).count();
            let flagged = records.iter().filter(|r| !r.engine.violations.is_empty()).count();
            report(
                to_stdout,
                &format!(
                    "heuristic bound below true error in {missed}/{} runs; engine in {engine_missed}; cone violations flagged in {flagged}",
                    records.len()
                ),
            );
            Ok(Outcome::Success)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse { .. }
                | Error::InvalidInput(_)
                | Error::InvalidTolerance(_)
                | Error::InvalidCone(_)
                | Error::Io(_)
                | Error::Capacity { .. }
                | Error::Domain(_) => 2,
                _ => 1,
            })
        }
    }
}
