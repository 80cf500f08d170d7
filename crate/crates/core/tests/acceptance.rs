//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use qmcube::cone::ConeParams;
use qmcube::engine::{integrate_with, Identity, Tolerance};
use qmcube::experiments::asian::{self, CvMode};
use qmcube::experiments::baselines::TestIntegrand;
use qmcube::experiments::{mvn, sobol, Config, Sources};
use qmcube::integrands::asian::AsianOption;
use qmcube::verify::Suite;
use qmcube::Family;

type Criterion = Box<dyn Fn() -> Outcome>;

struct Outcome {
    passed: bool,
    detail: String,
}

fn suite(s: Suite, seed: u64) -> Outcome {
    let r = s.run(seed).unwrap();
    Outcome { passed: r.passed(), detail: r.to_string() }
}

fn config(seed: u64, runs: usize, abs: f64, rel: f64, family: Family) -> Config {
    Config::new(seed, runs, Tolerance::new(abs, rel).unwrap(), family, ConeParams::default()).unwrap()
}

fn mvn_fraction() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for family in [Family::Digital, Family::Lattice] {
        let records = mvn::run(&config(0, 50, 0.01, 0.05, family), &mvn::MvnOptions::default()).unwrap();
        let fraction = mvn::success_fraction(&records);
        let worst = records.iter().filter_map(|r| r.tol_true).fold(0.0, f64::max);
        passed &= fraction == 1.0;
        detail.push(format!("{family}: fraction={fraction} worst_tol={worst:.3}"));
    }
    Outcome { passed, detail: detail.join("; ") }
}

fn sobol_indices() -> Outcome {
    let mut worst = [0.0f64; 6];
    let mut seeds_ok = 0;
    let mut n1 = Vec::new();
    for seed in 0..10 {
        let records = sobol::run(&config(seed, 1, 5e-3, 0.0, Family::Digital)).unwrap();
        for r in &records {
            worst[r.j - 1] = worst[r.j - 1].max(r.tol_optimal);
        }
        if records.iter().all(|r| r.tol_optimal <= 1.0) {
            seeds_ok += 1;
        }
        n1.push(records[0].result.n);
    }
    let n_ok = n1.iter().all(|&n| (4096..=16384).contains(&n));
    let worst: Vec<String> = worst.iter().map(|t| format!("{t:.3}")).collect();
    Outcome {
        passed: seeds_ok == 10 && n_ok,
        detail: format!("seeds with all tol<=1: {seeds_ok}/10; worst tol per j=[{}]; n(j=1)={n1:?}", worst.join(", ")),
    }
}

fn asian_option() -> Outcome {
    let option = AsianOption::default();
    let records = asian::run(&config(0, 20, 0.01, 0.0, Family::Digital), &option, CvMode::Both).unwrap();
    let reference = records[0].reference;
    let worst = records.iter().map(|r| r.abs_error()).fold(0.0, f64::max);
    let halved = (0..20)
        .filter(|&run| {
            let n = |cv: bool| records.iter().find(|r| r.run == run && r.cv == cv).unwrap().result.n;
            2 * n(true) <= n(false)
        })
        .count();
    Outcome {
        passed: worst <= 0.01 && (reference - 11.97).abs() <= 0.05 && halved >= 16,
        detail: format!("reference={reference:.4} worst |v_hat-ref|={worst:.4} n_cv<=n_plain/2 in {halved}/20"),
    }
}

fn cone_detector() -> Outcome {
    let family = Family::Lattice;
    let tol = Tolerance::new(1e-3, 0.0).unwrap();
    let cone = ConeParams::default();
    let count = |which: TestIntegrand| -> (usize, usize) {
        let (f, _) = which.build(family, 3);
        let mut flagged = 0;
        let mut total = 0;
        for seed in 0..10 {
            let generator = Sources::default().generator(family, 3, seed).unwrap();
            let r = integrate_with(&*f, &Identity, &tol, &cone, &generator).unwrap();
            total += r.violations.len();
            flagged += usize::from(!r.violations.is_empty());
        }
        (flagged, total)
    };
    let (spiky_runs, spiky_reports) = count(TestIntegrand::Spiky);
    let (smooth_runs, smooth_reports) = count(TestIntegrand::Smooth);
    Outcome {
        passed: spiky_reports >= 1 && smooth_reports == 0,
        detail: format!(
            "lattice: spiky flagged in {spiky_runs}/10 runs ({spiky_reports} reports), smooth in {smooth_runs}/10 ({smooth_reports})"
        ),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_qmcube");
    let jobs: [&[&str]; 4] = [
        &["--runs", "8", "mvn"],
        &["sobol-indices"],
        &["--runs", "3", "asian"],
        &["--family", "lattice", "--runs", "4", "baselines", "--integrand", "spiky"],
    ];
    let mut identical = 0;
    for (i, args) in jobs.iter().enumerate() {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|rep| {
                let path = dir.path().join(format!("{i}-{rep}.csv"));
                let status = Command::new(bin)
                    .args(["--seed", "7", "--omit-timing", "--out"])
                    .arg(&path)
                    .args(*args)
                    .output()
                    .unwrap()
                    .status;
                assert!(status.code().is_some());
                std::fs::read(&path).unwrap()
            })
            .collect();
        if !outputs[0].is_empty() && outputs[0] == outputs[1] {
            identical += 1;
        }
    }
    Outcome { passed: identical == jobs.len(), detail: format!("{identical}/{} commands byte-identical", jobs.len()) }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 transform oracles", Box::new(|| suite(Suite::Transforms, 1))),
        ("2 aliasing identity", Box::new(|| suite(Suite::Aliasing, 2))),
        ("3 optimal estimator", Box::new(|| suite(Suite::Estimator, 3))),
        ("4 mvn success fraction", Box::new(mvn_fraction)),
        ("5 bratley sobol indices", Box::new(sobol_indices)),
        ("6 asian option", Box::new(asian_option)),
        ("7 cone detector", Box::new(cone_detector)),
        ("8 determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.passed);
        println!("criterion {name}: {verdict} ({:.1}s) {}", start.elapsed().as_secs_f64(), outcome.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
