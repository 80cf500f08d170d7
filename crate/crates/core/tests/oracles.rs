//! End-to-end runs checked against values computed independently
//! (high-precision quadrature and closed forms evaluated in mpmath).

use qmcube::cone::ConeParams;
use qmcube::integrands::asian::{AsianOption, Payoff};
use qmcube::integrands::mvn::{mvn_equicorrelated_oracle, MvnProblem};
use qmcube::integrands::sobol_index::bratley_reference_indices;
use qmcube::{integrate_scalar, Family, Tolerance};

// P(X <= (0.5, 1, 1.5)), unit variances, all correlations 1/2
const MVN3: f64 = 0.616612499180025;
// weekly geometric Asian call, S = K = 100, r = 0.02, sigma = 0.5, T = 1
const GEOMETRIC_ASIAN: f64 = 10.8390391797518;

#[test]
fn equicorrelated_oracle_matches_mpmath() {
    let v = mvn_equicorrelated_oracle(0.5, &[0.5, 1.0, 1.5]).unwrap();
    assert!((v - MVN3).abs() < 1e-10, "{v}");
}

#[test]
fn genz_three_dimensional_within_1e6() {
    let problem = MvnProblem::equicorrelated(0.5, vec![0.5, 1.0, 1.5]).unwrap();
    let f = problem.genz();
    let cone = ConeParams::default();
    let r = integrate_scalar(&f, &Tolerance::new(2e-7, 0.0).unwrap(), &cone, Family::Digital, 11).unwrap();
    assert!(r.tolerance_met(), "{:?}", r.termination);
    assert!((r.v_hat - MVN3).abs() <= 1e-6, "{} at n={}", r.v_hat, r.n);

    // the Genz integrand is not periodic, so lattice rules converge slowly
    let r = integrate_scalar(&f, &Tolerance::new(1e-4, 0.0).unwrap(), &cone, Family::Lattice, 11).unwrap();
    assert!(r.tolerance_met(), "{:?}", r.termination);
    assert!((r.v_hat - MVN3).abs() <= 1e-4, "{} at n={}", r.v_hat, r.n);
}

#[test]
fn geometric_asian_closed_form() {
    let option = AsianOption::default();
    assert!((option.geometric_price() - GEOMETRIC_ASIAN).abs() < 1e-9);
    let f = option.payoffs().unwrap().only(Payoff::Geometric);
    let tol = Tolerance::new(5e-3, 0.0).unwrap();
    for seed in 0..3 {
        let r = integrate_scalar(&f, &tol, &ConeParams::default(), Family::Digital, seed).unwrap();
        assert!((r.v_hat - GEOMETRIC_ASIAN).abs() <= 5e-3, "seed {seed}: {}", r.v_hat);
    }
}

#[test]
fn bratley_indices_round_to_published_table() {
    let published = [0.6529, 0.1791, 0.0370, 0.0133, 0.0015, 0.0015];
    for (v, p) in bratley_reference_indices(6).iter().zip(published) {
        assert!((v - p).abs() <= 5e-5, "{v} vs {p}");
    }
}
