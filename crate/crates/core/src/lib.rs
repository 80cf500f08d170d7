//! Guaranteed adaptive quasi-Monte Carlo cubature.
//!
//! Integrals over `[0,1)^d` are approximated by sample means over shifted
//! digital sequences (Sobol' with linear matrix scrambling) or shifted rank-1
//! lattice node sequences. The sample size `n = 2^m` is doubled until a
//! data-driven error bound, built from discrete Walsh or Fourier coefficients
//! of the sampled values, certifies a hybrid absolute/relative tolerance.
//!
//! The crate is organised bottom-up:
//!
//! * [`sequences`]: point generators and their group structure.
//! * [`ledger`]: fast transforms and the per-level coefficient ledger.
//! * [`cone`]: cone parameters, the data-based error bound and the
//!   cone-membership necessary condition.
//! * [`engine`]: tolerance handling, the optimal estimator and the adaptive
//!   loop, plus heuristic replication baselines for comparison.
//! * [`control_variates`]: control variate coefficient fitting and the
//!   control-variate adaptive loop.
//! * [`integrands`]: model problems (multivariate normal probabilities,
//!   Sobol' indices, Asian options) and synthetic test functions.
//! * [`experiments`]: experiment drivers used by the `qmcube` binary.

pub mod cone;
pub mod control_variates;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod integrands;
pub mod ledger;
pub mod sequences;
pub mod verify;

pub use cone::{error_bound, necessary_condition, ConeCheck, ConeParams, ConeViolation, IntervalEstimate};
pub use control_variates::{beta_mc, beta_qmc, cv_integrate, BetaPolicy, ControlVariateSpec, CvResult};
pub use engine::{
    integrate, integrate_scalar, optimal_estimate, sup_tolerance, tolerance_value, CubatureResult,
    Identity, SolutionFunctional, Status, Termination, Tolerance,
};
pub use error::{Error, Result};
pub use integrands::{FnIntegrand, Integrand};
pub use ledger::{fwht, lattice_dft, CoefficientLedger, TierSums};
pub use sequences::{DigitalGenerator, DirectionNumbers, Family, Generator, LatticeGenerator, PointBatch};
