//! Integrands: the evaluation trait, model problems and synthetic test functions.

pub mod asian;
pub mod eigen;
pub mod mvn;
pub mod normal;
pub mod quadrature;
pub mod sobol_index;
pub mod synthetic;

use rayon::prelude::*;

use crate::error::Result;
use crate::sequences::PointBatch;

/// A `p`-output function on `[0,1)^d`.
///
/// Implementations must be pure: the engine may evaluate points concurrently
/// and in any order.
pub trait Integrand: Sync {
    fn dimension(&self) -> usize;

    fn outputs(&self) -> usize {
        1
    }

    /// Writes the `outputs()` values at `x` into `out`.
    fn evaluate(&self, x: &[f64], out: &mut [f64]);

    /// Whether batches may be spread over the rayon pool.
    fn parallel(&self) -> bool {
        true
    }
}

impl<T: Integrand + ?Sized> Integrand for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn outputs(&self) -> usize {
        (**self).outputs()
    }
    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        (**self).evaluate(x, out)
    }
    fn parallel(&self) -> bool {
        (**self).parallel()
    }
}

/// Scalar integrand from a closure.
pub struct FnIntegrand<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        FnIntegrand { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        out[0] = (self.f)(x);
    }
}

const PARALLEL_THRESHOLD: usize = 512;

/// Evaluates `f` on every row of `batch`; returns one vector per output.
pub fn evaluate_points(f: &dyn Integrand, batch: &PointBatch) -> Result<Vec<Vec<f64>>> {
    let p = f.outputs();
    let d = f.dimension();
    let mut buf = vec![0.0; batch.count * p];
    let eval = |(i, out): (usize, &mut [f64])| f.evaluate(&batch.row(i)[..d], out);
    if f.parallel() && batch.count >= PARALLEL_THRESHOLD {
        buf.par_chunks_mut(p).enumerate().for_each(eval);
    } else {
        buf.chunks_mut(p).enumerate().for_each(eval);
    }
    Ok((0..p).map(|j| buf.iter().skip(j).step_by(p).copied().collect()).collect())
}
