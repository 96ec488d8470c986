//! Exact simulation of stationary Gaussian series by circulant embedding.
//!
//! The Toeplitz covariance `T_n(γ)` is embedded in a circulant matrix of size
//! `m` (a power of two, `m ≥ 2(n−1)`) whose eigenvalues come from one FFT of
//! its first row. When they are all non-negative a path costs one more FFT of
//! size `m`, and its first `n` values have covariance exactly `T_n(γ)`.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::replicate_seed;
use crate::series::SeriesSample;
use crate::spectral_models::AutocovSequence;

/// Eigenvalues below `−NEGATIVE_TOL · max` trigger a larger embedding.
pub const NEGATIVE_TOL: f64 = 1e-10;
pub const MAX_DOUBLINGS: usize = 4;
/// Largest share of the total eigenvalue mass clamping may discard.
pub const MAX_CLAMPED_MASS: f64 = 1e-4;

#[derive(Clone)]
pub struct EmbeddingPlan<T: Scalar> {
    m: usize,
    n: usize,
    sqrt_scaled: Vec<T>,
    eigs: Vec<T>,
    clamped: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar> fmt::Debug for EmbeddingPlan<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbeddingPlan")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("clamped", &self.clamped)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> EmbeddingPlan<T> {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Longest path this plan can produce.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Circulant eigenvalues after clamping.
    pub fn eigs(&self) -> &[T] {
        &self.eigs
    }

    /// Negative eigenvalues set to zero; `0` means sampling is exact.
    pub fn clamped(&self) -> usize {
        self.clamped
    }
}

fn circulant_eigs<T: Scalar>(gamma: &[T], m: usize, planner: &mut FftPlanner<T>) -> Vec<T> {
    let half = m / 2;
    let lag = |k: usize| gamma.get(k).copied().unwrap_or(T::zero());
    let mut c: Vec<Complex<T>> = (0..m)
        .map(|k| Complex::new(if k <= half { lag(k) } else { lag(m - k) }, T::zero()))
        .collect();
    planner.plan_fft_forward(m).process(&mut c);
    c.into_iter().map(|z| z.re).collect()
}

/// Builds the circulant embedding for paths of length `n`.
///
/// Model-backed sequences are recomputed to the lags a larger embedding
/// needs; explicit sequences are zero-padded.
pub fn plan_embedding<T: Scalar>(gamma: &AutocovSequence<T>, n: usize) -> Result<EmbeddingPlan<T>> {
    if n == 0 {
        return Err(Error::InvalidInput("path length must be positive".into()));
    }
    if gamma.max_lag() + 1 < n {
        return Err(Error::InvalidInput(format!(
            "autocovariance covers lags 0..={}, need 0..{n}",
            gamma.max_lag()
        )));
    }
    let mut planner = FftPlanner::new();
    let mut m = (2 * (n - 1)).next_power_of_two().max(2);
    let mut current = gamma.clone();
    let tol = T::tol_floor(NEGATIVE_TOL);
    let mut eigs;
    let mut attempt = 0;
    loop {
        if current.max_lag() < m / 2 {
            if let Some(ext) = current.extended(m / 2) {
                current = ext?;
            }
        }
        eigs = circulant_eigs(current.gamma(), m, &mut planner);
        let max = eigs.iter().copied().fold(T::zero(), T::max);
        let min = eigs.iter().copied().fold(T::infinity(), T::min);
        if min >= -tol * max {
            eigs.iter_mut().for_each(|e| *e = e.max(T::zero()));
            return Ok(finish(eigs, m, n, 0, &mut planner));
        }
        if attempt == MAX_DOUBLINGS {
            break;
        }
        attempt += 1;
        m *= 2;
    }

    let total = eigs.iter().fold(T::zero(), |a, e| a + e.abs());
    let negative = eigs.iter().filter(|e| **e < T::zero()).fold(T::zero(), |a, e| a - *e);
    let fraction = negative / total;
    if fraction > T::lit(MAX_CLAMPED_MASS) {
        return Err(Error::NonEmbeddable { fraction: fraction.to_f64_lossy() });
    }
    let clamped = eigs.iter().filter(|e| **e < T::zero()).count();
    eigs.iter_mut().for_each(|e| *e = e.max(T::zero()));
    Ok(finish(eigs, m, n, clamped, &mut planner))
}

fn finish<T: Scalar>(eigs: Vec<T>, m: usize, n: usize, clamped: usize, planner: &mut FftPlanner<T>) -> EmbeddingPlan<T> {
    let mf = T::from_usize_lossy(m);
    let sqrt_scaled = eigs.iter().map(|&e| (e / mf).sqrt()).collect();
    EmbeddingPlan { m, n, sqrt_scaled, eigs, clamped, fft: planner.plan_fft_forward(m) }
}

/// One zero-mean path of length `n`, a deterministic function of `(plan, seed)`.
pub fn sample_path<T: Scalar>(plan: &EmbeddingPlan<T>, n: usize, seed: u64) -> Result<SeriesSample<T>>
where
    StandardNormal: Distribution<T>,
{
    if n == 0 || n > plan.n {
        return Err(Error::InvalidInput(format!(
            "plan supports paths of length 1..={}, requested {n}",
            plan.n
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex<T>> = plan
        .sqrt_scaled
        .iter()
        .map(|&s| {
            let a: T = StandardNormal.sample(&mut rng);
            let b: T = StandardNormal.sample(&mut rng);
            Complex::new(s * a, s * b)
        })
        .collect();
    plan.fft.process(&mut buf);
    SeriesSample::simulated(buf[..n].iter().map(|z| z.re).collect(), seed)
}

/// Replicates `0..reps` with seeds `replicate_seed(master_seed, i)`, generated in
/// parallel and returned in replicate order.
pub fn sample_replicates<T: Scalar>(
    plan: &EmbeddingPlan<T>,
    n: usize,
    master_seed: u64,
    reps: usize,
) -> Result<Vec<SeriesSample<T>>>
where
    StandardNormal: Distribution<T>,
{
    (0..reps)
        .into_par_iter()
        .map(|i| sample_path(plan, n, replicate_seed(master_seed, i as u64)))
        .collect()
}
