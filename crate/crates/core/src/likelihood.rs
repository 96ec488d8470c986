//! Exact Gaussian negative log-likelihood and its Whittle approximation.
//!
//! Both objectives are normalized per observation:
//!
//! * exact: `(1/2N) [N ln 2π + ln det T_N(f_θ) + (X − μ̂1)ᵀ T_N(f_θ)⁻¹ (X − μ̂1)]`
//! * Whittle: `(1/m) Σ_{j=1}^{m} [ln f_θ(x_j) + I_N(x_j)/f_θ(x_j)]`, `m = ⌊(N−1)/2⌋`
//!
//! The Whittle sum excludes the zero frequency and uses only the half
//! spectrum. At matching θ, `ln 2π + whittle/2` approximates the exact value.
//!
//! The `profiled_*` variants concentrate out the scale `σ²` in closed form,
//! which leaves an objective in the shape parameters alone.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub use crate::series::{Centering, SeriesProvenance, SeriesSample};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral_models::{AutocovSequence, Frequency, SpectralModel, Theta};
use crate::toeplitz::{quad_form_z0, ToeplitzSpec};

/// Periodogram at the Fourier frequencies `x_j = 2πj/N`, `j = 1..=⌊(N−1)/2⌋`.
#[derive(Debug, Clone)]
pub struct Periodogram<T> {
    pub freqs: Vec<T>,
    pub ordinates: Vec<T>,
    n: usize,
}

impl<T: Scalar> Periodogram<T> {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Length of the series the periodogram came from.
    pub fn series_len(&self) -> usize {
        self.n
    }
}

/// `I_N(x_j) = |Σ_t (X_t − μ̂) e^{i t x_j}|² / (2πN)`.
///
/// Uses rustfft for every length (mixed radix for smooth sizes, Bluestein
/// otherwise).
pub fn periodogram<T: Scalar>(series: &SeriesSample<T>) -> Result<Periodogram<T>> {
    series.require_estimable()?;
    let n = series.len();
    let mut buf: Vec<Complex<T>> =
        series.centered().into_iter().map(|v| Complex::new(v, T::zero())).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let m = (n - 1) / 2;
    let nf = T::from_usize_lossy(n);
    let norm = T::lit(2.0) * T::PI() * nf;
    let step = T::lit(2.0) * T::PI() / nf;
    let freqs = (1..=m).map(|j| step * T::from_usize_lossy(j)).collect();
    let ordinates = buf[1..=m].iter().map(|z| z.norm_sqr() / norm).collect();
    Ok(Periodogram { freqs, ordinates, n })
}

/// Exact per-observation Gaussian NLL at θ with the model's `σ²`.
pub fn exact_nll<T: Scalar>(model: &SpectralModel<T>, theta: &Theta<T>, series: &SeriesSample<T>) -> Result<T> {
    let gamma = model.autocovariance(theta, series.len() - 1)?;
    exact_nll_autocov(&gamma, series)
}

/// Exact per-observation Gaussian NLL for an arbitrary autocovariance sequence.
pub fn exact_nll_autocov<T: Scalar>(gamma: &AutocovSequence<T>, series: &SeriesSample<T>) -> Result<T> {
    let n = series.len();
    let spec = ToeplitzSpec::from_autocov(gamma, n)?;
    let q = quad_form_z0(&spec, series)?;
    let nf = T::from_usize_lossy(n);
    Ok((nf * (T::lit(2.0) * T::PI()).ln() + q.logdet + q.quad) / (T::lit(2.0) * nf))
}

/// Whittle objective at θ with the model's `σ²`.
pub fn whittle_nll<T: Scalar>(model: &SpectralModel<T>, theta: &Theta<T>, series: &SeriesSample<T>) -> Result<T> {
    let pg = periodogram(series)?;
    whittle_nll_from_periodogram(model, theta, &pg)
}

pub fn whittle_nll_from_periodogram<T: Scalar>(
    model: &SpectralModel<T>,
    theta: &Theta<T>,
    pg: &Periodogram<T>,
) -> Result<T> {
    theta_check(model, theta)?;
    let mut acc = T::zero();
    for (&x, &i) in pg.freqs.iter().zip(&pg.ordinates) {
        let lf = model.log_density_at(theta.values(), Frequency::from_x(x));
        acc = acc + lf + i / lf.exp();
    }
    Ok(acc / T::from_usize_lossy(pg.len()))
}

fn theta_check<T: Scalar>(model: &SpectralModel<T>, theta: &Theta<T>) -> Result<()> {
    if !model.bounds().contains(theta.values()) {
        return Err(Error::Parameter(format!("theta {:?} outside the model box", theta.values())));
    }
    Ok(())
}

/// Objective value after concentrating out `σ²`, and the maximizing `σ̂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profiled<T> {
    pub value: T,
    pub sigma2: T,
}

/// Exact NLL minimized over `σ²`:
/// `½ [ln 2π + ln σ̂² + ln det T̃/N + 1]` with `σ̂² = quad̃/N`, where `T̃` is
/// the Toeplitz matrix of the unit-scale density.
pub fn profiled_exact_nll<T: Scalar>(
    model: &SpectralModel<T>,
    theta: &Theta<T>,
    series: &SeriesSample<T>,
) -> Result<Profiled<T>> {
    let n = series.len();
    let unit = model.clone().with_sigma2(T::one())?;
    let gamma = unit.autocovariance(theta, n - 1)?;
    let spec = ToeplitzSpec::from_autocov(&gamma, n)?;
    let q = quad_form_z0(&spec, series)?;
    let nf = T::from_usize_lossy(n);
    let sigma2 = q.z0;
    if !(sigma2 > T::zero()) {
        return Err(Error::InvalidInput("series has zero variance about its mean".into()));
    }
    let value = ((T::lit(2.0) * T::PI()).ln() + sigma2.ln() + q.logdet / nf + T::one()) * T::lit(0.5);
    Ok(Profiled { value, sigma2 })
}

/// Whittle objective minimized over `σ²`: `ln σ̂² + mean ln f̃ + 1`, with
/// `σ̂² = mean(I/f̃)` and `f̃` the unit-scale density.
pub fn profiled_whittle<T: Scalar>(
    model: &SpectralModel<T>,
    theta: &Theta<T>,
    pg: &Periodogram<T>,
) -> Result<Profiled<T>> {
    theta_check(model, theta)?;
    let mut sum_log = T::zero();
    let mut sum_ratio = T::zero();
    for (&x, &i) in pg.freqs.iter().zip(&pg.ordinates) {
        let ls = model.log_shape_at(theta.values(), Frequency::from_x(x));
        sum_log = sum_log + ls;
        sum_ratio = sum_ratio + i / ls.exp();
    }
    let m = T::from_usize_lossy(pg.len());
    let sigma2 = sum_ratio / m;
    if !(sigma2 > T::zero()) {
        return Err(Error::InvalidInput("periodogram is identically zero".into()));
    }
    Ok(Profiled { value: sigma2.ln() + sum_log / m + T::one(), sigma2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn white_noise_zero_data() {
        let m = SpectralModel::arfima0d0(1.0).unwrap().with_d_bounds(0.0, 0.49).unwrap();
        let th = m.theta(&[0.0]).unwrap();
        let s = SeriesSample::observed(vec![0.0; 16]).unwrap().with_known_mean(0.0);
        let v = exact_nll(&m, &th, &s).unwrap();
        assert_relative_eq!(v, 0.5 * (2.0 * PI).ln(), max_relative = 1e-14);
        assert_relative_eq!(v, 0.918939, max_relative = 1e-6);
    }

    #[test]
    fn two_by_two_stub() {
        let g = AutocovSequence::from_values(vec![1.0, 0.5]).unwrap();
        let s = SeriesSample::observed(vec![1.0, -1.0]).unwrap().with_known_mean(0.0);
        let v = exact_nll_autocov(&g, &s).unwrap();
        let expect = 0.25 * (2.0 * (2.0 * PI).ln() + 0.75f64.ln() + 4.0);
        assert_relative_eq!(v, expect, max_relative = 1e-14);
        assert_relative_eq!(v, 1.847018, max_relative = 1e-6);
    }

    #[test]
    fn constant_series_periodogram_vanishes() {
        let s = SeriesSample::observed(vec![2.5; 32]).unwrap();
        let pg = periodogram(&s).unwrap();
        assert_eq!(pg.len(), 15);
        assert!(pg.ordinates.iter().all(|&v| v < 1e-25));
    }

    #[test]
    fn cosine_concentrates_at_its_frequency() {
        let n = 64;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / n as f64).cos()).collect();
        let pg = periodogram(&SeriesSample::observed(x).unwrap()).unwrap();
        assert_relative_eq!(pg.ordinates[0], n as f64 / (8.0 * PI), max_relative = 1e-12);
        assert!(pg.ordinates[1..].iter().all(|&v| v < 1e-25));
    }

    #[test]
    fn flat_whittle_is_minimized_at_two_pi_mean_periodogram() {
        let x: Vec<f64> = (0..50).map(|t| ((t * 37) % 11) as f64 - 5.0).collect();
        let s = SeriesSample::observed(x).unwrap();
        let pg = periodogram(&s).unwrap();
        let mean_i = pg.ordinates.iter().sum::<f64>() / pg.len() as f64;
        let base = SpectralModel::arfima0d0(1.0).unwrap().with_d_bounds(0.0, 0.4).unwrap();
        let th = base.theta(&[0.0]).unwrap();
        let at = |s2: f64| {
            let m = base.clone().with_sigma2(s2).unwrap();
            whittle_nll_from_periodogram(&m, &th, &pg).unwrap()
        };
        let s2_hat = 2.0 * PI * mean_i;
        let best = at(s2_hat);
        assert_relative_eq!(best, (s2_hat / (2.0 * PI)).ln() + 1.0, max_relative = 1e-12);
        assert!(at(s2_hat * 1.05) > best && at(s2_hat * 0.95) > best);
        let prof = profiled_whittle(&base, &th, &pg).unwrap();
        assert_relative_eq!(prof.value, best, max_relative = 1e-12);
        assert_relative_eq!(prof.sigma2, s2_hat, max_relative = 1e-12);
    }

    #[test]
    fn profiled_exact_matches_exact_at_the_profiled_scale() {
        let x: Vec<f64> = (0..40).map(|t| ((t * 13) % 7) as f64 * 0.3 - 1.0).collect();
        let s = SeriesSample::observed(x).unwrap();
        let base = SpectralModel::arfima0d0(1.0).unwrap();
        let th = base.theta(&[0.2]).unwrap();
        let p = profiled_exact_nll(&base, &th, &s).unwrap();
        let m = base.clone().with_sigma2(p.sigma2).unwrap();
        assert_relative_eq!(p.value, exact_nll(&m, &th, &s).unwrap(), max_relative = 1e-12);
        let off = base.with_sigma2(p.sigma2 * 1.1).unwrap();
        assert!(exact_nll(&off, &th, &s).unwrap() > p.value);
    }

    #[test]
    fn short_series_rejected_for_periodogram() {
        assert!(periodogram(&SeriesSample::observed(vec![1.0, 2.0, 3.0]).unwrap()).is_err());
    }
}
