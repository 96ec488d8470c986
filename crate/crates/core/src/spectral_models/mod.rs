//! Parametric spectral-density families with a power-law pole at frequency zero.
//!
//! Every family has the form `f(x) = σ² · |k(x)|^{-2d} · h(x)` near the origin,
//! where `k` is the family's singular kernel and `h` is bounded away from zero
//! and infinity. The memory coordinate `d` is always the first entry of θ, and
//! the long-memory exponent is `α(θ) = 2d`.
//!
//! Densities are evaluated in the log domain. Frequencies can be passed either
//! as `x` or as `ln x`, so witnesses far below the floating-point range
//! (`x = n^{-n}` for large `n`) stay representable.

mod autocov;
mod spec_file;

use std::sync::Arc;

pub use autocov::{AutocovMethod, AutocovSequence, Provenance};
pub use spec_file::{HSpecFile, ModelSpecFile, ParamsFile};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The open interval the memory coordinate must live in.
const D_LIMIT: f64 = 0.5;
pub const DEFAULT_D_BOX: (f64, f64) = (0.01, 0.49);
/// Terms summed explicitly in the aliased fGn series before the Euler–Maclaurin tail.
const FGN_SERIES_TERMS: usize = 32;

/// Compact parameter set Θ: a closed box with named coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox<T> {
    names: Vec<String>,
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> ParamBox<T> {
    pub fn new(names: Vec<String>, lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if names.len() != lower.len() || names.len() != upper.len() || names.is_empty() {
            return Err(Error::Parameter(format!(
                "box dimensions disagree: {} names, {} lower, {} upper",
                names.len(),
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..names.len() {
            let (lo, hi) = (lower[i], upper[i]);
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::Parameter(format!(
                    "box for {} must be a finite closed interval, got [{lo}, {hi}]",
                    names[i]
                )));
            }
        }
        Ok(Self { names, lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn contains(&self, values: &[T]) -> bool {
        values.len() == self.dim()
            && values
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi)
    }

    /// Strictly inside every coordinate interval.
    pub fn is_interior(&self, values: &[T]) -> bool {
        values.len() == self.dim()
            && values
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v > lo && v < hi)
    }

    /// Projects `values` onto the box.
    pub fn clamp(&self, values: &mut [T]) {
        for ((v, &lo), &hi) in values.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(lo).min(hi);
        }
    }

    fn check(&self, values: &[T]) -> Result<()> {
        if values.len() != self.dim() {
            return Err(Error::Parameter(format!(
                "theta has {} coordinates, box has {}",
                values.len(),
                self.dim()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v >= self.lower[i] && v <= self.upper[i]) {
                return Err(Error::Parameter(format!(
                    "{} = {v} outside its box [{}, {}]",
                    self.names[i], self.lower[i], self.upper[i]
                )));
            }
        }
        Ok(())
    }
}

/// A point of Θ. Construction guarantees every coordinate lies in its box.
#[derive(Debug, Clone)]
pub struct Theta<T> {
    values: Vec<T>,
    bounds: Arc<ParamBox<T>>,
}

impl<T: Scalar> Theta<T> {
    pub fn new(values: Vec<T>, bounds: Arc<ParamBox<T>>) -> Result<Self> {
        bounds.check(&values)?;
        Ok(Self { values, bounds })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The memory coordinate `d`.
    pub fn d(&self) -> T {
        self.values[0]
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn bounds(&self) -> &Arc<ParamBox<T>> {
        &self.bounds
    }

    /// Euclidean distance between two parameter points.
    pub fn distance(&self, other: &Theta<T>) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b) * (a - b))
            .fold(T::zero(), |acc, v| acc + v)
            .sqrt()
    }

    /// Copy with coordinate `index` replaced, re-validated against the box.
    pub fn with_coordinate(&self, index: usize, value: T) -> Result<Self> {
        let mut values = self.values.clone();
        if index >= values.len() {
            return Err(Error::Parameter(format!("no coordinate {index}")));
        }
        values[index] = value;
        Theta::new(values, self.bounds.clone())
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64_lossy()).collect()
    }
}

/// Smooth factor `h(x) = Σ_j c_j cos^j(x)` of the generic family.
///
/// Coefficients listed in `free` become θ coordinates (named `c{j}`) after `d`;
/// the rest are fixed. `lower_bound` is declared by the user and checked over
/// the parameter box when the model is built.
#[derive(Debug, Clone, PartialEq)]
pub struct HSpec<T> {
    coeffs: Vec<T>,
    free: Vec<usize>,
    lower_bound: T,
}

impl<T: Scalar> HSpec<T> {
    pub fn new(coeffs: Vec<T>, free: Vec<usize>, lower_bound: T) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parameter("h needs at least one coefficient".into()));
        }
        if !(lower_bound > T::zero()) {
            return Err(Error::Parameter(format!(
                "declared lower bound of h must be positive, got {lower_bound}"
            )));
        }
        for (i, &j) in free.iter().enumerate() {
            if j >= coeffs.len() || free[..i].contains(&j) {
                return Err(Error::Parameter(format!("invalid free coefficient index {j}")));
            }
        }
        Ok(Self { coeffs, free, lower_bound })
    }

    /// `h ≡ 1`.
    pub fn constant_one() -> Self {
        Self { coeffs: vec![T::one()], free: Vec::new(), lower_bound: T::one() }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn lower_bound(&self) -> T {
        self.lower_bound
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients with the free entries replaced by `free_values`.
    pub fn resolved(&self, free_values: &[T]) -> Vec<T> {
        let mut c = self.coeffs.clone();
        for (&j, &v) in self.free.iter().zip(free_values) {
            c[j] = v;
        }
        c
    }

    fn eval_resolved(coeffs: &[T], x: T) -> T {
        let c = x.cos();
        coeffs.iter().rev().fold(T::zero(), |acc, &a| acc * c + a)
    }

    pub fn eval(&self, free_values: &[T], x: T) -> T {
        Self::eval_resolved(&self.resolved(free_values), x)
    }

    /// Checks `h ≥ lower_bound` on a cosine grid at every corner of the free box.
    /// `h` is affine in the free coefficients, so corners suffice.
    fn check_positive(&self, lower: &[T], upper: &[T]) -> Result<()> {
        let k = self.free.len();
        for mask in 0..(1usize << k) {
            let corner: Vec<T> = (0..k)
                .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                .collect();
            let coeffs = self.resolved(&corner);
            for g in 0..=2000 {
                let c = T::lit(-1.0 + g as f64 / 1000.0);
                let h = coeffs.iter().rev().fold(T::zero(), |acc, &a| acc * c + a);
                if h < self.lower_bound {
                    return Err(Error::Parameter(format!(
                        "h(cos x = {c}) = {h} violates declared lower bound {} at free coefficients {corner:?}",
                        self.lower_bound
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family<T> {
    /// Increments of fractional Brownian motion, `H = d + 1/2`.
    Fgn,
    /// Fractional noise `(1 - B)^{-d} ε_t`.
    Arfima0d0,
    /// `σ² |x|^{-2d} h(x)`.
    Generic(HSpec<T>),
}

impl<T> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Fgn => "fgn",
            Family::Arfima0d0 => "arfima0d0",
            Family::Generic(_) => "generic",
        }
    }
}

/// Frequency carried as both `x` and `ln x`. `x` may underflow to zero while
/// `ln x` stays exact.
#[derive(Debug, Clone, Copy)]
pub struct Frequency<T> {
    pub x: T,
    pub log_x: T,
}

impl<T: Scalar> Frequency<T> {
    pub fn from_x(x: T) -> Self {
        let x = x.abs();
        Self { x, log_x: x.ln() }
    }

    pub fn from_log_x(log_x: T) -> Self {
        Self { x: log_x.exp(), log_x }
    }
}

/// A spectral density family together with its scale `σ²` and parameter box.
#[derive(Debug, Clone)]
pub struct SpectralModel<T> {
    family: Family<T>,
    sigma2: T,
    bounds: Arc<ParamBox<T>>,
}

impl<T: Scalar> SpectralModel<T> {
    pub fn fgn(sigma2: T) -> Result<Self> {
        Self::build(Family::Fgn, sigma2, None)
    }

    pub fn arfima0d0(sigma2: T) -> Result<Self> {
        Self::build(Family::Arfima0d0, sigma2, None)
    }

    /// Generic family. Free coefficients of `h` get the box `free_bounds`.
    pub fn generic(h: HSpec<T>, sigma2: T, free_bounds: &[(T, T)]) -> Result<Self> {
        if free_bounds.len() != h.free.len() {
            return Err(Error::Parameter(format!(
                "{} free coefficients but {} intervals",
                h.free.len(),
                free_bounds.len()
            )));
        }
        let extra: Vec<(String, T, T)> = h
            .free
            .iter()
            .zip(free_bounds)
            .map(|(&j, &(lo, hi))| (format!("c{j}"), lo, hi))
            .collect();
        Self::build(Family::Generic(h), sigma2, Some(extra))
    }

    fn build(family: Family<T>, sigma2: T, extra: Option<Vec<(String, T, T)>>) -> Result<Self> {
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::Parameter(format!("sigma2 must be positive, got {sigma2}")));
        }
        let mut names = vec!["d".to_string()];
        let mut lower = vec![T::lit(DEFAULT_D_BOX.0)];
        let mut upper = vec![T::lit(DEFAULT_D_BOX.1)];
        for (n, lo, hi) in extra.into_iter().flatten() {
            names.push(n);
            lower.push(lo);
            upper.push(hi);
        }
        let bounds = ParamBox::new(names, lower, upper)?;
        let model = Self { family, sigma2, bounds: Arc::new(bounds) };
        model.validate_bounds()?;
        Ok(model)
    }

    /// Replaces the parameter box.
    pub fn with_bounds(mut self, lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let names = self.bounds.names.clone();
        self.bounds = Arc::new(ParamBox::new(names, lower, upper)?);
        self.validate_bounds()?;
        Ok(self)
    }

    /// Replaces only the interval of the memory coordinate.
    pub fn with_d_bounds(self, lo: T, hi: T) -> Result<Self> {
        let mut lower = self.bounds.lower.clone();
        let mut upper = self.bounds.upper.clone();
        lower[0] = lo;
        upper[0] = hi;
        self.with_bounds(lower, upper)
    }

    pub fn with_sigma2(mut self, sigma2: T) -> Result<Self> {
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::Parameter(format!("sigma2 must be positive, got {sigma2}")));
        }
        self.sigma2 = sigma2;
        Ok(self)
    }

    fn validate_bounds(&self) -> Result<()> {
        let lim = T::lit(D_LIMIT);
        let (lo, hi) = (self.bounds.lower[0], self.bounds.upper[0]);
        if !(lo > -lim && hi < lim) {
            return Err(Error::Parameter(format!(
                "memory coordinate box [{lo}, {hi}] must lie inside (-1/2, 1/2)"
            )));
        }
        if let Family::Generic(h) = &self.family {
            h.check_positive(&self.bounds.lower[1..], &self.bounds.upper[1..])?;
        }
        Ok(())
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn sigma2(&self) -> T {
        self.sigma2
    }

    pub fn bounds(&self) -> &Arc<ParamBox<T>> {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn theta(&self, values: &[T]) -> Result<Theta<T>> {
        Theta::new(values.to_vec(), self.bounds.clone())
    }

    /// θ for an fGn model given its Hurst index.
    pub fn theta_from_hurst(&self, hurst: T) -> Result<Theta<T>> {
        self.theta(&[hurst - T::lit(0.5)])
    }

    fn check_theta(&self, theta: &Theta<T>) -> Result<()> {
        self.bounds.check(theta.values())
    }

    /// Long-memory exponent `α(θ) = 2d` (for fGn, `2H − 1`).
    pub fn alpha(&self, theta: &Theta<T>) -> Result<T> {
        self.check_theta(theta)?;
        Ok(T::lit(2.0) * theta.d())
    }

    /// `ln f_θ(x)` for `0 < |x| ≤ π`.
    pub fn log_spectral_density(&self, theta: &Theta<T>, x: T) -> Result<T> {
        self.check_theta(theta)?;
        let ax = x.abs();
        if ax == T::zero() || !(ax <= T::PI()) {
            return Err(Error::Domain(format!("frequency {x} outside 0 < |x| <= pi")));
        }
        Ok(self.log_density_at(theta.values(), Frequency::from_x(ax)))
    }

    /// `ln f_θ(x)` with the frequency given as `ln x`, `ln x ≤ ln π`.
    pub fn log_spectral_density_log_x(&self, theta: &Theta<T>, log_x: T) -> Result<T> {
        self.check_theta(theta)?;
        if log_x.is_nan() || log_x == T::neg_infinity() || log_x > T::PI().ln() {
            return Err(Error::Domain(format!("log frequency {log_x} outside (-inf, ln pi]")));
        }
        Ok(self.log_density_at(theta.values(), Frequency::from_log_x(log_x)))
    }

    /// Unchecked log density; `values` must be in the box.
    pub(crate) fn log_density_at(&self, values: &[T], freq: Frequency<T>) -> T {
        self.sigma2.ln() + self.log_shape_at(values, freq)
    }

    /// `ln f_θ(x) − ln σ²`: the part of the density that depends on θ.
    pub(crate) fn log_shape_at(&self, values: &[T], freq: Frequency<T>) -> T {
        let (slope, rest) = self.log_shape_parts(values, freq);
        slope * freq.log_x + rest
    }

    /// Splits `ln f_θ(x) − ln σ²` as `slope · ln x + rest`, with `slope = −2d`
    /// and `rest` bounded as `x → 0`.
    pub(crate) fn log_shape_parts(&self, values: &[T], freq: Frequency<T>) -> (T, T) {
        let d = values[0];
        let two = T::lit(2.0);
        let slope = -two * d;
        let rest = match &self.family {
            Family::Arfima0d0 => -(two * T::PI()).ln() + slope * kernel_correction(freq),
            Family::Generic(h) => h.eval(&values[1..], freq.x).ln(),
            Family::Fgn => {
                let hurst = d + T::lit(0.5);
                let a = two * hurst + T::one();
                // Σ_k |x + 2πk|^{-a} = x^{-a} (1 + x^a Σ_{k≠0}); 4 sin²(x/2) = x² e^{2 corr}
                let rel = (a * freq.log_x).exp() * fgn_aliased_sum(a, freq.x);
                fgn_log_constant(hurst) + two * kernel_correction(freq) + rel.ln_1p()
            }
        };
        (slope, rest)
    }

    /// `ln f_a(x) − ln f_b(x)` assembled from the slope and remainder parts, so
    /// the `ln x` term enters only through `−2(d_a − d_b) ln x`.
    pub(crate) fn log_density_difference(&self, a: &[T], b: &[T], freq: Frequency<T>) -> T {
        let (_, rest_a) = self.log_shape_parts(a, freq);
        let (_, rest_b) = self.log_shape_parts(b, freq);
        -T::lit(2.0) * (a[0] - b[0]) * freq.log_x + (rest_a - rest_b)
    }
}

/// `ln(2 sin(x/2) / x)`, which tends to 0 as `x → 0`.
fn kernel_correction<T: Scalar>(freq: Frequency<T>) -> T {
    let x = freq.x;
    if x > T::lit(1e-3) {
        (T::lit(2.0) * (x * T::lit(0.5)).sin()).ln() - freq.log_x
    } else {
        let x2 = x * x;
        (-x2 / T::lit(24.0) + x2 * x2 / T::lit(1920.0)).ln_1p()
    }
}

/// Normalizing constant of the fGn density: `Γ(2H+1) sin(πH) / (2π)`.
fn fgn_log_constant<T: Scalar>(hurst: T) -> T {
    crate::scalar::ln_gamma(T::lit(2.0) * hurst + T::one()) + (T::PI() * hurst).sin().ln()
        - (T::lit(2.0) * T::PI()).ln()
}

/// `Σ_{k≠0} |x + 2πk|^{-a}` for `0 ≤ x ≤ π`, explicit terms plus an
/// Euler–Maclaurin tail.
pub(crate) fn fgn_aliased_sum<T: Scalar>(a: T, x: T) -> T {
    let tau = T::lit(2.0) * T::PI();
    let pair = |k: T, p: T| (tau * k + x).powf(-p) + (tau * k - x).powf(-p);
    let mut sum = T::zero();
    for k in 1..=FGN_SERIES_TERMS {
        sum = sum + pair(T::from_usize_lossy(k), a);
    }
    let kk = T::from_usize_lossy(FGN_SERIES_TERMS);
    let integral = ((tau * kk + x).powf(T::one() - a) + (tau * kk - x).powf(T::one() - a))
        / (tau * (a - T::one()));
    let g = pair(kk, a);
    let g1 = -a * tau * pair(kk, a + T::one());
    let g3 = -a * (a + T::one()) * (a + T::lit(2.0)) * tau.powi(3) * pair(kk, a + T::lit(3.0));
    let g5 = -a
        * (a + T::one())
        * (a + T::lit(2.0))
        * (a + T::lit(3.0))
        * (a + T::lit(4.0))
        * tau.powi(5)
        * pair(kk, a + T::lit(5.0));
    let tail = integral - g * T::lit(0.5) - g1 / T::lit(12.0) + g3 / T::lit(720.0)
        - g5 / T::lit(30240.0);
    sum + tail
}

/// Log spectral density as a plain function of raw parameter values, used by
/// integrators that perturb θ.
pub trait LogSpectrum<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    /// `ln f(x)` for `0 < x ≤ π`.
    fn log_density(&self, values: &[T], x: T) -> T;
}

impl<T: Scalar> LogSpectrum<T> for SpectralModel<T> {
    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn log_density(&self, values: &[T], x: T) -> T {
        self.log_density_at(values, Frequency::from_x(x))
    }
}
