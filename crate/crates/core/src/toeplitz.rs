//! Symmetric positive-definite Toeplitz systems `T_N(f) x = b`.
//!
//! [`levinson`] is the default `O(N²)` solver and yields the log-determinant as
//! a by-product. [`dense_oracle`] is an independent `O(N³)` Cholesky path for
//! verification. [`pcg`] solves with FFT matrix-vector products and a
//! circulant preconditioner, for long series.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dense::Cholesky;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::SeriesSample;
use crate::spectral_models::AutocovSequence;

/// Prediction variances at or below this multiple of `γ(0)` are treated as
/// loss of positive definiteness.
pub const BREAKDOWN_RATIO: f64 = 1e-14;
pub const DENSE_MAX_N: usize = 2048;
/// Above this size [`SolveMethod::Auto`] switches to conjugate gradients.
pub const PCG_THRESHOLD: usize = 4096;
pub const PCG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec<T> {
    first_row: Vec<T>,
}

impl<T: Scalar> ToeplitzSpec<T> {
    pub fn new(first_row: Vec<T>) -> Result<Self> {
        match first_row.first() {
            Some(&g0) if g0 > T::zero() && g0.is_finite() => Ok(Self { first_row }),
            Some(&g0) => Err(Error::InvalidInput(format!("diagonal {g0} must be positive"))),
            None => Err(Error::InvalidInput("empty Toeplitz first row".into())),
        }
    }

    /// `T_n` built from lags `0..n` of `gamma`.
    pub fn from_autocov(gamma: &AutocovSequence<T>, n: usize) -> Result<Self> {
        if n == 0 || gamma.max_lag() + 1 < n {
            return Err(Error::InvalidInput(format!(
                "need lags 0..{} for dimension {n}, have {}",
                n.saturating_sub(1),
                gamma.max_lag()
            )));
        }
        Self::new(gamma.gamma()[..n].to_vec())
    }

    pub fn n(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[T] {
        &self.first_row
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.first_row[i.abs_diff(j)]
    }

    /// Direct `O(N²)` product `T v`.
    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).fold(T::zero(), |acc, j| acc + self.entry(i, j) * v[j]))
            .collect()
    }

    fn breakdown_threshold(&self) -> T {
        T::tol_floor(BREAKDOWN_RATIO) * self.first_row[0]
    }
}

#[derive(Debug, Clone)]
pub struct LevinsonSolution<T> {
    pub solution: Vec<T>,
    pub logdet: T,
    /// One-step prediction variances `v_0 = γ(0), v_1, …, v_{N-1}`.
    pub pred_vars: Vec<T>,
}

/// Durbin recursion for the prediction variances alone.
pub fn prediction_variances<T: Scalar>(spec: &ToeplitzSpec<T>) -> Result<Vec<T>> {
    run_levinson(spec, None).map(|s| s.pred_vars)
}

/// Solves `T x = rhs`; `logdet = Σ ln v_k`.
pub fn levinson<T: Scalar>(spec: &ToeplitzSpec<T>, rhs: &[T]) -> Result<LevinsonSolution<T>> {
    if rhs.len() != spec.n() {
        return Err(Error::InvalidInput(format!(
            "rhs length {} does not match dimension {}",
            rhs.len(),
            spec.n()
        )));
    }
    run_levinson(spec, Some(rhs))
}

fn run_levinson<T: Scalar>(spec: &ToeplitzSpec<T>, rhs: Option<&[T]>) -> Result<LevinsonSolution<T>> {
    let r = spec.first_row();
    let n = r.len();
    let threshold = spec.breakdown_threshold();
    // a[1..=k]: forward predictor coefficients of order k
    let mut a = vec![T::zero(); n];
    let mut scratch = vec![T::zero(); n];
    let mut pred_vars = Vec::with_capacity(n);
    let mut v = r[0];
    pred_vars.push(v);
    let mut x = rhs.map(|b| {
        let mut x = vec![T::zero(); n];
        x[0] = b[0] / r[0];
        x
    });

    for k in 1..n {
        let mut acc = r[k];
        for j in 1..k {
            acc = acc - a[j] * r[k - j];
        }
        let kappa = acc / v;
        scratch[1..k].copy_from_slice(&a[1..k]);
        for j in 1..k {
            a[j] = scratch[j] - kappa * scratch[k - j];
        }
        a[k] = kappa;
        v = v * (T::one() - kappa * kappa);
        if !(v > threshold) {
            return Err(Error::Breakdown {
                order: k,
                variance: v.to_f64_lossy(),
                threshold: threshold.to_f64_lossy(),
            });
        }
        pred_vars.push(v);

        if let (Some(x), Some(b)) = (x.as_mut(), rhs) {
            // residual of [x; 0] in the new last row, corrected along the
            // backward predictor w = (−a_k, …, −a_1, 1) with T w = v e_k
            let mut eps = b[k];
            for j in 0..k {
                eps = eps - r[k - j] * x[j];
            }
            let mu = eps / v;
            for j in 0..k {
                x[j] = x[j] - mu * a[k - j];
            }
            x[k] = mu;
        }
    }

    let logdet = pred_vars.iter().fold(T::zero(), |acc, &p| acc + p.ln());
    Ok(LevinsonSolution { solution: x.unwrap_or_default(), logdet, pred_vars })
}

/// Dense Cholesky solve; independent of the Levinson path.
pub fn dense_oracle<T: Scalar>(spec: &ToeplitzSpec<T>, rhs: &[T]) -> Result<(Vec<T>, T)> {
    let n = spec.n();
    if n > DENSE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "dense oracle limited to N <= {DENSE_MAX_N}, got {n}"
        )));
    }
    if rhs.len() != n {
        return Err(Error::InvalidInput(format!("rhs length {} does not match {n}", rhs.len())));
    }
    let mut a = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = spec.entry(i, j);
        }
    }
    let chol = Cholesky::factor(&a, n)?;
    Ok((chol.solve(rhs), chol.logdet()))
}

/// FFT-backed products with `T` and the T. Chan circulant preconditioner.
struct CirculantOps<T: Scalar> {
    n: usize,
    m: usize,
    embed_eigs: Vec<Complex<T>>,
    precond_eigs: Vec<Complex<T>>,
    fwd_m: std::sync::Arc<dyn rustfft::Fft<T>>,
    inv_m: std::sync::Arc<dyn rustfft::Fft<T>>,
    fwd_n: std::sync::Arc<dyn rustfft::Fft<T>>,
    inv_n: std::sync::Arc<dyn rustfft::Fft<T>>,
}

impl<T: Scalar> CirculantOps<T> {
    fn new(spec: &ToeplitzSpec<T>) -> Self {
        let r = spec.first_row();
        let n = r.len();
        let m = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd_m = planner.plan_fft_forward(m);
        let inv_m = planner.plan_fft_inverse(m);
        let fwd_n = planner.plan_fft_forward(n);
        let inv_n = planner.plan_fft_inverse(n);

        let mut c = vec![Complex::new(T::zero(), T::zero()); m];
        for (k, &g) in r.iter().enumerate() {
            c[k].re = g;
            if k > 0 {
                c[m - k].re = g;
            }
        }
        fwd_m.process(&mut c);

        let nf = T::from_usize_lossy(n);
        let mut p: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let wrap = if k == 0 { T::zero() } else { r[n - k] };
                let kf = T::from_usize_lossy(k);
                Complex::new(((nf - kf) * r[k] + kf * wrap) / nf, T::zero())
            })
            .collect();
        fwd_n.process(&mut p);
        if p.iter().any(|z| !(z.re > T::zero())) {
            p.iter_mut().for_each(|z| *z = Complex::new(T::one(), T::zero()));
        }
        Self { n, m, embed_eigs: c, precond_eigs: p, fwd_m, inv_m, fwd_n, inv_n }
    }

    fn apply(&self, v: &[T]) -> Vec<T> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.m];
        for (b, &x) in buf.iter_mut().zip(v) {
            b.re = x;
        }
        self.fwd_m.process(&mut buf);
        for (b, e) in buf.iter_mut().zip(&self.embed_eigs) {
            *b = *b * *e;
        }
        self.inv_m.process(&mut buf);
        let scale = T::from_usize_lossy(self.m);
        buf[..self.n].iter().map(|z| z.re / scale).collect()
    }

    fn precondition(&self, v: &[T]) -> Vec<T> {
        let mut buf: Vec<Complex<T>> = v.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.fwd_n.process(&mut buf);
        for (b, e) in buf.iter_mut().zip(&self.precond_eigs) {
            *b = *b / e.re;
        }
        self.inv_n.process(&mut buf);
        let scale = T::from_usize_lossy(self.n);
        buf.iter().map(|z| z.re / scale).collect()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Preconditioned conjugate gradients; stops at relative residual `tol`.
/// Returns the solution and the iteration count.
pub fn pcg<T: Scalar>(spec: &ToeplitzSpec<T>, rhs: &[T], tol: f64) -> Result<(Vec<T>, usize)> {
    let n = spec.n();
    if rhs.len() != n {
        return Err(Error::InvalidInput(format!("rhs length {} does not match {n}", rhs.len())));
    }
    let ops = CirculantOps::new(spec);
    let tol = T::tol_floor(tol);
    let bnorm = dot(rhs, rhs).sqrt();
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok((x, 0));
    }
    let mut r = rhs.to_vec();
    let mut z = ops.precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = (4 * n).max(100);
    let mut rel = T::one();
    for it in 1..=max_iter {
        let ap = ops.apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::Breakdown {
                order: it,
                variance: pap.to_f64_lossy(),
                threshold: 0.0,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            return Ok((x, it));
        }
        z = ops.precondition(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgStalled { iterations: max_iter, residual: rel.to_f64_lossy() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Levinson up to [`PCG_THRESHOLD`], conjugate gradients above.
    #[default]
    Auto,
    Levinson,
    Pcg,
}

/// `logdet T_N`, `quad = (X − μ̂1)ᵀ T_N⁻¹ (X − μ̂1)` and `z0 = quad / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFormResult<T> {
    pub logdet: T,
    pub quad: T,
    pub z0: T,
}

pub fn quad_form_z0<T: Scalar>(spec: &ToeplitzSpec<T>, series: &SeriesSample<T>) -> Result<QuadFormResult<T>> {
    quad_form_z0_with(spec, series, SolveMethod::Auto)
}

pub fn quad_form_z0_with<T: Scalar>(
    spec: &ToeplitzSpec<T>,
    series: &SeriesSample<T>,
    method: SolveMethod,
) -> Result<QuadFormResult<T>> {
    let n = spec.n();
    if series.len() != n {
        return Err(Error::InvalidInput(format!(
            "series length {} does not match Toeplitz dimension {n}",
            series.len()
        )));
    }
    let centered = series.centered();
    let use_pcg = match method {
        SolveMethod::Auto => n > PCG_THRESHOLD,
        SolveMethod::Levinson => false,
        SolveMethod::Pcg => true,
    };
    let (solution, logdet) = if use_pcg {
        let (sol, _) = pcg(spec, &centered, PCG_TOLERANCE)?;
        let pv = prediction_variances(spec)?;
        (sol, pv.iter().fold(T::zero(), |acc, &p| acc + p.ln()))
    } else {
        let s = levinson(spec, &centered)?;
        (s.solution, s.logdet)
    };
    let quad = dot(&centered, &solution).max(T::zero());
    Ok(QuadFormResult { logdet, quad, z0: quad / T::from_usize_lossy(n) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_matrix() {
        let t = ToeplitzSpec::new(vec![1.0, 0.0]).unwrap();
        let s = levinson(&t, &[3.0, 4.0]).unwrap();
        assert_eq!(s.solution, vec![3.0, 4.0]);
        assert_eq!(s.logdet, 0.0);
        let (x, ld) = dense_oracle(&t, &[3.0, 4.0]).unwrap();
        assert_eq!(x, vec![3.0, 4.0]);
        assert_eq!(ld, 0.0);
    }

    #[test]
    fn two_by_two_against_explicit_inverse() {
        // T⁻¹ = (1/0.75) [[1, −0.5], [−0.5, 1]]
        let t = ToeplitzSpec::new(vec![1.0, 0.5]).unwrap();
        let s = levinson(&t, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(s.solution[0], 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(s.solution[1], 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(s.logdet, 0.75f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(s.logdet, -0.287682, max_relative = 1e-6);
    }

    #[test]
    fn three_by_three_first_column_of_inverse() {
        // T = [[1, .5, .25], [.5, 1, .5], [.25, .5, 1]], det = 0.5625
        // cofactors of column 1: C11 = 0.75, C21 = −0.375, C31 = 0
        let t = ToeplitzSpec::new(vec![1.0, 0.5, 0.25]).unwrap();
        let det: f64 = 1.0 * (1.0 - 0.25) - 0.5 * (0.5 - 0.125) + 0.25 * (0.25 - 0.25);
        assert_relative_eq!(det, 0.5625);
        let expect = [0.75 / det, -0.375 / det, 0.0];
        let (x, ld) = dense_oracle(&t, &[1.0, 0.0, 0.0]).unwrap();
        let lev = levinson(&t, &[1.0, 0.0, 0.0]).unwrap();
        for i in 0..3 {
            assert!((x[i] - expect[i]).abs() < 1e-14);
            assert!((lev.solution[i] - expect[i]).abs() < 1e-14);
        }
        assert_relative_eq!(ld, det.ln(), max_relative = 1e-14);
        assert_relative_eq!(lev.logdet, det.ln(), max_relative = 1e-14);
    }

    #[test]
    fn non_positive_definite_input_breaks_down() {
        let t = ToeplitzSpec::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(levinson(&t, &[1.0, 1.0]), Err(Error::Breakdown { order: 1, .. })));
        let t = ToeplitzSpec::new(vec![1.0, 0.9, -0.9]).unwrap();
        assert!(levinson(&t, &[0.0; 3]).is_err());
        assert!(matches!(dense_oracle(&t, &[0.0; 3]), Err(Error::Factorization { .. })));
    }

    #[test]
    fn dense_oracle_refuses_large_dimensions() {
        let t = ToeplitzSpec::new(vec![1.0; 1].into_iter().chain(vec![0.0; DENSE_MAX_N]).collect()).unwrap();
        assert!(dense_oracle(&t, &vec![0.0; DENSE_MAX_N + 1]).is_err());
    }

    #[test]
    fn quad_form_of_the_two_by_two_case() {
        let t = ToeplitzSpec::new(vec![1.0, 0.5]).unwrap();
        let s = SeriesSample::observed(vec![1.0, -1.0]).unwrap().with_known_mean(0.0);
        let q = quad_form_z0(&t, &s).unwrap();
        assert_relative_eq!(q.quad, 4.0, max_relative = 1e-15);
        assert_relative_eq!(q.z0, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn constant_series_has_zero_quad_form() {
        let t = ToeplitzSpec::new(vec![2.0, 0.7, 0.3, 0.1]).unwrap();
        let s = SeriesSample::observed(vec![3.5; 4]).unwrap();
        let q = quad_form_z0(&t, &s).unwrap();
        assert_eq!(q.quad, 0.0);
        assert_eq!(q.z0, 0.0);
    }

    #[test]
    fn white_noise_z0_is_the_sample_variance() {
        let t = ToeplitzSpec::new(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let x = vec![1.0, 4.0, -2.0, 0.5, 3.0];
        let s = SeriesSample::observed(x.clone()).unwrap();
        let m = x.iter().sum::<f64>() / 5.0;
        let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 5.0;
        assert_relative_eq!(quad_form_z0(&t, &s).unwrap().z0, var, max_relative = 1e-14);
    }

    #[test]
    fn pcg_agrees_with_levinson() {
        let gamma = crate::spectral_models::SpectralModel::arfima0d0(1.0)
            .and_then(|m| m.autocovariance(&m.theta(&[0.35])?, 299))
            .unwrap();
        let t = ToeplitzSpec::from_autocov(&gamma, 300).unwrap();
        let rhs: Vec<f64> = (0..300).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let lev = levinson(&t, &rhs).unwrap();
        let (x, iters) = pcg(&t, &rhs, 1e-12).unwrap();
        assert!(iters < 300, "preconditioner ineffective: {iters} iterations");
        for (a, b) in x.iter().zip(&lev.solution) {
            assert!((a - b).abs() <= 1e-8 * lev.solution.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        }
        let s = SeriesSample::observed(rhs).unwrap();
        let q1 = quad_form_z0_with(&t, &s, SolveMethod::Levinson).unwrap();
        let q2 = quad_form_z0_with(&t, &s, SolveMethod::Pcg).unwrap();
        assert_relative_eq!(q1.quad, q2.quad, max_relative = 1e-9);
        assert_eq!(q1.logdet, q2.logdet);
    }

    #[test]
    fn single_precision_levinson() {
        let t = ToeplitzSpec::<f32>::new(vec![1.0, 0.5]).unwrap();
        let s = levinson(&t, &[1.0, 1.0]).unwrap();
        assert!((s.solution[0] - 2.0 / 3.0).abs() < 1e-6);
    }
}
