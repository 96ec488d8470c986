//! Autocovariances `γ(k) = ∫_{-π}^{π} f(x) cos(kx) dx` of the built-in families.

use super::{Family, HSpec, SpectralModel, Theta};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{ln_gamma, Scalar};

/// Split point between the analytic and Gauss–Legendre parts of the generic
/// quadrature, for small lags.
const SPLIT_POINT: f64 = 0.1;
/// The analytic piece keeps `m·ε` below this, so its alternating series stays
/// well conditioned at large lags.
const MAX_SPLIT_PHASE: f64 = 4.0;
const SERIES_TOL: f64 = 1e-14;
const GL_AGREEMENT: f64 = 1e-9;
const GL_ORDERS: [usize; 4] = [64, 128, 256, 512];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutocovMethod {
    ClosedForm,
    Quadrature,
    /// Supplied directly by the caller.
    Explicit,
}

#[derive(Debug, Clone)]
pub enum Provenance<T> {
    Model { model: SpectralModel<T>, theta: Theta<T> },
    Explicit,
}

/// Lags `0..=K` of the autocovariance function.
#[derive(Debug, Clone)]
pub struct AutocovSequence<T> {
    gamma: Vec<T>,
    method: AutocovMethod,
    provenance: Provenance<T>,
}

impl<T: Scalar> AutocovSequence<T> {
    /// Wraps caller-supplied autocovariances. Requires `γ(0) > 0` and `|γ(k)| ≤ γ(0)`.
    pub fn from_values(gamma: Vec<T>) -> Result<Self> {
        Self::validate(&gamma)?;
        Ok(Self { gamma, method: AutocovMethod::Explicit, provenance: Provenance::Explicit })
    }

    fn validate(gamma: &[T]) -> Result<()> {
        let g0 = *gamma
            .first()
            .ok_or_else(|| Error::InvalidInput("empty autocovariance sequence".into()))?;
        if !(g0 > T::zero()) || !g0.is_finite() {
            return Err(Error::InvalidInput(format!("gamma(0) must be positive, got {g0}")));
        }
        let slack = g0 * (T::one() + T::epsilon() * T::lit(16.0));
        if let Some((k, g)) = gamma.iter().enumerate().find(|(_, g)| !(g.abs() <= slack)) {
            return Err(Error::InvalidInput(format!(
                "|gamma({k})| = {} exceeds gamma(0) = {g0}",
                g.abs()
            )));
        }
        Ok(())
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }

    pub fn method(&self) -> AutocovMethod {
        self.method
    }

    pub fn provenance(&self) -> &Provenance<T> {
        &self.provenance
    }

    /// Recomputes the sequence out to `max_lag` when it came from a model.
    /// Explicit sequences cannot be extended and come back as `None`.
    pub fn extended(&self, max_lag: usize) -> Option<Result<Self>> {
        if max_lag <= self.max_lag() {
            let mut out = self.clone();
            out.gamma.truncate(max_lag + 1);
            return Some(Ok(out));
        }
        match &self.provenance {
            Provenance::Model { model, theta } => Some(model.autocovariance(theta, max_lag)),
            Provenance::Explicit => None,
        }
    }
}

impl<T: Scalar> SpectralModel<T> {
    /// `γ(0..=max_lag)` at θ: closed forms for fGn and ARFIMA(0,d,0), split
    /// quadrature for the generic family.
    pub fn autocovariance(&self, theta: &Theta<T>, max_lag: usize) -> Result<AutocovSequence<T>> {
        self.check_theta(theta)?;
        let d = theta.d();
        let (gamma, method) = match &self.family {
            Family::Fgn => (fgn_autocov(d + T::lit(0.5), self.sigma2, max_lag), AutocovMethod::ClosedForm),
            Family::Arfima0d0 => (arfima_autocov(d, self.sigma2, max_lag), AutocovMethod::ClosedForm),
            Family::Generic(h) => (
                generic_autocov(h, &theta.values()[1..], d, self.sigma2, max_lag)?,
                AutocovMethod::Quadrature,
            ),
        };
        AutocovSequence::validate(&gamma)?;
        Ok(AutocovSequence {
            gamma,
            method,
            provenance: Provenance::Model { model: self.clone(), theta: theta.clone() },
        })
    }
}

/// `γ(k) = (σ²/2)(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`. For `k ≥ 8` the second
/// difference is summed as a binomial series in `1/k²` to avoid cancellation.
pub(crate) fn fgn_autocov<T: Scalar>(hurst: T, sigma2: T, max_lag: usize) -> Vec<T> {
    let two_h = T::lit(2.0) * hurst;
    let half = sigma2 * T::lit(0.5);
    (0..=max_lag)
        .map(|k| {
            if k == 0 {
                return sigma2;
            }
            let kf = T::from_usize_lossy(k);
            if k < 8 {
                let p = |v: T| v.abs().powf(two_h);
                return half * (p(kf + T::one()) - T::lit(2.0) * p(kf) + p(kf - T::one()));
            }
            // (1+u)^a − 2 + (1−u)^a = 2 Σ_{j≥1} C(a, 2j) u^{2j}, u = 1/k
            let u2 = T::one() / (kf * kf);
            let mut binom = T::one();
            let mut upow = T::one();
            let mut sum = T::zero();
            for n in 1..200usize {
                let nf = T::from_usize_lossy(n);
                binom = binom * (two_h - nf + T::one()) / nf;
                if n % 2 == 1 {
                    continue;
                }
                upow = upow * u2;
                let term = binom * upow;
                sum = sum + term;
                if term.abs() <= T::epsilon() * sum.abs() {
                    break;
                }
            }
            half * kf.powf(two_h) * T::lit(2.0) * sum
        })
        .collect()
}

/// `γ(0) = σ² Γ(1−2d)/Γ(1−d)²`, then `γ(k+1) = γ(k)(k+d)/(k+1−d)`.
pub(crate) fn arfima_autocov<T: Scalar>(d: T, sigma2: T, max_lag: usize) -> Vec<T> {
    let one = T::one();
    let g0 = sigma2 * (ln_gamma(one - T::lit(2.0) * d) - T::lit(2.0) * ln_gamma(one - d)).exp();
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(g0);
    for k in 0..max_lag {
        let kf = T::from_usize_lossy(k);
        let next = out[k] * (kf + d) / (kf + one - d);
        out.push(next);
    }
    out
}

/// `∫_0^ε x^{-2d} cos(m x) dx` by termwise integration of the cosine series.
fn power_cosine_moment<T: Scalar>(m: usize, eps: T, d: T) -> T {
    let p = T::one() - T::lit(2.0) * d;
    let phase = T::from_usize_lossy(m) * eps;
    let phase2 = phase * phase;
    let tol = T::tol_floor(SERIES_TOL);
    let mut u = T::one();
    let mut sum = T::one() / p;
    for j in 1..500usize {
        let jf = T::from_usize_lossy(j);
        u = -u * phase2 / ((T::lit(2.0) * jf - T::one()) * (T::lit(2.0) * jf));
        let term = u / (T::lit(2.0) * jf + p);
        sum = sum + term;
        if T::lit(2.0) * jf > phase && term.abs() < tol * sum.abs() {
            break;
        }
    }
    sum * eps.powf(p)
}

/// Cosine-series coefficients `b_l` with `Σ_j c_j cos^j x = Σ_l b_l cos(l x)`.
fn cosine_series<T: Scalar>(coeffs: &[T]) -> Vec<T> {
    let q = coeffs.len() - 1;
    let mut b = vec![T::zero(); q + 1];
    for (j, &c) in coeffs.iter().enumerate() {
        let scale = c * T::lit(0.5).powi(j as i32);
        let mut binom = T::one();
        for i in 0..=j {
            if i > 0 {
                binom = binom * T::from_usize_lossy(j - i + 1) / T::from_usize_lossy(i);
            }
            let l = (j as isize - 2 * i as isize).unsigned_abs();
            b[l] = b[l] + scale * binom;
        }
    }
    b
}

fn generic_autocov<T: Scalar>(
    h: &HSpec<T>,
    free: &[T],
    d: T,
    sigma2: T,
    max_lag: usize,
) -> Result<Vec<T>> {
    let coeffs = h.resolved(free);
    let deg = h.degree();
    let eps = if max_lag + deg == 0 {
        T::lit(SPLIT_POINT)
    } else {
        T::lit(SPLIT_POINT).min(T::lit(MAX_SPLIT_PHASE) / T::from_usize_lossy(max_lag + deg))
    };

    // analytic part on [0, ε]
    let b = cosine_series(&coeffs);
    let moments: Vec<T> = (0..=max_lag + deg).map(|m| power_cosine_moment(m, eps, d)).collect();
    let near: Vec<T> = (0..=max_lag)
        .map(|k| {
            b.iter().enumerate().fold(T::zero(), |acc, (l, &bl)| {
                let lo = k.abs_diff(l);
                acc + bl * T::lit(0.5) * (moments[k + l] + moments[lo])
            })
        })
        .collect();

    // Gauss–Legendre on [ε, π]: panels grow geometrically away from ε and are
    // capped so each spans a bounded number of oscillations of cos(K x).
    let wmax = if max_lag == 0 {
        T::lit(std::f64::consts::FRAC_PI_4)
    } else {
        T::lit(std::f64::consts::FRAC_PI_4).min(T::lit(16.0) / T::from_usize_lossy(max_lag))
    };
    let mut breaks = vec![eps];
    let mut a = eps;
    while a < T::PI() {
        let next = (a + a.min(wmax)).min(T::PI());
        breaks.push(next);
        a = next;
    }

    let density = |x: T| (-T::lit(2.0) * d * x.ln()).exp() * HSpec::eval_resolved(&coeffs, x);
    let far_at = |order: usize| -> (Vec<T>, T) {
        let rule = GaussLegendre::of_order(order);
        let mut acc = vec![T::zero(); max_lag + 1];
        let mut mass = T::zero();
        for w in breaks.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                let fw = density(x) * wt;
                mass = mass + fw.abs();
                let c1 = x.cos();
                let (mut cm, mut ck) = (T::one(), c1);
                acc[0] = acc[0] + fw;
                for slot in acc.iter_mut().skip(1) {
                    *slot = *slot + fw * ck;
                    let next = T::lit(2.0) * c1 * ck - cm;
                    cm = ck;
                    ck = next;
                }
            }
        }
        (acc, mass)
    };

    let tol = T::tol_floor(GL_AGREEMENT);
    let (mut prev, _) = far_at(GL_ORDERS[0]);
    let mut achieved = T::infinity();
    for &order in &GL_ORDERS[1..] {
        let (cur, mass) = far_at(order);
        let scale = mass + near[0].abs();
        achieved = cur
            .iter()
            .zip(&prev)
            .map(|(&a, &b)| (a - b).abs() / a.abs().max(scale))
            .fold(T::zero(), T::max);
        prev = cur;
        if achieved <= tol {
            let two_s2 = T::lit(2.0) * sigma2;
            return Ok(near.iter().zip(&prev).map(|(&n, &f)| two_s2 * (n + f)).collect());
        }
    }
    Err(Error::Quadrature {
        context: format!("generic autocovariance to lag {max_lag} at d = {d}"),
        achieved: achieved.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fgn_white_noise_at_half() {
        let m = SpectralModel::fgn(1.0f64).unwrap().with_d_bounds(0.0, 0.49).unwrap();
        let g = m.autocovariance(&m.theta_from_hurst(0.5).unwrap(), 3).unwrap();
        assert_eq!(g.gamma()[0], 1.0);
        for &v in &g.gamma()[1..] {
            assert!(v.abs() < 1e-15);
        }
        // series branch at H = 1/2 as well
        let g = m.autocovariance(&m.theta_from_hurst(0.5).unwrap(), 40).unwrap();
        assert!(g.gamma()[8..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn fgn_lag_one() {
        let m = SpectralModel::fgn(1.0).unwrap();
        let g = m.autocovariance(&m.theta_from_hurst(0.7).unwrap(), 1).unwrap();
        assert_relative_eq!(g.gamma()[1], (2f64.powf(1.4) - 2.0) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(g.gamma()[1], 0.319508, max_relative = 1e-6);
    }

    #[test]
    fn fgn_series_branch_matches_direct_difference() {
        let two_h = 1.6f64;
        let g = fgn_autocov(0.8, 1.0, 20);
        for k in 8..=20 {
            let kf = k as f64;
            let direct = 0.5 * ((kf + 1.0).powf(two_h) - 2.0 * kf.powf(two_h) + (kf - 1.0).powf(two_h));
            assert_relative_eq!(g[k], direct, max_relative = 1e-11);
        }
    }

    #[test]
    fn arfima_gamma_zero() {
        let m = SpectralModel::arfima0d0(1.0).unwrap();
        let g = m.autocovariance(&m.theta(&[0.25]).unwrap(), 0).unwrap();
        assert_relative_eq!(g.gamma()[0], 1.180341, max_relative = 1e-6);
    }

    #[test]
    fn arfima_recursion_matches_gamma_functions() {
        use statrs::function::gamma::gamma;
        for &d in &[0.05, 0.2, 0.3, 0.45] {
            let g = arfima_autocov(d, 1.0, 50);
            for (k, &v) in g.iter().enumerate() {
                let kf = k as f64;
                let direct = (statrs::function::gamma::ln_gamma(kf + d)
                    - statrs::function::gamma::ln_gamma(kf + 1.0 - d))
                .exp()
                    * gamma(1.0 - 2.0 * d)
                    / (gamma(d) * gamma(1.0 - d));
                assert_relative_eq!(v, direct, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn cosine_series_expansion() {
        // 1 + 2cos x + 4cos² x = 3 + 2 cos x + 2 cos 2x
        let b = cosine_series(&[1.0, 2.0, 4.0]);
        assert_relative_eq!(b[0], 3.0);
        assert_relative_eq!(b[1], 2.0);
        assert_relative_eq!(b[2], 2.0);
    }

    #[test]
    fn power_cosine_moment_at_zero_d() {
        // ∫_0^ε cos(mx) = sin(mε)/m
        let v = power_cosine_moment(30, 0.1f64, 0.0);
        assert_relative_eq!(v, (3.0f64).sin() / 30.0, max_relative = 1e-13);
    }

    #[test]
    fn generic_flat_density_is_white_noise() {
        let m = SpectralModel::generic(HSpec::constant_one(), 1.0, &[])
            .unwrap()
            .with_d_bounds(0.0, 0.4)
            .unwrap();
        let g = m.autocovariance(&m.theta(&[0.0]).unwrap(), 64).unwrap();
        assert_eq!(g.method(), AutocovMethod::Quadrature);
        assert_relative_eq!(g.gamma()[0], 2.0 * std::f64::consts::PI, max_relative = 1e-12);
        for &v in &g.gamma()[1..] {
            assert!(v.abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn explicit_sequences_cannot_be_extended() {
        let g = AutocovSequence::from_values(vec![1.0, 0.5]).unwrap();
        assert!(g.extended(4).is_none());
        assert_eq!(g.extended(0).unwrap().unwrap().gamma(), &[1.0]);
        assert!(AutocovSequence::from_values(vec![1.0, 1.5]).is_err());
        assert!(AutocovSequence::<f64>::from_values(vec![]).is_err());
    }
}
