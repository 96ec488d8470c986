//! Numerical check of the uniform Lipschitz condition
//! `|f_θ(x) − f_θ'(x)| ≤ C |θ − θ'| f_θ'(x)` for all `x` and all pairs with
//! `α(θ) ≤ α(θ')`, and of continuity of `α`.
//!
//! Everything is computed from `Δ = ln f_θ(x) − ln f_θ'(x)` using the identity
//! `|f_θ − f_θ'| / f_θ' = |expm1(Δ)|`, with the frequency supplied as `ln x`.
//! No density value is ever formed, so witnesses like `x = n^{-n}` with `n` in
//! the millions are evaluated exactly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral_models::{Frequency, SpectralModel, Theta};

/// Growth per decade of `|ln x|` above which the running maximum counts as diverging.
pub const DIVERGENCE_GROWTH: f64 = 0.10;
pub const DIVERGENCE_DECADES: usize = 3;

/// One evaluation of the Lipschitz quotient.
#[derive(Debug, Clone)]
pub struct A9Ratio<T> {
    pub theta: Theta<T>,
    pub theta_prime: Theta<T>,
    pub log_x: T,
    /// `|expm1(Δ)| / |θ − θ'|`
    pub ratio: T,
    /// `Δ = ln f_θ(x) − ln f_θ'(x)`
    pub delta_log_f: T,
}

fn check_log_x<T: Scalar>(log_x: T) -> Result<()> {
    if log_x.is_nan() || log_x == T::neg_infinity() || log_x > T::PI().ln() {
        return Err(Error::Domain(format!("log frequency {log_x} outside (-inf, ln pi]")));
    }
    Ok(())
}

pub fn a9_ratio<T: Scalar>(
    model: &SpectralModel<T>,
    theta: &Theta<T>,
    theta_prime: &Theta<T>,
    log_x: T,
) -> Result<A9Ratio<T>> {
    check_log_x(log_x)?;
    let alpha = model.alpha(theta)?;
    let alpha_prime = model.alpha(theta_prime)?;
    if alpha > alpha_prime {
        return Err(Error::Ordering { alpha: alpha.to_f64_lossy(), alpha_prime: alpha_prime.to_f64_lossy() });
    }
    let dist = theta.distance(theta_prime);
    if dist == T::zero() {
        return Err(Error::Parameter("theta and theta' coincide".into()));
    }
    let delta = model.log_density_difference(theta.values(), theta_prime.values(), Frequency::from_log_x(log_x));
    Ok(A9Ratio {
        theta: theta.clone(),
        theta_prime: theta_prime.clone(),
        log_x,
        ratio: delta.exp_m1().abs() / dist,
        delta_log_f: delta,
    })
}

/// One row of a counterexample scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow<T> {
    pub n: u64,
    pub log_x: T,
    pub ratio: T,
}

/// `θ' = d'` (other coordinates at their box midpoints), `θ_n = d' − 1/(2n)`,
/// `ln x_n = −n ln n`. For `h ≡ 1` the ratio is exactly `2n − 2`.
pub fn counterexample_scan<T: Scalar>(
    model: &SpectralModel<T>,
    d_prime: T,
    n_range: std::ops::RangeInclusive<u64>,
) -> Result<Vec<ScanRow<T>>> {
    let bounds = model.bounds();
    let mut base: Vec<T> = bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&lo, &hi)| (lo + hi) * T::lit(0.5))
        .collect();
    if !(d_prime > bounds.lower()[0] && d_prime < bounds.upper()[0]) {
        return Err(Error::Parameter(format!("d' = {d_prime} must be interior to the box")));
    }
    base[0] = d_prime;
    let theta_prime = model.theta(&base)?;
    let mut rows = Vec::with_capacity(n_range.clone().count());
    for n in n_range {
        if n < 1 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        let nf = T::lit(n as f64);
        let d_n = d_prime - T::one() / (T::lit(2.0) * nf);
        let theta_n = theta_prime.with_coordinate(0, d_n).map_err(|e| {
            Error::Parameter(format!("d_n = d' - 1/(2n) leaves the box at n = {n}: {e}"))
        })?;
        let log_x = -nf * nf.ln();
        let r = a9_ratio(model, &theta_n, &theta_prime, log_x)?;
        rows.push(ScanRow { n, log_x, ratio: r.ratio });
    }
    Ok(rows)
}

/// Slope test on the running maximum of `values` as `ln x → −∞`.
///
/// With `L = max |ln x|`, let `M(ℓ)` be the largest value among points with
/// `|ln x| ≤ ℓ`. Divergence is declared when `M(L/10^i) > 1.1 · M(L/10^{i+1})`
/// for each of the last three decades `i = 0, 1, 2`. Grids spanning fewer than
/// three decades never diverge.
pub fn divergence_test<T: Scalar>(points: &[(T, T)]) -> bool {
    let big = points.iter().map(|(lx, _)| lx.abs()).fold(T::zero(), T::max);
    if big == T::zero() {
        return false;
    }
    let running = |limit: T| -> Option<T> {
        points
            .iter()
            .filter(|(lx, _)| lx.abs() <= limit)
            .map(|&(_, v)| v)
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    let ten = T::lit(10.0);
    let growth = T::one() + T::lit(DIVERGENCE_GROWTH);
    let mut upper = big;
    for _ in 0..DIVERGENCE_DECADES {
        let lower = upper / ten;
        let (Some(hi), Some(lo)) = (running(upper), running(lower)) else {
            return false;
        };
        if !(hi > growth * lo) {
            return false;
        }
        upper = lower;
    }
    true
}

/// Where the largest quotient on a grid was attained.
#[derive(Debug, Clone)]
pub struct Witness<T> {
    pub theta: Vec<T>,
    pub theta_prime: Vec<T>,
    pub log_x: T,
}

#[derive(Debug, Clone)]
pub struct SupEstimate<T> {
    pub best_c: T,
    pub divergence: bool,
    pub witness: Option<Witness<T>>,
    /// Per grid frequency: `(ln x, sup over admissible pairs)`.
    pub per_log_x: Vec<(T, T)>,
    pub pairs: usize,
}

/// Largest quotient over all ordered pairs of distinct grid points with
/// `α(θ) ≤ α(θ')`, and every frequency of `log_x_grid`.
pub fn sup_constant_estimate<T: Scalar>(
    model: &SpectralModel<T>,
    theta_grid: &[Theta<T>],
    log_x_grid: &[T],
) -> Result<SupEstimate<T>> {
    for &lx in log_x_grid {
        check_log_x(lx)?;
    }
    let alphas: Vec<T> = theta_grid.iter().map(|t| model.alpha(t)).collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for (i, a) in theta_grid.iter().enumerate() {
        for (j, b) in theta_grid.iter().enumerate() {
            if i != j && alphas[i] <= alphas[j] && a.distance(b) > T::zero() {
                pairs.push((i, j, a.distance(b)));
            }
        }
    }
    let mut best_c = T::zero();
    let mut witness = None;
    let mut per_log_x = Vec::with_capacity(log_x_grid.len());
    for &lx in log_x_grid {
        let freq = Frequency::from_log_x(lx);
        let mut sup = T::zero();
        let mut arg = None;
        for &(i, j, dist) in &pairs {
            let delta = model.log_density_difference(theta_grid[i].values(), theta_grid[j].values(), freq);
            let r = delta.exp_m1().abs() / dist;
            if r > sup {
                sup = r;
                arg = Some((i, j));
            }
        }
        if sup > best_c {
            best_c = sup;
            witness = arg.map(|(i, j)| Witness {
                theta: theta_grid[i].values().to_vec(),
                theta_prime: theta_grid[j].values().to_vec(),
                log_x: lx,
            });
        }
        per_log_x.push((lx, sup));
    }
    let divergence = !pairs.is_empty() && divergence_test(&per_log_x);
    Ok(SupEstimate { best_c, divergence, witness, per_log_x, pairs: pairs.len() })
}

/// Largest `|α(θ_i) − α(θ_j)|` over grid neighbours (points at Euclidean
/// distance at most `modulus_step`).
pub fn alpha_continuity_scan<T: Scalar>(
    model: &SpectralModel<T>,
    theta_grid: &[Theta<T>],
    modulus_step: T,
) -> Result<T> {
    if !(modulus_step > T::zero()) {
        return Err(Error::InvalidInput("modulus step must be positive".into()));
    }
    let reach = modulus_step * (T::one() + T::lit(1e-6));
    let alphas: Vec<T> = theta_grid.iter().map(|t| model.alpha(t)).collect::<Result<_>>()?;
    let mut worst = T::zero();
    for i in 0..theta_grid.len() {
        for j in (i + 1)..theta_grid.len() {
            if theta_grid[i].distance(&theta_grid[j]) <= reach {
                worst = worst.max((alphas[i] - alphas[j]).abs());
            }
        }
    }
    Ok(worst)
}

/// Evenly spaced values `lo, lo + step, …` up to `hi` (inclusive within rounding).
pub fn mesh<T: Scalar>(lo: T, hi: T, step: T) -> Vec<T> {
    let count = ((hi - lo) / step + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    (0..=count).map(|i| lo + step * T::from_usize_lossy(i)).collect()
}
