use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::fisher::{fisher_matrix, FisherMatrix, DEFAULT_FISHER_ORDER};
use super::fit::{fit, Objective};
use crate::error::{Error, Result};
use crate::seed::stream_seed;
use crate::spectral_models::{SpectralModel, Theta};
use crate::simulation::{plan_embedding, sample_path};

pub const MIN_REPS: usize = 100;
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Seed of replicate `i` at series length `n`.
pub fn normality_seed(master: u64, n: usize, i: usize) -> u64 {
    stream_seed(master, n as u64, i as u64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicateRecord {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub theta_hat: Vec<f64>,
    /// `√N Lᵀ (θ̂ − θ₀)` with `Γ(θ₀) = L Lᵀ`.
    pub standardized: Vec<f64>,
    pub converged: bool,
    pub boundary_hit: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalitySummary {
    pub n: usize,
    pub reps: usize,
    pub failures: usize,
    pub boundary_excluded: usize,
    pub exclusion_rate: f64,
    /// Over the retained replicates.
    pub mean: Vec<f64>,
    /// Covariance of the standardized errors, row major.
    pub covariance: Vec<f64>,
    /// Covariance of `√N (θ̂ − θ₀)`, row major; compare with `Γ⁻¹`.
    pub scaled_covariance: Vec<f64>,
    /// Per coordinate: `|q̂(p) − Φ⁻¹(p)|` at `p = 0.1..0.9` after
    /// standardizing the errors by their own mean and standard deviation.
    pub decile_deviations: Vec<Vec<f64>>,
    pub max_decile_deviation: f64,
    /// `mean ‖θ̂ − θ₀‖²` over the retained replicates.
    pub mse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalityReport {
    pub objective: Objective,
    pub theta0: Vec<f64>,
    pub master_seed: u64,
    pub fisher: FisherMatrix,
    pub summaries: Vec<NormalitySummary>,
    #[serde(skip)]
    pub replicates: Vec<ReplicateRecord>,
}

/// Monte Carlo study of the estimator's sampling distribution.
///
/// For each `N`, simulates `reps` paths at `θ₀` (replicate seeds from
/// [`normality_seed`]), fits each, and summarizes the standardized errors.
/// Replicates whose estimate touches the box edge are kept in the
/// per-replicate table but left out of the moment and quantile summaries.
/// Failed fits are counted; the call errors only if they reach 5%.
pub fn mc_normality(
    model: &SpectralModel<f64>,
    theta0: &Theta<f64>,
    n_list: &[usize],
    reps: usize,
    master_seed: u64,
    objective: Objective,
) -> Result<NormalityReport> {
    if reps < MIN_REPS {
        return Err(Error::InvalidInput(format!("reps must be at least {MIN_REPS}, got {reps}")));
    }
    if !model.bounds().is_interior(theta0.values()) {
        return Err(Error::Parameter("theta0 must be interior to the box".into()));
    }
    let fisher = fisher_matrix(model, theta0, DEFAULT_FISHER_ORDER)?;
    let chol = fisher.cholesky()?;
    let p = theta0.dim();
    let t0 = theta0.values();

    let mut summaries = Vec::with_capacity(n_list.len());
    let mut replicates = Vec::with_capacity(n_list.len() * reps);
    for &n in n_list {
        let gamma = model.autocovariance(theta0, n.saturating_sub(1))?;
        let plan = plan_embedding(&gamma, n)?;
        let rows: Vec<ReplicateRecord> = (0..reps)
            .into_par_iter()
            .map(|i| {
                let seed = normality_seed(master_seed, n, i);
                let outcome = sample_path(&plan, n, seed).and_then(|s| fit(objective, model, &s));
                match outcome {
                    Ok(r) => {
                        let th = r.theta_hat.values().to_vec();
                        let rt = (n as f64).sqrt();
                        let standardized = (0..p)
                            .map(|a| (a..p).map(|b| chol.factor_entry(b, a) * rt * (th[b] - t0[b])).sum())
                            .collect();
                        ReplicateRecord {
                            n,
                            replicate: i,
                            seed,
                            boundary_hit: r.any_boundary_hit(),
                            converged: r.converged,
                            theta_hat: th,
                            standardized,
                            error: None,
                        }
                    }
                    Err(e) => ReplicateRecord {
                        n,
                        replicate: i,
                        seed,
                        theta_hat: vec![f64::NAN; p],
                        standardized: vec![f64::NAN; p],
                        converged: false,
                        boundary_hit: false,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        let failures = rows.iter().filter(|r| r.error.is_some()).count();
        if failures as f64 >= MAX_FAILURE_RATE * reps as f64 {
            return Err(Error::InvalidInput(format!("{failures} of {reps} fits failed at N = {n}")));
        }
        summaries.push(summarize(n, reps, failures, &rows, t0));
        replicates.extend(rows);
    }
    Ok(NormalityReport {
        objective,
        theta0: t0.to_vec(),
        master_seed,
        fisher,
        summaries,
        replicates,
    })
}

fn summarize(n: usize, reps: usize, failures: usize, rows: &[ReplicateRecord], t0: &[f64]) -> NormalitySummary {
    let p = t0.len();
    let kept: Vec<&ReplicateRecord> = rows.iter().filter(|r| r.error.is_none() && !r.boundary_hit).collect();
    let boundary_excluded = rows.iter().filter(|r| r.error.is_none() && r.boundary_hit).count();
    let rt = (n as f64).sqrt();
    let z: Vec<Vec<f64>> = kept.iter().map(|r| r.standardized.clone()).collect();
    let raw: Vec<Vec<f64>> = kept.iter().map(|r| (0..p).map(|a| rt * (r.theta_hat[a] - t0[a])).collect()).collect();
    let (mean, covariance) = moments(&z, p);
    let (_, scaled_covariance) = moments(&raw, p);
    let decile_deviations: Vec<Vec<f64>> = (0..p)
        .map(|a| {
            let col: Vec<f64> = z.iter().map(|v| v[a]).collect();
            decile_deviation(&col)
        })
        .collect();
    let max_decile_deviation = decile_deviations.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let mse = if kept.is_empty() {
        f64::NAN
    } else {
        kept.iter()
            .map(|r| r.theta_hat.iter().zip(t0).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .sum::<f64>()
            / kept.len() as f64
    };
    NormalitySummary {
        n,
        reps,
        failures,
        boundary_excluded,
        exclusion_rate: boundary_excluded as f64 / reps as f64,
        mean,
        covariance,
        scaled_covariance,
        decile_deviations,
        max_decile_deviation,
        mse,
    }
}

fn moments(rows: &[Vec<f64>], p: usize) -> (Vec<f64>, Vec<f64>) {
    let k = rows.len() as f64;
    let mean: Vec<f64> = (0..p).map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / k).collect();
    let mut cov = vec![0.0; p * p];
    for a in 0..p {
        for b in 0..p {
            cov[a * p + b] = rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (k - 1.0);
        }
    }
    (mean, cov)
}

/// Empirical minus normal quantiles at the deciles, after centring and
/// scaling the sample by its own mean and standard deviation.
pub fn decile_deviation(sample: &[f64]) -> Vec<f64> {
    let k = sample.len();
    if k < 2 {
        return vec![f64::NAN; 9];
    }
    let mean = sample.iter().sum::<f64>() / k as f64;
    let sd = (sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k as f64 - 1.0)).sqrt();
    let mut s: Vec<f64> = sample.iter().map(|v| (v - mean) / sd).collect();
    s.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    (1..=9)
        .map(|j| {
            let p = j as f64 / 10.0;
            let h = (k - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(k - 1);
            let q = s[lo] + (h - lo as f64) * (s[hi] - s[lo]);
            (q - normal.inverse_cdf(p)).abs()
        })
        .collect()
}
