//! Monte Carlo study of how the normalized quadratic form
//! `Z_N(θ) = (X − μ̂1)ᵀ T_N(f_θ)⁻¹ (X − μ̂1) / N` varies with θ.
//!
//! For each replicate a path is simulated at `θ₀`, `Z_N` is evaluated on a
//! mesh of the memory coordinate, and the largest increment over mesh pairs
//! at most `δ` apart is recorded. The report gives the frequency with which
//! that increment exceeds `η`. The sup is over mesh pairs only, so it is a
//! lower bound for the sup over the continuum.

use rayon::prelude::*;
use serde::Serialize;

use crate::condition_checker::mesh;
use crate::error::{Error, Result};
use crate::seed::stream_seed;
use crate::series::SeriesSample;
use crate::simulation::{plan_embedding, sample_path};
use crate::spectral_models::{SpectralModel, Theta};
use crate::toeplitz::{quad_form_z0, ToeplitzSpec};

pub const DEFAULT_ETA: f64 = 0.1;
pub const DEFAULT_DELTAS: [f64; 4] = [0.005, 0.01, 0.02, 0.05];
pub const DEFAULT_REPS: usize = 200;
pub const Z_SIGNIFICANCE: f64 = 1.96;

#[derive(Debug, Clone, Serialize)]
pub struct ZProfile {
    pub theta_grid: Vec<Vec<f64>>,
    pub z_values: Vec<f64>,
    pub n: usize,
    pub seed: Option<u64>,
}

impl ZProfile {
    pub fn d_values(&self) -> Vec<f64> {
        self.theta_grid.iter().map(|t| t[0]).collect()
    }
}

/// Toeplitz matrices for a fixed grid and length, reusable across series.
pub struct ZGrid {
    thetas: Vec<Theta<f64>>,
    specs: Vec<ToeplitzSpec<f64>>,
    n: usize,
}

impl ZGrid {
    /// Sorts the grid by the memory coordinate (stable).
    pub fn new(model: &SpectralModel<f64>, grid: &[Theta<f64>], n: usize) -> Result<Self> {
        if grid.is_empty() || n == 0 {
            return Err(Error::InvalidInput("grid and series length must be non-empty".into()));
        }
        let mut thetas = grid.to_vec();
        thetas.sort_by(|a, b| a.d().total_cmp(&b.d()));
        let specs = thetas
            .par_iter()
            .map(|th| {
                model
                    .autocovariance(th, n - 1)
                    .and_then(|g| ToeplitzSpec::from_autocov(&g, n))
                    .map_err(|e| e.at_theta(th.values()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { thetas, specs, n })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn thetas(&self) -> &[Theta<f64>] {
        &self.thetas
    }

    pub fn profile(&self, series: &SeriesSample<f64>) -> Result<ZProfile> {
        if series.len() != self.n {
            return Err(Error::InvalidInput(format!("series length {} != grid length {}", series.len(), self.n)));
        }
        let z_values = self
            .specs
            .iter()
            .zip(&self.thetas)
            .map(|(spec, th)| quad_form_z0(spec, series).map(|q| q.z0).map_err(|e| e.at_theta(th.values())))
            .collect::<Result<Vec<_>>>()?;
        let seed = match series.provenance() {
            crate::series::SeriesProvenance::Simulated { seed } => Some(seed),
            crate::series::SeriesProvenance::Observed => None,
        };
        Ok(ZProfile {
            theta_grid: self.thetas.iter().map(|t| t.values().to_vec()).collect(),
            z_values,
            n: self.n,
            seed,
        })
    }
}

/// `Z_N(θ)` at each grid point, with the grid sorted by `d`.
pub fn z_profile(model: &SpectralModel<f64>, grid: &[Theta<f64>], series: &SeriesSample<f64>) -> Result<ZProfile> {
    ZGrid::new(model, grid, series.len())?.profile(series)
}

/// Grid varying the memory coordinate over `d_values`, other coordinates
/// held at `base`.
pub fn d_grid(base: &Theta<f64>, d_values: &[f64]) -> Result<Vec<Theta<f64>>> {
    d_values.iter().map(|&d| base.with_coordinate(0, d)).collect()
}

/// `max |Z(θᵢ) − Z(θⱼ)|` over grid pairs with `|θᵢ − θⱼ| ≤ δ`.
pub fn discrete_sup(profile: &ZProfile, delta: f64) -> f64 {
    let g = &profile.theta_grid;
    let z = &profile.z_values;
    let tol = delta * (1.0 + 1e-9);
    let mut sup = 0.0f64;
    for i in 0..g.len() {
        for j in (i + 1)..g.len() {
            let dist = g[i].iter().zip(&g[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist <= tol {
                sup = sup.max((z[i] - z[j]).abs());
            } else if g[j][0] - g[i][0] > tol {
                break;
            }
        }
    }
    sup
}

#[derive(Debug, Clone, Serialize)]
pub struct EquicontConfig {
    pub n_list: Vec<usize>,
    pub delta_list: Vec<f64>,
    pub eta: f64,
    pub grid_step: f64,
    /// Mesh range for the memory coordinate.
    pub d_range: (f64, f64),
    pub reps: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquicontRow {
    pub n: usize,
    pub delta: f64,
    pub eta: f64,
    pub p_hat: f64,
    pub half_width: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquicontReport {
    pub config: EquicontConfig,
    pub rows: Vec<EquicontRow>,
    /// Replicates excluded per `N` after simulation or solver failures.
    pub failures: Vec<usize>,
    /// `sups[k][j]` holds the per-replicate discrete sups at `n_list[k]`,
    /// `delta_list[j]`, over the successful replicates in replicate order.
    #[serde(skip)]
    pub sups: Vec<Vec<Vec<f64>>>,
}

impl EquicontReport {
    /// Exceedance table at another threshold on the same replicates.
    pub fn exceedance(&self, eta: f64) -> Vec<EquicontRow> {
        let mut rows = Vec::new();
        for (k, &n) in self.config.n_list.iter().enumerate() {
            for (j, &delta) in self.config.delta_list.iter().enumerate() {
                let s = &self.sups[k][j];
                let reps = s.len();
                let p_hat = if reps == 0 { f64::NAN } else { s.iter().filter(|&&v| v > eta).count() as f64 / reps as f64 };
                rows.push(EquicontRow { n, delta, eta, p_hat, half_width: half_width(p_hat, reps), reps });
            }
        }
        rows
    }
}

/// 95% normal-approximation half-width `1.96 √(p(1−p)/reps)`.
pub fn half_width(p: f64, reps: usize) -> f64 {
    Z_SIGNIFICANCE * (p * (1.0 - p) / reps as f64).sqrt()
}

pub fn equicontinuity_mc(model: &SpectralModel<f64>, theta0: &Theta<f64>, config: &EquicontConfig) -> Result<EquicontReport> {
    let c = config;
    if !(c.eta > 0.0) {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    if c.delta_list.is_empty() || c.n_list.is_empty() || c.reps == 0 {
        return Err(Error::InvalidInput("n_list, delta_list and reps must be non-empty".into()));
    }
    let min_delta = c.delta_list.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(c.grid_step > 0.0) || c.grid_step > min_delta / 2.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "grid_step {} must be positive and at most half the smallest delta {min_delta}",
            c.grid_step
        )));
    }
    let (lo, hi) = c.d_range;
    if !(hi > lo) {
        return Err(Error::InvalidInput("d range is empty".into()));
    }
    let grid = d_grid(theta0, &mesh(lo, hi, c.grid_step))?;

    let mut sups = Vec::with_capacity(c.n_list.len());
    let mut failures = Vec::with_capacity(c.n_list.len());
    for &n in &c.n_list {
        let zgrid = ZGrid::new(model, &grid, n)?;
        let gamma = model.autocovariance(theta0, n - 1)?;
        let plan = plan_embedding(&gamma, n)?;
        let per_rep: Vec<Option<Vec<f64>>> = (0..c.reps)
            .into_par_iter()
            .map(|i| {
                let seed = stream_seed(c.master_seed, n as u64, i as u64);
                let profile = sample_path(&plan, n, seed).and_then(|s| zgrid.profile(&s)).ok()?;
                Some(c.delta_list.iter().map(|&dl| discrete_sup(&profile, dl)).collect())
            })
            .collect();
        failures.push(per_rep.iter().filter(|r| r.is_none()).count());
        let ok: Vec<Vec<f64>> = per_rep.into_iter().flatten().collect();
        sups.push((0..c.delta_list.len()).map(|j| ok.iter().map(|r| r[j]).collect()).collect());
    }
    let mut report = EquicontReport { config: c.clone(), rows: Vec::new(), failures, sups };
    report.rows = report.exceedance(c.eta);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SMoments {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub mean_s: f64,
    pub se_mean_s: f64,
    pub mean_abs_s: f64,
    pub se_mean_abs_s: f64,
    pub mean_s2: f64,
    pub se_mean_s2: f64,
}

/// Moments of `S = (Z(θ₁) − Z(θ₂)) / |θ₁ − θ₂|` over replicates simulated at
/// `θ₀`. All pairs share the same replicate paths.
pub fn s_moments(
    model: &SpectralModel<f64>,
    theta0: &Theta<f64>,
    pairs: &[(Theta<f64>, Theta<f64>)],
    n: usize,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<SMoments>> {
    if reps < 2 {
        return Err(Error::InvalidInput("at least two replicates are needed".into()));
    }
    for (a, b) in pairs {
        if a.distance(b) == 0.0 {
            return Err(Error::InvalidInput("pairs must have distinct members".into()));
        }
    }
    let points: Vec<Theta<f64>> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    let specs = points
        .par_iter()
        .map(|th| model.autocovariance(th, n - 1).and_then(|g| ToeplitzSpec::from_autocov(&g, n)).map_err(|e| e.at_theta(th.values())))
        .collect::<Result<Vec<_>>>()?;
    let gamma = model.autocovariance(theta0, n - 1)?;
    let plan = plan_embedding(&gamma, n)?;
    let draws: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let s = sample_path(&plan, n, stream_seed(master_seed, n as u64, i as u64))?;
            let z = specs.iter().map(|sp| quad_form_z0(sp, &s).map(|q| q.z0)).collect::<Result<Vec<_>>>()?;
            Ok(pairs.iter().enumerate().map(|(k, (a, b))| (z[2 * k] - z[2 * k + 1]) / a.distance(b)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let r = reps as f64;
    let mean_se = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / r;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r - 1.0);
        (m, (var / r).sqrt())
    };
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let s: Vec<f64> = draws.iter().map(|d| d[k]).collect();
            let abs: Vec<f64> = s.iter().map(|v| v.abs()).collect();
            let sq: Vec<f64> = s.iter().map(|v| v * v).collect();
            let (mean_s, se_mean_s) = mean_se(&s);
            let (mean_abs_s, se_mean_abs_s) = mean_se(&abs);
            let (mean_s2, se_mean_s2) = mean_se(&sq);
            SMoments {
                theta1: a.to_f64_vec(),
                theta2: b.to_f64_vec(),
                n,
                reps,
                mean_s,
                se_mean_s,
                mean_abs_s,
                se_mean_abs_s,
                mean_s2,
                se_mean_s2,
            }
        })
        .collect())
}

/// Central-difference first and second derivatives of `Z_N` in the memory
/// coordinate at `θ₀`. A diagnostic stand-in for the derivative forms.
pub fn z_derivatives(model: &SpectralModel<f64>, theta0: &Theta<f64>, series: &SeriesSample<f64>, h: f64) -> Result<(f64, f64)> {
    let d = theta0.d();
    let grid = d_grid(theta0, &[d - h, d, d + h])?;
    let p = z_profile(model, &grid, series)?;
    let z = &p.z_values;
    Ok(((z[2] - z[0]) / (2.0 * h), (z[2] - 2.0 * z[1] + z[0]) / (h * h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::quad_form_z0;

    fn arfima() -> SpectralModel<f64> {
        SpectralModel::arfima0d0(1.0).unwrap()
    }

    fn path(m: &SpectralModel<f64>, d: f64, n: usize, seed: u64) -> SeriesSample<f64> {
        let g = m.autocovariance(&m.theta(&[d]).unwrap(), n - 1).unwrap();
        sample_path(&plan_embedding(&g, n).unwrap(), n, seed).unwrap()
    }

    #[test]
    fn single_point_matches_quad_form() {
        let m = arfima();
        let s = path(&m, 0.3, 64, 1);
        let th = m.theta(&[0.2]).unwrap();
        let p = z_profile(&m, &[th.clone()], &s).unwrap();
        let spec = ToeplitzSpec::from_autocov(&m.autocovariance(&th, 63).unwrap(), 64).unwrap();
        assert_eq!(p.z_values, vec![quad_form_z0(&spec, &s).unwrap().z0]);
        assert_eq!(p.seed, Some(1));
    }

    #[test]
    fn constant_series_profile_is_zero() {
        let m = arfima();
        let s = SeriesSample::observed(vec![2.5; 32]).unwrap();
        let grid = d_grid(&m.theta(&[0.3]).unwrap(), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let p = z_profile(&m, &grid, &s).unwrap();
        assert!(p.z_values.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn profile_sorted_and_nonnegative() {
        let m = arfima();
        let s = path(&m, 0.3, 64, 2);
        let grid = d_grid(&m.theta(&[0.3]).unwrap(), &[0.45, 0.1, 0.3, 0.2]).unwrap();
        let p = z_profile(&m, &grid, &s).unwrap();
        assert_eq!(p.d_values(), vec![0.1, 0.2, 0.3, 0.45]);
        assert!(p.z_values.iter().all(|&z| z >= 0.0 && z.is_finite()));
    }

    #[test]
    fn sub_mesh_delta_has_zero_sup() {
        let p = ZProfile { theta_grid: vec![vec![0.1], vec![0.2]], z_values: vec![1.0, 3.0], n: 8, seed: None };
        assert_eq!(discrete_sup(&p, 0.05), 0.0);
        assert_eq!(discrete_sup(&p, 0.1), 2.0);
    }

    fn small_config() -> EquicontConfig {
        EquicontConfig {
            n_list: vec![64],
            delta_list: vec![0.002, 0.01, 0.02, 0.05],
            eta: 0.02,
            grid_step: 0.005,
            d_range: (0.1, 0.45),
            reps: 30,
            master_seed: 9,
        }
    }

    #[test]
    fn exceedance_monotone_in_delta_and_eta() {
        let m = arfima();
        let th = m.theta(&[0.3]).unwrap();
        let mut c = small_config();
        c.delta_list = vec![0.01, 0.02, 0.05];
        let r = equicontinuity_mc(&m, &th, &c).unwrap();
        for w in r.rows.windows(2) {
            assert!(w[0].p_hat <= w[1].p_hat);
        }
        let hi = r.exceedance(0.2);
        for (a, b) in r.rows.iter().zip(&hi) {
            assert!(a.p_hat >= b.p_hat);
            assert!((0.0..=1.0).contains(&a.p_hat));
        }
    }

    #[test]
    fn grid_step_precondition() {
        let m = arfima();
        let th = m.theta(&[0.3]).unwrap();
        assert!(equicontinuity_mc(&m, &th, &small_config()).is_err());
    }

    #[test]
    fn s_is_antisymmetric_under_swap() {
        let m = arfima();
        let th = m.theta(&[0.3]).unwrap();
        let a = m.theta(&[0.2]).unwrap();
        let b = m.theta(&[0.201]).unwrap();
        let fw = s_moments(&m, &th, &[(a.clone(), b.clone())], 64, 20, 5).unwrap();
        let bw = s_moments(&m, &th, &[(b, a)], 64, 20, 5).unwrap();
        assert_eq!(fw[0].mean_s, -bw[0].mean_s);
        assert_eq!(fw[0].mean_abs_s, bw[0].mean_abs_s);
    }

    #[test]
    fn derivative_surrogate_is_finite() {
        let m = arfima();
        let s = path(&m, 0.3, 64, 4);
        let (d1, d2) = z_derivatives(&m, &m.theta(&[0.3]).unwrap(), &s, 1e-3).unwrap();
        assert!(d1.is_finite() && d2.is_finite());
    }
}
