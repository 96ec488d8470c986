use serde::Serialize;

use crate::dense::Cholesky;
use crate::error::{Error, Result};
use crate::quadrature::{graded_breakpoints, GaussLegendre};
use crate::spectral_models::{LogSpectrum, SpectralModel, Theta};

pub const FD_RELATIVE_STEP: f64 = 1e-5;
pub const DEFAULT_FISHER_ORDER: usize = 32;
const GRADING_LEVELS: usize = 60;
const FISHER_REL_TOL: f64 = 1e-8;

/// Spectral Fisher information `Γ(θ)` and its inverse, row major.
#[derive(Debug, Clone, Serialize)]
pub struct FisherMatrix {
    pub dim: usize,
    pub gamma_mat: Vec<f64>,
    pub inverse: Vec<f64>,
}

impl FisherMatrix {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.gamma_mat[i * self.dim + j]
    }

    pub fn inverse_entry(&self, i: usize, j: usize) -> f64 {
        self.inverse[i * self.dim + j]
    }

    /// Lower Cholesky factor `L` of `Γ = L Lᵀ`.
    pub fn cholesky(&self) -> Result<Cholesky<f64>> {
        Cholesky::factor(&self.gamma_mat, self.dim)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FisherOptions {
    /// Gauss–Legendre order per panel; the result is checked against twice
    /// this order.
    pub order: usize,
    /// Project out the scale direction (centre the score over frequency),
    /// which gives the information for θ when σ² is estimated jointly.
    pub profile_scale: bool,
}

impl Default for FisherOptions {
    fn default() -> Self {
        Self { order: DEFAULT_FISHER_ORDER, profile_scale: false }
    }
}

/// Central-difference gradient of `ln f` in the parameters.
pub fn log_density_gradient<M: LogSpectrum<f64> + ?Sized>(model: &M, values: &[f64], x: f64) -> Vec<f64> {
    let mut probe = values.to_vec();
    (0..values.len())
        .map(|i| {
            let h = FD_RELATIVE_STEP * values[i].abs().max(1.0);
            probe[i] = values[i] + h;
            let up = model.log_density(&probe, x);
            probe[i] = values[i] - h;
            let down = model.log_density(&probe, x);
            probe[i] = values[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `Γ(θ) = (1/4π) ∫_{−π}^{π} ∇ln f ∇ln fᵀ dx` for a model at an interior θ.
pub fn fisher_matrix(model: &SpectralModel<f64>, theta: &Theta<f64>, order: usize) -> Result<FisherMatrix> {
    fisher_matrix_with(model, theta, FisherOptions { order, profile_scale: false })
}

pub fn fisher_matrix_with(model: &SpectralModel<f64>, theta: &Theta<f64>, options: FisherOptions) -> Result<FisherMatrix> {
    let values = theta.values();
    let b = model.bounds();
    for i in 0..values.len() {
        let h = FD_RELATIVE_STEP * values[i].abs().max(1.0);
        if values[i] - h < b.lower()[i] || values[i] + h > b.upper()[i] {
            return Err(Error::Parameter(format!(
                "theta coordinate {} = {} is not interior to the box",
                b.names()[i],
                values[i]
            )));
        }
    }
    fisher_information(model, values, options)
}

/// Fisher information for any log-spectrum, evaluated by graded composite
/// Gauss–Legendre on `(0, π]` (the integrand is even in `x`).
pub fn fisher_information<M: LogSpectrum<f64> + ?Sized>(
    model: &M,
    values: &[f64],
    options: FisherOptions,
) -> Result<FisherMatrix> {
    let p = values.len();
    if p == 0 || p != model.dim() {
        return Err(Error::Parameter("parameter vector does not match the model dimension".into()));
    }
    let coarse = accumulate(model, values, options.order, options.profile_scale);
    let fine = accumulate(model, values, 2 * options.order, options.profile_scale);
    let scale = fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let achieved = coarse.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale.max(f64::MIN_POSITIVE);
    if !achieved.is_finite() || achieved > FISHER_REL_TOL {
        return Err(Error::Quadrature { context: "Fisher information".into(), achieved });
    }
    let mut gamma_mat = fine;
    for i in 0..p {
        for j in 0..i {
            let v = 0.5 * (gamma_mat[i * p + j] + gamma_mat[j * p + i]);
            gamma_mat[i * p + j] = v;
            gamma_mat[j * p + i] = v;
        }
    }
    let chol = Cholesky::factor(&gamma_mat, p)?;
    Ok(FisherMatrix { dim: p, inverse: chol.inverse(), gamma_mat })
}

fn accumulate<M: LogSpectrum<f64> + ?Sized>(model: &M, values: &[f64], order: usize, centre: bool) -> Vec<f64> {
    let p = values.len();
    let rule = GaussLegendre::of_order(order);
    let breaks = graded_breakpoints(std::f64::consts::PI, GRADING_LEVELS);
    let mut outer = vec![0.0; p * p];
    let mut mean = vec![0.0; p];
    for w in breaks.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            let g = log_density_gradient(model, values, x);
            for i in 0..p {
                mean[i] += wt * g[i];
                for j in 0..p {
                    outer[i * p + j] += wt * g[i] * g[j];
                }
            }
        }
    }
    let pi = std::f64::consts::PI;
    if centre {
        for i in 0..p {
            for j in 0..p {
                outer[i * p + j] -= mean[i] * mean[j] / pi;
            }
        }
    }
    outer.iter().map(|v| v / (2.0 * pi)).collect()
}
