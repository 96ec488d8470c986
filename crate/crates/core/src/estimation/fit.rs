use serde::Serialize;

use super::optimize::{golden_section, nelder_mead_projected, Budget, Minimum};
use crate::error::{Error, Result};
use crate::likelihood::{periodogram, profiled_exact_nll, profiled_whittle, Periodogram, Profiled};
use crate::series::SeriesSample;
use crate::spectral_models::{ParamBox, SpectralModel, Theta};

pub const FIT_TOLERANCE: f64 = 1e-6;
pub const MAX_EVALUATIONS: usize = 10_000;
pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Exact,
    Whittle,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Exact => "exact",
            Objective::Whittle => "whittle",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: Theta<f64>,
    /// Profiled objective at `theta_hat`.
    pub objective: f64,
    /// Scale estimate implied by the profiled objective at `theta_hat`.
    pub sigma2_hat: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub boundary_hit: Vec<bool>,
}

impl FitResult {
    pub fn any_boundary_hit(&self) -> bool {
        self.boundary_hit.iter().any(|&b| b)
    }
}

/// Profiled objective evaluator with the data-dependent work done once.
pub struct ObjectiveFn<'a> {
    kind: Objective,
    model: &'a SpectralModel<f64>,
    series: &'a SeriesSample<f64>,
    pg: Option<Periodogram<f64>>,
}

impl<'a> ObjectiveFn<'a> {
    pub fn new(kind: Objective, model: &'a SpectralModel<f64>, series: &'a SeriesSample<f64>) -> Result<Self> {
        series.require_estimable()?;
        let pg = match kind {
            Objective::Whittle => Some(periodogram(series)?),
            Objective::Exact => None,
        };
        Ok(Self { kind, model, series, pg })
    }

    pub fn kind(&self) -> Objective {
        self.kind
    }

    pub fn eval(&self, values: &[f64]) -> Result<Profiled<f64>> {
        let theta = Theta::new(values.to_vec(), self.model.bounds().clone())?;
        match &self.pg {
            Some(pg) => profiled_whittle(self.model, &theta, pg),
            None => profiled_exact_nll(self.model, &theta, self.series),
        }
    }
}

/// Minimize the chosen profiled objective over the model's box.
///
/// One coordinate: golden-section search on three overlapping brackets
/// (lower half, interquartile, upper half) plus the two end points.
/// Several coordinates: projected Nelder–Mead from the three quartile
/// points of the box. Evaluations are capped at [`MAX_EVALUATIONS`]; hitting
/// the cap returns the best point with `converged = false`.
pub fn fit(objective: Objective, model: &SpectralModel<f64>, series: &SeriesSample<f64>) -> Result<FitResult> {
    let f = ObjectiveFn::new(objective, model, series)?;
    fit_with(&f, model.bounds())
}

/// As [`fit`], restricted to a caller-supplied box (which must lie inside the
/// model's own box).
pub fn fit_in_box(
    objective: Objective,
    model: &SpectralModel<f64>,
    series: &SeriesSample<f64>,
    bounds: &ParamBox<f64>,
) -> Result<FitResult> {
    if bounds.dim() != model.dim()
        || !model.bounds().contains(bounds.lower())
        || !model.bounds().contains(bounds.upper())
    {
        return Err(Error::Parameter("search box must lie within the model box".into()));
    }
    let f = ObjectiveFn::new(objective, model, series)?;
    fit_with(&f, bounds)
}

pub fn fit_with(f: &ObjectiveFn<'_>, bounds: &ParamBox<f64>) -> Result<FitResult> {
    let lower = bounds.lower();
    let upper = bounds.upper();
    if lower.iter().zip(upper).any(|(l, u)| !(u > l)) {
        return Err(Error::Parameter("search box is degenerate".into()));
    }
    let mut last_err: Option<Error> = None;
    let mut raw = |x: &[f64]| match f.eval(x) {
        Ok(p) => p.value,
        Err(e) => {
            last_err = Some(e);
            f64::INFINITY
        }
    };
    let mut budget = Budget::new(&mut raw, MAX_EVALUATIONS);
    let p = lower.len();
    let quartile = |q: f64| -> Vec<f64> { (0..p).map(|i| lower[i] + q * (upper[i] - lower[i])).collect() };

    let mut best: Option<Minimum> = None;
    let mut all_converged = true;
    let consider = |m: Minimum, best: &mut Option<Minimum>| {
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            *best = Some(m);
        }
    };
    if p == 1 {
        let (lo, hi) = (lower[0], upper[0]);
        let (q1, q2, q3) = (quartile(0.25)[0], quartile(0.5)[0], quartile(0.75)[0]);
        for (a, b) in [(lo, q2), (q1, q3), (q2, hi)] {
            let m = golden_section(&mut budget, a, b, FIT_TOLERANCE);
            all_converged &= m.converged;
            consider(m, &mut best);
        }
        for x in [lo, hi] {
            let value = budget.eval(&[x]);
            consider(Minimum { x: vec![x], value, evaluations: 1, converged: true }, &mut best);
        }
    } else {
        for q in [0.25, 0.5, 0.75] {
            let m = nelder_mead_projected(&mut budget, &quartile(q), lower, upper, FIT_TOLERANCE);
            all_converged &= m.converged;
            consider(m, &mut best);
        }
    }
    let evaluations = budget.used;
    let exhausted = budget.exhausted();
    drop(budget);
    let best = best.expect("at least one start");
    if !best.value.is_finite() {
        return Err(last_err.unwrap_or_else(|| Error::InvalidInput("objective is not finite anywhere".into())));
    }
    let mut x = best.x;
    bounds.clamp(&mut x);
    let at = f.eval(&x)?;
    let boundary_hit = (0..p)
        .map(|i| (x[i] - lower[i]).abs() <= BOUNDARY_TOL || (upper[i] - x[i]).abs() <= BOUNDARY_TOL)
        .collect();
    Ok(FitResult {
        theta_hat: Theta::new(x, f.model.bounds().clone())?,
        objective: at.value,
        sigma2_hat: at.sigma2,
        evaluations,
        converged: all_converged && !exhausted,
        boundary_hit,
    })
}
