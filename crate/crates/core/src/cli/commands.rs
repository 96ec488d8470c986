use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::output::{OutputDir, RunConfig};
use super::*;
use crate::condition_checker::{alpha_continuity_scan, counterexample_scan, divergence_test, mesh, sup_constant_estimate};
use crate::equicontinuity_lab::{d_grid, equicontinuity_mc, z_profile, EquicontConfig};
use crate::estimation::{fisher_matrix_with, fit, mc_normality as run_mc, FisherOptions};
use crate::series::{fmt_f64, read_series_csv, SeriesSample};
use crate::simulation::{plan_embedding, sample_path};
use crate::spectral_models::{ModelSpecFile, SpectralModel, Theta};

struct Loaded {
    spec: ModelSpecFile,
    model: SpectralModel<f64>,
    theta: Theta<f64>,
}

fn load(path: &Path, theta: Option<&[f64]>) -> Result<Loaded, CliError> {
    let spec = ModelSpecFile::load(path)?;
    from_spec(spec, theta)
}

fn from_spec(spec: ModelSpecFile, theta: Option<&[f64]>) -> Result<Loaded, CliError> {
    let (model, nominal) = spec.build::<f64>()?;
    let theta = match theta {
        Some(v) => {
            if v.len() != model.dim() {
                return Err(CliError::Usage(format!(
                    "--theta has {} values, model has {} coordinates ({})",
                    v.len(),
                    model.dim(),
                    model.bounds().names().join(", ")
                )));
            }
            model.theta(v)?
        }
        None => nominal,
    };
    Ok(Loaded { spec, model, theta })
}

fn names(model: &SpectralModel<f64>) -> Vec<String> {
    model.bounds().names().to_vec()
}

fn matrix_rows(flat: &[f64], p: usize) -> Vec<Vec<f64>> {
    flat.chunks(p).map(|c| c.to_vec()).collect()
}

pub fn simulate(a: &SimulateArgs) -> Result<String, CliError> {
    let m = load(&a.model, a.theta.as_deref())?;
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let out = OutputDir::prepare(&a.common, &["series.csv", "series.json"])?;
    let gamma = m.model.autocovariance(&m.theta, a.n - 1)?;
    let plan = plan_embedding(&gamma, a.n)?;
    let s = sample_path(&plan, a.n, a.seed)?;
    let csv = out.write_series("series.csv", s.values())?;
    out.write_json(
        "series.json",
        &json!({
            "run_config": RunConfig::new("simulate", Some(&a.model), Some(&m.spec), a),
            "model": m.spec,
            "theta_names": names(&m.model),
            "theta": m.theta.values(),
            "n": a.n,
            "seed": a.seed,
            "embedding_size": plan.m(),
            "clamped": plan.clamped(),
        }),
    )?;
    Ok(format!("simulate: wrote {} values to {} (clamped {})", a.n, csv.display(), plan.clamped()))
}

pub fn estimate(a: &EstimateArgs) -> Result<String, CliError> {
    let m = load(&a.model, None)?;
    let file = std::fs::File::open(&a.series).map_err(|e| CliError::Lib(e.into()))?;
    let x = read_series_csv(std::io::BufReader::new(file))?;
    let mut series = SeriesSample::observed(x)?;
    if let Some(mu) = a.known_mean {
        series = series.with_known_mean(mu);
    }
    let out = OutputDir::prepare(&a.common, &["fit.json"])?;
    let r = fit(a.objective, &m.model, &series)?;
    let path = out.write_json(
        "fit.json",
        &json!({
            "run_config": RunConfig::new("estimate", Some(&a.model), Some(&m.spec), a),
            "objective_kind": a.objective,
            "n": series.len(),
            "theta_names": names(&m.model),
            "theta_hat": r.theta_hat.values(),
            "objective": r.objective,
            "sigma2_hat": r.sigma2_hat,
            "evaluations": r.evaluations,
            "converged": r.converged,
            "boundary_hit": r.boundary_hit,
        }),
    )?;
    if !r.converged {
        return Err(CliError::Numeric(format!(
            "optimizer did not converge within {} evaluations; best point written to {}",
            r.evaluations,
            path.display()
        )));
    }
    Ok(format!(
        "estimate: {} theta_hat = {:?} objective = {} ({} evaluations)",
        a.objective.name(),
        r.theta_hat.values(),
        fmt_f64(r.objective),
        r.evaluations
    ))
}

pub fn fisher(a: &FisherArgs) -> Result<String, CliError> {
    let m = load(&a.model, a.theta.as_deref())?;
    let out = OutputDir::prepare(&a.common, &["fisher.json"])?;
    let f = fisher_matrix_with(&m.model, &m.theta, FisherOptions { order: a.order, profile_scale: a.profile_scale })?;
    out.write_json(
        "fisher.json",
        &json!({
            "run_config": RunConfig::new("fisher", Some(&a.model), Some(&m.spec), a),
            "theta_names": names(&m.model),
            "theta": m.theta.values(),
            "gamma_mat": matrix_rows(&f.gamma_mat, f.dim),
            "inverse": matrix_rows(&f.inverse, f.dim),
        }),
    )?;
    Ok(format!("fisher: gamma_mat = {:?}", matrix_rows(&f.gamma_mat, f.dim)))
}

#[derive(Serialize)]
struct WitnessOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u64>,
    theta: Vec<f64>,
    theta_prime: Vec<f64>,
    log_x: f64,
}

pub fn check_a9(a: &CheckA9Args) -> Result<String, CliError> {
    let m = load(&a.model, None)?;
    let out = OutputDir::prepare(&a.common, &["check_a9.csv", "check_a9.json"])?;
    let base = m.theta.with_coordinate(0, a.d_prime)?;
    if a.n.0 < 1 || a.theta_points < 1 {
        return Err(CliError::Usage("--n values and --theta-points must be at least 1".into()));
    }
    let mut grid = vec![base.clone()];
    for n in log_spaced(a.n.0, a.n.1, a.theta_points) {
        grid.push(base.with_coordinate(0, a.d_prime - 1.0 / (2.0 * n as f64))?);
    }
    let log_x: Vec<f64> = (a.n.0..=a.n.1).map(|n| -(n as f64) * (n as f64).ln()).collect();
    let est = sup_constant_estimate(&m.model, &grid, &log_x)?;
    let b = m.model.bounds();
    let alpha_grid = d_grid(&m.theta, &mesh(b.lower()[0], b.upper()[0], a.alpha_step))?;
    let modulus = alpha_continuity_scan(&m.model, &alpha_grid, a.alpha_step)?;
    let rows: Vec<Vec<String>> = (a.n.0..=a.n.1)
        .zip(&est.per_log_x)
        .map(|(n, &(lx, r))| vec![n.to_string(), fmt_f64(lx), fmt_f64(r)])
        .collect();
    out.write_csv("check_a9.csv", &header(&["n", "log_x", "ratio"]), &rows)?;
    out.write_json(
        "check_a9.json",
        &json!({
            "run_config": RunConfig::new("check-a9", Some(&a.model), Some(&m.spec), a),
            "divergence": est.divergence,
            "best_C": est.best_c,
            "witness": est.witness.as_ref().map(|w| WitnessOut {
                n: None,
                theta: w.theta.clone(),
                theta_prime: w.theta_prime.clone(),
                log_x: w.log_x,
            }),
            "pairs": est.pairs,
            "alpha_step": a.alpha_step,
            "alpha_modulus": modulus,
        }),
    )?;
    Ok(format!(
        "check-a9: best_C = {} divergence = {} alpha modulus = {}",
        fmt_f64(est.best_c),
        est.divergence,
        fmt_f64(modulus)
    ))
}

/// Up to `k` distinct integers spread geometrically over `lo..=hi`.
fn log_spaced(lo: u64, hi: u64, k: usize) -> Vec<u64> {
    if k == 1 || lo == hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<u64> =
        (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp().round() as u64).map(|n| n.clamp(lo, hi)).collect();
    v.dedup();
    v
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn counterexample(a: &CounterexampleArgs) -> Result<String, CliError> {
    let m = match &a.model {
        Some(p) => load(p, None)?,
        None => from_spec(ModelSpecFile::from_json(r#"{"family":"generic","params":{"d":0.3}}"#)?, None)?,
    };
    let out = OutputDir::prepare(&a.common, &["counterexample.csv", "counterexample.json"])?;
    let rows = counterexample_scan(&m.model, a.d_prime, a.n.0..=a.n.1)?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.log_x, r.ratio)).collect();
    let divergence = divergence_test(&pts);
    let best = rows.iter().max_by(|x, y| x.ratio.total_cmp(&y.ratio));
    let base = m.theta.with_coordinate(0, a.d_prime)?;
    let witness = best.map(|r| WitnessOut {
        n: Some(r.n),
        theta: {
            let mut v = base.values().to_vec();
            v[0] = a.d_prime - 1.0 / (2.0 * r.n as f64);
            v
        },
        theta_prime: base.values().to_vec(),
        log_x: r.log_x,
    });
    let table: Vec<Vec<String>> =
        rows.iter().map(|r| vec![r.n.to_string(), fmt_f64(r.log_x), fmt_f64(r.ratio)]).collect();
    out.write_csv("counterexample.csv", &header(&["n", "log_x", "ratio"]), &table)?;
    let best_c = best.map_or(0.0, |r| r.ratio);
    out.write_json(
        "counterexample.json",
        &json!({
            "run_config": RunConfig::new("counterexample", a.model.as_deref(), Some(&m.spec), a),
            "divergence": divergence,
            "best_C": best_c,
            "witness": witness,
        }),
    )?;
    Ok(format!("counterexample: {} rows, best_C = {} divergence = {divergence}", rows.len(), fmt_f64(best_c)))
}

pub fn equicont(a: &EquicontArgs) -> Result<String, CliError> {
    let m = load(&a.model, a.theta0.as_deref())?;
    if a.n.iter().any(|&n| n < 2) {
        return Err(CliError::Usage("--n values must be at least 2".into()));
    }
    let out = OutputDir::prepare(&a.common, &["equicont.csv", "equicont.json"])?;
    let config = EquicontConfig {
        n_list: a.n.clone(),
        delta_list: a.delta.clone(),
        eta: a.eta,
        grid_step: a.grid_step,
        d_range: (a.d_min, a.d_max),
        reps: a.reps,
        master_seed: a.seed,
    };
    let r = equicontinuity_mc(&m.model, &m.theta, &config)?;
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|w| {
            vec![
                w.n.to_string(),
                fmt_f64(w.delta),
                fmt_f64(w.eta),
                fmt_f64(w.p_hat),
                fmt_f64(w.half_width),
                w.reps.to_string(),
            ]
        })
        .collect();
    out.write_csv("equicont.csv", &header(&["n", "delta", "eta", "p_hat", "half_width", "reps"]), &rows)?;
    out.write_json(
        "equicont.json",
        &json!({
            "run_config": RunConfig::new("equicont", Some(&a.model), Some(&m.spec), a),
            "theta0": m.theta.values(),
            "rows": r.rows,
            "failures": r.failures,
        }),
    )?;
    let worst = r.rows.iter().map(|w| w.p_hat).fold(0.0f64, f64::max);
    Ok(format!("equicont: {} rows, max p_hat = {}", r.rows.len(), fmt_f64(worst)))
}

pub fn zprofile(a: &ZprofileArgs) -> Result<String, CliError> {
    let m = load(&a.model, a.theta0.as_deref())?;
    let series = match &a.series {
        Some(p) => {
            let file = std::fs::File::open(p).map_err(|e| CliError::Lib(e.into()))?;
            SeriesSample::observed(read_series_csv(std::io::BufReader::new(file))?)?
        }
        None => {
            if a.n < 2 {
                return Err(CliError::Usage("--n must be at least 2".into()));
            }
            let gamma = m.model.autocovariance(&m.theta, a.n - 1)?;
            sample_path(&plan_embedding(&gamma, a.n)?, a.n, a.seed)?
        }
    };
    if !(a.grid_step > 0.0) || !(a.d_max > a.d_min) {
        return Err(CliError::Usage("need --grid-step > 0 and --d-max > --d-min".into()));
    }
    let out = OutputDir::prepare(&a.common, &["zprofile.csv", "zprofile.json"])?;
    let grid = d_grid(&m.theta, &mesh(a.d_min, a.d_max, a.grid_step))?;
    let p = z_profile(&m.model, &grid, &series)?;
    let rows: Vec<Vec<String>> =
        p.theta_grid.iter().zip(&p.z_values).map(|(t, z)| vec![fmt_f64(t[0]), fmt_f64(*z)]).collect();
    out.write_csv("zprofile.csv", &header(&["d", "z"]), &rows)?;
    out.write_json(
        "zprofile.json",
        &json!({
            "run_config": RunConfig::new("zprofile", Some(&a.model), Some(&m.spec), a),
            "theta0": m.theta.values(),
            "n": p.n,
            "seed": p.seed,
            "grid_points": p.z_values.len(),
        }),
    )?;
    Ok(format!("zprofile: {} grid points, N = {}", p.z_values.len(), p.n))
}

pub fn mc_normality(a: &McNormalityArgs) -> Result<String, CliError> {
    let m = load(&a.model, a.theta0.as_deref())?;
    if a.n.iter().any(|&n| n < crate::series::MIN_ESTIMATION_LEN) {
        return Err(CliError::Usage(format!("--n values must be at least {}", crate::series::MIN_ESTIMATION_LEN)));
    }
    let out = OutputDir::prepare(&a.common, &["mc_normality.csv", "mc_normality.json"])?;
    let report = run_mc(&m.model, &m.theta, &a.n, a.reps, a.seed, a.objective)?;
    let nm = names(&m.model);
    let mut head = header(&["n", "replicate", "seed"]);
    head.extend(nm.iter().map(|s| format!("theta_hat_{s}")));
    head.extend(nm.iter().map(|s| format!("z_{s}")));
    head.extend(header(&["converged", "boundary_hit", "error"]));
    let rows: Vec<Vec<String>> = report
        .replicates
        .iter()
        .map(|r| {
            let mut row = vec![r.n.to_string(), r.replicate.to_string(), r.seed.to_string()];
            row.extend(r.theta_hat.iter().map(|&v| fmt_f64(v)));
            row.extend(r.standardized.iter().map(|&v| fmt_f64(v)));
            row.push(r.converged.to_string());
            row.push(r.boundary_hit.to_string());
            row.push(r.error.clone().unwrap_or_default());
            row
        })
        .collect();
    out.write_csv("mc_normality.csv", &head, &rows)?;
    out.write_json(
        "mc_normality.json",
        &json!({
            "run_config": RunConfig::new("mc-normality", Some(&a.model), Some(&m.spec), a),
            "theta_names": nm,
            "report": report,
        }),
    )?;
    let s: Vec<String> = report
        .summaries
        .iter()
        .map(|s| format!("N={} mse={} max_decile_dev={}", s.n, fmt_f64(s.mse), fmt_f64(s.max_decile_deviation)))
        .collect();
    Ok(format!("mc-normality: {}", s.join("; ")))
}
