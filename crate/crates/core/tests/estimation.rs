mod common;

use longmem::estimation::{fit, fit_in_box, fit_with, mc_normality, Objective, ObjectiveFn};
use longmem::seed::stream_seed;
use longmem::simulation::{plan_embedding, sample_path};
use longmem::{ParamBox, SeriesSample, SpectralModel64};

fn paths(d: f64, n: usize, master: u64, reps: usize) -> (SpectralModel64, Vec<SeriesSample<f64>>) {
    let m = SpectralModel64::arfima0d0(1.0).unwrap();
    let g = m.autocovariance(&m.theta(&[d]).unwrap(), n - 1).unwrap();
    let plan = plan_embedding(&g, n).unwrap();
    let s = (0..reps).map(|i| sample_path(&plan, n, stream_seed(master, n as u64, i as u64)).unwrap()).collect();
    (m, s)
}

#[test]
fn whittle_estimate_in_range_for_most_seeds() {
    let (m, series) = paths(0.3, 1024, 1, 200);
    let hits = series
        .iter()
        .filter(|s| (0.2..=0.4).contains(&fit(Objective::Whittle, &m, s).unwrap().theta_hat.d()))
        .count();
    assert!(hits >= 190, "{hits} of 200");
}

#[test]
fn exact_estimate_in_range_for_most_seeds() {
    let (m, series) = paths(0.3, 1024, 2, 40);
    let hits = series
        .iter()
        .filter(|s| (0.2..=0.4).contains(&fit(Objective::Exact, &m, s).unwrap().theta_hat.d()))
        .count();
    assert!(hits >= 38, "{hits} of 40");
}

#[test]
fn argmin_invariant_under_scaling() {
    let (m, series) = paths(0.25, 512, 3, 4);
    for s in &series {
        for obj in [Objective::Whittle, Objective::Exact] {
            let base = fit(obj, &m, s).unwrap();
            for c in [0.5, 2.0, 8.0] {
                let r = fit(obj, &m, &s.scaled(c)).unwrap();
                assert_eq!(r.theta_hat.values(), base.theta_hat.values(), "{obj:?} c={c}");
            }
        }
    }
}

#[test]
fn refit_from_estimate_is_stable() {
    let (m, series) = paths(0.3, 512, 4, 3);
    for s in &series {
        let r = fit(Objective::Whittle, &m, s).unwrap();
        let d = r.theta_hat.d();
        let b = m.bounds();
        let local = ParamBox::new(
            b.names().to_vec(),
            vec![(d - 0.01).max(b.lower()[0])],
            vec![(d + 0.01).min(b.upper()[0])],
        )
        .unwrap();
        let again = fit_in_box(Objective::Whittle, &m, s, &local).unwrap();
        assert!((again.theta_hat.d() - d).abs() < 2e-6, "{d} {}", again.theta_hat.d());
        assert!(again.objective <= r.objective + 1e-12);
    }
}

#[test]
fn optimizer_beats_grid_for_both_objectives() {
    let (m, series) = paths(0.15, 256, 5, 2);
    for s in &series {
        for obj in [Objective::Whittle, Objective::Exact] {
            let f = ObjectiveFn::new(obj, &m, s).unwrap();
            let r = fit_with(&f, m.bounds()).unwrap();
            let grid = (0..100)
                .map(|i| f.eval(&[0.01 + 0.48 * i as f64 / 99.0]).unwrap().value)
                .fold(f64::INFINITY, f64::min);
            assert!(r.objective <= grid + 1e-6);
            assert_eq!(f.eval(r.theta_hat.values()).unwrap().value, r.objective);
        }
    }
}

#[test]
fn exact_is_not_less_efficient_than_whittle() {
    let (m, series) = paths(0.3, 1024, 6, 300);
    let var = |v: &[f64]| {
        let mu = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    let exact: Vec<f64> = series.iter().map(|s| fit(Objective::Exact, &m, s).unwrap().theta_hat.d()).collect();
    let whittle: Vec<f64> = series.iter().map(|s| fit(Objective::Whittle, &m, s).unwrap().theta_hat.d()).collect();
    let (ve, vw) = (var(&exact), var(&whittle));
    assert!(ve <= 1.15 * vw, "exact {ve} whittle {vw}");
}

#[test]
fn squared_error_falls_with_n() {
    let m = SpectralModel64::arfima0d0(1.0).unwrap();
    let th = m.theta(&[0.3]).unwrap();
    let w = mc_normality(&m, &th, &[512, 2048], 100, 7, Objective::Whittle).unwrap();
    assert!(w.summaries[1].mse < w.summaries[0].mse, "{} {}", w.summaries[1].mse, w.summaries[0].mse);
    let e = mc_normality(&m, &th, &[256, 1024], 100, 7, Objective::Exact).unwrap();
    assert!(e.summaries[1].mse < e.summaries[0].mse, "{} {}", e.summaries[1].mse, e.summaries[0].mse);
}

#[test]
fn standardized_mean_near_zero() {
    let m = SpectralModel64::arfima0d0(1.0).unwrap();
    let th = m.theta(&[0.3]).unwrap();
    let reps = 400;
    let r = mc_normality(&m, &th, &[1024], reps, 8, Objective::Whittle).unwrap();
    let bound = 3.0 / (reps as f64).sqrt() * 1.1;
    assert!(r.summaries[0].mean[0].abs() <= bound, "{} > {bound}", r.summaries[0].mean[0]);
}

#[test]
fn white_noise_median_near_lower_edge() {
    let m = SpectralModel64::arfima0d0(1.0).unwrap();
    let n = 1024;
    let mut g = vec![0.0; n];
    g[0] = 1.0;
    let plan = plan_embedding(&longmem::AutocovSequence::from_values(g).unwrap(), n).unwrap();
    let mut d: Vec<f64> = (0..51)
        .map(|i| fit(Objective::Whittle, &m, &sample_path(&plan, n, stream_seed(9, 0, i)).unwrap()).unwrap().theta_hat.d())
        .collect();
    d.sort_by(f64::total_cmp);
    assert!(d[25] - m.bounds().lower()[0] <= 0.05, "median {}", d[25]);
}
