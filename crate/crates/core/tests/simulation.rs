use longmem::simulation::{plan_embedding, sample_path, sample_replicates};
use longmem::SpectralModel64;
use proptest::prelude::*;

#[test]
fn replicates_do_not_depend_on_thread_count() {
    let m = SpectralModel64::fgn(1.0).unwrap();
    let g = m.autocovariance(&m.theta_from_hurst(0.8).unwrap(), 127).unwrap();
    let plan = plan_embedding(&g, 128).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_replicates(&plan, 128, 11, 17).unwrap())
    };
    let a = run(1);
    let b = run(3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.values(), y.values());
    }
}

#[test]
fn empirical_variance_of_long_path_components() {
    // lag-0 and lag-1 moments over many short paths, within 5 standard errors
    let m = SpectralModel64::arfima0d0(1.0).unwrap();
    let th = m.theta(&[0.35]).unwrap();
    let g = m.autocovariance(&th, 7).unwrap();
    let plan = plan_embedding(&g, 8).unwrap();
    let reps = 20_000;
    let paths = sample_replicates(&plan, 8, 5, reps).unwrap();
    let c01: f64 = paths.iter().map(|p| p.values()[0] * p.values()[1]).sum::<f64>() / reps as f64;
    let se = ((g.gamma()[0].powi(2) + g.gamma()[1].powi(2)) / reps as f64).sqrt();
    assert!((c01 - g.gamma()[1]).abs() < 5.0 * se, "{c01} {}", g.gamma()[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn paths_are_deterministic_and_embeddable(h in 0.5f64..0.99, n in 2usize..300, seed in any::<u64>()) {
        let m = SpectralModel64::fgn(1.0).unwrap().with_d_bounds(0.0, 0.49).unwrap();
        let g = m.autocovariance(&m.theta_from_hurst(h).unwrap(), n - 1).unwrap();
        let plan = plan_embedding(&g, n).unwrap();
        prop_assert_eq!(plan.clamped(), 0);
        prop_assert!(plan.m() >= 2 * (n - 1));
        let a = sample_path(&plan, n, seed).unwrap();
        let b = sample_path(&plan, n, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert!(a.values().iter().all(|v| v.is_finite()));
    }
}
