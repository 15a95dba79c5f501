use std::f64::consts::PI;

use chainlab::config::ExperimentConfig;
use chainlab::deterministic::{DeterministicSolver, ContinuumProfile};
use chainlab::lab::split_distance;
use chainlab::spectral::{apply_laplacian, TransformMethod};
use chainlab::stochastic::{ou_exact_variance, scheme_covariance, OuScheme};
use chainlab::{BrownianDriver, FieldGrid, SpectralBasis};
use proptest::prelude::*;

fn vector(max: usize) -> impl Strategy<Value = Vec<f64>> {
    (3usize..max).prop_flat_map(|n| prop::collection::vec(-10.0..10.0f64, n - 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_lie_in_the_open_band(d in 2usize..400) {
        let b = SpectralBasis::new(d).unwrap();
        let ev = b.eigenvalues();
        prop_assert!(ev.iter().all(|&l| l < 0.0 && l > -4.0));
        prop_assert!(ev.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn eigenpairs_satisfy_the_laplacian(d in 2usize..120, k in 1usize..119) {
        prop_assume!(k < d);
        let b = SpectralBasis::new(d).unwrap();
        let f: Vec<f64> = (1..d).map(|m| b.eigenvector(k, m)).collect();
        let af = apply_laplacian(&f);
        for (x, y) in af.iter().zip(&f) {
            prop_assert!((x - b.eigenvalue(k) * y).abs() < 1e-12);
        }
    }

    #[test]
    fn transforms_round_trip(x in vector(300)) {
        let d = x.len() + 1;
        for method in [TransformMethod::Direct, TransformMethod::Fast] {
            let b = SpectralBasis::new(d).unwrap().with_method(method);
            let back = b.transform_inverse(&b.transform_forward(&x).unwrap()).unwrap();
            for (a, c) in x.iter().zip(&back) {
                prop_assert!((a - c).abs() < 1e-10);
            }
            // orthogonality keeps the Euclidean norm
            let n0: f64 = x.iter().map(|v| v * v).sum();
            let n1: f64 = b.transform_forward(&x).unwrap().iter().map(|v| v * v).sum();
            prop_assert!((n0 - n1).abs() <= 1e-10 * n0.max(1.0));
        }
    }

    #[test]
    fn lattice_series_matches_direct_sum(d in 2usize..40, coeffs in prop::collection::vec(-1.0..1.0f64, 1..200)) {
        let b = SpectralBasis::new(d).unwrap().with_method(TransformMethod::Fast);
        let y = b.lattice_series(&coeffs).unwrap();
        for (m, ym) in y.iter().enumerate() {
            let direct: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((k + 1) as f64 * m as f64 * PI / d as f64).sin())
                .sum();
            prop_assert!((ym - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn discrete_profile_boundaries(eps in 0.0..5.0f64, d in 2usize..64, t in 0.0..3.0f64) {
        let p = DeterministicSolver::new(eps, d).unwrap().profile(t).unwrap();
        prop_assert_eq!(p[0], 0.0);
        prop_assert!((p[d] - 1.0 - eps * t).abs() < 1e-12);
        // the profile sits between the two straight lines it interpolates
        for (i, x) in p.iter().enumerate() {
            let v = i as f64 / d as f64;
            prop_assert!(*x <= v * (1.0 + eps * t) + 1e-12 && *x >= v - 1e-12);
        }
    }

    #[test]
    fn continuum_profile_boundaries(eps in 0.0..5.0f64, t in 0.0..3.0f64) {
        let p = ContinuumProfile::new(eps, 64).unwrap();
        prop_assert_eq!(p.value(t, 0.0).unwrap(), 0.0);
        prop_assert!((p.value(t, 1.0).unwrap() - 1.0 - eps * t).abs() < 1e-12);
    }

    #[test]
    fn scheme_coefficients(a in 1e-3..1e5f64, delta in 1e-7..1e-1f64) {
        for scheme in [OuScheme::ExactStep, OuScheme::LeftEndpoint] {
            let (decay, gain) = scheme.coefficients(a, delta);
            prop_assert!((0.0..1.0).contains(&decay));
            prop_assert!((0.0..=1.0).contains(&gain));
        }
        prop_assert!(OuScheme::ExactStep.coefficients(a, delta).1 > 0.0);
        // the exact step reproduces the transition variance on every node
        let n = 7;
        let exact = ou_exact_variance(a, n as f64 * delta).unwrap();
        let stepped = scheme_covariance(a, a, n, delta, OuScheme::ExactStep);
        prop_assert!((exact - stepped).abs() <= 1e-10 * exact);
    }

    #[test]
    fn rounding_maps_bracket_their_argument(d in 2usize..200, horizon in 0.1..5.0f64, t in 0.0..1.0f64, v in 0.0..1.0f64) {
        let g = FieldGrid::new(horizon, d, 4).unwrap();
        let t = t * horizon;
        let th = g.t_hat(t);
        prop_assert!(th <= t + 1e-12 && t < th + horizon / (d as f64) + 1e-12);
        let vh = g.v_hat(v);
        prop_assert!(vh >= v - 1e-12 && vh - 1.0 / (d as f64) < v + 1e-12);
        for i in 0..=d {
            prop_assert_eq!(g.v_hat_index(g.refined_index(i)), i);
            prop_assert_eq!(g.floor_index(g.refined_index(i)), i);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn triangle_inequality_on_every_path(seed in any::<u64>(), d in 2usize..24, sigma in 0.1..3.0f64) {
        let drv = BrownianDriver::new(seed, 48, 48 * 16, 1.0).unwrap();
        let grid = FieldGrid::new(1.0, d, 4).unwrap();
        prop_assume!(drv.n_steps() % (d * 4) == 0);
        let s = split_distance(&drv, &SpectralBasis::new(d).unwrap(), 48, sigma, &grid).unwrap();
        prop_assert!(s.triangle_holds());
    }

    #[test]
    fn config_survives_a_toml_round_trip(
        seed in any::<u64>(),
        eps in 0.0..4.0f64,
        sigma in 0.0..4.0f64,
        reps in 1usize..5000,
        workers in 0usize..16,
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.seed = seed;
        cfg.experiment.replications = reps;
        cfg.experiment.workers = workers;
        cfg.model.epsilon = eps;
        cfg.model.sigma = sigma;
        let text = cfg.to_toml_string().unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
