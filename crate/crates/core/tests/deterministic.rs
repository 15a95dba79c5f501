mod common;

use std::f64::consts::{PI, SQRT_2};

use approx::assert_abs_diff_eq;
use chainlab::deterministic::{
    d_continuum, delta_discrete_matrix, delta_discrete_spectral, fast_solver, fourier_coeff, h_continuum,
    node_sup_error, ContinuumProfile, DeterministicParams, DeterministicSolver,
};
use chainlab::spectral::sin_pi;
use common::{integrate, rk4_mean_chain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn h_at_half() {
    assert_eq!(h_continuum(0.5).unwrap(), -1.0 / 16.0);
}

#[test]
fn fourier_coefficients_match_quadrature() {
    for k in 1..=12 {
        let f = |v: f64| h_continuum(v).unwrap() * SQRT_2 * sin_pi(k as f64 * v);
        let q = integrate(&f, 0.0, 1.0, 1e-13);
        assert_abs_diff_eq!(fourier_coeff(k), q, epsilon = 1e-11);
    }
    assert_abs_diff_eq!(fourier_coeff(1), -SQRT_2 / PI.powi(3), epsilon = 1e-16);
}

#[test]
fn sine_series_of_h() {
    let v = 0.3;
    let partial: f64 = (1..=200).map(|k| fourier_coeff(k) * SQRT_2 * sin_pi(k as f64 * v)).sum();
    assert!((partial - h_continuum(v).unwrap()).abs() <= 1e-5);
    assert!((partial - h_continuum(v).unwrap()).abs() <= 1.0 / (PI.powi(3) * 200.0 * 200.0));
}

#[test]
fn matrix_and_spectral_forms_agree_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let d = rng.random_range(2..=32);
        let t = rng.random_range(0.0..=1.0);
        let i = rng.random_range(0..=d);
        let eps = rng.random_range(0.0..3.0);
        let p = DeterministicParams::new(eps, d, 200).unwrap();
        let a = delta_discrete_matrix(&p, t, i).unwrap();
        let b = delta_discrete_spectral(&p, t, i).unwrap();
        assert!((a - b).abs() <= 1e-12, "d {d} t {t} i {i}: {a} vs {b}");
    }
}

#[test]
fn runge_kutta_oracle() {
    let solver = DeterministicSolver::new(1.0, 8).unwrap();
    for t in [0.01, 0.1, 0.5, 1.0] {
        let ode = rk4_mean_chain(1.0, 8, t, 2e-5);
        for i in 0..=8 {
            assert!((solver.delta_matrix(t, i).unwrap() - ode[i]).abs() <= 1e-6, "t {t} i {i}");
            assert!((solver.delta_spectral(t, i).unwrap() - ode[i]).abs() <= 1e-6);
        }
    }
    let p = DeterministicParams::new(1.0, 8, 200).unwrap();
    assert!((delta_discrete_matrix(&p, 0.1, 4).unwrap() - delta_discrete_spectral(&p, 0.1, 4).unwrap()).abs() <= 1e-12);
}

#[test]
fn long_time_limit() {
    let solver = DeterministicSolver::new(1.0, 8).unwrap();
    let t = 50.0;
    for i in 1..8 {
        let hi = (i as f64 / 48.0) * ((i * i) as f64 - 64.0);
        let limit = i as f64 / 8.0 * (t + 1.0) + hi / 64.0;
        assert!((solver.delta_spectral(t, i).unwrap() - limit).abs() <= 1e-10);
    }
}

#[test]
fn continuum_initial_and_boundary_values() {
    let profile = ContinuumProfile::new(1.0, 200).unwrap();
    for n in 1..=9 {
        let v = n as f64 / 10.0;
        assert!((profile.value(0.0, v).unwrap() - v).abs() <= 1e-5);
    }
    for t in [0.0, 0.3, 1.0, 4.0] {
        assert_eq!(profile.value(t, 0.0).unwrap(), 0.0);
        assert_eq!(profile.value(t, 1.0).unwrap(), 1.0 + t);
    }
}

/// `D` solves the heat equation: central differences of the truncated
/// series in `t` and `v`.
#[test]
fn continuum_heat_residual() {
    let (dt, dv) = (1e-5, 1e-3);
    let d = |t: f64, v: f64| d_continuum(1.0, t, v, 400).unwrap();
    for t in [0.05, 0.2, 0.7] {
        for v in [0.1, 0.35, 0.5, 0.8] {
            let dt_d = (d(t + dt, v) - d(t - dt, v)) / (2.0 * dt);
            let dvv_d = (d(t, v + dv) - 2.0 * d(t, v) + d(t, v - dv)) / (dv * dv);
            assert!((dt_d - dvv_d).abs() <= 1e-2, "t {t} v {v}: {dt_d} vs {dvv_d}");
        }
    }
}

#[test]
fn discrete_to_continuum_fixture() {
    let p = DeterministicParams::new(1.0, 256, 200).unwrap();
    let a = delta_discrete_spectral(&p, 0.05, 128).unwrap();
    let b = d_continuum(1.0, 0.05, 0.5, 200).unwrap();
    assert!((a - b).abs() <= 5e-3, "{a} vs {b}");
}

#[test]
fn node_error_decreases_in_d() {
    let profile = ContinuumProfile::new(1.0, 400).unwrap();
    let errors: Vec<f64> = [8, 16, 32, 64, 128]
        .iter()
        .map(|&d| node_sup_error(&fast_solver(1.0, d).unwrap(), &profile, 1.0).unwrap())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn zero_speed_is_the_linear_profile() {
    let solver = DeterministicSolver::new(0.0, 12).unwrap();
    let p = solver.profile(0.7).unwrap();
    for (i, x) in p.iter().enumerate() {
        assert_abs_diff_eq!(*x, i as f64 / 12.0, epsilon = 1e-15);
    }
}
