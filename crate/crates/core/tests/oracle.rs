mod common;

use chainlab::deterministic::DeterministicSolver;
use chainlab::lab::coupling_gap;
use chainlab::oracle::{euler_step, integrate, ChainConfig, ChainState, ChainSystem};
use chainlab::stochastic::OuScheme;
use chainlab::{BrownianDriver, FieldGrid};
use common::{moments, within_se};

#[test]
fn noiseless_euler_tracks_the_spectral_profile() {
    let d = 8;
    let cfg = ChainConfig { d, sigma: 0.0, system: ChainSystem::Pulled { epsilon: 1.0 } };
    let step = 1e-6 / (d * d) as f64;
    let t = 0.1;
    let steps = (t / step).round() as usize;
    let zero = vec![0.0; d - 1];
    let mut s = ChainState::initial(&cfg);
    for _ in 0..steps {
        s = euler_step(&s, &cfg, &zero, step).unwrap();
    }
    let exact = DeterministicSolver::new(1.0, d).unwrap().profile(steps as f64 * step).unwrap();
    assert!(common::max_abs_diff(&s.positions, &exact) <= 1e-4);
}

#[test]
fn homogeneous_gap_halves_with_the_step() {
    let cfg = ChainConfig { d: 8, sigma: 1.0, system: ChainSystem::Homogeneous };
    let mut e = [0.0; 3];
    for r in 0..8 {
        let fine = BrownianDriver::new(500 + r, 7, 4096, 1.0).unwrap();
        for (m, factor) in [4, 2, 1].into_iter().enumerate() {
            e[m] += coupling_gap(&cfg, &fine.coarsen(factor).unwrap(), OuScheme::ExactStep).unwrap();
        }
    }
    for w in e.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..=2.4).contains(&ratio), "{e:?}");
    }
}

fn run(sigma: f64, system: ChainSystem, drv: &BrownianDriver) -> ndarray::Array2<f64> {
    let grid = FieldGrid::nodes(drv.horizon(), 8).unwrap();
    integrate(&ChainConfig { d: 8, sigma, system }, drv, &grid).unwrap().values
}

#[test]
fn superposition_and_linearity() {
    let drv = BrownianDriver::new(31, 7, 1024, 1.0).unwrap();
    let pulled = ChainSystem::Pulled { epsilon: 1.5 };
    let mean = run(0.0, pulled, &drv);
    let one = run(1.0, pulled, &drv);
    let two = run(2.0, pulled, &drv);
    let homog = run(1.0, ChainSystem::Homogeneous, &drv);
    let sum = &mean + &homog;
    let worst = one.iter().zip(sum.iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(worst <= 1e-12, "{worst:e}");
    let lin = (&two - &mean) - 2.0 * (&one - &mean);
    assert!(lin.iter().all(|x| x.abs() <= 1e-12));
}

#[test]
fn pulled_chain_mean_is_the_deterministic_profile() {
    let (d, horizon, steps) = (8, 0.5, 2048);
    let grid = FieldGrid::nodes(horizon, d).unwrap();
    let cfg = ChainConfig { d, sigma: 1.0, system: ChainSystem::Pulled { epsilon: 1.0 } };
    let xs: Vec<f64> = (0..10_000)
        .map(|r| {
            let drv = BrownianDriver::new(300_000 + r, d - 1, steps, horizon).unwrap();
            integrate(&cfg, &drv, &grid).unwrap().at(4, 3)
        })
        .collect();
    let s = moments(&xs);
    let target = DeterministicSolver::new(1.0, d).unwrap().delta_spectral(grid.time(4), 3).unwrap();
    within_se(s.mean, target, s.mean_se, 3.0).unwrap();
}
