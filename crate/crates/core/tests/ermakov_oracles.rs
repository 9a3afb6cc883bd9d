mod common;

use qho::ermakov::{char_residual, integrate, system_rhs, SolverConfig, SystemKind, SystemState, Trajectory};
use qho::expr::CoefficientSet;
use qho::presets::Preset;
use qho::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Vec8 = [f64; 8];

fn pack(s: &SystemState) -> Vec8 {
    [s.alpha, s.beta, s.gamma, s.delta, s.epsilon, s.kappa, s.ln_mu, s.ln_lambda]
}

fn unpack(t: f64, y: Vec8) -> SystemState {
    SystemState {
        t,
        alpha: y[0],
        beta: y[1],
        gamma: y[2],
        delta: y[3],
        epsilon: y[4],
        kappa: y[5],
        ln_mu: y[6],
        ln_lambda: y[7],
    }
}

fn rhs(coeffs: &CoefficientSet, kind: SystemKind, t: f64, y: &Vec8) -> Vec8 {
    let d = system_rhs(&unpack(t, *y), coeffs, kind).unwrap();
    [d.alpha, d.beta, d.gamma, d.delta, d.epsilon, d.kappa, d.ln_mu, d.ln_lambda]
}

fn axpy(y: &Vec8, h: f64, k: &Vec8) -> Vec8 {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// Classical fixed-step RK4 from `t = 0`.
fn rk4(coeffs: &CoefficientSet, kind: SystemKind, y0: Vec8, t_end: f64, steps: usize) -> Vec8 {
    let h = t_end / steps as f64;
    let mut y = y0;
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(coeffs, kind, t, &y);
        let k2 = rhs(coeffs, kind, t + h / 2.0, &axpy(&y, h / 2.0, &k1));
        let k3 = rhs(coeffs, kind, t + h / 2.0, &axpy(&y, h / 2.0, &k2));
        let k4 = rhs(coeffs, kind, t + h, &axpy(&y, h, &k3));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    y
}

fn max_diff(a: &Vec8, b: &Vec8) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Step-halved RK4 with Richardson extrapolation, until successive
/// extrapolants agree to `1e-10`.
fn richardson_oracle(coeffs: &CoefficientSet, kind: SystemKind, t_end: f64) -> Vec8 {
    let y0 = pack(&SystemState::default());
    let mut steps = 50;
    let mut coarse = rk4(coeffs, kind, y0, t_end, steps);
    let mut previous: Option<Vec8> = None;
    loop {
        steps *= 2;
        let fine = rk4(coeffs, kind, y0, t_end, steps);
        let extrapolated: Vec8 = std::array::from_fn(|i| (16.0 * fine[i] - coarse[i]) / 15.0);
        if let Some(p) = previous {
            if max_diff(&p, &extrapolated) < 1e-10 {
                return extrapolated;
            }
        }
        assert!(steps < 1 << 20, "oracle did not settle");
        previous = Some(extrapolated);
        coarse = fine;
    }
}

#[test]
fn caldirola_kanai_matches_rk4_oracle_at_t5() {
    let coeffs = Preset::CaldirolaKanai.coefficients();
    let oracle = richardson_oracle(&coeffs, SystemKind::Ermakov, 5.0);
    let traj = integrate(&coeffs, &SolverConfig::new(SystemKind::Ermakov), 5.0).unwrap();
    let err = max_diff(&pack(traj.last()), &oracle);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn driven_random_set_matches_rk4_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let coeffs = common::random_coefficients(&mut rng);
    let oracle = richardson_oracle(&coeffs, SystemKind::Ermakov, 3.0);
    let traj = integrate(&coeffs, &SolverConfig::new(SystemKind::Ermakov), 3.0).unwrap();
    let err = max_diff(&pack(traj.last()), &oracle);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn error_shrinks_as_tolerance_tightens() {
    let coeffs = Preset::CaldirolaKanai.coefficients();
    let oracle = richardson_oracle(&coeffs, SystemKind::Ermakov, 5.0);
    let errors: Vec<f64> = [1e-5, 1e-7, 1e-9, 1e-11]
        .iter()
        .map(|&tol| {
            let mut cfg = SolverConfig::new(SystemKind::Ermakov).with_tolerances(tol, tol / 10.0);
            cfg.max_step = 1.0;
            max_diff(&pack(integrate(&coeffs, &cfg, 5.0).unwrap().last()), &oracle)
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
}

#[test]
fn caldirola_kanai_characteristic_residual_at_t1() {
    let traj = common::ermakov(Preset::CaldirolaKanai, 5.0);
    assert!(char_residual(&traj, 1.0).unwrap() <= 1e-6);
}

/// Central differences of the dense output reproduce the right-hand side.
fn finite_difference_gap(traj: &Trajectory, rng: &mut ChaCha8Rng) -> f64 {
    let h = 1e-4;
    let (t0, t1) = (traj.start() + h, traj.end() - h);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.gen_range(t0..t1);
        let (plus, minus) = (traj.state_at(t + h).unwrap(), traj.state_at(t - h).unwrap());
        let fd: Vec8 = std::array::from_fn(|i| (pack(&plus)[i] - pack(&minus)[i]) / (2.0 * h));
        let s = traj.state_at(t).unwrap();
        let exact = rhs(traj.coefficients(), traj.kind(), t, &pack(&s));
        worst = worst.max(max_diff(&fd, &exact));
    }
    worst
}

#[test]
fn riccati_system_is_consistent_with_its_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let init = SystemState {
        alpha: 0.3,
        delta: 0.2,
        epsilon: -0.1,
        ..SystemState::default()
    };
    let coeffs = CoefficientSet::parse(["1", "0", "0", "0", "0.4*cos(t)", "0.1"]).unwrap();
    let traj = integrate(&coeffs, &SolverConfig::new(SystemKind::Riccati).with_initial(init), 4.0).unwrap();
    assert!(finite_difference_gap(&traj, &mut rng) <= 1e-5);
    for p in Preset::ALL {
        let traj = common::ermakov(p, 5.0);
        assert!(finite_difference_gap(&traj, &mut rng) <= 1e-5, "{}", p.name());
    }
}

#[test]
fn oscillator_riccati_branch_hits_a_caustic() {
    // alpha' = -1/2 - 2 alpha^2 from alpha = 0 blows up at t = pi/2,
    // while beta' = -2 alpha beta drives beta to zero there.
    match integrate(&Preset::Sho.coefficients(), &SolverConfig::new(SystemKind::Riccati), 3.0) {
        Err(Error::Caustic { t, .. }) => assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-3, "{t}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn domain_error_during_integration() {
    let coeffs = CoefficientSet::parse(["0.5", "sqrt(1-t)", "0", "0", "0", "0"]).unwrap();
    let err = integrate(&coeffs, &SolverConfig::new(SystemKind::Ermakov), 2.0).unwrap_err();
    assert!(matches!(err, Error::Domain { .. }), "{err:?}");
    assert_eq!(err.exit_code(), 4);
}
