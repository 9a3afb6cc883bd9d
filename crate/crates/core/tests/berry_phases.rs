mod common;

use qho::berry::{accumulate, berry_rate, energy_balance_gap, lewis_phase, PhaseMethod};
use qho::ermakov::{integrate, SolverConfig, SystemKind};
use qho::expr::CoefficientSet;
use qho::hermite::{hermite_function, psi_n, ModeSpec};
use qho::presets::Preset;
use qho::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use PhaseMethod::{Alternative, Direct, Reduced};

#[test]
fn phases_are_affine_in_n_plus_half() {
    let traj = common::ermakov(Preset::DrivenSho, 5.0);
    let r: Vec<_> = (0..=2).map(|n| accumulate(n, &traj, &[Direct]).unwrap()).collect();
    let direct = |n: usize| r[n].berry_direct.as_ref().unwrap();
    for i in 0..r[0].times.len() {
        let (d0, d1, d2) = (direct(0)[i], direct(1)[i], direct(2)[i]);
        assert!((d2 - 2.0 * d1 + d0).abs() < 1e-10);
        assert!((r[2].lewis[i] - 5.0 * r[0].lewis[i]).abs() < 1e-12 * (1.0 + r[2].lewis[i].abs()));
    }
}

#[test]
fn free_particle_lewis_phase() {
    let traj = common::natural(Preset::Free, 3.0);
    for n in 0..=3 {
        for t in [0.5, 1.7, 3.0] {
            let phi = lewis_phase(n, &traj, t).unwrap();
            assert!((phi - (2 * n + 1) as f64 * t).abs() < 1e-10);
        }
    }
}

#[test]
fn sho_total_phase_is_the_lewis_phase() {
    let traj = common::ermakov(Preset::Sho, 10.0);
    let r = accumulate(2, &traj, &[Direct, Alternative, Reduced]).unwrap();
    for col in [&r.berry_direct, &r.berry_alt, &r.berry_reduced] {
        assert!(col.as_ref().unwrap().iter().all(|v| v.abs() < 1e-14));
    }
    for t in [1.0, 4.0, 10.0] {
        let mode = ModeSpec::new(2, traj.state_at(t).unwrap()).unwrap();
        let ratio = psi_n(&mode, 0.0) / hermite_function(2, 0.0).unwrap();
        let phi = lewis_phase(2, &traj, t).unwrap();
        assert!((ratio - num_complex::Complex64::from_polar(1.0, -phi)).norm() < 1e-10);
    }
}

#[test]
fn driven_rates_agree_at_t2() {
    let coeffs = CoefficientSet::parse(["0.5", "0.5", "0", "0", "cos(t)", "0"]).unwrap();
    let traj = integrate(&coeffs, &SolverConfig::new(SystemKind::Ermakov), 3.0).unwrap();
    let direct = berry_rate(Direct, 1, &traj, 2.0).unwrap();
    let alt = berry_rate(Alternative, 1, &traj, 2.0).unwrap();
    assert!((direct - alt).abs() < 1e-8, "{direct} vs {alt}");
    assert!(direct.abs() > 1e-3);
    let err = berry_rate(Reduced, 1, &traj, 2.0).unwrap_err();
    assert!(matches!(err, Error::Precondition(ref m) if m.contains("f = 0")), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn caldirola_kanai_dual_phases_at_t5() {
    let traj = common::ermakov(Preset::CaldirolaKanai, 5.0);
    let r = accumulate(0, &traj, &[Direct, Alternative, Reduced]).unwrap();
    let last = r.times.len() - 1;
    let (d, a, red) = (
        r.berry_direct.as_ref().unwrap()[last],
        r.berry_alt.as_ref().unwrap()[last],
        r.berry_reduced.as_ref().unwrap()[last],
    );
    assert!((d - a).abs() <= 1e-7);
    assert!((d - red).abs() <= 1e-8);
    assert!(d.abs() > 1e-3, "{d}");
}

#[test]
fn random_coefficient_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let coeffs = common::random_coefficients(&mut rng);
        let traj = integrate(&coeffs, &SolverConfig::new(SystemKind::Ermakov), 5.0).unwrap();
        for _ in 0..20 {
            let t = rng.gen_range(0.0..5.0);
            for n in 0..=2 {
                let d = berry_rate(Direct, n, &traj, t).unwrap();
                let a = berry_rate(Alternative, n, &traj, t).unwrap();
                assert!((d - a).abs() <= 1e-6 * (1.0 + d.abs()));
                assert!(energy_balance_gap(n, &traj, t).unwrap() <= 1e-6);
            }
        }
    }
}

#[test]
fn riccati_branch_refuses_the_alternative_rate() {
    let traj = common::natural(Preset::Free, 1.0);
    assert!(matches!(accumulate(0, &traj, &[Alternative]), Err(Error::Precondition(_))));
    assert!(accumulate(0, &traj, &[Direct]).is_ok());
}
