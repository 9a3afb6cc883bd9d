#![allow(dead_code)]

use qho::ermakov::{integrate, SolverConfig, SystemKind, SystemState, Trajectory};
use qho::expr::CoefficientSet;
use qho::hermite::{suggest_grid, Grid};
use qho::presets::Preset;
use rand::Rng;

pub fn trajectory(p: Preset, kind: SystemKind, t_end: f64) -> Trajectory {
    integrate(&p.coefficients(), &SolverConfig::new(kind), t_end).unwrap()
}

/// Ermakov-branch trajectory, for everything that builds wave functions.
pub fn ermakov(p: Preset, t_end: f64) -> Trajectory {
    trajectory(p, SystemKind::Ermakov, t_end)
}

/// Trajectory on the preset's natural branch.
pub fn natural(p: Preset, t_end: f64) -> Trajectory {
    trajectory(p, p.default_kind(), t_end)
}

/// Suggested range for modes up to `n_max` over `states`, at spacing `h`.
pub fn grid(n_max: usize, states: &[SystemState], h: f64) -> Grid {
    let g = suggest_grid(n_max, states).unwrap();
    Grid::with_spacing(g.x_min, g.x_max, h).unwrap()
}

pub fn states(traj: &Trajectory, times: &[f64]) -> Vec<SystemState> {
    times.iter().map(|&t| traj.state_at(t).unwrap()).collect()
}

/// Smooth random coefficients with `a >= 0.1` and `b > 0`, as expression text.
pub fn random_expressions(rng: &mut impl Rng) -> [String; 6] {
    let mut wave = |lo: f64, hi: f64, func: &str| -> String {
        let amp: f64 = rng.gen_range(lo..hi);
        let w: f64 = rng.gen_range(0.3..2.0);
        let phase: f64 = rng.gen_range(0.0..6.0);
        format!("{amp:?}*{func}({w:?}*t+{phase:?})")
    };
    let a_mod = wave(0.0, 0.3, "sin");
    let b_mod = wave(0.0, 0.3, "cos");
    let c = wave(-0.3, 0.3, "sin");
    let d = wave(-0.3, 0.3, "cos");
    let f = wave(-0.5, 0.5, "cos");
    let g = wave(-0.5, 0.5, "sin");
    let a0: f64 = rng.gen_range(0.2..1.0);
    let b0: f64 = rng.gen_range(0.1..1.0);
    [
        format!("{a0:?}*(1+{a_mod})"),
        format!("{b0:?}*(1+{b_mod})"),
        c,
        d,
        f,
        g,
    ]
}

pub fn random_coefficients(rng: &mut impl Rng) -> CoefficientSet {
    let e = random_expressions(rng);
    CoefficientSet::parse([&e[0], &e[1], &e[2], &e[3], &e[4], &e[5]].map(String::as_str)).unwrap()
}

pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect()
}
