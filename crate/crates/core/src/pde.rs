//! Crank–Nicolson propagation of the Schrödinger equation with the general
//! quadratic Hamiltonian, used as an independent check of the analytic wave
//! functions.
//!
//! The Hamiltonian is discretised with second-order central differences on
//! the interior nodes; both end values are held at zero. The cross term is
//! written in the symmetric form `(c/2)(p x + x p)` so the discrete operator is
//! Hermitian whenever `c = 2d`. Coefficients are sampled at the midpoint of
//! every step and the resulting tridiagonal system is solved directly.

use num_complex::Complex64;

use crate::ermakov::Trajectory;
use crate::error::{Error, Result};
use crate::expr::CoefficientSet;
use crate::hermite::{sample_mode, Basis, ComplexField, Grid, ModeSpec};

/// Relative size of the end values beyond which a field is considered to have
/// reached the boundary.
pub const BOUNDARY_DECAY: f64 = 1e-10;
const PIVOT_MIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub grid: Grid,
    pub dt: f64,
}

impl PropagatorConfig {
    pub fn new(grid: Grid, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        Ok(PropagatorConfig { grid, dt })
    }

    /// `dt <= h^2 / (2 max|a|)`, the accuracy guideline for the time step.
    pub fn meets_accuracy_guideline(&self, a_max: f64) -> bool {
        let h = self.grid.spacing();
        self.dt <= 0.5 * h * h / a_max.abs()
    }
}

fn check_decay(f: &ComplexField, t: f64) -> Result<()> {
    let edge = f.edge_abs();
    if edge > BOUNDARY_DECAY * f.max_abs() {
        return Err(Error::BoundaryDecay { value: edge, t });
    }
    Ok(())
}

/// Reusable work buffers for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: Grid) -> Self {
        let m = grid.n_points - 2;
        let z = vec![Complex64::new(0.0, 0.0); m];
        Stepper {
            grid,
            lower: z.clone(),
            diag: z.clone(),
            upper: z.clone(),
            rhs: z.clone(),
            scratch: z,
        }
    }

    /// Advances `values` in place from `t` to `t + dt`.
    pub fn step_in_place(&mut self, values: &mut [Complex64], coeffs: &CoefficientSet, t: f64, dt: f64) -> Result<()> {
        let v = coeffs.at(t + 0.5 * dt)?;
        let h = self.grid.spacing();
        let n = self.grid.n_points;
        let m = n - 2;
        let i = Complex64::new(0.0, 1.0);
        let kin = v.a / (h * h);
        let half_dt = Complex64::new(0.0, 0.5 * dt);
        let x = |j: usize| self.grid.x(j);

        // Row r of the interior system corresponds to node j = r + 1.
        for r in 0..m {
            let j = r + 1;
            let xj = x(j);
            let hl = -kin + i * (v.c * (x(j - 1) + xj) / (4.0 * h)) - i * (v.g / (2.0 * h));
            let hu = -kin - i * (v.c * (x(j + 1) + xj) / (4.0 * h)) + i * (v.g / (2.0 * h));
            let hd = Complex64::new(2.0 * kin + v.b * xj * xj - v.f * xj, 0.5 * (v.c - 2.0 * v.d));
            self.lower[r] = half_dt * hl;
            self.upper[r] = half_dt * hu;
            self.diag[r] = 1.0 + half_dt * hd;
            let hv = hl * values[j - 1] + hd * values[j] + hu * values[j + 1];
            self.rhs[r] = values[j] - half_dt * hv;
        }

        // Thomas elimination; lower[0] and upper[m-1] multiply the zero ends.
        let (lower, diag, upper, rhs, c) = (&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch);
        let mut pivot = diag[0];
        if pivot.norm() < PIVOT_MIN {
            return Err(Error::SingularBand { pivot: pivot.norm(), row: 0 });
        }
        c[0] = upper[0] / pivot;
        rhs[0] /= pivot;
        for r in 1..m {
            pivot = diag[r] - lower[r] * c[r - 1];
            if pivot.norm() < PIVOT_MIN {
                return Err(Error::SingularBand { pivot: pivot.norm(), row: r });
            }
            c[r] = upper[r] / pivot;
            rhs[r] = (rhs[r] - lower[r] * rhs[r - 1]) / pivot;
        }
        for r in (0..m - 1).rev() {
            rhs[r] = rhs[r] - c[r] * rhs[r + 1];
        }
        values[0] = Complex64::new(0.0, 0.0);
        values[n - 1] = Complex64::new(0.0, 0.0);
        values[1..n - 1].copy_from_slice(&rhs[..m]);
        Ok(())
    }
}

/// One Crank–Nicolson step from `t` to `t + dt`.
pub fn step(f: &ComplexField, coeffs: &CoefficientSet, t: f64, dt: f64) -> Result<ComplexField> {
    check_decay(f, t)?;
    let mut out = f.clone();
    Stepper::new(f.grid).step_in_place(&mut out.values, coeffs, t, dt)?;
    Ok(out)
}

/// Field evolving under the propagator, advanced to successive target times.
#[derive(Debug, Clone)]
pub struct Propagation<'a> {
    coeffs: &'a CoefficientSet,
    dt: f64,
    stepper: Stepper,
    pub field: ComplexField,
    pub t: f64,
}

impl<'a> Propagation<'a> {
    pub fn new(initial: ComplexField, coeffs: &'a CoefficientSet, t0: f64, cfg: &PropagatorConfig) -> Result<Self> {
        if initial.grid != cfg.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Propagation {
            coeffs,
            dt: cfg.dt,
            stepper: Stepper::new(cfg.grid),
            field: initial,
            t: t0,
        })
    }

    /// Steps of the configured size, the last one shortened to land on `target`.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let remaining = target - self.t;
        if remaining < 0.0 {
            return Err(Error::Config(format!("cannot propagate backwards to {target} from {}", self.t)));
        }
        let steps = (remaining / self.dt - 1e-9).ceil().max(0.0) as usize;
        if steps == 0 {
            return Ok(());
        }
        let start = self.t;
        let dt = remaining / steps as f64;
        for k in 0..steps {
            let t = start + k as f64 * dt;
            check_decay(&self.field, t)?;
            self.stepper.step_in_place(&mut self.field.values, self.coeffs, t, dt)?;
        }
        self.t = target;
        Ok(())
    }
}

pub fn propagate(initial: &ComplexField, coeffs: &CoefficientSet, t0: f64, t1: f64, cfg: &PropagatorConfig) -> Result<ComplexField> {
    if !(t1 > t0) {
        return Err(Error::Config(format!("t1 = {t1} must exceed t0 = {t0}")));
    }
    let mut p = Propagation::new(initial.clone(), coeffs, t0, cfg)?;
    p.advance_to(t1)?;
    Ok(p.field)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResidualReport {
    pub n: usize,
    pub checkpoints: Vec<f64>,
    pub distances: Vec<f64>,
    pub max: f64,
}

/// Propagates `psi_n(., t0)` and measures the L2 distance to the analytic
/// `psi_n(., t)` at each checkpoint, both scaled by `1 / ||psi_n(., t0)||`.
pub fn residual_check(n: usize, traj: &Trajectory, cfg: &PropagatorConfig, checkpoints: &[f64]) -> Result<ResidualReport> {
    let t0 = traj.start();
    let mode0 = ModeSpec::new(n, traj.state_at(t0)?)?;
    let initial = sample_mode(&mode0, &cfg.grid, Basis::Wave);
    let norm0 = initial.norm();
    let mut prop = Propagation::new(initial, traj.coefficients(), t0, cfg)?;
    let mut distances = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        prop.advance_to(t)?;
        let exact = sample_mode(&ModeSpec::new(n, traj.state_at(t)?)?, &cfg.grid, Basis::Wave);
        distances.push(prop.field.distance(&exact)? / norm0);
    }
    let max = distances.iter().copied().fold(0.0, f64::max);
    Ok(ResidualReport {
        n,
        checkpoints: checkpoints.to_vec(),
        distances,
        max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_function;
    use crate::presets::Preset;

    fn h0(grid: Grid) -> ComplexField {
        ComplexField::from_fn(grid, |x| Complex64::new(hermite_function(0, x).unwrap(), 0.0))
    }

    #[test]
    fn stationary_state_rotates() {
        let grid = Grid::with_spacing(-10.0, 10.0, 0.01).unwrap();
        let f = h0(grid);
        let dt = 1e-3;
        let g = step(&f, &Preset::Sho.coefficients(), 0.0, dt).unwrap();
        let expected = f.scaled(Complex64::from_polar(1.0, -0.5 * dt));
        assert!(g.distance(&expected).unwrap() < 1e-7);
    }

    #[test]
    fn free_norm_is_preserved() {
        let grid = Grid::with_spacing(-15.0, 15.0, 0.02).unwrap();
        let f = ComplexField::from_fn(grid, |x| Complex64::from_polar((-(x * x) / 2.0).exp(), 0.5 * x));
        let n0 = f.norm();
        let mut g = f;
        for k in 0..10 {
            g = step(&g, &Preset::Free.coefficients(), k as f64 * 1e-3, 1e-3).unwrap();
        }
        // Simpson weights are not the discrete l2 inner product, so allow quadrature slack.
        assert!((g.norm() - n0).abs() < 1e-12);
    }

    #[test]
    fn boundary_guard_fires() {
        let grid = Grid::new(-2.0, 2.0, 101).unwrap();
        let f = h0(grid);
        assert!(matches!(step(&f, &Preset::Sho.coefficients(), 0.0, 1e-3), Err(Error::BoundaryDecay { .. })));
    }

    #[test]
    fn two_mode_superposition_returns_with_sign_flip() {
        let grid = Grid::with_spacing(-10.0, 10.0, 0.02).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let f = ComplexField::from_fn(grid, |x| {
            Complex64::new(r * (hermite_function(0, x).unwrap() + hermite_function(1, x).unwrap()), 0.0)
        });
        let cfg = PropagatorConfig::new(grid, 2e-3).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let g = propagate(&f, &Preset::Sho.coefficients(), 0.0, two_pi, &cfg).unwrap();
        let err = g.distance(&f.scaled(Complex64::new(-1.0, 0.0))).unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn rejects_bad_configs() {
        let grid = Grid::new(-1.0, 1.0, 17).unwrap();
        assert!(PropagatorConfig::new(grid, 0.0).is_err());
        let cfg = PropagatorConfig::new(grid, 1e-3).unwrap();
        let f = ComplexField::zeros(grid);
        assert!(propagate(&f, &Preset::Sho.coefficients(), 1.0, 0.5, &cfg).is_err());
        assert!(cfg.meets_accuracy_guideline(0.5));
    }
}
