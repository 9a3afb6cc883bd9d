//! Hermite functions on uniform grids and the oscillator wave functions built
//! from a trajectory state.
//!
//! Three families share the same real profile `h_n(beta x + epsilon)`:
//!
//! * `Phi_n(x) = sqrt(beta) h_n(beta x + epsilon)`, real and normalised to 1;
//! * `Psi_n(x) = mu^{-1/2} exp(i(alpha x^2 + delta x + kappa)) h_n(beta x + epsilon)`,
//!   the eigenfunctions of the quadratic invariant, with norm `lambda^{-1}`;
//! * `psi_n = exp(i(2n+1) gamma) Psi_n`, exact solutions of the Schrödinger equation.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ermakov::SystemState;
use crate::error::{Error, Result};

pub const MAX_MODE: usize = 60;

/// Uniform grid with an odd number of points, so composite Simpson applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < 16 || n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n_points must be odd and >= 16, got {n_points}")));
        }
        Ok(Grid { x_min, x_max, n_points })
    }

    /// Symmetric-ish grid on `[x_min, x_max]` whose spacing does not exceed `spacing`.
    pub fn with_spacing(x_min: f64, x_max: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        let intervals = ((x_max - x_min) / spacing).ceil().max(16.0) as usize;
        let intervals = intervals + intervals % 2;
        Grid::new(x_min, x_max, intervals + 1)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }
}

/// Complex samples of a wave function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::GridMismatch);
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        ComplexField {
            grid,
            values: grid.points().map(f).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        inner_product(self, self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        self.scaled(Complex64::new(1.0 / self.norm(), 0.0))
    }

    /// `self + k * other`.
    pub fn axpy(&self, k: Complex64, other: &ComplexField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(ComplexField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + k * b).collect(),
        })
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// L2 distance computed with the same quadrature as the inner product.
    pub fn distance(&self, other: &ComplexField) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus at the two end points.
    pub fn edge_abs(&self) -> f64 {
        self.values[0].norm().max(self.values[self.values.len() - 1].norm())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,re,im")?;
        for (x, v) in self.grid.points().zip(&self.values) {
            writeln!(out, "{}", crate::io::csv_row(&[x, v.re, v.im]))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "grid": self.grid,
            "x": self.grid.points().collect::<Vec<_>>(),
            "re": self.values.iter().map(|v| v.re).collect::<Vec<_>>(),
            "im": self.values.iter().map(|v| v.im).collect::<Vec<_>>(),
        })
    }
}

/// Quantum number paired with the trajectory state it is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub n: usize,
    pub state: SystemState,
}

impl ModeSpec {
    pub fn new(n: usize, state: SystemState) -> Result<Self> {
        if n > MAX_MODE {
            return Err(Error::ModeOutOfRange(n));
        }
        Ok(ModeSpec { n, state })
    }

    pub fn xi(&self, x: f64) -> f64 {
        self.state.beta * x + self.state.epsilon
    }
}

/// `h_0(xi), ..., h_n(xi)` by the normalised three-term recurrence.
pub fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(PI.powf(-0.25) * (-0.5 * xi * xi).exp());
    if n >= 1 {
        h.push(2f64.sqrt() * xi * h[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = xi * (2.0 / (kf + 1.0)).sqrt() * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Normalised Hermite function `(2^n n! sqrt(pi))^{-1/2} H_n(xi) exp(-xi^2/2)`.
pub fn hermite_function(n: usize, xi: f64) -> Result<f64> {
    if n > MAX_MODE {
        return Err(Error::ModeOutOfRange(n));
    }
    Ok(hermite_functions(n, xi)[n])
}

pub fn phi_n(mode: &ModeSpec, x: f64) -> f64 {
    mode.state.beta.sqrt() * hermite_functions(mode.n, mode.xi(x))[mode.n]
}

fn quadratic_phase(s: &SystemState, x: f64) -> f64 {
    s.alpha * x * x + s.delta * x + s.kappa
}

pub fn capital_psi_n(mode: &ModeSpec, x: f64) -> Complex64 {
    let s = &mode.state;
    let amp = (-0.5 * s.ln_mu).exp() * hermite_functions(mode.n, mode.xi(x))[mode.n];
    Complex64::from_polar(amp, quadratic_phase(s, x))
}

pub fn psi_n(mode: &ModeSpec, x: f64) -> Complex64 {
    let gamma_phase = (2 * mode.n + 1) as f64 * mode.state.gamma;
    capital_psi_n(mode, x) * Complex64::from_polar(1.0, gamma_phase)
}

/// Whether sampled modes carry the `exp(i(2n+1) gamma)` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `psi_n`, solutions of the Schrödinger equation.
    Wave,
    /// `Psi_n`, eigenfunctions of the invariant.
    Invariant,
}

/// Samples modes `0..=n_max` on `grid` in one pass over the recurrence.
pub fn sample_modes(n_max: usize, state: &SystemState, grid: &Grid, basis: Basis) -> Result<Vec<ComplexField>> {
    if n_max > MAX_MODE {
        return Err(Error::ModeOutOfRange(n_max));
    }
    let mut modes: Vec<Vec<Complex64>> = vec![Vec::with_capacity(grid.n_points); n_max + 1];
    let amp0 = (-0.5 * state.ln_mu).exp();
    for x in grid.points() {
        let h = hermite_functions(n_max, state.beta * x + state.epsilon);
        let base = quadratic_phase(state, x);
        for (n, hn) in h.iter().enumerate() {
            let phase = match basis {
                Basis::Wave => base + (2 * n + 1) as f64 * state.gamma,
                Basis::Invariant => base,
            };
            modes[n].push(Complex64::from_polar(amp0 * hn, phase));
        }
    }
    Ok(modes
        .into_iter()
        .map(|values| ComplexField { grid: *grid, values })
        .collect())
}

pub fn sample_mode(mode: &ModeSpec, grid: &Grid, basis: Basis) -> ComplexField {
    match basis {
        Basis::Wave => ComplexField::from_fn(*grid, |x| psi_n(mode, x)),
        Basis::Invariant => ComplexField::from_fn(*grid, |x| capital_psi_n(mode, x)),
    }
}

/// Composite Simpson estimate of `<f, g> = int conj(f) g dx`.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    if f.grid != g.grid || f.values.len() != g.values.len() {
        return Err(Error::GridMismatch);
    }
    Ok(simpson(f.grid.spacing(), f.values.iter().zip(&g.values).map(|(a, b)| a.conj() * b)))
}

pub(crate) fn simpson(h: f64, values: impl ExactSizeIterator<Item = Complex64>) -> Complex64 {
    let n = values.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in values.enumerate() {
        let w = if i == 0 || i + 1 == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += v * w;
    }
    acc * (h / 3.0)
}

/// Largest `|h_n(xi)|`, `n <= n_max`, that the basis attains at the grid edges.
fn basis_edge_envelope(n_max: usize, state: &SystemState, grid: &Grid) -> f64 {
    [grid.x_min, grid.x_max]
        .into_iter()
        .flat_map(|x| hermite_functions(n_max, state.beta * x + state.epsilon))
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// `c_n = <psi_n, f> / ||psi_n||^2` against the modes at `state0`.
pub fn expansion_coefficients(initial: &ComplexField, n_max: usize, state0: &SystemState) -> Result<Vec<Complex64>> {
    let grid = initial.grid;
    let envelope = basis_edge_envelope(n_max, state0, &grid)
        .max(initial.edge_abs() / initial.max_abs().max(f64::MIN_POSITIVE));
    if envelope > 1e-10 {
        return Err(Error::GridTooSmall { envelope });
    }
    let modes = sample_modes(n_max, state0, &grid, Basis::Wave)?;
    modes
        .iter()
        .map(|m| {
            let num = inner_product(m, initial)?;
            let den = inner_product(m, m)?.re;
            Ok(num / den)
        })
        .collect()
}

/// `sum_n c_n psi_n(x)` at `state`.
pub fn synthesize(coeffs: &[Complex64], state: &SystemState, grid: &Grid) -> Result<ComplexField> {
    let n_max = coeffs.len().saturating_sub(1);
    let modes = sample_modes(n_max, state, grid, Basis::Wave)?;
    let mut out = ComplexField::zeros(*grid);
    for (c, m) in coeffs.iter().zip(&modes) {
        out = out.axpy(*c, m)?;
    }
    Ok(out)
}

/// Grid covering `|beta x + epsilon| <= sqrt(2 n_max + 1) + 8` for every state,
/// fine enough for Simpson products of modes up to `n_max`.
pub fn suggest_grid(n_max: usize, states: &[SystemState]) -> Result<Grid> {
    if states.is_empty() {
        return Err(Error::InvalidGrid("no states given".into()));
    }
    let reach = ((2 * n_max + 1) as f64).sqrt() + 8.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut beta_max: f64 = 0.0;
    for s in states {
        lo = lo.min((-reach - s.epsilon) / s.beta);
        hi = hi.max((reach - s.epsilon) / s.beta);
        beta_max = beta_max.max(s.beta);
    }
    // Simpson's coarse half samples at 2h; its aliasing frequency must clear
    // the band of products of modes up to n_max.
    let band = 2.0 * ((2 * n_max + 1) as f64).sqrt() + 9.0;
    let spacing = 0.25f64.min(PI / band) / beta_max;
    Grid::with_spacing(lo, hi, spacing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hermite_examples() {
        assert!((hermite_function(0, 0.0).unwrap() - 0.751125544464943).abs() < 1e-15);
        assert_eq!(hermite_function(1, 0.0).unwrap(), 0.0);
        let expected = 40.0 / (48.0 * PI.sqrt()).sqrt() * (-2f64).exp();
        assert!((hermite_function(3, 2.0).unwrap() - expected).abs() < 1e-15);
        assert_eq!(hermite_function(61, 0.0), Err(Error::ModeOutOfRange(61)));
    }

    #[test]
    fn recurrence_is_bounded() {
        for i in 0..4001 {
            let xi = -100.0 + 0.05 * i as f64;
            for h in hermite_functions(60, xi) {
                assert!(h.is_finite() && h.abs() <= 0.82, "xi = {xi}");
            }
        }
    }

    #[test]
    fn phi_profiles() {
        let sho = SystemState::default();
        assert!((phi_n(&ModeSpec::new(0, sho).unwrap(), 0.0) - PI.powf(-0.25)).abs() < 1e-15);
        let shifted = SystemState { epsilon: 1.0, ..sho };
        assert_eq!(phi_n(&ModeSpec::new(1, shifted).unwrap(), -1.0), 0.0);

        let narrow = SystemState { beta: 2.0, ln_mu: -2f64.ln(), ..sho };
        let grid = Grid::new(-10.0, 10.0, 2001).unwrap();
        let m = ModeSpec::new(0, narrow).unwrap();
        let f = ComplexField::from_fn(grid, |x| c(phi_n(&m, x)));
        assert!((inner_product(&f, &f).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wave_and_invariant_modes() {
        let s0 = SystemState::default();
        for n in 0..4 {
            let m = ModeSpec::new(n, s0).unwrap();
            for x in [-1.3, 0.0, 0.4] {
                let v = psi_n(&m, x);
                assert!((v.re - hermite_function(n, x).unwrap()).abs() < 1e-15 && v.im == 0.0);
            }
        }
        let t = 0.8;
        let st = SystemState { gamma: -t / 2.0, t, ..s0 };
        let m = ModeSpec::new(0, st).unwrap();
        let expected = Complex64::from_polar(hermite_function(0, 0.3).unwrap(), -t / 2.0);
        assert!((psi_n(&m, 0.3) - expected).norm() < 1e-15);
        let m2 = ModeSpec::new(2, st).unwrap();
        let back = psi_n(&m2, 0.3) * Complex64::from_polar(1.0, 5.0 * t / 2.0);
        assert!((capital_psi_n(&m2, 0.3) - back).norm() < 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let grid = Grid::new(-12.0, 12.0, 1025).unwrap();
        let h = |n: usize| ComplexField::from_fn(grid, move |x| c(hermite_function(n, x).unwrap()));
        assert!((inner_product(&h(0), &h(0)).unwrap() - 1.0).norm() < 1e-12);
        assert!(inner_product(&h(0), &h(2)).unwrap().norm() < 1e-12);
        for n in 0..6 {
            let xh = ComplexField::from_fn(grid, |x| c(x * hermite_function(n, x).unwrap()));
            assert!(inner_product(&h(n), &xh).unwrap().norm() < 1e-12);
        }
        let other = Grid::new(-12.0, 12.0, 1023).unwrap();
        let g = ComplexField::zeros(other);
        assert_eq!(inner_product(&h(0), &g), Err(Error::GridMismatch));
    }

    #[test]
    fn expansion_examples() {
        let s0 = SystemState::default();
        let grid = suggest_grid(12, &[s0]).unwrap();
        let modes = sample_modes(3, &s0, &grid, Basis::Wave).unwrap();
        let cs = expansion_coefficients(&modes[3], 12, &s0).unwrap();
        for (n, cn) in cs.iter().enumerate() {
            let target = if n == 3 { 1.0 } else { 0.0 };
            assert!((cn - target).norm() < 1e-10, "n = {n}: {cn}");
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mix = modes[0].scaled(c(r)).axpy(c(r), &modes[1]).unwrap();
        let cs = expansion_coefficients(&mix, 5, &s0).unwrap();
        assert!((cs[0] - r).norm() < 1e-10 && (cs[1] - r).norm() < 1e-10);
        assert!(cs[2..].iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn coherent_state_overlaps() {
        // Frozen from an independent adaptive quadrature of h_n(x) exp(-(x-1)^2/2) / pi^(1/4).
        const ORACLE: [f64; 6] = [
            0.7788007830714049,
            0.5506953149031838,
            0.27534765745159184,
            0.11241021043784175,
            0.03974301103760236,
            0.012567843595203545,
        ];
        let s0 = SystemState::default();
        let grid = suggest_grid(30, &[s0]).unwrap();
        let f = ComplexField::from_fn(grid, |x| c((-(x - 1.0).powi(2) / 2.0).exp() / PI.powf(0.25)));
        let cs = expansion_coefficients(&f, 30, &s0).unwrap();
        for (n, want) in ORACLE.iter().enumerate() {
            assert!((cs[n].re - want).abs() < 1e-12 && cs[n].im.abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn expansion_rejects_small_grid() {
        let s0 = SystemState::default();
        let grid = Grid::new(-4.0, 4.0, 401).unwrap();
        let f = sample_mode(&ModeSpec::new(0, s0).unwrap(), &grid, Basis::Wave);
        assert!(matches!(expansion_coefficients(&f, 5, &s0), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn suggested_grids() {
        let s0 = SystemState::default();
        let g = suggest_grid(0, &[s0]).unwrap();
        assert!(g.x_min <= -9.0 && g.x_max >= 9.0 && g.n_points % 2 == 1);
        assert!(g.spacing() <= 0.25);
        let g = suggest_grid(10, &[s0]).unwrap();
        assert!(g.x_min <= -12.58 && g.x_max >= 12.58);
        let plus = SystemState { epsilon: 3.0, ..s0 };
        let minus = SystemState { epsilon: -3.0, ..s0 };
        let g = suggest_grid(0, &[plus, minus]).unwrap();
        assert!(g.x_min <= -12.0 && g.x_max >= 12.0);
        let wide = SystemState { beta: 4.0, ..s0 };
        assert!(suggest_grid(0, &[wide]).unwrap().spacing() <= 0.25 / 4.0);
        assert!(suggest_grid(0, &[]).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 16).is_err());
        assert!(Grid::new(0.0, 1.0, 15).is_err());
        assert!(Grid::new(1.0, 1.0, 17).is_err());
        let g = Grid::new(-1.0, 1.0, 17).unwrap();
        assert_eq!(g.x(16), 1.0);
        assert_eq!(g.spacing(), 0.125);
    }

    #[test]
    fn field_export() {
        let g = Grid::new(-1.0, 1.0, 17).unwrap();
        let f = ComplexField::from_fn(g, |x| Complex64::new(x, -x));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,re,im\n-1.0000000000000000e0,-1.0000000000000000e0,1.0000000000000000e0\n"));
        let json = f.to_json();
        assert_eq!(json["grid"]["n_points"], 17);
    }
}
