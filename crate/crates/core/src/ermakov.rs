//! Riccati/Ermakov-type system for the functions `alpha, beta, gamma, delta,
//! epsilon, kappa` together with the accumulators `ln mu` and `ln lambda`.
//!
//! The system is integrated with a Dormand–Prince 5(4) pair under PI step
//! control. Accepted steps are stored with their exact right-hand sides so the
//! trajectory can be interpolated by cubic Hermite polynomials.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{CoeffValues, CoefficientSet};

/// Below this `beta` (or above `ALPHA_MAX` in `|alpha|`) the solution is
/// treated as having reached a caustic.
pub const BETA_MIN: f64 = 1e-10;
pub const ALPHA_MAX: f64 = 1e12;

/// Which autonomous form the substitution targets: the free equation
/// (`c0 = 0`, Riccati-type) or the oscillator (`c0 = 1`, Ermakov-type).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    Riccati,
    Ermakov,
}

impl SystemKind {
    pub fn c0(self) -> f64 {
        match self {
            SystemKind::Riccati => 0.0,
            SystemKind::Ermakov => 1.0,
        }
    }

    pub fn from_c0(c0: u8) -> Result<Self> {
        match c0 {
            0 => Ok(SystemKind::Riccati),
            1 => Ok(SystemKind::Ermakov),
            other => Err(Error::Config(format!("c0 must be 0 or 1, got {other}"))),
        }
    }
}

const DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub ln_mu: f64,
    pub ln_lambda: f64,
}

impl Default for SystemState {
    /// `(alpha, beta, gamma, delta, epsilon, kappa, mu, lambda) = (0, 1, 0, 0, 0, 0, 1, 1)` at `t = 0`.
    fn default() -> Self {
        SystemState {
            t: 0.0,
            alpha: 0.0,
            beta: 1.0,
            gamma: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            kappa: 0.0,
            ln_mu: 0.0,
            ln_lambda: 0.0,
        }
    }
}

impl SystemState {
    pub fn mu(&self) -> f64 {
        self.ln_mu.exp()
    }

    pub fn lambda(&self) -> f64 {
        self.ln_lambda.exp()
    }

    /// The new time variable of the autonomous equation, equal to `gamma`.
    pub fn tau_new_time(&self) -> f64 {
        self.gamma
    }

    /// Relative gap in `beta mu = lambda`.
    pub fn beta_mu_lambda_gap(&self) -> f64 {
        let lhs = self.mu() * self.beta;
        let rhs = self.lambda();
        (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
    }

    fn to_array(self) -> [f64; DIM] {
        [
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.kappa,
            self.ln_mu,
            self.ln_lambda,
        ]
    }

    fn from_array(t: f64, y: [f64; DIM]) -> Self {
        let [alpha, beta, gamma, delta, epsilon, kappa, ln_mu, ln_lambda] = y;
        SystemState {
            t,
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            kappa,
            ln_mu,
            ln_lambda,
        }
    }
}

/// Time derivatives of the components of [`SystemState`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateDerivative {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub ln_mu: f64,
    pub ln_lambda: f64,
}

impl StateDerivative {
    fn to_array(self) -> [f64; DIM] {
        [
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.kappa,
            self.ln_mu,
            self.ln_lambda,
        ]
    }

    fn from_array(y: [f64; DIM]) -> Self {
        let [alpha, beta, gamma, delta, epsilon, kappa, ln_mu, ln_lambda] = y;
        StateDerivative {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            kappa,
            ln_mu,
            ln_lambda,
        }
    }
}

/// Right-hand side evaluated from coefficient values already computed at `s.t`.
pub fn rhs_from_values(s: &SystemState, v: &CoeffValues, kind: SystemKind) -> StateDerivative {
    let c0 = kind.c0();
    let CoeffValues { a, b, c, d, f, g, .. } = *v;
    let SystemState {
        alpha,
        beta,
        delta,
        epsilon,
        ..
    } = *s;
    let drift = c + 4.0 * a * alpha;
    StateDerivative {
        alpha: -b - 2.0 * c * alpha - 4.0 * a * alpha * alpha + c0 * a * beta.powi(4),
        beta: -drift * beta,
        gamma: -a * beta * beta,
        delta: -drift * delta + f + 2.0 * g * alpha + 2.0 * c0 * a * beta.powi(3) * epsilon,
        epsilon: (g - 2.0 * a * delta) * beta,
        kappa: g * delta - a * delta * delta + c0 * a * beta * beta * epsilon * epsilon,
        ln_mu: 4.0 * a * alpha + 2.0 * d,
        ln_lambda: -(c - 2.0 * d),
    }
}

pub fn system_rhs(s: &SystemState, coeffs: &CoefficientSet, kind: SystemKind) -> Result<StateDerivative> {
    let v = coeffs.at(s.t)?;
    Ok(rhs_from_values(s, &v, kind))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kind: SystemKind,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial: SystemState,
}

impl SolverConfig {
    pub fn new(kind: SystemKind) -> Self {
        SolverConfig {
            kind,
            rel_tol: 1e-11,
            abs_tol: 1e-12,
            max_step: 0.05,
            initial: SystemState::default(),
        }
    }

    pub fn with_initial(mut self, initial: SystemState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::Config("max_step must be positive".into()));
        }
        let s = &self.initial;
        if !(s.beta > 0.0) {
            return Err(Error::Config(format!("initial beta must be positive, got {}", s.beta)));
        }
        let gap = s.ln_mu + s.beta.ln() - s.ln_lambda;
        if gap.abs() > 1e-12 {
            return Err(Error::Config(format!(
                "initial data must satisfy beta*mu = lambda (log gap {gap:e})"
            )));
        }
        Ok(())
    }
}

/// One accepted step of the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub state: SystemState,
    pub rate: StateDerivative,
}

/// Dense solution of the system over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<Sample>,
    coeffs: CoefficientSet,
    kind: SystemKind,
}

impl Trajectory {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn start(&self) -> f64 {
        self.samples[0].state.t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].state.t
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn last(&self) -> &SystemState {
        &self.samples[self.samples.len() - 1].state
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let (start, end) = (self.start(), self.end());
        if t < start || t > end || t.is_nan() {
            return Err(Error::OutOfRange { t, start, end });
        }
        Ok(())
    }

    /// Cubic Hermite interpolation between the bracketing samples.
    pub fn state_at(&self, t: f64) -> Result<SystemState> {
        self.check_range(t)?;
        let idx = self.samples.partition_point(|s| s.state.t <= t);
        if idx == 0 {
            return Ok(self.samples[0].state);
        }
        if idx == self.samples.len() {
            return Ok(self.samples[idx - 1].state);
        }
        let (left, right) = (&self.samples[idx - 1], &self.samples[idx]);
        let (t0, t1) = (left.state.t, right.state.t);
        if t == t0 {
            return Ok(left.state);
        }
        let h = t1 - t0;
        let u = (t - t0) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let (y0, y1) = (left.state.to_array(), right.state.to_array());
        let (d0, d1) = (left.rate.to_array(), right.rate.to_array());
        let mut y = [0.0; DIM];
        for i in 0..DIM {
            y[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
        }
        Ok(SystemState::from_array(t, y))
    }

    /// Exact right-hand side at the interpolated state.
    pub fn rate_at(&self, t: f64) -> Result<(SystemState, StateDerivative)> {
        let s = self.state_at(t)?;
        let ds = system_rhs(&s, &self.coeffs, self.kind)?;
        Ok((s, ds))
    }

    /// Largest relative gap in `beta mu = lambda` over the stored samples.
    pub fn max_beta_mu_lambda_gap(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.state.beta_mu_lambda_gap())
            .fold(0.0, f64::max)
    }

    /// CSV with one row per accepted step.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,alpha,beta,gamma,delta,epsilon,kappa,mu,lambda")?;
        for s in &self.samples {
            let st = &s.state;
            let row = [
                st.t,
                st.alpha,
                st.beta,
                st.gamma,
                st.delta,
                st.epsilon,
                st.kappa,
                st.mu(),
                st.lambda(),
            ];
            writeln!(out, "{}", crate::io::csv_row(&row))?;
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const PI_BETA: f64 = 0.04;

fn check_caustic(s: &SystemState) -> Result<()> {
    let finite = s.to_array().iter().all(|v| v.is_finite());
    if !finite || s.beta < BETA_MIN || s.alpha.abs() > ALPHA_MAX {
        return Err(Error::Caustic {
            t: s.t,
            beta: s.beta,
            alpha: s.alpha,
        });
    }
    Ok(())
}

/// Integrates the system from `config.initial.t` to `t_end`.
pub fn integrate(coeffs: &CoefficientSet, config: &SolverConfig, t_end: f64) -> Result<Trajectory> {
    config.validate()?;
    let t0 = config.initial.t;
    if !(t_end > t0) {
        return Err(Error::Config(format!("t_end = {t_end} must exceed t0 = {t0}")));
    }
    let kind = config.kind;
    let f = |t: f64, y: &[f64; DIM]| -> Result<[f64; DIM]> {
        let s = SystemState::from_array(t, *y);
        Ok(system_rhs(&s, coeffs, kind)?.to_array())
    };

    let mut t = t0;
    let mut y = config.initial.to_array();
    check_caustic(&config.initial)?;
    let mut k0 = f(t, &y)?;
    let mut samples = vec![Sample {
        state: config.initial,
        rate: StateDerivative::from_array(k0),
    }];

    let span = t_end - t0;
    let mut h = initial_step(&y, &k0, config).min(span).min(config.max_step);
    let mut err_prev: f64 = 1e-4;

    while t < t_end {
        let last = t_end - t <= h * (1.0 + 1e-12);
        if last {
            h = t_end - t;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }

        let mut k = [[0.0; DIM]; 7];
        k[0] = k0;
        for stage in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let aij = A[stage][j];
                if aij != 0.0 {
                    for i in 0..DIM {
                        yi[i] += h * aij * kj[i];
                    }
                }
            }
            k[stage] = f(t + C[stage] * h, &yi)?;
        }
        // The 7th stage is evaluated at the 5th-order solution (FSAL).
        let mut y_new = y;
        for i in 0..DIM {
            y_new[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
        }
        let mut err_sq = 0.0;
        for i in 0..DIM {
            let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let scale = config.abs_tol + config.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / DIM as f64).sqrt();

        if err <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            let state = SystemState::from_array(t_new, y_new);
            check_caustic(&state)?;
            t = t_new;
            y = y_new;
            k0 = k[6];
            samples.push(Sample {
                state,
                rate: StateDerivative::from_array(k0),
            });
            let err_c = err.max(1e-10);
            let fac = SAFETY * err_c.powf(-(0.2 - 0.75 * PI_BETA)) * err_prev.powf(PI_BETA);
            h *= fac.clamp(FAC_MIN, FAC_MAX);
            err_prev = err_c.max(1e-4);
        } else {
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).max(FAC_MIN)
            } else {
                FAC_MIN
            };
            h *= fac;
        }
        h = h.min(config.max_step);
    }

    Ok(Trajectory {
        samples,
        coeffs: coeffs.clone(),
        kind,
    })
}

fn initial_step(y: &[f64; DIM], dy: &[f64; DIM], config: &SolverConfig) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..DIM {
        let sc = config.abs_tol + config.rel_tol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / DIM as f64).sqrt(), (d1 / DIM as f64).sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).max(1e-6)
    }
}

/// |mu'' - tau mu' + 4 sigma mu - c0 (2a)^2 beta^4 mu| at time `t`, with
/// `sigma = ab - cd + d^2 + d a'/(2a) - d'/2`.
pub fn char_residual(traj: &Trajectory, t: f64) -> Result<f64> {
    let (s, ds) = traj.rate_at(t)?;
    let v = traj.coefficients().at(t)?;
    char_residual_at(&s, &ds, &v, traj.kind())
}

pub fn char_residual_at(s: &SystemState, ds: &StateDerivative, v: &CoeffValues, kind: SystemKind) -> Result<f64> {
    if v.a == 0.0 {
        return Err(Error::Domain {
            node: "a".into(),
            t: s.t,
        });
    }
    let CoeffValues { a, b, c, d, da, dd, .. } = *v;
    let mu = s.mu();
    let growth = 4.0 * a * s.alpha + 2.0 * d;
    let d_mu = mu * growth;
    let d_growth = 4.0 * da * s.alpha + 4.0 * a * ds.alpha + 2.0 * dd;
    let dd_mu = d_mu * growth + mu * d_growth;
    let tau_coeff = da / a - 2.0 * c + 4.0 * d;
    let sigma = a * b - c * d + d * d + d * da / (2.0 * a) - dd / 2.0;
    let rhs = kind.c0() * (2.0 * a).powi(2) * s.beta.powi(4) * mu;
    Ok((dd_mu - tau_coeff * d_mu + 4.0 * sigma * mu - rhs).abs())
}
