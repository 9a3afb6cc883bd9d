//! Lewis and Berry phases along a trajectory.
//!
//! Three expressions for the Berry rate are provided:
//!
//! * **direct**: `-(eps^2 + n + 1/2) alpha' / beta^2 + eps delta' / beta - kappa'`,
//!   with the derivatives taken from the exact right-hand side;
//! * **alternative**: the rate obtained from `Re<Psi_n, H Psi_n>` minus the Lewis rate,
//!   a function of the state and the coefficients only;
//! * **reduced**: the `mu`-form valid when `c = 2d` and `f = g = 0` with
//!   `delta = epsilon = kappa = 0`.
//!
//! On Ermakov-type trajectories the direct and alternative rates agree
//! identically, which is what [`accumulate`] lets callers check numerically.

use std::io::Write;

use crate::ermakov::{StateDerivative, SystemKind, SystemState, Trajectory};
use crate::error::{Error, Result};
use crate::expr::{CoeffValues, CoefficientSet};
use crate::invariant::hamiltonian_expectation_from_values;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseMethod {
    Direct,
    Alternative,
    Reduced,
}

impl std::str::FromStr for PhaseMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(PhaseMethod::Direct),
            "alternative" | "alt" => Ok(PhaseMethod::Alternative),
            "reduced" => Ok(PhaseMethod::Reduced),
            other => Err(Error::Config(format!("unknown phase method `{other}`"))),
        }
    }
}

fn half(n: usize) -> f64 {
    n as f64 + 0.5
}

/// `phi_n(t) = -(2n + 1)(gamma(t) - gamma(t0))`.
pub fn lewis_phase(n: usize, traj: &Trajectory, t: f64) -> Result<f64> {
    let gamma0 = traj.samples()[0].state.gamma;
    let s = traj.state_at(t)?;
    Ok(-((2 * n + 1) as f64) * (s.gamma - gamma0))
}

/// Time derivative of the Lewis phase, `(2n + 1) a beta^2`.
pub fn lewis_rate(n: usize, ds: &StateDerivative) -> f64 {
    -((2 * n + 1) as f64) * ds.gamma
}

pub fn berry_rate_direct(n: usize, s: &SystemState, ds: &StateDerivative) -> f64 {
    let eps = s.epsilon;
    -(eps * eps + half(n)) / (s.beta * s.beta) * ds.alpha + eps / s.beta * ds.delta - ds.kappa
}

pub fn berry_rate_alternative_from_values(n: usize, s: &SystemState, v: &CoeffValues) -> f64 {
    // lambda Re<Psi_n, H Psi_n> minus the Lewis rate (2n + 1) a beta^2
    hamiltonian_expectation_from_values(n, s, v) - 2.0 * half(n) * v.a * s.beta * s.beta
}

pub fn berry_rate_alternative(n: usize, s: &SystemState, coeffs: &CoefficientSet, t: f64) -> Result<f64> {
    Ok(berry_rate_alternative_from_values(n, s, &coeffs.at(t)?))
}

const REDUCED_TOL: f64 = 1e-12;

fn check_reduced(s: &SystemState, v: &CoeffValues) -> Result<()> {
    let checks = [
        ("c - 2d", v.c - 2.0 * v.d),
        ("f", v.f),
        ("g", v.g),
        ("delta", s.delta),
        ("epsilon", s.epsilon),
        ("kappa", s.kappa),
    ];
    for (name, value) in checks {
        if value.abs() > REDUCED_TOL {
            return Err(Error::Precondition(format!(
                "reduced Berry rate needs {name} = 0, found {value:e} at t = {}",
                s.t
            )));
        }
    }
    Ok(())
}

/// `-(n + 1/2)/(4a) [mu'' mu - mu'^2 - (a'/a) mu' mu + 2 (d a'/a - d') mu^2]`.
pub fn berry_rate_reduced_from_values(n: usize, s: &SystemState, ds: &StateDerivative, v: &CoeffValues) -> Result<f64> {
    check_reduced(s, v)?;
    let CoeffValues { a, d, da, dd, .. } = *v;
    let mu = s.mu();
    let growth = 4.0 * a * s.alpha + 2.0 * d;
    let d_mu = mu * growth;
    let dd_mu = d_mu * growth + mu * (4.0 * da * s.alpha + 4.0 * a * ds.alpha + 2.0 * dd);
    let bracket = dd_mu * mu - d_mu * d_mu - da / a * d_mu * mu + 2.0 * (d * da / a - dd) * mu * mu;
    Ok(-half(n) / (4.0 * a) * bracket)
}

pub fn berry_rate_reduced(n: usize, s: &SystemState, coeffs: &CoefficientSet, t: f64) -> Result<f64> {
    let v = coeffs.at(t)?;
    let ds = crate::ermakov::rhs_from_values(s, &v, SystemKind::Ermakov);
    berry_rate_reduced_from_values(n, s, &ds, &v)
}

/// Accumulated phases for one quantum number, sampled at the trajectory nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub n: usize,
    pub times: Vec<f64>,
    pub lewis: Vec<f64>,
    pub berry_direct: Option<Vec<f64>>,
    pub berry_alt: Option<Vec<f64>>,
    pub berry_reduced: Option<Vec<f64>>,
}

impl PhaseRecord {
    /// `|direct - alt|` per time, when both were accumulated.
    pub fn consistency_gap(&self) -> Option<Vec<f64>> {
        let (d, a) = (self.berry_direct.as_ref()?, self.berry_alt.as_ref()?);
        Some(d.iter().zip(a).map(|(x, y)| (x - y).abs()).collect())
    }

    pub fn max_consistency_gap(&self) -> Option<f64> {
        self.consistency_gap().map(|g| g.into_iter().fold(0.0, f64::max))
    }

    /// `t,lewis,berry_direct,berry_alt[,berry_reduced][,consistency_gap]`,
    /// omitting columns that were not accumulated.
    pub fn write_csv<W: Write>(&self, mut out: W, with_gap: bool) -> Result<()> {
        let mut header = vec!["t", "lewis"];
        let mut columns: Vec<&[f64]> = vec![&self.times, &self.lewis];
        let gap = self.consistency_gap();
        for (name, col) in [
            ("berry_direct", &self.berry_direct),
            ("berry_alt", &self.berry_alt),
            ("berry_reduced", &self.berry_reduced),
        ] {
            if let Some(c) = col {
                header.push(name);
                columns.push(c);
            }
        }
        if with_gap {
            if let Some(g) = &gap {
                header.push("consistency_gap");
                columns.push(g);
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.times.len() {
            let row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            writeln!(out, "{}", crate::io::csv_row(&row))?;
        }
        Ok(())
    }
}

/// Rate of the chosen method at time `t`, on the interpolated state.
pub fn berry_rate(method: PhaseMethod, n: usize, traj: &Trajectory, t: f64) -> Result<f64> {
    let s = traj.state_at(t)?;
    let v = traj.coefficients().at(t)?;
    let ds = crate::ermakov::rhs_from_values(&s, &v, traj.kind());
    match method {
        PhaseMethod::Direct => Ok(berry_rate_direct(n, &s, &ds)),
        PhaseMethod::Alternative => Ok(berry_rate_alternative_from_values(n, &s, &v)),
        PhaseMethod::Reduced => berry_rate_reduced_from_values(n, &s, &ds, &v),
    }
}

const SIMPSON_TOL: f64 = 1e-12;
const SIMPSON_DEPTH: u32 = 40;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || !delta.is_finite() {
        return Err(Error::QuadratureNonConvergence { start: a, end: b });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Integrates the requested rates from the first trajectory node, reporting
/// the phases at every node. `theta_n(t0) = 0` by convention.
pub fn accumulate(n: usize, traj: &Trajectory, methods: &[PhaseMethod]) -> Result<PhaseRecord> {
    if methods.contains(&PhaseMethod::Alternative) && traj.kind() != SystemKind::Ermakov {
        return Err(Error::Precondition(
            "the alternative Berry rate holds on Ermakov-type (c0 = 1) trajectories only".into(),
        ));
    }
    let times = traj.times();
    let lewis = times
        .iter()
        .map(|&t| lewis_phase(n, traj, t))
        .collect::<Result<Vec<_>>>()?;

    let integrate = |method: PhaseMethod| -> Result<Vec<f64>> {
        let rate = |t: f64| berry_rate(method, n, traj, t);
        // surface precondition failures even on single-node trajectories
        rate(times[0])?;
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(times.len());
        out.push(0.0);
        for w in times.windows(2) {
            acc += adaptive_simpson(&rate, w[0], w[1], SIMPSON_TOL)?;
            out.push(acc);
        }
        Ok(out)
    };

    let pick = |m: PhaseMethod| -> Result<Option<Vec<f64>>> {
        if methods.contains(&m) {
            integrate(m).map(Some)
        } else {
            Ok(None)
        }
    };

    Ok(PhaseRecord {
        n,
        berry_direct: pick(PhaseMethod::Direct)?,
        berry_alt: pick(PhaseMethod::Alternative)?,
        berry_reduced: pick(PhaseMethod::Reduced)?,
        times,
        lewis,
    })
}

/// `lambda^{-1}(theta_n' + phi_n')` minus `Re<Psi_n, H Psi_n>` (closed form) at `t`.
pub fn energy_balance_gap(n: usize, traj: &Trajectory, t: f64) -> Result<f64> {
    let s = traj.state_at(t)?;
    let v = traj.coefficients().at(t)?;
    let ds = crate::ermakov::rhs_from_values(&s, &v, traj.kind());
    let lam = s.lambda();
    let lhs = (berry_rate_direct(n, &s, &ds) + lewis_rate(n, &ds)) / lam;
    let rhs = hamiltonian_expectation_from_values(n, &s, &v) / lam;
    Ok((lhs - rhs).abs())
}
