//! JSON run configuration for the command-line front end.

use serde::{Deserialize, Serialize};

use crate::ermakov::{SolverConfig, SystemKind, SystemState};
use crate::error::{Error, Result};
use crate::expr::CoefficientSet;
use crate::hermite::{suggest_grid, Grid};
use crate::presets::Preset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientStrings {
    pub a: String,
    #[serde(default = "zero")]
    pub b: String,
    #[serde(default = "zero")]
    pub c: String,
    #[serde(default = "zero")]
    pub d: String,
    #[serde(default = "zero")]
    pub f: String,
    #[serde(default = "zero")]
    pub g: String,
}

fn zero() -> String {
    "0".into()
}

impl CoefficientStrings {
    pub fn from_preset(p: Preset) -> Self {
        let [a, b, c, d, f, g] = p.expressions().map(String::from);
        CoefficientStrings { a, b, c, d, f, g }
    }

    pub fn parse(&self) -> Result<CoefficientSet> {
        CoefficientSet::parse([&self.a, &self.b, &self.c, &self.d, &self.f, &self.g].map(String::as_str))
    }
}

/// Initial values `(alpha, beta, gamma, delta, epsilon, kappa, mu, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialData {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            alpha: 0.0,
            beta: 1.0,
            gamma: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            kappa: 0.0,
            mu: 1.0,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::new(SystemKind::Ermakov);
        SolverSettings {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: d.max_step,
        }
    }
}

/// Either an explicit grid or just a spacing for the suggested range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n_points: Option<usize>,
    pub spacing: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeSettings {
    pub dt: f64,
    pub spacing: f64,
    /// Length of the propagation window measured from `t_span[0]`.
    pub duration: f64,
}

impl Default for PdeSettings {
    fn default() -> Self {
        PdeSettings {
            dt: 1e-4,
            spacing: 0.01,
            duration: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSettings {
    pub path: Option<String>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub coefficients: Option<CoefficientStrings>,
    #[serde(default)]
    pub c0: Option<u8>,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default = "default_span")]
    pub t_span: [f64; 2],
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub grid: Option<GridSettings>,
    #[serde(default)]
    pub pde: PdeSettings,
    #[serde(default = "default_modes")]
    pub modes: Vec<usize>,
    #[serde(default)]
    pub methods: Option<Vec<String>>,
    #[serde(default)]
    pub output: OutputSettings,
}

fn default_span() -> [f64; 2] {
    [0.0, 5.0]
}

fn default_modes() -> Vec<usize> {
    vec![0, 1, 2]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: None,
            coefficients: None,
            c0: None,
            initial: InitialData::default(),
            t_span: default_span(),
            solver: SolverSettings::default(),
            grid: None,
            pde: PdeSettings::default(),
            modes: default_modes(),
            methods: None,
            output: OutputSettings::default(),
        }
    }
}

/// Validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub coeffs: CoefficientSet,
    pub solver: SolverConfig,
    pub t_end: f64,
    pub modes: Vec<usize>,
    pub grid: Option<GridSettings>,
    pub pde: PdeSettings,
}

impl Resolved {
    pub fn t_start(&self) -> f64 {
        self.solver.initial.t
    }

    pub fn kind(&self) -> SystemKind {
        self.solver.kind
    }

    /// Same run on the Ermakov branch.
    pub fn as_ermakov(&self) -> Resolved {
        let mut r = self.clone();
        r.solver.kind = SystemKind::Ermakov;
        r
    }

    /// Grid for wave functions of modes up to `n_max` along `states`, honouring overrides.
    pub fn grid_for(&self, n_max: usize, states: &[SystemState], spacing: Option<f64>) -> Result<Grid> {
        let suggested = suggest_grid(n_max, states)?;
        let o = self.grid.unwrap_or(GridSettings {
            x_min: None,
            x_max: None,
            n_points: None,
            spacing: None,
        });
        let x_min = o.x_min.unwrap_or(suggested.x_min);
        let x_max = o.x_max.unwrap_or(suggested.x_max);
        if let Some(n) = o.n_points {
            return Grid::new(x_min, x_max, n);
        }
        let h = o.spacing.or(spacing).unwrap_or_else(|| suggested.spacing());
        Grid::with_spacing(x_min, x_max, h)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn for_preset(p: Preset) -> Self {
        RunConfig {
            preset: Some(p.name().into()),
            ..Default::default()
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let preset = self.preset.as_deref().map(str::parse::<Preset>).transpose()?;
        let strings = match (&self.coefficients, preset) {
            (Some(c), _) => c.clone(),
            (None, Some(p)) => CoefficientStrings::from_preset(p),
            (None, None) => return Err(Error::Config("either `coefficients` or `preset` is required".into())),
        };
        let coeffs = strings.parse()?;
        let kind = match (self.c0, preset) {
            (Some(c0), _) => SystemKind::from_c0(c0)?,
            (None, Some(p)) => p.default_kind(),
            (None, None) => SystemKind::Ermakov,
        };

        let [t0, t1] = self.t_span;
        if !(t1 > t0) {
            return Err(Error::Config(format!("t_span must be increasing, got [{t0}, {t1}]")));
        }
        let a0 = coeffs
            .a
            .evaluate(t0)
            .map_err(|e| Error::Config(format!("cannot evaluate a(t0): {e}")))?;
        if a0 == 0.0 {
            return Err(Error::Config(
                "a(t0) must be nonzero: the substitution linking alpha and mu divides by a".into(),
            ));
        }

        let i = &self.initial;
        if !(i.beta > 0.0 && i.mu > 0.0 && i.lambda > 0.0) {
            return Err(Error::Config("initial beta, mu and lambda must be positive".into()));
        }
        if (i.lambda - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("lambda(t0) must be 1, got {}", i.lambda)));
        }
        if (i.beta * i.mu - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "initial data must satisfy beta(0) mu(0) = 1, got {}",
                i.beta * i.mu
            )));
        }
        let initial = SystemState {
            t: t0,
            alpha: i.alpha,
            beta: i.beta,
            gamma: i.gamma,
            delta: i.delta,
            epsilon: i.epsilon,
            kappa: i.kappa,
            // keep ln_mu + ln_beta = ln_lambda exact in floating point
            ln_mu: -i.beta.ln(),
            ln_lambda: 0.0,
        };
        let solver = SolverConfig {
            kind,
            rel_tol: self.solver.rel_tol,
            abs_tol: self.solver.abs_tol,
            max_step: self.solver.max_step,
            initial,
        };
        solver.validate()?;

        if let Some(&n) = self.modes.iter().find(|&&n| n > crate::hermite::MAX_MODE) {
            return Err(Error::ModeOutOfRange(n));
        }
        if !(self.pde.dt > 0.0 && self.pde.spacing > 0.0 && self.pde.duration > 0.0) {
            return Err(Error::Config("pde dt, spacing and duration must be positive".into()));
        }
        Ok(Resolved {
            coeffs,
            solver,
            t_end: t1,
            modes: self.modes.clone(),
            grid: self.grid,
            pde: self.pde,
        })
    }
}
