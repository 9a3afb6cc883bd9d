//! Subcommands of the `qho` binary.
//!
//! Each command reads a [`RunConfig`], runs the library and writes its main
//! output to `--out` (or stdout). Human-readable summaries go to stderr.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::berry::{accumulate, PhaseMethod, PhaseRecord};
use crate::config::{Format, Resolved, RunConfig};
use crate::ermakov::{char_residual, integrate, SystemKind, SystemState, Trajectory};
use crate::error::{Error, Result};
use crate::hermite::{sample_mode, Basis, ModeSpec};
use crate::invariant::su11_generators;
use crate::pde::{residual_check, PropagatorConfig};
use crate::verify::{self, VerifyOptions, PDE_TOL};

/// Exit code when a verification command ran but a check failed.
pub const EXIT_VERIFY_FAILED: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "qho", version, about = "Generalized driven harmonic oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in coefficient set replacing the configured one.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Wave,
    Invariant,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the Riccati- or Ermakov-type system.
    Solve,
    /// Accumulate Lewis and Berry phases for the configured modes.
    Berry {
        /// Comma-separated subset of direct, alt, reduced.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
    },
    /// Run the self-check suites.
    Verify {
        /// Use a grid spacing of 0.25 everywhere.
        #[arg(long)]
        coarse_grid: bool,
    },
    /// Sample one wave function on a grid.
    Wavefunction {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        time: Option<f64>,
        #[arg(long, value_enum, default_value = "wave")]
        basis: BasisArg,
    },
    /// Compare analytic wave functions with Crank–Nicolson propagation.
    PdeVerify,
    /// Check the SU(1,1) commutators on a truncated Fock space.
    AlgebraCheck {
        #[arg(long, default_value_t = 64)]
        dim: usize,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub struct Session {
    config: RunConfig,
    run: Resolved,
    format: Format,
    out: Option<PathBuf>,
    seed: u64,
}

impl Session {
    pub fn open(common: &Common) -> Result<Self> {
        let path = common
            .config
            .as_ref()
            .ok_or_else(|| Error::Config("--config FILE is required".into()))?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut config = RunConfig::from_json(&text)?;
        if let Some(p) = &common.preset {
            config.preset = Some(p.clone());
            config.coefficients = None;
        }
        let run = config.resolve()?;
        let format = match common.format {
            Some(FormatArg::Csv) => Format::Csv,
            Some(FormatArg::Json) => Format::Json,
            None => config.output.format.unwrap_or_default(),
        };
        let out = common.out.clone().or_else(|| config.output.path.as_ref().map(PathBuf::from));
        Ok(Session {
            config,
            run,
            format,
            out,
            seed: common.seed,
        })
    }

    fn write(&self, path: Option<&Path>, body: &[u8]) -> Result<()> {
        match path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?);
                w.write_all(body)?;
                w.flush()?;
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(body)?;
                lock.flush()?;
            }
        }
        Ok(())
    }

    fn write_main(&self, body: &[u8]) -> Result<()> {
        self.write(self.out.as_deref(), body)
    }

    fn trajectory(&self) -> Result<Trajectory> {
        integrate(&self.run.coeffs, &self.run.solver, self.run.t_end)
    }
}

fn json_bytes(v: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub fn run(cli: &Cli) -> Result<i32> {
    let session = Session::open(&cli.common)?;
    match &cli.command {
        Command::Solve => cmd_solve(&session),
        Command::Berry { methods } => cmd_berry(&session, methods.as_deref()),
        Command::Verify { coarse_grid } => cmd_verify(&session, *coarse_grid),
        Command::Wavefunction { n, time, basis } => cmd_wavefunction(&session, *n, *time, *basis),
        Command::PdeVerify => cmd_pde_verify(&session),
        Command::AlgebraCheck { dim } => cmd_algebra_check(&session, *dim),
    }
}

fn state_json(s: &SystemState) -> Value {
    json!({
        "t": s.t,
        "alpha": s.alpha,
        "beta": s.beta,
        "gamma": s.gamma,
        "delta": s.delta,
        "epsilon": s.epsilon,
        "kappa": s.kappa,
        "mu": s.mu(),
        "lambda": s.lambda(),
    })
}

/// Largest characteristic-equation residual over the nodes where `a != 0`.
fn max_char_residual(traj: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in traj.times() {
        match char_residual(traj, t) {
            Ok(r) => worst = worst.max(r),
            Err(Error::Domain { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

fn solve_summary(traj: &Trajectory) -> Result<Value> {
    Ok(json!({
        "kind": match traj.kind() { SystemKind::Riccati => "riccati", SystemKind::Ermakov => "ermakov" },
        "samples": traj.samples().len(),
        "end_state": state_json(traj.last()),
        "max_char_residual": max_char_residual(traj)?,
        "max_beta_mu_lambda_gap": traj.max_beta_mu_lambda_gap(),
    }))
}

/// Trajectory CSV to the output and the summary to `<out>.summary.json`
/// (stderr without `--out`); with JSON format both go in one document.
pub fn cmd_solve(session: &Session) -> Result<i32> {
    let traj = session.trajectory()?;
    let summary = solve_summary(&traj)?;
    match session.format {
        Format::Csv => {
            let mut body = Vec::new();
            traj.write_csv(&mut body)?;
            session.write_main(&body)?;
            let text = json_bytes(&summary)?;
            match &session.out {
                Some(p) => session.write(Some(&sidecar(p, "summary.json")), &text)?,
                None => std::io::stderr().write_all(&text)?,
            }
        }
        Format::Json => {
            let s = traj.samples();
            let column = |f: fn(&SystemState) -> f64| s.iter().map(|x| f(&x.state)).collect::<Vec<_>>();
            let doc = json!({
                "summary": summary,
                "trajectory": {
                    "t": column(|s| s.t),
                    "alpha": column(|s| s.alpha),
                    "beta": column(|s| s.beta),
                    "gamma": column(|s| s.gamma),
                    "delta": column(|s| s.delta),
                    "epsilon": column(|s| s.epsilon),
                    "kappa": column(|s| s.kappa),
                    "mu": column(SystemState::mu),
                    "lambda": column(SystemState::lambda),
                },
            });
            session.write_main(&json_bytes(&doc)?)?;
        }
    }
    Ok(0)
}

/// `dir/name.ext` to `dir/name.<suffix>`, keeping the stem.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// `dir/name.ext` to `dir/name_n<k>.ext`.
pub fn per_mode_path(path: &Path, n: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_n{n}.{}", ext.to_string_lossy()),
        None => format!("{stem}_n{n}"),
    };
    path.with_file_name(name)
}

fn resolve_methods(session: &Session, flag: Option<&[String]>) -> Result<Vec<PhaseMethod>> {
    let names: Option<Vec<String>> = flag.map(<[String]>::to_vec).or_else(|| session.config.methods.clone());
    let mut methods = match names {
        Some(n) => n.iter().map(|s| s.trim().parse()).collect::<Result<Vec<PhaseMethod>>>()?,
        None => match session.run.kind() {
            SystemKind::Ermakov => vec![PhaseMethod::Direct, PhaseMethod::Alternative],
            SystemKind::Riccati => vec![PhaseMethod::Direct],
        },
    };
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(Error::Config("no phase methods selected".into()));
    }
    Ok(methods)
}

fn record_json(r: &PhaseRecord) -> Value {
    json!({
        "n": r.n,
        "t": r.times,
        "lewis": r.lewis,
        "berry_direct": r.berry_direct,
        "berry_alt": r.berry_alt,
        "berry_reduced": r.berry_reduced,
        "consistency_gap": r.consistency_gap(),
        "max_consistency_gap": r.max_consistency_gap(),
    })
}

/// One CSV per mode: `<out>_n<k>.csv` when several modes go to a file, and
/// `# n=<k>` separated sections on stdout.
pub fn cmd_berry(session: &Session, methods: Option<&[String]>) -> Result<i32> {
    let methods = resolve_methods(session, methods)?;
    let traj = session.trajectory()?;
    let records = session
        .run
        .modes
        .iter()
        .map(|&n| accumulate(n, &traj, &methods))
        .collect::<Result<Vec<_>>>()?;
    for r in &records {
        if let Some(g) = r.max_consistency_gap() {
            eprintln!("n = {}: max consistency gap {g:e}", r.n);
        }
    }
    match session.format {
        Format::Json => {
            let doc: Vec<Value> = records.iter().map(record_json).collect();
            session.write_main(&json_bytes(&doc)?)?;
        }
        Format::Csv => match (&session.out, records.len()) {
            (Some(p), 1) => {
                let mut body = Vec::new();
                records[0].write_csv(&mut body, true)?;
                session.write(Some(p), &body)?;
            }
            (Some(p), _) => {
                for r in &records {
                    let mut body = Vec::new();
                    r.write_csv(&mut body, true)?;
                    session.write(Some(&per_mode_path(p, r.n)), &body)?;
                }
            }
            (None, _) => {
                let mut body = Vec::new();
                for r in &records {
                    writeln!(body, "# n={}", r.n)?;
                    r.write_csv(&mut body, true)?;
                }
                session.write(None, &body)?;
            }
        },
    }
    Ok(0)
}

pub fn cmd_verify(session: &Session, coarse_grid: bool) -> Result<i32> {
    let report = verify::run(
        &session.run,
        VerifyOptions {
            seed: session.seed,
            coarse_grid,
        },
    )?;
    for s in &report.suites {
        eprintln!("{}", s.summary_line());
    }
    let body = match session.format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => {
            let mut b = Vec::new();
            writeln!(b, "suite,passed,measured,tolerance")?;
            for s in &report.suites {
                let measured = s.measured.map(crate::io::fmt_f64).unwrap_or_else(|| "nan".into());
                writeln!(b, "{},{},{},{}", s.name, s.passed, measured, crate::io::fmt_f64(s.tolerance))?;
            }
            b
        }
    };
    session.write_main(&body)?;
    Ok(if report.passed { 0 } else { EXIT_VERIFY_FAILED })
}

pub fn cmd_wavefunction(session: &Session, n: Option<usize>, time: Option<f64>, basis: BasisArg) -> Result<i32> {
    let run = session.run.as_ermakov();
    let n = n.or_else(|| run.modes.first().copied()).unwrap_or(0);
    let t = time.unwrap_or(run.t_end);
    let traj = integrate(&run.coeffs, &run.solver, run.t_end)?;
    let mode = ModeSpec::new(n, traj.state_at(t)?)?;
    let grid = run.grid_for(n, &[mode.state], None)?;
    let basis = match basis {
        BasisArg::Wave => Basis::Wave,
        BasisArg::Invariant => Basis::Invariant,
    };
    let field = sample_mode(&mode, &grid, basis);
    let body = match session.format {
        Format::Csv => {
            let mut b = Vec::new();
            field.write_csv(&mut b)?;
            b
        }
        Format::Json => {
            let mut doc = field.to_json();
            doc["n"] = json!(n);
            doc["t"] = json!(t);
            doc["state"] = state_json(&mode.state);
            json_bytes(&doc)?
        }
    };
    session.write_main(&body)?;
    Ok(0)
}

pub fn cmd_pde_verify(session: &Session) -> Result<i32> {
    let run = session.run.as_ermakov();
    let traj = integrate(&run.coeffs, &run.solver, run.t_end)?;
    let t0 = traj.start();
    let t1 = (t0 + run.pde.duration).min(traj.end());
    let checkpoints = verify::checkpoints(t0, t1, 0.5);
    let states = std::iter::once(t0)
        .chain(checkpoints.iter().copied())
        .map(|t| traj.state_at(t))
        .collect::<Result<Vec<_>>>()?;
    let n_max = run.modes.iter().copied().max().unwrap_or(0);
    let grid = run.grid_for(n_max, &states, Some(run.pde.spacing))?;
    let cfg = PropagatorConfig::new(grid, run.pde.dt)?;
    let reports = run
        .modes
        .iter()
        .map(|&n| residual_check(n, &traj, &cfg, &checkpoints))
        .collect::<Result<Vec<_>>>()?;
    let max = reports.iter().map(|r| r.max).fold(0.0, f64::max);
    let passed = max <= PDE_TOL;
    eprintln!("{} pde-residual {max:e} <= {PDE_TOL:e}", if passed { "PASS" } else { "FAIL" });
    let body = match session.format {
        Format::Json => json_bytes(&json!({
            "grid": grid,
            "dt": cfg.dt,
            "reports": reports,
            "max": max,
            "tolerance": PDE_TOL,
            "passed": passed,
        }))?,
        Format::Csv => {
            let mut b = Vec::new();
            writeln!(b, "n,t,distance")?;
            for r in &reports {
                for (t, d) in r.checkpoints.iter().zip(&r.distances) {
                    writeln!(b, "{},{}", r.n, crate::io::csv_row(&[*t, *d]))?;
                }
            }
            b
        }
    };
    session.write_main(&body)?;
    Ok(if passed { 0 } else { EXIT_VERIFY_FAILED })
}

/// Defects must stay within 16 ulps of the largest entry involved.
pub fn su11_tolerance(scale: f64) -> f64 {
    16.0 * f64::EPSILON * scale
}

pub fn cmd_algebra_check(session: &Session, dim: usize) -> Result<i32> {
    let d = su11_generators(dim)?.defects();
    let tol = su11_tolerance(d.scale);
    let worst = d.zero_plus.max(d.zero_minus).max(d.plus_minus);
    let passed = worst <= tol;
    eprintln!("{} su11 {worst:e} <= {tol:e}", if passed { "PASS" } else { "FAIL" });
    let body = match session.format {
        Format::Json => json_bytes(&json!({
            "dim": dim,
            "defects": d,
            "tolerance": tol,
            "passed": passed,
        }))?,
        Format::Csv => {
            let mut b = Vec::new();
            writeln!(b, "relation,defect")?;
            for (name, v) in [("[J0,J+]-J+", d.zero_plus), ("[J0,J-]+J-", d.zero_minus), ("[J+,J-]+2J0", d.plus_minus)] {
                writeln!(b, "{name},{}", crate::io::fmt_f64(v))?;
            }
            b
        }
    };
    session.write_main(&body)?;
    Ok(if passed { 0 } else { EXIT_VERIFY_FAILED })
}
