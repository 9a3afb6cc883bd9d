//! Generalized driven harmonic oscillators: the Riccati/Ermakov-type system
//! behind their exact wave functions, the quadratic dynamical invariant and
//! its ladder operators, and the Lewis and Berry phases, each checked against
//! a direct Crank–Nicolson solution of the Schrödinger equation.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = a p^2 + b x^2 + (c/2)(p x + x p) + (i/2)(c - 2d) - f x - g p
//! ```
//!
//! with arbitrary real coefficient functions of time given as expressions in `t`.
//!
//! ```
//! use qho::{ermakov, presets::Preset};
//!
//! let coeffs = Preset::CaldirolaKanai.coefficients();
//! let cfg = ermakov::SolverConfig::new(ermakov::SystemKind::Ermakov);
//! let traj = ermakov::integrate(&coeffs, &cfg, 5.0).unwrap();
//! assert!(traj.max_beta_mu_lambda_gap() < 1e-8);
//! ```

pub mod berry;
pub mod cli;
pub mod config;
pub mod ermakov;
pub mod error;
pub mod expr;
pub mod hermite;
pub mod invariant;
pub mod io;
pub mod pde;
pub mod presets;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
