//! Integrate the auxiliary system for a damped oscillator and print the
//! trajectory as CSV.
use qho::ermakov::{char_residual, integrate, SolverConfig, SystemKind};
use qho::presets::Preset;

fn main() -> qho::Result<()> {
    let coeffs = Preset::CaldirolaKanai.coefficients();
    let traj = integrate(&coeffs, &SolverConfig::new(SystemKind::Ermakov), 5.0)?;
    traj.write_csv(std::io::stdout().lock())?;
    eprintln!("{} samples", traj.samples().len());
    eprintln!("max |beta mu - lambda| = {:e}", traj.max_beta_mu_lambda_gap());
    eprintln!("characteristic residual at t = 1: {:e}", char_residual(&traj, 1.0)?);
    Ok(())
}
