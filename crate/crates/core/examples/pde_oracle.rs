//! Propagate the lowest mode with Crank-Nicolson and compare with the
//! analytic solution.
use qho::ermakov::{integrate, SolverConfig, SystemKind};
use qho::hermite::Grid;
use qho::pde::{residual_check, PropagatorConfig};
use qho::presets::Preset;

fn main() -> qho::Result<()> {
    let traj = integrate(&Preset::CaldirolaKanai.coefficients(), &SolverConfig::new(SystemKind::Ermakov), 2.0)?;
    for h in [0.04, 0.02, 0.01] {
        let cfg = PropagatorConfig::new(Grid::with_spacing(-12.0, 12.0, h)?, 1e-3)?;
        let report = residual_check(0, &traj, &cfg, &[0.5, 1.0, 1.5, 2.0])?;
        println!("h = {h}: max relative L2 distance {:e}", report.max);
    }
    Ok(())
}
