//! Sample invariant eigenfunctions, then expand a Gaussian packet in them and
//! evolve it analytically.
use qho::ermakov::{integrate, SolverConfig, SystemKind};
use qho::hermite::{expansion_coefficients, inner_product, sample_modes, suggest_grid, synthesize, Basis, ComplexField};
use qho::presets::Preset;
use qho::Complex64;

fn main() -> qho::Result<()> {
    let traj = integrate(&Preset::DrivenSho.coefficients(), &SolverConfig::new(SystemKind::Ermakov), 4.0)?;
    let (s0, s1) = (traj.state_at(0.0)?, traj.state_at(4.0)?);
    let grid = suggest_grid(30, &[s0, s1])?;

    let modes = sample_modes(3, &s1, &grid, Basis::Wave)?;
    for (m, f) in modes.iter().enumerate() {
        let row: Vec<String> = modes.iter().map(|g| format!("{:.3e}", inner_product(f, g).unwrap().norm())).collect();
        println!("<psi_{m}|psi_n> = [{}]", row.join(", "));
    }

    let packet = ComplexField::from_fn(grid, |x| Complex64::new((-(x - 1.0).powi(2)).exp(), 0.0)).normalized();
    let c = expansion_coefficients(&packet, 30, &s0)?;
    let back = synthesize(&c, &s0, &grid)?;
    println!("reconstruction error with 31 modes: {:e}", back.distance(&packet)?);
    let later = synthesize(&c, &s1, &grid)?;
    println!("norm at t = 4: {:.12}", later.norm());
    Ok(())
}
