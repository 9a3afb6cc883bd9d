//! Check the ladder action and the invariant spectrum on a grid.
use qho::ermakov::{integrate, SolverConfig, SystemKind};
use qho::hermite::{inner_product, sample_modes, suggest_grid, Basis, Grid};
use qho::invariant::{annihilation, creation, expectation_invariant};
use qho::presets::Preset;

fn main() -> qho::Result<()> {
    let traj = integrate(&Preset::CaldirolaKanai.coefficients(), &SolverConfig::new(SystemKind::Ermakov), 3.0)?;
    let s = traj.state_at(2.5)?;
    // derivative stencils want a finer spacing than the sampling default
    let extent = suggest_grid(6, &[s])?;
    let grid = Grid::with_spacing(extent.x_min, extent.x_max, 0.01)?;
    let modes = sample_modes(6, &s, &grid, Basis::Invariant)?;
    let (a, ad) = (annihilation(&s), creation(&s));
    for n in 0..5 {
        let up = ad.apply(&modes[n])?;
        let down = a.apply(&modes[n + 1])?;
        let lam = s.lambda();
        println!(
            "n = {n}: <n+1|a^dag|n> = {:.8}  <n|a|n+1> = {:.8}  sqrt(n+1) = {:.8}  <I>/lambda = {:.8}",
            (inner_product(&modes[n + 1], &up)? * lam).re,
            (inner_product(&modes[n], &down)? * lam).re,
            ((n + 1) as f64).sqrt(),
            expectation_invariant(&modes[n].normalized(), &s)? / lam,
        );
    }
    Ok(())
}
