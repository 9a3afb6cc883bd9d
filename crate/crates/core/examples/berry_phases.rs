//! Accumulate Lewis and Berry phases for a driven oscillator.
use qho::berry::{accumulate, PhaseMethod};
use qho::ermakov::{integrate, SolverConfig, SystemKind};
use qho::expr::CoefficientSet;

fn main() -> qho::Result<()> {
    let coeffs = CoefficientSet::parse(["0.5", "0.5", "0", "0", "cos(t)", "0"])?;
    let traj = integrate(&coeffs, &SolverConfig::new(SystemKind::Ermakov), 6.0)?;
    for n in 0..3 {
        let rec = accumulate(n, &traj, &[PhaseMethod::Direct, PhaseMethod::Alternative])?;
        let last = rec.times.len() - 1;
        println!(
            "n = {n}: lewis = {:.10}  berry = {:.10}  gap = {:e}",
            rec.lewis[last],
            rec.berry_direct.as_ref().unwrap()[last],
            rec.max_consistency_gap().unwrap(),
        );
    }
    Ok(())
}
