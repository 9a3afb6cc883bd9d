//! Commutation defects of the quadratic generators in a truncated Fock space.
use qho::invariant::su11_generators;

fn main() -> qho::Result<()> {
    for dim in [8, 32, 128] {
        let d = su11_generators(dim)?.defects();
        println!(
            "N = {dim:3}: [J0,J+] {:.1e}  [J0,J-] {:.1e}  [J+,J-] {:.1e}  scale {:.1}",
            d.zero_plus, d.zero_minus, d.plus_minus, d.scale
        );
    }
    Ok(())
}
