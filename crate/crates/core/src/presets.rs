//! Built-in coefficient sets.

use std::str::FromStr;

use crate::ermakov::SystemKind;
use crate::error::Error;
use crate::expr::CoefficientSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `a = b = 1/2`: the simple harmonic oscillator.
    Sho,
    /// `a = 1`, everything else zero.
    Free,
    /// `a = exp(-0.2 t)/2`, `b = exp(0.2 t)/2`.
    CaldirolaKanai,
    /// Simple harmonic oscillator with the force `f = 0.3 cos t`.
    DrivenSho,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Sho, Preset::Free, Preset::CaldirolaKanai, Preset::DrivenSho];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Sho => "sho",
            Preset::Free => "free",
            Preset::CaldirolaKanai => "caldirola-kanai",
            Preset::DrivenSho => "driven-sho",
        }
    }

    /// Expression strings for `[a, b, c, d, f, g]`.
    pub fn expressions(self) -> [&'static str; 6] {
        match self {
            Preset::Sho => ["0.5", "0.5", "0", "0", "0", "0"],
            Preset::Free => ["1", "0", "0", "0", "0", "0"],
            Preset::CaldirolaKanai => ["exp(-0.2*t)/2", "exp(0.2*t)/2", "0", "0", "0", "0"],
            Preset::DrivenSho => ["0.5", "0.5", "0", "0", "0.3*cos(t)", "0"],
        }
    }

    pub fn coefficients(self) -> CoefficientSet {
        CoefficientSet::parse(self.expressions()).expect("preset expressions parse")
    }

    /// The free particle defaults to the Riccati branch; the others to Ermakov.
    pub fn default_kind(self) -> SystemKind {
        match self {
            Preset::Free => SystemKind::Riccati,
            _ => SystemKind::Ermakov,
        }
    }

    /// `c = 2d`, `f = g = 0`: the branch where the reduced Berry rate applies.
    pub fn is_unforced_self_adjoint(self) -> bool {
        !matches!(self, Preset::DrivenSho)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }
}
