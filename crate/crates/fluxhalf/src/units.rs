//! Conversion between the internal natural units (hbar = c = 1, lengths in
//! meters) and SI.
//!
//! In natural units a fluctuation density is a length^-4, times are carried
//! as lengths (c times the time), and frequencies as inverse lengths.

use std::str::FromStr;

use crate::error::{Error, Result};

/// CODATA-2018 reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Exact speed of light, m/s.
pub const C: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantityKind {
    /// Squared-field fluctuation (an energy density): length^-4 <-> J/m^3.
    FluctuationDensity,
    /// Energy: length^-1 <-> J.
    Energy,
    /// Length: meters on both sides.
    Length,
    /// Time: length <-> seconds.
    Time,
    /// Frequency: inverse length <-> Hz.
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    NaturalToSi,
    SiToNatural,
}

/// Exact factor application; the natural -> SI -> natural round trip is an
/// identity up to one rounding per leg.
pub fn convert_units(value: f64, kind: QuantityKind, direction: Direction) -> f64 {
    let to_si = match kind {
        QuantityKind::FluctuationDensity | QuantityKind::Energy => |v: f64| v * (HBAR * C),
        QuantityKind::Length => |v: f64| v,
        QuantityKind::Time => |v: f64| v / C,
        QuantityKind::Frequency => |v: f64| v * C,
    };
    let from_si = match kind {
        QuantityKind::FluctuationDensity | QuantityKind::Energy => |v: f64| v / (HBAR * C),
        QuantityKind::Length => |v: f64| v,
        QuantityKind::Time => |v: f64| v * C,
        QuantityKind::Frequency => |v: f64| v / C,
    };
    match direction {
        Direction::NaturalToSi => to_si(value),
        Direction::SiToNatural => from_si(value),
    }
}

/// Unit system of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSystem {
    Natural,
    Si,
}

impl FromStr for UnitSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "natural" => Ok(UnitSystem::Natural),
            "si" => Ok(UnitSystem::Si),
            other => Err(Error::InvalidInput(format!(
                "unknown unit system {other:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn cutoff_frequency_round_trip() {
        // eta = 5e-17 s corresponds to a 2e16 Hz cutoff
        let eta_si = 5e-17;
        let eta_nat = convert_units(eta_si, QuantityKind::Time, Direction::SiToNatural);
        assert_relative_eq!(eta_nat, C * 5e-17, max_relative = 1e-15);
        let omega_nat = 1.0 / eta_nat;
        let omega_si = convert_units(omega_nat, QuantityKind::Frequency, Direction::NaturalToSi);
        assert_relative_eq!(omega_si, 2e16, max_relative = 1e-14);
    }

    #[test]
    fn round_trips_are_identities() {
        for kind in [
            QuantityKind::FluctuationDensity,
            QuantityKind::Energy,
            QuantityKind::Length,
            QuantityKind::Time,
            QuantityKind::Frequency,
        ] {
            for v in [1.0, 3.7e-9, 8.1e14] {
                let si = convert_units(v, kind, Direction::NaturalToSi);
                let back = convert_units(si, kind, Direction::SiToNatural);
                assert_relative_eq!(back, v, max_relative = 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn vacuum_density_in_si() {
        // natural vacuum value at eta = 1 s: 12/(pi (c eta)^4) m^-4,
        // which must convert to 12 hbar / (pi c^3 eta^4) J/m^3
        let eta_s = 1.0;
        let eta_nat = C * eta_s;
        let natural = 12.0 / (PI * eta_nat.powi(4));
        let si = convert_units(
            natural,
            QuantityKind::FluctuationDensity,
            Direction::NaturalToSi,
        );
        let expected = 12.0 * HBAR / (PI * C.powi(3) * eta_s.powi(4));
        assert_relative_eq!(si, expected, max_relative = 1e-14);
    }
}
