//! Vacuum electromagnetic field fluctuations outside a non-dissipative
//! dielectric half-space.
//!
//! The dielectric (real, frequency-independent index n >= 1) fills z < 0;
//! the library computes the renormalized <E^2> and <B^2> fluctuations at
//! height z > 0 with an exponential high-frequency cutoff e^{-eta omega},
//! using the complete traveling + evanescent mode set of the interface.
//! The ideal-conductor limit is reached as a distinguished n = inf value
//! with closed forms for every cutoff, exposing the surface peak structure
//! that collapses into the z^-4 divergence as the cutoff is removed, and
//! far-zone Casimir-Polder energies derived from it.
//!
//! Internally everything is in natural units (hbar = c = 1, lengths in the
//! user's base unit); SI conversion is confined to [`units`].

pub mod analysis;
pub mod closed_forms;
pub mod error;
pub mod integrand;
pub mod modes;
pub mod quadrature;
pub mod sweep;
pub mod units;

pub use analysis::{casimir_polder, peak_structure, PeakStructure, PolarizableBody};
pub use error::{Error, Result};
pub use integrand::{Field, IntegrandSpec};
pub use modes::{Medium, ModeFactors, RefractiveIndex};
pub use quadrature::{
    integrate_fluctuation, integrate_renormalized_conductor, FluctuationResult, QuadratureConfig,
};
pub use sweep::{run_sweep, OutputRecord, SweepSpec};
