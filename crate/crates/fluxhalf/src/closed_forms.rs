//! Analytic evaluators for the vacuum, conductor and ideal-limit
//! fluctuations.
//!
//! Everything here is implemented independently of the quadrature path so
//! that each side can serve as the other's oracle. Natural units
//! hbar = c = 1; `eta` is the cutoff scale expressed as a length.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrand::Field;

/// Which closed-form quantity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormVariant {
    /// Homogeneous vacuum value 12/(pi eta^4); z-independent.
    Vacuum,
    /// Conductor value including the homogeneous part.
    ConductorRaw,
    /// Conductor value with the homogeneous vacuum part subtracted.
    ConductorRenorm,
    /// Zero-cutoff limit of the renormalized conductor value, +-3/(4 pi z^4).
    IdealRenorm,
}

/// A closed-form evaluation request.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormQuery {
    pub field: Field,
    pub variant: ClosedFormVariant,
    pub eta: f64,
    pub z: f64,
}

impl ClosedFormQuery {
    pub fn evaluate(&self) -> Result<f64> {
        match self.variant {
            ClosedFormVariant::Vacuum => vacuum_fluct(self.eta, self.field),
            ClosedFormVariant::ConductorRaw => conductor_raw(self.eta, self.z, self.field),
            ClosedFormVariant::ConductorRenorm => conductor_renorm(self.eta, self.z, self.field),
            ClosedFormVariant::IdealRenorm => ideal_renorm(self.z, self.field),
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::InvalidInput(format!(
            "eta must be finite and >= 0, got {eta}"
        )));
    }
    if eta == 0.0 {
        return Err(Error::DivergentLimit);
    }
    Ok(())
}

fn check_z(z: f64) -> Result<()> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::InvalidInput(format!(
            "z must be finite and >= 0, got {z}"
        )));
    }
    Ok(())
}

fn field_sign(field: Field) -> f64 {
    match field {
        Field::Electric => 1.0,
        Field::Magnetic => -1.0,
    }
}

/// Homogeneous vacuum fluctuation 12/(pi eta^4), identical for both fields.
pub fn vacuum_fluct(eta: f64, _field: Field) -> Result<f64> {
    check_eta(eta)?;
    Ok(12.0 / (PI * eta.powi(4)))
}

/// Renormalized conductor fluctuation
/// +-(4/pi) (12 z^2 - eta^2) / (4 z^2 + eta^2)^3 (plus sign for the electric
/// field, minus for the magnetic one).
///
/// The numerator is evaluated in the factored form
/// (sqrt(12) z - eta)(sqrt(12) z + eta) so that the sign change near
/// z = eta/sqrt(12) is not washed out by cancellation between two large
/// squares.
pub fn conductor_renorm(eta: f64, z: f64, field: Field) -> Result<f64> {
    check_eta(eta)?;
    check_z(z)?;
    let s12z = 12.0_f64.sqrt() * z;
    let numerator = (s12z - eta) * (s12z + eta);
    let denominator = (4.0 * z * z + eta * eta).powi(3);
    Ok(field_sign(field) * (4.0 / PI) * numerator / denominator)
}

/// Conductor fluctuation including the homogeneous vacuum part:
/// vacuum_fluct +- conductor_renorm.
pub fn conductor_raw(eta: f64, z: f64, field: Field) -> Result<f64> {
    Ok(vacuum_fluct(eta, field)? + conductor_renorm(eta, z, field)?)
}

/// Zero-cutoff renormalized conductor fluctuation +-3/(4 pi z^4).
///
/// Diverges at the interface: z = 0 is the surface singularity of the ideal
/// limit and is reported as such.
pub fn ideal_renorm(z: f64, field: Field) -> Result<f64> {
    check_z(z)?;
    if z == 0.0 {
        return Err(Error::SurfaceDivergence);
    }
    Ok(field_sign(field) * 3.0 / (4.0 * PI * z.powi(4)))
}

/// Exact tail integral of the renormalized conductor density:
/// int_{z0}^inf conductor_renorm(eta, z) dz, from the elementary
/// antiderivative -z / (4 pi (z^2 + eta^2/4)^2) of the electric form.
pub(crate) fn conductor_renorm_tail(eta: f64, z0: f64, field: Field) -> f64 {
    let a2 = 0.25 * eta * eta;
    field_sign(field) * z0 / (4.0 * PI * (z0 * z0 + a2).powi(2))
}
