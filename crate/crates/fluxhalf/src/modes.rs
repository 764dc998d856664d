//! Wavevector kinematics, Fresnel-type amplitude factors and vacuum-side
//! mode intensities for a non-dissipative dielectric half-space.
//!
//! The dielectric fills z < 0 and has a real, frequency-independent
//! refractive index n >= 1; z > 0 is vacuum. Modes are labelled by the side
//! they approach the interface from (R = from vacuum, L = from the
//! dielectric) and by their polarization (TE or TM). L modes beyond the
//! critical angle are totally reflected inside the dielectric and leave an
//! evanescent tail on the vacuum side.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Refractive index of the half-space.
///
/// The ideal-conductor limit is a distinguished value, never a large float:
/// operations that accept it dispatch to analytic limit expressions instead
/// of evaluating the finite-n formulas near overflow or cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefractiveIndex {
    Finite(f64),
    Infinite,
}

impl RefractiveIndex {
    /// A validated finite index (n >= 1; n = 1 is vacuum).
    pub fn finite(n: f64) -> Result<Self> {
        if !n.is_finite() || n < 1.0 {
            return Err(Error::InvalidInput(format!(
                "refractive index must be finite and >= 1, got {n}"
            )));
        }
        Ok(RefractiveIndex::Finite(n))
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, RefractiveIndex::Finite(n) if *n == 1.0)
    }

    pub fn as_finite(&self) -> Option<f64> {
        match self {
            RefractiveIndex::Finite(n) => Some(*n),
            RefractiveIndex::Infinite => None,
        }
    }
}

impl fmt::Display for RefractiveIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefractiveIndex::Finite(n) => write!(f, "{n}"),
            RefractiveIndex::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for RefractiveIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "infinite" => Ok(RefractiveIndex::Infinite),
            other => {
                let n: f64 = other.parse().map_err(|_| {
                    Error::InvalidInput(format!("cannot parse refractive index {other:?}"))
                })?;
                RefractiveIndex::finite(n)
            }
        }
    }
}

/// The physical configuration: a half-space of index `n` probed with an
/// exponential high-frequency cutoff of timescale eta.
///
/// Natural units hbar = c = 1 are used throughout the library, so `eta`
/// carries an inverse-wavenumber scale (c times the cutoff time). `eta = 0`
/// is allowed at construction but is usable only with the closed-form
/// evaluators; the quadrature layer rejects it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub n: RefractiveIndex,
    pub eta: f64,
}

impl Medium {
    pub fn new(n: RefractiveIndex, eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::InvalidInput(format!(
                "cutoff scale eta must be finite and >= 0, got {eta}"
            )));
        }
        Ok(Medium { n, eta })
    }
}

/// Mode channel on the vacuum side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    RTraveling,
    LTraveling,
    LEvanescent,
}

/// Side a mode approaches the interface from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeFamily {
    /// Incident from the vacuum side.
    R,
    /// Incident from inside the dielectric.
    L,
}

/// Transverse electric or transverse magnetic polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Te,
    Tm,
}

/// Validated wavevector components of one mode.
///
/// Traveling channels satisfy k_dz^2 = (n^2-1) k_par^2 + n^2 k_z^2 and
/// k^2 = k_par^2 + k_z^2; the evanescent channel replaces k_z by a decay
/// rate kappa with k_dz^2 = (n^2-1) k_par^2 - n^2 kappa^2 and
/// k^2 = k_par^2 - kappa^2 > 0.
#[derive(Debug, Clone, Copy)]
pub struct WaveVectors {
    pub k_par: f64,
    /// k_z for traveling channels, kappa for the evanescent one.
    pub k_normal: f64,
    pub k_dz: f64,
    /// Vacuum total wavenumber omega/c.
    pub k: f64,
    pub channel: Channel,
}

impl WaveVectors {
    pub fn traveling(k_par: f64, k_z: f64, n: f64) -> Result<Self> {
        let k_dz = dielectric_kz(k_par, k_z, n)?;
        Ok(WaveVectors {
            k_par,
            k_normal: k_z,
            k_dz,
            k: k_par.hypot(k_z),
            channel: Channel::RTraveling,
        })
    }

    pub fn evanescent(k_par: f64, kappa: f64, n: f64) -> Result<Self> {
        let kappa_max = evanescent_kappa_max(k_par, n)?;
        if !(kappa >= 0.0 && kappa < kappa_max) {
            return Err(Error::InvalidInput(format!(
                "kappa = {kappa} outside the evanescent domain [0, {kappa_max})"
            )));
        }
        let k_dz2 = (n - 1.0) * (n + 1.0) * k_par * k_par - n * n * kappa * kappa;
        Ok(WaveVectors {
            k_par,
            k_normal: kappa,
            k_dz: k_dz2.max(0.0).sqrt(),
            k: ((k_par - kappa) * (k_par + kappa)).sqrt(),
            channel: Channel::LEvanescent,
        })
    }
}

/// Reflection and vacuum-side transmission amplitude factors of one
/// (k_par, k_z) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFactors {
    pub r_te: f64,
    pub r_tm: f64,
    pub t_te: f64,
    pub t_tm: f64,
}

fn check_wavenumbers(k_par: f64, k_z: f64) -> Result<()> {
    if !k_par.is_finite() || k_par < 0.0 || !k_z.is_finite() || k_z < 0.0 {
        return Err(Error::InvalidInput(format!(
            "wavenumbers must be finite and >= 0, got k_par = {k_par}, k_z = {k_z}"
        )));
    }
    Ok(())
}

fn check_index(n: f64) -> Result<()> {
    if !n.is_finite() || n < 1.0 {
        return Err(Error::InvalidInput(format!(
            "refractive index must be finite and >= 1, got {n}"
        )));
    }
    Ok(())
}

/// Normal wavenumber inside the dielectric for a traveling mode:
/// k_dz = sqrt((n^2 - 1) k_par^2 + n^2 k_z^2).
///
/// The n^2 - 1 factor is computed as (n-1)(n+1) so that indices very close
/// to one keep full relative precision.
pub fn dielectric_kz(k_par: f64, k_z: f64, n: f64) -> Result<f64> {
    check_wavenumbers(k_par, k_z)?;
    check_index(n)?;
    Ok(((n - 1.0) * (n + 1.0) * k_par * k_par + n * n * k_z * k_z).sqrt())
}

/// Upper edge of the vacuum-side decay rate of totally reflected L modes:
/// kappa_max = sqrt(n^2 - 1) k_par / n. The evanescent channel lives on
/// kappa in [0, kappa_max), which is empty in vacuum (n = 1).
pub fn evanescent_kappa_max(k_par: f64, n: f64) -> Result<f64> {
    if !k_par.is_finite() || k_par < 0.0 {
        return Err(Error::InvalidInput(format!(
            "k_par must be finite and >= 0, got {k_par}"
        )));
    }
    check_index(n)?;
    Ok(((n - 1.0) * (n + 1.0)).sqrt() * k_par / n)
}

/// TE/TM reflection factors and vacuum-side L-mode transmission factors.
///
/// k_z = 0 is rejected: grazing incidence is an integrable endpoint handled
/// by the quadrature layer, not by this operation.
pub fn fresnel_factors(k_par: f64, k_z: f64, n: f64) -> Result<ModeFactors> {
    check_wavenumbers(k_par, k_z)?;
    check_index(n)?;
    if k_z == 0.0 {
        return Err(Error::InvalidInput(
            "k_z = 0 (grazing incidence) is an open endpoint".into(),
        ));
    }
    let k_dz = dielectric_kz(k_par, k_z, n)?;
    let n2kz = n * n * k_z;
    Ok(ModeFactors {
        r_te: (k_z - k_dz) / (k_z + k_dz),
        r_tm: (n2kz - k_dz) / (n2kz + k_dz),
        t_te: 2.0 * k_dz / (k_dz + k_z),
        t_tm: 2.0 * n * k_dz / (k_dz + n2kz),
    })
}

/// Vacuum-side intensity (2pi)^3 sum_lambda |f^>|^2 of one traveling mode at
/// height z.
///
/// R modes carry the incident/reflected interference; the L intensities are
/// z-independent and include the 1/n^2 of the L-mode normalization, so the
/// full traveling integrand is recovered with the measure Jacobian
/// n^2 k_z / k_dz on the L channel.
pub fn mode_intensity(
    family: ModeFamily,
    pol: Polarization,
    k_par: f64,
    k_z: f64,
    z: f64,
    n: f64,
) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::InvalidInput(format!(
            "height z must be finite and >= 0, got {z}"
        )));
    }
    let f = fresnel_factors(k_par, k_z, n)?;
    let value = match (family, pol) {
        (ModeFamily::R, Polarization::Te) => {
            1.0 + f.r_te * f.r_te + 2.0 * f.r_te * (2.0 * k_z * z).cos()
        }
        (ModeFamily::R, Polarization::Tm) => {
            let k2 = k_par * k_par + k_z * k_z;
            let geom = 2.0 * k_par * k_par / k2 - 1.0;
            1.0 + f.r_tm * f.r_tm + 2.0 * geom * f.r_tm * (2.0 * k_z * z).cos()
        }
        (ModeFamily::L, Polarization::Te) => f.t_te * f.t_te / (n * n),
        (ModeFamily::L, Polarization::Tm) => f.t_tm * f.t_tm / (n * n),
    };
    Ok(value)
}
