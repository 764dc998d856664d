//! Scalar integrands of the squared-field fluctuations over the
//! (k_par, k_z) quarter-plane and the (k_par, kappa) evanescent strip.
//!
//! Every function here returns the density k_par * k * {brace}; the global
//! hbar c / (2 pi) normalization and the exponential cutoff e^{-eta k} are
//! applied by the quadrature layer, so each brace term stays checkable
//! against a hand-substitution oracle on its own.
//!
//! All brace factors are homogeneous of degree zero in the wavevector, so
//! along a ray k_z = u k, k_par = sqrt(1-u^2) k the traveling integrand
//! collapses to A(u) + B(u) cos(2 k z u). The profile helpers at the bottom
//! expose that decomposition to the quadrature layer.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::modes::{dielectric_kz, evanescent_kappa_max, fresnel_factors, Medium, RefractiveIndex};

/// Which squared field is being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Electric,
    Magnetic,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Electric => write!(f, "E"),
            Field::Magnetic => write!(f, "B"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "E" | "e" | "electric" => Ok(Field::Electric),
            "B" | "b" | "magnetic" => Ok(Field::Magnetic),
            other => Err(Error::InvalidInput(format!("unknown field {other:?}"))),
        }
    }
}

/// One fluctuation query: field, configuration, height and whether the
/// homogeneous vacuum part is subtracted pointwise.
#[derive(Debug, Clone, Copy)]
pub struct IntegrandSpec {
    pub field: Field,
    pub medium: Medium,
    pub z: f64,
    pub renormalized: bool,
}

impl IntegrandSpec {
    pub fn new(field: Field, medium: Medium, z: f64, renormalized: bool) -> Result<Self> {
        if !z.is_finite() || z < 0.0 {
            return Err(Error::InvalidInput(format!(
                "height z must be finite and >= 0 (vacuum side), got {z}"
            )));
        }
        Ok(IntegrandSpec {
            field,
            medium,
            z,
            renormalized,
        })
    }
}

/// Normal coordinate of the renormalized integrand: a traveling k_z or an
/// evanescent decay rate kappa.
#[derive(Debug, Clone, Copy)]
pub enum NormalWavenumber {
    Traveling(f64),
    Evanescent(f64),
}

fn finite_index(spec: &IntegrandSpec) -> Result<f64> {
    spec.medium.n.as_finite().ok_or_else(|| {
        Error::InvalidInput("n = inf has no finite-n integrand; use conductor_limit".into())
    })
}

/// Traveling brace common to both fields, with the field selecting which
/// interference term carries the geometric factor 2 k_par^2/k^2 - 1.
fn traveling_brace(k_par: f64, k_z: f64, z: f64, n: f64, field: Field) -> Result<f64> {
    let f = fresnel_factors(k_par, k_z, n)?;
    let k_dz = dielectric_kz(k_par, k_z, n)?;
    let k2 = k_par * k_par + k_z * k_z;
    let geom = 2.0 * k_par * k_par / k2 - 1.0;
    let osc = (2.0 * k_z * z).cos();
    let (te_factor, tm_factor) = match field {
        Field::Electric => (1.0, geom),
        Field::Magnetic => (geom, 1.0),
    };
    Ok(2.0
        + f.r_te * f.r_te
        + f.r_tm * f.r_tm
        + 2.0 * te_factor * f.r_te * osc
        + 2.0 * tm_factor * f.r_tm * osc
        + (k_z / k_dz) * (f.t_te * f.t_te + f.t_tm * f.t_tm))
}

/// Electric traveling-channel density k_par * k * {brace}.
pub fn electric_traveling(k_par: f64, k_z: f64, spec: &IntegrandSpec) -> Result<f64> {
    let n = finite_index(spec)?;
    let brace = traveling_brace(k_par, k_z, spec.z, n, Field::Electric)?;
    Ok(k_par * k_par.hypot(k_z) * brace)
}

/// Magnetic traveling-channel density; differs from the electric one only
/// through the interference factors.
pub fn magnetic_traveling(k_par: f64, k_z: f64, spec: &IntegrandSpec) -> Result<f64> {
    let n = finite_index(spec)?;
    let brace = traveling_brace(k_par, k_z, spec.z, n, Field::Magnetic)?;
    Ok(k_par * k_par.hypot(k_z) * brace)
}

/// Evanescent-channel density k_par * k * (kappa/k_dz) *
/// [4 k_dz^2/(k_dz^2 + kappa^2) + 4 n^2 k_dz^2/(k_dz^2 + n^4 kappa^2)]
/// e^{-2 kappa z}, with k_dz^2 = (n^2-1) k_par^2 - n^2 kappa^2 and
/// k = sqrt(k_par^2 - kappa^2).
///
/// The kappa/k_dz prefactor is folded into the bracket so the kappa ->
/// kappa_max endpoint (k_dz -> 0) evaluates cleanly to zero.
pub fn electric_evanescent(k_par: f64, kappa: f64, spec: &IntegrandSpec) -> Result<f64> {
    let n = finite_index(spec)?;
    if n == 1.0 {
        // empty domain: vacuum has no evanescent channel
        return Ok(0.0);
    }
    let kappa_max = evanescent_kappa_max(k_par, n)?;
    if !(kappa >= 0.0 && kappa < kappa_max) {
        return Err(Error::InvalidInput(format!(
            "kappa = {kappa} outside the evanescent domain [0, {kappa_max})"
        )));
    }
    let kd2 = (n - 1.0) * (n + 1.0) * k_par * k_par - n * n * kappa * kappa;
    let k_dz = kd2.max(0.0).sqrt();
    let k = ((k_par - kappa) * (k_par + kappa)).sqrt();
    let bracket = 4.0 / (kd2 + kappa * kappa) + 4.0 * n * n / (kd2 + n.powi(4) * kappa * kappa);
    Ok(k_par * k * kappa * k_dz * bracket * (-2.0 * kappa * spec.z).exp())
}

/// The magnetic evanescent density coincides with the electric one.
pub fn magnetic_evanescent(k_par: f64, kappa: f64, spec: &IntegrandSpec) -> Result<f64> {
    electric_evanescent(k_par, kappa, spec)
}

/// Ideal-conductor traveling density:
/// electric 4 (k_par/k)(k_par^2 + 2 k_z^2 sin^2(k_z z)),
/// magnetic 4 (k_par/k)(k_par^2 + 2 k_z^2 cos^2(k_z z)).
pub fn conductor_limit(k_par: f64, k_z: f64, z: f64, field: Field) -> Result<f64> {
    if !k_par.is_finite() || k_par < 0.0 || !k_z.is_finite() || k_z < 0.0 {
        return Err(Error::InvalidInput(format!(
            "wavenumbers must be finite and >= 0, got k_par = {k_par}, k_z = {k_z}"
        )));
    }
    if !z.is_finite() || z < 0.0 {
        return Err(Error::InvalidInput(format!(
            "height z must be finite and >= 0, got {z}"
        )));
    }
    let k = k_par.hypot(k_z);
    if k == 0.0 {
        return Err(Error::InvalidInput(
            "k_par = k_z = 0 has no direction".into(),
        ));
    }
    let half = match field {
        Field::Electric => (k_z * z).sin().powi(2),
        Field::Magnetic => (k_z * z).cos().powi(2),
    };
    Ok(4.0 * (k_par / k) * (k_par * k_par + 2.0 * k_z * k_z * half))
}

/// Renormalized density: the traveling channel minus its homogeneous n = 1
/// value (which is 4 k_par k), the evanescent channel unchanged (its n = 1
/// contribution is an empty domain). For n = inf the traveling subtraction
/// collapses to the single term -+4 k_par k_z^2 cos(2 k_z z) / k.
pub fn renormalized_integrand(
    k_par: f64,
    normal: NormalWavenumber,
    spec: &IntegrandSpec,
) -> Result<f64> {
    if !spec.renormalized {
        return Err(Error::InvalidInput(
            "renormalized_integrand requires a renormalized spec".into(),
        ));
    }
    match normal {
        NormalWavenumber::Traveling(k_z) => match spec.medium.n {
            RefractiveIndex::Infinite => {
                if !k_par.is_finite() || k_par < 0.0 || !k_z.is_finite() || k_z <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "need k_par >= 0 and k_z > 0, got k_par = {k_par}, k_z = {k_z}"
                    )));
                }
                let k = k_par.hypot(k_z);
                let sign = match spec.field {
                    Field::Electric => -1.0,
                    Field::Magnetic => 1.0,
                };
                Ok(sign * 4.0 * k_par * k_z * k_z * (2.0 * k_z * spec.z).cos() / k)
            }
            RefractiveIndex::Finite(n) => {
                let brace = traveling_brace(k_par, k_z, spec.z, n, spec.field)?;
                Ok(k_par * k_par.hypot(k_z) * (brace - 4.0))
            }
        },
        NormalWavenumber::Evanescent(kappa) => electric_evanescent(k_par, kappa, spec),
    }
}

// ---------------------------------------------------------------------------
// Ray profiles used by the quadrature layer.
// ---------------------------------------------------------------------------

/// Traveling brace along the ray k_z = u k, as the pair (A, B) of
/// brace = A + B cos(2 k z u). A carries the reflection intensities and the
/// L-channel weight, B the two interference terms.
pub(crate) fn traveling_profile(
    u: f64,
    field: Field,
    n: RefractiveIndex,
    renormalized: bool,
) -> (f64, f64) {
    debug_assert!(u > 0.0 && u <= 1.0);
    let subtraction = if renormalized { 4.0 } else { 0.0 };
    match n {
        RefractiveIndex::Infinite => {
            let b = match field {
                Field::Electric => -4.0 * u * u,
                Field::Magnetic => 4.0 * u * u,
            };
            (4.0 - subtraction, b)
        }
        RefractiveIndex::Finite(n) => {
            if n == 1.0 {
                return (4.0 - subtraction, 0.0);
            }
            let d = ((n - 1.0) * (n + 1.0) + u * u).sqrt();
            let n2u = n * n * u;
            let r_te = (u - d) / (u + d);
            let r_tm = (n2u - d) / (n2u + d);
            let t_te = 2.0 * d / (d + u);
            let t_tm = 2.0 * n * d / (d + n2u);
            let a = 2.0 + r_te * r_te + r_tm * r_tm + (u / d) * (t_te * t_te + t_tm * t_tm);
            let geom = 1.0 - 2.0 * u * u;
            let b = match field {
                Field::Electric => 2.0 * r_te + 2.0 * geom * r_tm,
                Field::Magnetic => 2.0 * geom * r_te + 2.0 * r_tm,
            };
            (a - subtraction, b)
        }
    }
}

/// One ray of the evanescent strip, parametrized by phi in (0, pi/2) with
/// kappa = kappa_max(k_par) sin(phi).
///
/// Along the ray the density is coef * k_par^3 * e^{-beta k_par} with
/// beta = 2 z kappa_ratio + eta omega_ratio, so the radial integral is a
/// pure exponentially weighted moment.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EvanescentRay {
    pub coef: f64,
    /// kappa / k_par on the ray.
    pub kappa_ratio: f64,
    /// omega / (c k_par) on the ray; multiplies eta in the cutoff.
    pub omega_ratio: f64,
}

pub(crate) fn evanescent_ray(phi: f64, n: f64) -> EvanescentRay {
    debug_assert!((1.0..f64::INFINITY).contains(&n));
    let v = phi.sin();
    let c = phi.cos();
    let nm1p1 = (n - 1.0) * (n + 1.0);
    let s = nm1p1.sqrt() / n;
    // 1 - s^2 v^2 = cos^2 phi + v^2/n^2, free of cancellation at phi -> pi/2
    let w = (c * c + (v / n) * (v / n)).sqrt();
    let c2 = c * c;
    let term1 = 4.0 * n * n * c2 / (n * n * c2 + v * v);
    let term2 = 4.0 * n * n * c2 / (1.0 + nm1p1 * v * v);
    EvanescentRay {
        coef: nm1p1.sqrt() / (n * n) * v * w * (term1 + term2),
        kappa_ratio: s * v,
        omega_ratio: w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{mode_intensity, ModeFamily, Polarization};
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn spec(field: Field, n: RefractiveIndex, eta: f64, z: f64, renorm: bool) -> IntegrandSpec {
        IntegrandSpec::new(field, Medium::new(n, eta).unwrap(), z, renorm).unwrap()
    }

    fn fin(n: f64) -> RefractiveIndex {
        RefractiveIndex::Finite(n)
    }

    /// Hand-substitution oracle for the electric traveling brace: each term
    /// evaluated separately, straight from the amplitude factors.
    fn electric_brace_oracle(k_par: f64, k_z: f64, z: f64, n: f64) -> f64 {
        let k_dz = ((n * n - 1.0) * k_par * k_par + n * n * k_z * k_z).sqrt();
        let k2 = k_par * k_par + k_z * k_z;
        let r_te = (k_z - k_dz) / (k_z + k_dz);
        let r_tm = (n * n * k_z - k_dz) / (n * n * k_z + k_dz);
        let t_te = 2.0 * k_dz / (k_dz + k_z);
        let t_tm = 2.0 * n * k_dz / (k_dz + n * n * k_z);
        let term1 = 2.0;
        let term2 = r_te * r_te;
        let term3 = r_tm * r_tm;
        let term4 = 2.0 * r_te * (2.0 * k_z * z).cos();
        let term5 = 2.0 * (2.0 * k_par * k_par / k2 - 1.0) * r_tm * (2.0 * k_z * z).cos();
        let term6 = (k_z / k_dz) * (t_te * t_te + t_tm * t_tm);
        term1 + term2 + term3 + term4 + term5 + term6
    }

    #[test]
    fn vacuum_traveling_is_four_kpar_k() {
        let s = spec(Field::Electric, fin(1.0), 1.0, 0.7, false);
        for (k_par, k_z) in [(0.3, 1.0), (2.0, 0.1), (1.0, 1.0)] {
            let k = f64::hypot(k_par, k_z);
            assert_relative_eq!(
                electric_traveling(k_par, k_z, &s).unwrap(),
                4.0 * k_par * k,
                max_relative = 1e-14
            );
            let sm = spec(Field::Magnetic, fin(1.0), 1.0, 0.7, false);
            assert_relative_eq!(
                magnetic_traveling(k_par, k_z, &sm).unwrap(),
                4.0 * k_par * k,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn electric_traveling_substitution_oracle() {
        let s = spec(Field::Electric, fin(2.0), 1.0, 0.0, false);
        let value = electric_traveling(3.0, 4.0, &s).unwrap();
        let oracle = 15.0 * electric_brace_oracle(3.0, 4.0, 0.0, 2.0);
        assert_relative_eq!(value, oracle, max_relative = 1e-13);
        assert!((value - 45.60).abs() < 0.01, "expected ~45.60, got {value}");
    }

    #[test]
    fn traveling_rejects_ideal_conductor() {
        let s = spec(Field::Electric, RefractiveIndex::Infinite, 1.0, 0.0, false);
        assert!(electric_traveling(1.0, 1.0, &s).is_err());
    }

    #[test]
    fn conductor_is_pointwise_limit_of_large_n() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0010);
        let n = 1e6;
        let s_e = spec(Field::Electric, fin(n), 1.0, 0.0, false);
        let s_b = spec(Field::Magnetic, fin(n), 1.0, 0.0, false);
        for _ in 0..300 {
            let k = rng.gen_range(0.1..5.0);
            let u: f64 = rng.gen_range(0.1..0.9);
            let z = rng.gen_range(0.0..3.0);
            let (k_par, k_z) = (k * (1.0 - u * u).sqrt(), k * u);
            let se = IntegrandSpec { z, ..s_e };
            let sb = IntegrandSpec { z, ..s_b };
            for (trav, field) in [
                (
                    electric_traveling(k_par, k_z, &se).unwrap(),
                    Field::Electric,
                ),
                (
                    magnetic_traveling(k_par, k_z, &sb).unwrap(),
                    Field::Magnetic,
                ),
            ] {
                let limit = conductor_limit(k_par, k_z, z, field).unwrap();
                assert!(
                    ((trav - limit) / limit).abs() <= 10.0 / n,
                    "pointwise limit violated at k_par={k_par}, k_z={k_z}, z={z}"
                );
            }
        }
    }

    #[test]
    fn evanescent_substitution_oracle() {
        let n = 2.0_f64.sqrt();
        let s = spec(Field::Electric, fin(n), 1.0, 0.0, false);
        let value = electric_evanescent(1.0, 0.5, &s).unwrap();
        // k_dz = 1/sqrt(2), bracket = 16/3, k = sqrt(3)/2
        let oracle = 1.0 * (0.75_f64).sqrt() * (0.5 / 0.5_f64.sqrt()) * (16.0 / 3.0);
        assert_relative_eq!(value, oracle, max_relative = 1e-13);
        assert!((value - 3.266).abs() < 0.001);
    }

    #[test]
    fn evanescent_edge_cases() {
        let s = spec(Field::Electric, fin(1.0), 1.0, 0.3, false);
        assert_eq!(electric_evanescent(1.0, 0.0, &s).unwrap(), 0.0);

        let n = 2.0_f64.sqrt();
        let s = spec(Field::Electric, fin(n), 1.0, 0.0, false);
        let kappa_max = evanescent_kappa_max(1.0, n).unwrap();
        // vanishes toward the total-internal-reflection edge
        let near_edge = electric_evanescent(1.0, kappa_max * (1.0 - 1e-10), &s).unwrap();
        assert!(near_edge < 1e-4, "got {near_edge}");
        assert!(electric_evanescent(1.0, kappa_max, &s).is_err());
        assert!(electric_evanescent(1.0, -0.1, &s).is_err());
    }

    #[test]
    fn magnetic_evanescent_equals_electric() {
        let s = spec(Field::Electric, fin(1.7), 1.0, 0.4, false);
        let sm = spec(Field::Magnetic, fin(1.7), 1.0, 0.4, false);
        for kappa in [0.1, 0.4, 0.7] {
            assert_eq!(
                electric_evanescent(1.2, kappa, &s).unwrap(),
                magnetic_evanescent(1.2, kappa, &sm).unwrap()
            );
        }
    }

    #[test]
    fn evanescent_decays_with_n() {
        // at fixed (k_par, kappa, z) the density falls off as 1/n: n * value
        // stays below its analytic asymptote k_par k kappa (4/k + 4k/kappa^2)
        // e^{-2 kappa z} and reaches it from below.
        let (k_par, kappa, z): (f64, f64, f64) = (1.0, 0.3, 0.4);
        let k = ((k_par - kappa) * (k_par + kappa)).sqrt();
        let asymptote =
            k_par * k * kappa * (4.0 / k + 4.0 * k / (kappa * kappa)) * (-2.0 * kappa * z).exp();
        let mut prev = f64::INFINITY;
        for n in [10.0, 100.0, 1000.0, 10000.0] {
            let s = spec(Field::Electric, fin(n), 1.0, z, false);
            let v = electric_evanescent(k_par, kappa, &s).unwrap();
            assert!(v < prev);
            assert!(v * n <= asymptote, "1/n envelope violated at n = {n}");
            prev = v;
        }
        assert_relative_eq!(prev * 1e4, asymptote, max_relative = 1e-2);
    }

    #[test]
    fn conductor_limit_examples() {
        let e0 = conductor_limit(3.0, 4.0, 0.0, Field::Electric).unwrap();
        assert_relative_eq!(e0, 4.0 * 27.0 / 5.0, max_relative = 1e-14);
        let b0 = conductor_limit(3.0, 4.0, 0.0, Field::Magnetic).unwrap();
        assert_relative_eq!(b0, 4.0 * (3.0 / 5.0) * (9.0 + 32.0), max_relative = 1e-14);

        // electric + magnetic = 8 k_par k independent of z
        let mut rng = StdRng::seed_from_u64(0x5eed_0011);
        for _ in 0..500 {
            let k_par = rng.gen_range(0.01..5.0);
            let k_z = rng.gen_range(0.01..5.0);
            let z = rng.gen_range(0.0..10.0);
            let sum = conductor_limit(k_par, k_z, z, Field::Electric).unwrap()
                + conductor_limit(k_par, k_z, z, Field::Magnetic).unwrap();
            assert_relative_eq!(
                sum,
                8.0 * k_par * f64::hypot(k_par, k_z),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn renormalized_examples() {
        // self-subtraction in vacuum
        let s = spec(Field::Electric, fin(1.0), 1.0, 0.9, true);
        assert_eq!(
            renormalized_integrand(1.3, NormalWavenumber::Traveling(0.7), &s).unwrap(),
            0.0
        );

        // conductor electric at z = 0
        let s = spec(Field::Electric, RefractiveIndex::Infinite, 1.0, 0.0, true);
        assert_relative_eq!(
            renormalized_integrand(3.0, NormalWavenumber::Traveling(4.0), &s).unwrap(),
            -4.0 * 3.0 * 16.0 / 5.0,
            max_relative = 1e-14
        );

        // magnetic = -electric pointwise in the conductor case
        let sb = spec(Field::Magnetic, RefractiveIndex::Infinite, 1.0, 0.6, true);
        let se = spec(Field::Electric, RefractiveIndex::Infinite, 1.0, 0.6, true);
        for (k_par, k_z) in [(0.5, 1.5), (2.0, 0.3)] {
            let e = renormalized_integrand(k_par, NormalWavenumber::Traveling(k_z), &se).unwrap();
            let b = renormalized_integrand(k_par, NormalWavenumber::Traveling(k_z), &sb).unwrap();
            assert_eq!(e, -b);
        }

        // requires the renormalized flag
        let raw = spec(Field::Electric, fin(2.0), 1.0, 0.0, false);
        assert!(renormalized_integrand(1.0, NormalWavenumber::Traveling(1.0), &raw).is_err());
    }

    #[test]
    fn cross_check_against_mode_intensities() {
        // brace = I_R,TE + I_R,TM + (n^2 k_z / k_dz)(I_L,TE + I_L,TM)
        let mut rng = StdRng::seed_from_u64(0x5eed_0012);
        for _ in 0..1000 {
            let n = rng.gen_range(1.0..20.0);
            let k_par = rng.gen_range(0.01..5.0);
            let k_z = rng.gen_range(0.01..5.0);
            let z = rng.gen_range(0.0..4.0);
            let s = spec(Field::Electric, fin(n), 1.0, z, false);
            let value = electric_traveling(k_par, k_z, &s).unwrap();

            let k_dz = dielectric_kz(k_par, k_z, n).unwrap();
            let jac = n * n * k_z / k_dz;
            let sum = mode_intensity(ModeFamily::R, Polarization::Te, k_par, k_z, z, n).unwrap()
                + mode_intensity(ModeFamily::R, Polarization::Tm, k_par, k_z, z, n).unwrap()
                + jac
                    * (mode_intensity(ModeFamily::L, Polarization::Te, k_par, k_z, z, n).unwrap()
                        + mode_intensity(ModeFamily::L, Polarization::Tm, k_par, k_z, z, n)
                            .unwrap());
            let expected = k_par * f64::hypot(k_par, k_z) * sum;
            assert!(
                ((value - expected) / expected).abs() <= 1e-10,
                "mode cross-check failed at n={n}, k_par={k_par}, k_z={k_z}, z={z}"
            );
        }
    }

    #[test]
    fn unrenormalized_densities_are_positive() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0013);
        for _ in 0..10_000 {
            let n = rng.gen_range(1.0..50.0);
            let k_par = rng.gen_range(1e-3..5.0);
            let k_z = rng.gen_range(1e-3..5.0);
            let z = rng.gen_range(0.0..5.0);
            let se = spec(Field::Electric, fin(n), 1.0, z, false);
            let sb = spec(Field::Magnetic, fin(n), 1.0, z, false);
            assert!(electric_traveling(k_par, k_z, &se).unwrap() >= 0.0);
            assert!(magnetic_traveling(k_par, k_z, &sb).unwrap() >= 0.0);
            if n > 1.0 {
                let kappa = rng.gen_range(0.0..evanescent_kappa_max(k_par, n).unwrap());
                assert!(electric_evanescent(k_par, kappa, &se).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn profile_matches_pointwise_integrand() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0014);
        for _ in 0..2000 {
            let n = rng.gen_range(1.0..100.0);
            let k = rng.gen_range(0.05..8.0);
            let u: f64 = rng.gen_range(1e-3..1.0);
            let z = rng.gen_range(0.0..5.0);
            let k_par = k * ((1.0 - u) * (1.0 + u)).sqrt();
            let k_z = k * u;
            for field in [Field::Electric, Field::Magnetic] {
                let (a, b) = traveling_profile(u, field, fin(n), false);
                let expected = k_par * k * (a + b * (2.0 * k * z * u).cos());
                let s = spec(field, fin(n), 1.0, z, false);
                let value = match field {
                    Field::Electric => electric_traveling(k_par, k_z, &s).unwrap(),
                    Field::Magnetic => magnetic_traveling(k_par, k_z, &s).unwrap(),
                };
                assert_relative_eq!(value, expected, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn evanescent_ray_matches_pointwise_integrand() {
        // coef * k_par^3 * e^{-2 z kappa_ratio k_par} must reproduce the
        // pointwise density at kappa = kappa_ratio * k_par, up to the strip
        // Jacobian d(kappa)/d(phi) = kappa_max cos(phi) already folded in.
        let mut rng = StdRng::seed_from_u64(0x5eed_0015);
        for _ in 0..2000 {
            let n = rng.gen_range(1.0 + 1e-6..50.0);
            let k_par = rng.gen_range(0.05..5.0);
            let phi = rng.gen_range(1e-3..std::f64::consts::FRAC_PI_2 - 1e-3);
            let z = rng.gen_range(0.0..3.0);
            let ray = evanescent_ray(phi, n);
            let kappa = ray.kappa_ratio * k_par;
            let s = spec(Field::Electric, fin(n), 1.0, z, false);
            let pointwise = electric_evanescent(k_par, kappa, &s).unwrap();
            let smax = evanescent_kappa_max(1.0, n).unwrap();
            let from_ray = ray.coef * k_par * k_par * (-2.0 * z * ray.kappa_ratio * k_par).exp()
                / (smax * phi.cos());
            assert_relative_eq!(pointwise, from_ray, max_relative = 1e-10);
            // the cutoff argument is omega, not k_par
            assert_relative_eq!(
                ray.omega_ratio * k_par,
                ((k_par - kappa) * (k_par + kappa)).sqrt(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn spec_rejects_negative_height() {
        let m = Medium::new(fin(2.0), 1.0).unwrap();
        assert!(IntegrandSpec::new(Field::Electric, m, -0.1, false).is_err());
    }
}
