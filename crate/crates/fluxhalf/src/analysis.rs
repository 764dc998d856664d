//! Physics-level derived quantities: the surface peak structure of the
//! renormalized density, the vanishing of its spatial integral, ideal-limit
//! convergence diagnostics, and far-zone Casimir-Polder energies.

use std::f64::consts::PI;

use crate::closed_forms::{conductor_renorm, conductor_renorm_tail, ideal_renorm};
use crate::error::{Error, Result};
use crate::integrand::{Field, IntegrandSpec};
use crate::modes::{Medium, RefractiveIndex};
use crate::quadrature::{integrate_adaptive, integrate_fluctuation, QuadratureConfig};

/// Shape of the renormalized electric density near the interface at finite
/// cutoff: a negative minimum at the surface, a positive maximum at
/// z = eta/2, and the distance between the two inflection points flanking
/// the maximum as the width.
#[derive(Debug, Clone, Copy)]
pub struct PeakStructure {
    pub z_min: f64,
    pub f_min: f64,
    pub z_max: f64,
    pub f_max: f64,
    pub width: f64,
}

/// A small polarizable body probing the renormalized fluctuations.
#[derive(Debug, Clone, Copy)]
pub struct PolarizableBody {
    pub alpha: f64,
    pub kind: Field,
}

impl PolarizableBody {
    pub fn new(alpha: f64, kind: Field) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidInput(format!(
                "polarizability must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(PolarizableBody { alpha, kind })
    }
}

fn check_eta_positive(eta: f64) -> Result<()> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "eta must be finite and > 0, got {eta}"
        )));
    }
    Ok(())
}

/// Second derivative of the renormalized electric conductor density.
/// Its sign is carried by 80 z^4 - 40 z^2 eta^2 + eta^4.
fn renorm_second_derivative(eta: f64, z: f64) -> f64 {
    let poly = 80.0 * z.powi(4) - 40.0 * z * z * eta * eta + eta.powi(4);
    192.0 / PI * poly / (4.0 * z * z + eta * eta).powi(5)
}

/// Bisection root of f on [a, b] with a sign change, to relative width tol.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut fa = f(a);
    debug_assert!(fa * f(b) < 0.0, "bisection bracket must straddle the root");
    while (b - a) > rel_tol * b.abs() {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Extrema and inflection width of the renormalized electric density at
/// cutoff scale eta. Minimum and maximum come from the closed form; the
/// inflection points are root-found on the analytic second derivative.
pub fn peak_structure(eta: f64) -> Result<PeakStructure> {
    check_eta_positive(eta)?;
    let z_max = 0.5 * eta;
    let f = |z: f64| renorm_second_derivative(eta, z);
    let lower = bisect(f, 1e-3 * eta, z_max, 1e-12);
    let upper = bisect(f, z_max, 2.0 * eta, 1e-12);
    Ok(PeakStructure {
        z_min: 0.0,
        f_min: conductor_renorm(eta, 0.0, Field::Electric)?,
        z_max,
        f_max: conductor_renorm(eta, z_max, Field::Electric)?,
        width: upper - lower,
    })
}

/// Spatial integral of the renormalized conductor density over z in
/// [0, inf). Vanishes identically for every eta > 0; the returned value is
/// the numerical residual. The range beyond 10^3 eta is added from the
/// closed-form antiderivative.
pub fn spatial_energy_integral(eta: f64, field: Field) -> Result<f64> {
    check_eta_positive(eta)?;
    let z_split = 1e3 * eta;
    let f = |z: f64| conductor_renorm(eta, z, field).expect("validated eta, z >= 0");

    // geometric breakpoints hug the peak region near z ~ eta
    let mut breaks = vec![0.0];
    let mut x = 0.05 * eta;
    while x < z_split {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(z_split);

    let out = integrate_adaptive(&f, &breaks, 1e-12, 1e-12 / eta.powi(3), 48);
    Ok(out.value + conductor_renorm_tail(eta, z_split, field))
}

/// Far-zone Casimir-Polder energy -alpha/2 times the renormalized
/// fluctuation of the matching field at distance d.
///
/// Far-zone validity (d large against the body's dominant transition
/// wavelength) is the caller's responsibility. The conductor limit is
/// served by the closed forms; finite n goes through the quadrature.
pub fn casimir_polder(body: &PolarizableBody, d: f64, medium: &Medium) -> Result<f64> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InvalidInput(format!(
            "distance must be finite and >= 0, got {d}"
        )));
    }
    if body.alpha == 0.0 {
        return Ok(0.0);
    }
    let fluct = match medium.n {
        RefractiveIndex::Infinite => {
            if medium.eta == 0.0 {
                if d == 0.0 {
                    return Err(Error::SurfaceDivergence);
                }
                ideal_renorm(d, body.kind)?
            } else {
                conductor_renorm(medium.eta, d, body.kind)?
            }
        }
        RefractiveIndex::Finite(_) => {
            if medium.eta == 0.0 {
                return Err(Error::DivergentLimit);
            }
            let spec = IntegrandSpec::new(body.kind, *medium, d, true)?;
            integrate_fluctuation(&spec, &QuadratureConfig::default())?.value
        }
    };
    Ok(-0.5 * body.alpha * fluct)
}

/// Relative deviation of the finite-cutoff renormalized density from the
/// ideal 3/(4 pi z^4) law, one entry per eta. Shrinks as (5/6)(eta/z)^2.
pub fn ideal_limit_convergence(z: f64, etas: &[f64]) -> Result<Vec<f64>> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "z must be finite and > 0, got {z}"
        )));
    }
    let ideal = ideal_renorm(z, Field::Electric)?;
    etas.iter()
        .map(|&eta| {
            check_eta_positive(eta)?;
            Ok((conductor_renorm(eta, z, Field::Electric)? / ideal - 1.0).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn second_derivative_matches_finite_differences() {
        let eta = 1.3;
        for z in [0.05, 0.3, 0.65, 1.1, 2.7] {
            let h = 1e-4;
            let fd = (conductor_renorm(eta, z + h, Field::Electric).unwrap()
                - 2.0 * conductor_renorm(eta, z, Field::Electric).unwrap()
                + conductor_renorm(eta, z - h, Field::Electric).unwrap())
                / (h * h);
            assert_relative_eq!(renorm_second_derivative(eta, z), fd, max_relative = 1e-5);
        }
    }

    #[test]
    fn peak_examples() {
        let p = peak_structure(1.0).unwrap();
        assert_eq!(p.z_max, 0.5);
        assert_eq!(p.z_min, 0.0);
        assert_relative_eq!(p.f_max, 1.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(p.f_min, -4.0 / PI, max_relative = 1e-14);
        // exact inflection distance: sqrt((1 - 1/sqrt(5))/2) eta
        let exact = ((1.0 - 1.0 / 5.0_f64.sqrt()) / 2.0).sqrt();
        assert_relative_eq!(p.width, exact, max_relative = 1e-9);
        // the coarse 0.5 eta estimate holds to 10%
        assert!((p.width / 0.5 - 1.0).abs() < 0.10);
    }

    #[test]
    fn peak_collapses_linearly_in_eta() {
        for eta in [2.0, 0.5, 0.03] {
            let p = peak_structure(eta).unwrap();
            assert_eq!(p.z_max, 0.5 * eta);
            assert_relative_eq!(p.width / eta, 0.5257311121, max_relative = 1e-8);
            assert_relative_eq!(p.f_max * PI * eta.powi(4), 1.0, max_relative = 1e-13);
            assert_relative_eq!(p.f_min * PI * eta.powi(4), -4.0, max_relative = 1e-13);
            assert!(p.f_min < 0.0 && p.f_max > 0.0 && p.width > 0.0);
        }
    }

    #[test]
    fn spatial_integral_vanishes() {
        for eta in [1.0, 2.0] {
            for field in [Field::Electric, Field::Magnetic] {
                let residual = spatial_energy_integral(eta, field).unwrap();
                let scale = 4.0 / PI / eta.powi(3);
                assert!(
                    residual.abs() <= 1e-8 * scale,
                    "residual {residual:e} exceeds 1e-8 of the peak mass at eta={eta}"
                );
            }
        }
        // random cutoffs
        let mut rng = StdRng::seed_from_u64(0x5eed_0020);
        for _ in 0..20 {
            let eta = rng.gen_range(0.1..10.0);
            let residual = spatial_energy_integral(eta, Field::Electric).unwrap();
            assert!(residual.abs() <= 1e-8 * 4.0 / PI / eta.powi(3));
        }
    }

    #[test]
    fn casimir_polder_examples() {
        let conductor_ideal = Medium::new(RefractiveIndex::Infinite, 0.0).unwrap();
        let body = PolarizableBody::new(1.0, Field::Electric).unwrap();
        assert_relative_eq!(
            casimir_polder(&body, 1.0, &conductor_ideal).unwrap(),
            -3.0 / (8.0 * PI),
            max_relative = 1e-14
        );

        let zero = PolarizableBody::new(0.0, Field::Electric).unwrap();
        assert_eq!(casimir_polder(&zero, 0.3, &conductor_ideal).unwrap(), 0.0);

        let conductor_eta = Medium::new(RefractiveIndex::Infinite, 1.0).unwrap();
        let body2 = PolarizableBody::new(2.0, Field::Electric).unwrap();
        assert_relative_eq!(
            casimir_polder(&body2, 0.5, &conductor_eta).unwrap(),
            -1.0 / PI,
            max_relative = 1e-14
        );

        assert!(matches!(
            casimir_polder(&body, 0.0, &conductor_ideal),
            Err(Error::SurfaceDivergence)
        ));
    }

    #[test]
    fn casimir_polder_duality_and_sign() {
        let conductor = Medium::new(RefractiveIndex::Infinite, 1.0).unwrap();
        let e = PolarizableBody::new(1.5, Field::Electric).unwrap();
        let b = PolarizableBody::new(1.5, Field::Magnetic).unwrap();
        for d in [0.1, 0.5, 2.0] {
            let ee = casimir_polder(&e, d, &conductor).unwrap();
            let bb = casimir_polder(&b, d, &conductor).unwrap();
            assert_eq!(ee, -bb);
        }
        // attractive beyond the sign-change distance, repulsive below
        let root = 1.0 / 12.0_f64.sqrt();
        assert!(casimir_polder(&e, 2.0 * root, &conductor).unwrap() < 0.0);
        assert!(casimir_polder(&e, 0.5 * root, &conductor).unwrap() > 0.0);
    }

    #[test]
    fn casimir_polder_finite_n_goes_through_quadrature() {
        let medium = Medium::new(RefractiveIndex::Finite(2.0), 1.0).unwrap();
        let body = PolarizableBody::new(1.0, Field::Electric).unwrap();
        let energy = casimir_polder(&body, 0.7, &medium).unwrap();
        assert!(energy.is_finite());
        // finite-n renormalized fluctuation sits below the conductor value
        let conductor = -0.5 * conductor_renorm(1.0, 0.7, Field::Electric).unwrap();
        assert!(energy.abs() < conductor.abs());
    }

    #[test]
    fn ideal_limit_deviation_follows_taylor_law() {
        let devs = ideal_limit_convergence(1.0, &[1e-1, 1e-2, 1e-3]).unwrap();
        assert!(devs.windows(2).all(|w| w[1] < w[0]));
        for (dev, eta) in devs.iter().zip([1e-1, 1e-2, 1e-3]) {
            let predicted = 5.0 / 6.0 * eta * eta;
            assert!(
                (dev / predicted - 1.0).abs() < 0.10,
                "deviation {dev:e} off the (5/6)(eta/z)^2 law at eta={eta}"
            );
        }
        assert_abs_diff_eq!(devs[2], 8.333e-7, epsilon = 1e-9);
    }
}
