//! Parameter sweeps, output records, and figure-data emission.
//!
//! A sweep walks the z grid (outer), then the index list, then the cutoff
//! list, then the field list, producing one record per point. Rows are
//! routed to the closed forms whenever those are exact (n = inf or eta = 0)
//! and to the quadrature otherwise. Per-row quadrature failures become a
//! status column instead of aborting the sweep. Output is byte-stable:
//! floats are printed with 17 significant digits and the row order is
//! fixed, so identical requests produce identical files.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::closed_forms::{conductor_raw, conductor_renorm, ideal_renorm};
use crate::error::{Error, Result};
use crate::integrand::{Field, IntegrandSpec};
use crate::modes::{Medium, RefractiveIndex};
use crate::quadrature::{integrate_fluctuation, QuadratureConfig};
use crate::units::{convert_units, Direction, QuantityKind, UnitSystem, C, HBAR};

/// Height grid of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZSpacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy)]
pub struct ZGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: ZSpacing,
}

impl ZGrid {
    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidInput(
                "z grid needs at least one point".into(),
            ));
        }
        if !self.min.is_finite() || self.min < 0.0 || !self.max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "z grid bounds must be finite with min >= 0, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count > 1 && self.max < self.min {
            return Err(Error::InvalidInput("z grid needs max >= min".into()));
        }
        if self.spacing == ZSpacing::Log && self.min <= 0.0 {
            return Err(Error::InvalidInput("log spacing requires z min > 0".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let steps = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| match self.spacing {
                ZSpacing::Linear => self.min + (self.max - self.min) * i as f64 / steps,
                ZSpacing::Log => {
                    (self.min.ln() + (self.max.ln() - self.min.ln()) * i as f64 / steps).exp()
                }
            })
            .collect()
    }
}

/// One sweep request. Heights and cutoff scales are in the internal natural
/// units; `units` only controls how records are reported.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub z_grid: ZGrid,
    pub n_values: Vec<RefractiveIndex>,
    /// Cutoff scales c*eta (lengths), possibly zero for the ideal limit.
    pub eta_values: Vec<f64>,
    pub fields: Vec<Field>,
    pub renormalize: bool,
    pub units: UnitSystem,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        self.z_grid.validate()?;
        if self.n_values.is_empty() || self.eta_values.is_empty() || self.fields.is_empty() {
            return Err(Error::InvalidInput(
                "sweep needs at least one n, one eta and one field".into(),
            ));
        }
        for &eta in &self.eta_values {
            if !eta.is_finite() || eta < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "cutoff scale must be finite and >= 0, got {eta}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    ClosedForm,
}

impl Method {
    fn as_str(&self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Quadrature budget exhausted; `value` carries the best estimate.
    NonConverged,
    /// The requested point has no finite value (eta = 0 divergences).
    Divergent,
}

impl RowStatus {
    fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NonConverged => "nonconverged",
            RowStatus::Divergent => "divergent",
        }
    }
}

/// One emitted row. `z`, `eta`, `value` and the channels are expressed in
/// the sweep's unit system.
#[derive(Debug, Clone, Copy)]
pub struct OutputRecord {
    pub z: f64,
    pub n: RefractiveIndex,
    pub eta: f64,
    pub field: Field,
    pub value: f64,
    pub error_estimate: f64,
    pub channel_traveling: Option<f64>,
    pub channel_evanescent: Option<f64>,
    pub method: Method,
    pub status: RowStatus,
}

impl Serialize for OutputRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("OutputRecord", 10)?;
        s.serialize_field("z", &self.z)?;
        s.serialize_field("n", &self.n.to_string())?;
        s.serialize_field("eta", &self.eta)?;
        s.serialize_field("field", &self.field.to_string())?;
        s.serialize_field("value", &self.value)?;
        s.serialize_field("error_estimate", &self.error_estimate)?;
        s.serialize_field("channel_traveling", &self.channel_traveling)?;
        s.serialize_field("channel_evanescent", &self.channel_evanescent)?;
        s.serialize_field("method", self.method.as_str())?;
        s.serialize_field("status", self.status.as_str())?;
        s.end()
    }
}

fn compute_row(
    z: f64,
    n: RefractiveIndex,
    eta: f64,
    field: Field,
    renormalize: bool,
    config: &QuadratureConfig,
    units: UnitSystem,
) -> Result<OutputRecord> {
    let to_output = |v: f64| match units {
        UnitSystem::Natural => v,
        UnitSystem::Si => {
            convert_units(v, QuantityKind::FluctuationDensity, Direction::NaturalToSi)
        }
    };
    let eta_out = match units {
        UnitSystem::Natural => eta,
        UnitSystem::Si => convert_units(eta, QuantityKind::Time, Direction::NaturalToSi),
    };
    let mut record = OutputRecord {
        z,
        n,
        eta: eta_out,
        field,
        value: f64::NAN,
        error_estimate: 0.0,
        channel_traveling: None,
        channel_evanescent: None,
        method: Method::ClosedForm,
        status: RowStatus::Ok,
    };

    if eta == 0.0 {
        // only the ideal renormalized conductor limit is finite
        if n == RefractiveIndex::Infinite && renormalize && z > 0.0 {
            record.value = to_output(ideal_renorm(z, field)?);
        } else {
            record.status = RowStatus::Divergent;
        }
        return Ok(record);
    }

    if let RefractiveIndex::Infinite = n {
        let v = if renormalize {
            conductor_renorm(eta, z, field)?
        } else {
            conductor_raw(eta, z, field)?
        };
        record.value = to_output(v);
        return Ok(record);
    }

    record.method = Method::Quadrature;
    let medium = Medium::new(n, eta)?;
    let spec = IntegrandSpec::new(field, medium, z, renormalize)?;
    match integrate_fluctuation(&spec, config) {
        Ok(out) => {
            record.value = to_output(out.value);
            record.error_estimate = to_output(out.error_estimate);
            record.channel_traveling = Some(to_output(out.channel_traveling));
            record.channel_evanescent = Some(to_output(out.channel_evanescent));
        }
        Err(Error::NonConvergence {
            value,
            error_estimate,
            ..
        }) => {
            record.status = RowStatus::NonConverged;
            record.value = to_output(value);
            record.error_estimate = to_output(error_estimate);
        }
        Err(other) => return Err(other),
    }
    Ok(record)
}

/// Run one sweep. Rows are computed in parallel but emitted in grid order
/// (z outer, then n, then eta, then field), so output is deterministic
/// regardless of thread count.
pub fn run_sweep(spec: &SweepSpec, config: &QuadratureConfig) -> Result<Vec<OutputRecord>> {
    spec.validate()?;
    config.validate()?;

    let mut grid = Vec::new();
    for z in spec.z_grid.points() {
        for &n in &spec.n_values {
            for &eta in &spec.eta_values {
                for &field in &spec.fields {
                    grid.push((z, n, eta, field));
                }
            }
        }
    }

    grid.par_iter()
        .map(|&(z, n, eta, field)| {
            compute_row(z, n, eta, field, spec.renormalize, config, spec.units)
        })
        .collect()
}

/// 17-significant-digit scientific notation; the base of all golden output.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub const CSV_HEADER: &str =
    "z,n,eta,field,value,error_estimate,channel_traveling,channel_evanescent,method,status";

pub fn write_csv(records: &[OutputRecord], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_float(r.z),
            r.n,
            fmt_float(r.eta),
            r.field,
            fmt_float(r.value),
            fmt_float(r.error_estimate),
            fmt_opt(r.channel_traveling),
            fmt_opt(r.channel_evanescent),
            r.method.as_str(),
            r.status.as_str(),
        )?;
    }
    Ok(())
}

pub fn write_json(records: &[OutputRecord], out: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, records)?;
    writeln!(out)
}

/// Figure-data emitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Renormalized electric density at a 2e16 Hz cutoff against the ideal
    /// z^-4 law, in SI units, on a grid spanning the surface peak.
    CutoffVsIdeal,
    /// Peak migration toward the surface for a decreasing cutoff sequence,
    /// in natural units.
    PeakMigration,
}

impl Figure {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Figure::CutoffVsIdeal),
            2 => Ok(Figure::PeakMigration),
            other => Err(Error::InvalidInput(format!(
                "no figure {other}; use 1 or 2"
            ))),
        }
    }
}

/// Cutoff sequence of the peak-migration figure, natural units.
pub const FIGURE2_ETAS: [f64; 3] = [1.0, 0.5, 0.25];

/// Emit plottable CSV for one figure.
///
/// Figure 1: z in meters from c*eta/100 to 4 c*eta (the peak sits at
/// c*eta/2), columns for the finite-cutoff curve at 1/eta = 2e16 Hz and the
/// ideal law, both in J/m^3.
///
/// Figure 2: z from 0.005 to 3 in natural units, one column per eta in
/// FIGURE2_ETAS plus the ideal curve.
pub fn emit_figure_data(figure: Figure, out: &mut dyn Write) -> io::Result<()> {
    match figure {
        Figure::CutoffVsIdeal => {
            let eta_si = 5e-17; // 1/eta = 2e16 Hz
            let eta = C * eta_si;
            writeln!(out, "z_m,fluct_cutoff_jm3,fluct_ideal_jm3")?;
            for i in 1..=400_u32 {
                let z = 4.0 * eta * f64::from(i) / 400.0;
                let cutoff =
                    HBAR * C * conductor_renorm(eta, z, Field::Electric).expect("eta > 0, z > 0");
                let ideal = HBAR * C * ideal_renorm(z, Field::Electric).expect("z > 0");
                writeln!(
                    out,
                    "{},{},{}",
                    fmt_float(z),
                    fmt_float(cutoff),
                    fmt_float(ideal)
                )?;
            }
        }
        Figure::PeakMigration => {
            writeln!(out, "z,eta_1,eta_0.5,eta_0.25,ideal")?;
            for i in 1..=600_u32 {
                let z = 0.005 * f64::from(i);
                let cols: Vec<String> = FIGURE2_ETAS
                    .iter()
                    .map(|&eta| {
                        fmt_float(
                            conductor_renorm(eta, z, Field::Electric).expect("eta > 0, z >= 0"),
                        )
                    })
                    .collect();
                writeln!(
                    out,
                    "{},{},{}",
                    fmt_float(z),
                    cols.join(","),
                    fmt_float(ideal_renorm(z, Field::Electric).expect("z > 0"))
                )?;
            }
        }
    }
    Ok(())
}
