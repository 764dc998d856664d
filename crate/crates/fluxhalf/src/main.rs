//! Command-line front end: parameter sweeps over (z, n, eta) and
//! figure-data emission.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::Parser;

use fluxhalf::integrand::Field;
use fluxhalf::modes::RefractiveIndex;
use fluxhalf::quadrature::QuadratureConfig;
use fluxhalf::sweep::{
    emit_figure_data, run_sweep, write_csv, write_json, Figure, RowStatus, SweepSpec, ZGrid,
    ZSpacing,
};
use fluxhalf::units::{convert_units, Direction, QuantityKind, UnitSystem};

/// Renormalized vacuum field fluctuations outside a dielectric half-space.
#[derive(Debug, Parser)]
#[command(name = "fluxhalf", version, about)]
struct Cli {
    /// Refractive index of the half-space; repeatable, accepts "inf".
    #[arg(long = "n", value_name = "N")]
    n: Vec<String>,

    /// Cutoff timescale eta (natural units: the length c*eta; SI: seconds).
    /// Repeatable; mutually exclusive with --cutoff-frequency.
    #[arg(long, value_name = "ETA", conflicts_with = "cutoff_frequency")]
    eta: Vec<f64>,

    /// Cutoff frequency 1/eta (natural units: inverse length; SI: Hz).
    #[arg(long, value_name = "FREQ")]
    cutoff_frequency: Vec<f64>,

    /// Lowest height of the z grid.
    #[arg(long, value_name = "Z", default_value_t = 0.0)]
    z_min: f64,

    /// Highest height of the z grid (defaults to z-min).
    #[arg(long, value_name = "Z")]
    z_max: Option<f64>,

    /// Number of grid points.
    #[arg(long, value_name = "COUNT", default_value_t = 1)]
    z_count: usize,

    /// Logarithmic grid spacing (requires z-min > 0).
    #[arg(long)]
    z_log: bool,

    /// Field to evaluate: E, B or both.
    #[arg(long, value_name = "FIELD", default_value = "both")]
    field: String,

    /// Subtract the homogeneous vacuum contribution.
    #[arg(long)]
    renormalize: bool,

    /// Unit system of inputs and outputs: natural or si.
    #[arg(long, value_name = "UNITS", default_value = "natural")]
    units: String,

    /// Relative tolerance of the quadrature.
    #[arg(long, value_name = "TOL", default_value_t = 1e-9)]
    rel_tol: f64,

    /// Output format: csv or json.
    #[arg(long, value_name = "FORMAT", default_value = "csv")]
    output: String,

    /// Emit plottable figure data (1 or 2) instead of running a sweep.
    #[arg(long, value_name = "FIG")]
    figure: Option<u8>,

    /// Output path (stdout if omitted).
    #[arg(long, short = 'o', value_name = "PATH")]
    out: Option<PathBuf>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn configure_threads() -> Result<(), String> {
    if let Ok(raw) = std::env::var("FLUXHALF_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| format!("FLUXHALF_THREADS must be a positive integer, got {raw:?}"))?;
        if threads == 0 {
            return Err("FLUXHALF_THREADS must be >= 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Err(msg) = configure_threads() {
        return usage_error(&msg);
    }

    if let Some(index) = cli.figure {
        let figure = match Figure::from_index(index) {
            Ok(f) => f,
            Err(e) => return usage_error(&e.to_string()),
        };
        let mut out = match open_output(&cli.out) {
            Ok(o) => o,
            Err(e) => return usage_error(&format!("cannot open output: {e}")),
        };
        if let Err(e) = emit_figure_data(figure, &mut out).and_then(|_| out.flush()) {
            eprintln!("error: writing figure data failed: {e}");
            return ExitCode::from(1);
        }
        return ExitCode::SUCCESS;
    }

    let units = match UnitSystem::from_str(&cli.units) {
        Ok(u) => u,
        Err(e) => return usage_error(&e.to_string()),
    };

    if cli.n.is_empty() {
        return usage_error("a sweep needs at least one --n (or use --figure)");
    }
    let mut n_values = Vec::new();
    for raw in &cli.n {
        match RefractiveIndex::from_str(raw) {
            Ok(n) => n_values.push(n),
            Err(e) => return usage_error(&e.to_string()),
        }
    }

    // cutoffs, converted to the internal length scale c*eta
    let mut eta_values = Vec::new();
    if !cli.eta.is_empty() {
        for &eta in &cli.eta {
            let nat = match units {
                UnitSystem::Natural => eta,
                UnitSystem::Si => convert_units(eta, QuantityKind::Time, Direction::SiToNatural),
            };
            eta_values.push(nat);
        }
    } else if !cli.cutoff_frequency.is_empty() {
        for &freq in &cli.cutoff_frequency {
            if freq <= 0.0 {
                return usage_error("cutoff frequency must be positive");
            }
            let nat_freq = match units {
                UnitSystem::Natural => freq,
                UnitSystem::Si => {
                    convert_units(freq, QuantityKind::Frequency, Direction::SiToNatural)
                }
            };
            eta_values.push(1.0 / nat_freq);
        }
    } else {
        return usage_error("a sweep needs --eta or --cutoff-frequency");
    }

    let fields = match cli.field.as_str() {
        "both" | "Both" | "BOTH" => vec![Field::Electric, Field::Magnetic],
        other => match Field::from_str(other) {
            Ok(f) => vec![f],
            Err(e) => return usage_error(&e.to_string()),
        },
    };

    let spec = SweepSpec {
        z_grid: ZGrid {
            min: cli.z_min,
            max: cli.z_max.unwrap_or(cli.z_min),
            count: cli.z_count,
            spacing: if cli.z_log {
                ZSpacing::Log
            } else {
                ZSpacing::Linear
            },
        },
        n_values,
        eta_values,
        fields,
        renormalize: cli.renormalize,
        units,
    };
    let config = QuadratureConfig {
        rel_tol: cli.rel_tol,
        ..QuadratureConfig::default()
    };

    let records = match run_sweep(&spec, &config) {
        Ok(r) => r,
        Err(e) => return usage_error(&e.to_string()),
    };

    let mut out = match open_output(&cli.out) {
        Ok(o) => o,
        Err(e) => return usage_error(&format!("cannot open output: {e}")),
    };
    let written = match cli.output.as_str() {
        "csv" => write_csv(&records, &mut out),
        "json" => write_json(&records, &mut out),
        other => return usage_error(&format!("unknown output format {other:?}")),
    };
    if let Err(e) = written.and_then(|_| out.flush()) {
        eprintln!("error: writing output failed: {e}");
        return ExitCode::from(1);
    }

    if records.iter().any(|r| r.status != RowStatus::Ok) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
