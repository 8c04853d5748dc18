//! `qpm`: command-line front end for the qpm-core toolkit.
//!
//! Exit status: 0 success, 1 usage error, 2 lookup, 3 domain/window,
//! 4 solver/physics, 5 I/O.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpm_core::{ErrorClass, QpmError};

#[derive(Parser, Debug)]
#[command(name = "qpm", version, about = "Quasi-phase-matching design queries for poled nonlinear crystals")]
pub struct Cli {
    /// Crystal database directory.
    #[arg(long, global = true, env = "QPM_CRYSTAL_DB", default_value = "crystals")]
    pub db: PathBuf,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct CrystalArgs {
    /// Crystal id in the database.
    #[arg(long, default_value = "ktp-kato")]
    pub crystal: String,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    /// Lower edge of the fundamental wavelength window, µm.
    #[arg(long, default_value_t = 1.40)]
    pub lambda_min_um: f64,
    /// Upper edge of the fundamental wavelength window, µm.
    #[arg(long, default_value_t = 1.60)]
    pub lambda_max_um: f64,
}

impl WindowArgs {
    pub fn window(&self) -> (f64, f64) {
        (self.lambda_min_um, self.lambda_max_um)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Refractive index n(λ, T) on one axis.
    Index {
        #[command(flatten)]
        crystal: CrystalArgs,
        #[arg(long)]
        axis: String,
        #[arg(long)]
        lambda_um: f64,
        /// Defaults to the crystal's reference temperature.
        #[arg(long)]
        temp_c: Option<f64>,
    },
    /// First-order period Λ_ijk and grating period m·|Λ_ijk| for SHG.
    Period {
        #[command(flatten)]
        crystal: CrystalArgs,
        /// Polarization triple, optionally with order (`YZY`, `ZYY:7`).
        #[arg(long)]
        process: String,
        /// Overrides the order given in `--process`.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        lambda_um: f64,
        #[arg(long)]
        temp_c: Option<f64>,
    },
    /// Grating-period curves versus fundamental wavelength.
    Curves {
        #[command(flatten)]
        crystal: CrystalArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Temperature, °C. Defaults to the crystal's reference temperature.
        #[arg(long)]
        temp_c: Option<f64>,
        /// Points across the window.
        #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u64).range(2..))]
        samples: u64,
        /// Adds a constant column at this grating period, µm.
        #[arg(long)]
        mark_period: Option<f64>,
        /// Processes with orders, e.g. `YZY:1 ZZZ:2 ZYY:7`.
        #[arg(required = true)]
        processes: Vec<String>,
    },
    /// Crossings of grating-period curves.
    Coincide {
        #[command(flatten)]
        crystal: CrystalArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Temperature, °C. Defaults to the crystal's reference temperature.
        #[arg(long)]
        temp_c: Option<f64>,
        /// Minimize the spread among three or more processes.
        #[arg(long, conflicts_with = "tune_lambda_um")]
        multi: bool,
        /// Solve for the temperature at which the pair crosses at this wavelength, µm.
        #[arg(long)]
        tune_lambda_um: Option<f64>,
        /// Temperature search window, °C. Defaults to the crystal's window.
        #[arg(long, num_args = 2, value_names = ["T_MIN", "T_MAX"])]
        temp_window: Option<Vec<f64>>,
        /// Coarse scan points before refinement.
        #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(16..))]
        scan_points: u64,
        #[arg(required = true, num_args = 2..)]
        processes: Vec<String>,
    },
    /// Whether processes on one fixed grating fit inside a pulse bandwidth.
    Overlap {
        #[command(flatten)]
        crystal: CrystalArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Temperature, °C. Defaults to the crystal's reference temperature.
        #[arg(long)]
        temp_c: Option<f64>,
        /// Grating period, µm.
        #[arg(long, default_value_t = 45.65)]
        period_um: f64,
        /// Crystal length, mm.
        #[arg(long, default_value_t = 7.0)]
        length_mm: f64,
        /// Pulse bandwidth at the fundamental, nm.
        #[arg(long)]
        bandwidth_nm: f64,
        #[arg(required = true)]
        processes: Vec<String>,
    },
    /// Broadband-pump SH spectrum, or predicted peak centers with `--centers`.
    Spectrum {
        #[command(flatten)]
        crystal: CrystalArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Temperature, °C. Repeatable with `--centers`. Defaults to the
        /// crystal's reference temperature for spectra; for `--centers`,
        /// to the reference, measurement (22 °C) and 40 °C.
        #[arg(long)]
        temp_c: Vec<f64>,
        /// Grating period, µm.
        #[arg(long, default_value_t = 45.65)]
        period_um: f64,
        /// Crystal length, mm.
        #[arg(long, default_value_t = 7.0)]
        length_mm: f64,
        /// Pump center wavelength, µm.
        #[arg(long, default_value_t = 1.490)]
        pump_um: f64,
        /// Pump intensity FWHM, nm.
        #[arg(long, default_value_t = 50.0)]
        pump_fwhm_nm: f64,
        /// Predicted-versus-observed SH centers instead of a spectrum.
        #[arg(long)]
        centers: bool,
        /// Lower edge of the SH grid, µm.
        #[arg(long, default_value_t = 0.730)]
        sh_min_um: f64,
        /// Upper edge of the SH grid, µm.
        #[arg(long, default_value_t = 0.760)]
        sh_max_um: f64,
        /// Points on the SH grid.
        #[arg(long, default_value_t = 301, value_parser = clap::value_parser!(u64).range(2..))]
        samples: u64,
        /// Simpson nodes across the pump band.
        #[arg(long, default_value_t = qpm_core::spectra::DEFAULT_QUADRATURE_NODES)]
        nodes: usize,
        /// Also fit a Gaussian to the spectrum (JSON output only).
        #[arg(long)]
        fit: bool,
        /// Process for the spectrum; the triple YZY:1 ZZZ:2 ZYY:7 for `--centers`.
        processes: Vec<String>,
    },
    /// PPT inseparability table for a concurrence graph.
    Entangle {
        /// Concurrence graph to analyze.
        #[arg(long, value_enum, default_value_t = Preset::Quadripartite)]
        preset: Preset,
        /// Squeezing parameter r.
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        /// Relative coupling of the ZZZ edges.
        #[arg(long, default_value_t = 1.0)]
        k_zzz: f64,
        /// Relative coupling of the YZY edges.
        #[arg(long, default_value_t = 1.0)]
        k_yzy: f64,
        /// Relative coupling of the ZYY edges.
        #[arg(long, default_value_t = 1.0)]
        k_zyy: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Quadripartite,
}

fn exit_status(e: &QpmError) -> u8 {
    match e.class() {
        ErrorClass::Lookup => 2,
        ErrorClass::Domain => 3,
        ErrorClass::Solver => 4,
        ErrorClass::Io => 5,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.name());
            ExitCode::from(exit_status(&e))
        }
    }
}
