use std::path::PathBuf;

use thiserror::Error;

use crate::dispersion::Axis;

/// Coarse error classes. The CLI maps each class onto its own exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// A named entity (crystal, axis) does not exist.
    Lookup,
    /// An argument lies outside the domain where the model is valid.
    Domain,
    /// A numerical or physical solve has no (unique) answer.
    Solver,
    /// Reading or decoding an input document failed.
    Io,
}

#[derive(Debug, Error)]
pub enum QpmError {
    #[error("crystal not found: `{id}` (searched {path})")]
    CrystalNotFound { id: String, path: PathBuf },

    #[error("axis {0} is not defined for this crystal")]
    MissingAxis(Axis),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("axis {axis}: Sellmeier pole at lambda^2 = {q} um^2 lies inside the validity window")]
    PoleInWindow { axis: Axis, q: f64 },

    #[error("axis {axis}: index {n} at {lambda_um} um, {temp_c} degC is not a real value > 1")]
    NonPhysicalIndex {
        axis: Axis,
        lambda_um: f64,
        temp_c: f64,
        n: f64,
    },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("wavelength {lambda_um} um outside [{min}, {max}] um")]
    WavelengthOutOfWindow { lambda_um: f64, min: f64, max: f64 },

    #[error("temperature {temp_c} degC outside [{min}, {max}] degC")]
    TemperatureOutOfWindow { temp_c: f64, min: f64, max: f64 },

    #[error("wavelength {lambda_um} um too close to the window edge for a derivative stencil")]
    StencilOutOfWindow { lambda_um: f64 },

    #[error("invalid process: {0}")]
    InvalidProcess(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("perfect phase match: index difference {denominator:e} vanishes, no grating required")]
    PerfectPhaseMatch { denominator: f64 },

    #[error("negative poling period {period_um} um (harmonic index below mean fundamental index)")]
    NegativePeriod { period_um: f64 },

    #[error("grating-period curves are identical over the scan window")]
    DegenerateCurves,

    #[error("no solution in window: {0}")]
    NoSolutionInWindow(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("spectrum peak lies at the grid boundary")]
    PeakAtBoundary,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
}

impl QpmError {
    pub fn class(&self) -> ErrorClass {
        use QpmError::*;
        match self {
            CrystalNotFound { .. } | MissingAxis(_) => ErrorClass::Lookup,
            Schema(_) | Io { .. } => ErrorClass::Io,
            PoleInWindow { .. }
            | NonPhysicalIndex { .. }
            | InvalidWindow(_)
            | WavelengthOutOfWindow { .. }
            | TemperatureOutOfWindow { .. }
            | StencilOutOfWindow { .. }
            | InvalidProcess(_)
            | InvalidArgument(_)
            | NonSymmetric(_) => ErrorClass::Domain,
            PerfectPhaseMatch { .. }
            | NegativePeriod { .. }
            | DegenerateCurves
            | NoSolutionInWindow(_)
            | NoConvergence(_)
            | PeakAtBoundary => ErrorClass::Solver,
        }
    }

    /// Stable variant name, printed by the CLI on the diagnostic stream.
    pub fn name(&self) -> &'static str {
        use QpmError::*;
        match self {
            CrystalNotFound { .. } => "CrystalNotFound",
            MissingAxis(_) => "MissingAxis",
            Schema(_) => "SchemaViolation",
            Io { .. } => "Io",
            PoleInWindow { .. } => "PoleInWindow",
            NonPhysicalIndex { .. } => "NonPhysicalIndex",
            InvalidWindow(_) => "InvalidWindow",
            WavelengthOutOfWindow { .. } => "WavelengthOutOfWindow",
            TemperatureOutOfWindow { .. } => "TemperatureOutOfWindow",
            StencilOutOfWindow { .. } => "StencilOutOfWindow",
            InvalidProcess(_) => "InvalidProcess",
            InvalidArgument(_) => "InvalidArgument",
            PerfectPhaseMatch { .. } => "PerfectPhaseMatch",
            NegativePeriod { .. } => "NegativePeriod",
            DegenerateCurves => "DegenerateCurves",
            NoSolutionInWindow(_) => "NoSolutionInWindow",
            NoConvergence(_) => "NoConvergence",
            PeakAtBoundary => "PeakAtBoundary",
            NonSymmetric(_) => "NonSymmetric",
        }
    }
}

pub type Result<T> = std::result::Result<T, QpmError>;
