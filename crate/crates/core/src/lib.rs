//! Quasi-phase-matching design toolkit for periodically poled crystals.
//!
//! - [`dispersion`]: Sellmeier + thermo-optic refractive indices from a
//!   crystal database.
//! - [`qpm`]: wavevectors, poling periods, phase mismatch, tuning curves,
//!   effective nonlinearities.
//! - [`coincide`]: pairwise and multi-way coincidences between processes,
//!   temperature tuning, pulsed-bandwidth overlap.
//! - [`spectra`]: broadband-pump SH spectra, Gaussian peak fits, predicted
//!   peak centres.
//! - [`entangle`]: concurrence graphs and Gaussian-state PPT checks.

pub mod coincide;
pub mod database;
pub mod dispersion;
pub mod entangle;
pub mod error;
pub mod qpm;
pub mod roots;
pub mod spectra;

pub use coincide::{find_multiway, find_pairwise, pulsed_overlap, tune_temperature, Coincidence, CoincidenceKind};
pub use database::CrystalDatabase;
pub use dispersion::{load_model, Axis, DispersionModel, SellmeierForm, ThermoOpticForm};
pub use entangle::{ConcurrenceGraph, CovarianceState};
pub use error::{ErrorClass, QpmError, Result};
pub use qpm::{
    effective_nonlinearity, grating_period_for_order, phase_mismatch, poling_period, tuning_curve, wavevector,
    CrystalSpec, PolingPeriod, ProcessSpec, QpmSolution,
};
pub use spectra::{fit_peak, predicted_centers, sh_spectrum, PeakFit, PumpSpectrum, SampledSpectrum};
