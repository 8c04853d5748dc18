//! Broadband-pump second-harmonic spectra and peak centres.
//!
//! The pump is a transform-limited Gaussian pulse. In the undepleted
//! plane-wave limit the sum-frequency field at ν_s collects every pair of
//! pump components adding up to ν_s:
//!
//! ```text
//! E(ν_s) ∝ ∫ A(ν)·A(ν_s − ν)·sinc(Δk(ν, ν_s − ν)·L/2) dν
//! ```
//!
//! Frequencies are handled as wavenumbers ν = 1/λ in 1/µm.

mod fit;

use std::f64::consts::LN_2;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::error::{QpmError, Result};
use crate::qpm::{phase_matched_wavelengths, subtract_grating, wavevector, CrystalSpec, ProcessSpec};
use crate::qpm::{sinc, DEFAULT_SCAN_POINTS};

pub use fit::{fit_peak, fit_peak_with, PeakFit, DEFAULT_FIT_FLOOR};

/// Pump integration half-width in units of the amplitude σ.
pub const PUMP_HALF_WIDTH_SIGMAS: f64 = 3.0;
/// Floor on the Simpson node count.
pub const MIN_QUADRATURE_NODES: usize = 401;
/// Default Simpson node count.
pub const DEFAULT_QUADRATURE_NODES: usize = 4001;

/// Measured SH peak centres for a 45.65 µm, 7 mm PPKTP crystal at 22 °C,
/// keyed by process, with the per-peak systematic uncertainty.
pub mod measured {
    pub const GRATING_PERIOD_UM: f64 = 45.65;
    pub const CRYSTAL_LENGTH_MM: f64 = 7.0;
    pub const TEMPERATURE_C: f64 = 22.0;
    pub const PUMP_CENTER_UM: f64 = 1.490;
    pub const PUMP_FWHM_NM: f64 = 50.0;
    pub const SYSTEMATIC_ERROR_NM: f64 = 1.2;
    pub const SH_CENTERS_NM: [(&str, f64); 3] = [("ZZZ:2", 747.8), ("YZY:1", 745.4), ("ZYY:7", 745.8)];
}

/// Wavelength grid (µm) with nonnegative intensities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSpectrum {
    wavelength_um: Vec<f64>,
    intensity: Vec<f64>,
}

impl SampledSpectrum {
    pub fn new(wavelength_um: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if wavelength_um.is_empty() {
            return Err(QpmError::InvalidArgument("empty spectrum".into()));
        }
        if wavelength_um.len() != intensity.len() {
            return Err(QpmError::InvalidArgument(format!(
                "{} wavelengths but {} samples",
                wavelength_um.len(),
                intensity.len()
            )));
        }
        check_increasing(&wavelength_um)?;
        if let Some(bad) = intensity.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(QpmError::InvalidArgument(format!("intensity sample {bad}")));
        }
        Ok(SampledSpectrum {
            wavelength_um,
            intensity,
        })
    }

    pub fn wavelength_um(&self) -> &[f64] {
        &self.wavelength_um
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().copied().fold(0.0, f64::max)
    }

    /// Rescales so the largest sample is exactly 1.
    pub fn normalized(mut self) -> Result<Self> {
        let max = self.max_intensity();
        if max <= 0.0 {
            return Err(QpmError::InvalidArgument("cannot normalize an all-zero spectrum".into()));
        }
        for v in &mut self.intensity {
            *v /= max;
        }
        Ok(self)
    }

    /// Two-column CSV (`wavelength_nm,intensity`), 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "wavelength_nm,intensity")?;
        for (l, v) in self.wavelength_um.iter().zip(&self.intensity) {
            writeln!(out, "{:.16e},{:.16e}", l * 1e3, v)?;
        }
        Ok(())
    }
}

pub(crate) fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(QpmError::InvalidArgument("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QpmError::InvalidArgument("grid is not strictly increasing".into()));
    }
    Ok(())
}

/// Gaussian pump. `fwhm_nm` is the intensity FWHM; the field amplitude is
/// √2 wider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpectrum {
    pub center_um: f64,
    pub fwhm_nm: f64,
}

impl PumpSpectrum {
    pub fn new(center_um: f64, fwhm_nm: f64) -> Result<Self> {
        if !(center_um > 0.0 && center_um.is_finite()) {
            return Err(QpmError::InvalidArgument(format!("pump center {center_um} um")));
        }
        if !(fwhm_nm > 0.0 && fwhm_nm.is_finite()) {
            return Err(QpmError::InvalidArgument(format!("pump fwhm {fwhm_nm} nm")));
        }
        Ok(PumpSpectrum { center_um, fwhm_nm })
    }

    pub fn center_wavenumber(&self) -> f64 {
        1.0 / self.center_um
    }

    /// Intensity FWHM in wavenumber, 1/µm.
    pub fn fwhm_wavenumber(&self) -> f64 {
        self.fwhm_nm * 1e-3 / (self.center_um * self.center_um)
    }

    /// σ of the amplitude A(ν) = exp(−(ν − ν₀)²/(2σ²)).
    pub fn amplitude_sigma(&self) -> f64 {
        self.fwhm_wavenumber() / (2.0 * LN_2.sqrt())
    }

    pub fn amplitude(&self, nu: f64) -> f64 {
        let s = self.amplitude_sigma();
        let d = nu - self.center_wavenumber();
        (-d * d / (2.0 * s * s)).exp()
    }
}

/// Simpson weights on `n` (odd) uniform nodes spanning `[a, b]`.
fn simpson_rule(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n).map(|i| a + h * i as f64).collect();
    let weights = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect();
    (nodes, weights)
}

/// Quadrature settings for [`sh_response`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            nodes: DEFAULT_QUADRATURE_NODES,
        }
    }
}

impl Quadrature {
    fn odd_nodes(&self) -> Result<usize> {
        if self.nodes < MIN_QUADRATURE_NODES {
            return Err(QpmError::InvalidArgument(format!(
                "{} quadrature nodes, need at least {MIN_QUADRATURE_NODES}",
                self.nodes
            )));
        }
        Ok(self.nodes | 1)
    }
}

/// SH response on `sh_grid_um`, relative to a perfectly phase-matched
/// crystal pumped by the same pulse (so a phase-matched quasi-monochromatic
/// pump gives 1 at λ_pump/2). Values lie in [0, 1].
pub fn sh_response(
    model: &DispersionModel,
    process: &ProcessSpec,
    crystal: &CrystalSpec,
    temp_c: f64,
    pump: &PumpSpectrum,
    sh_grid_um: &[f64],
    quadrature: Quadrature,
) -> Result<Vec<f64>> {
    if sh_grid_um.is_empty() {
        return Err(QpmError::InvalidArgument("empty SH grid".into()));
    }
    check_increasing(sh_grid_um)?;
    let n = quadrature.odd_nodes()?;
    let nu0 = pump.center_wavenumber();
    let half = PUMP_HALF_WIDTH_SIGMAS * pump.amplitude_sigma();
    let (nodes, weights) = simpson_rule(nu0 - half, nu0 + half, n);

    // Fundamental range seen by the second field across the whole grid.
    let nu_s_min = 1.0 / sh_grid_um[sh_grid_um.len() - 1];
    let nu_s_max = 1.0 / sh_grid_um[0];
    for nu2 in [nu_s_min - (nu0 + half), nu_s_max - (nu0 - half)] {
        if nu2.is_nan() || nu2 <= 0.0 {
            return Err(QpmError::InvalidArgument(
                "SH grid implies a non-positive fundamental frequency".into(),
            ));
        }
        model.check_wavelength(1.0 / nu2)?;
    }

    let amp: Vec<f64> = nodes.iter().map(|&nu| pump.amplitude(nu)).collect();
    let k1: Vec<f64> = nodes
        .iter()
        .map(|&nu| wavevector(model, process.pol_f1, 1.0 / nu, temp_c))
        .collect::<Result<_>>()?;

    let reference: f64 = nodes
        .iter()
        .zip(&weights)
        .zip(&amp)
        .map(|((&nu, &w), &a)| w * a * pump.amplitude(2.0 * nu0 - nu))
        .sum();

    let half_length = 0.5 * crystal.length_um();
    sh_grid_um
        .iter()
        .map(|&lambda_s| {
            let nu_s = 1.0 / lambda_s;
            let k3 = wavevector(model, process.pol_sh, lambda_s, temp_c)?;
            let mut field = 0.0;
            for i in 0..n {
                let nu2 = nu_s - nodes[i];
                let a2 = pump.amplitude(nu2);
                let k2 = wavevector(model, process.pol_f2, 1.0 / nu2, temp_c)?;
                let dk = subtract_grating(k3 - (k1[i] + k2), process, crystal);
                field += weights[i] * amp[i] * a2 * sinc(dk * half_length);
            }
            let rel = field / reference;
            Ok(rel * rel)
        })
        .collect()
}

/// Normalized (peak = 1) SH spectrum for a Gaussian pump.
pub fn sh_spectrum(
    model: &DispersionModel,
    process: &ProcessSpec,
    crystal: &CrystalSpec,
    temp_c: f64,
    pump: &PumpSpectrum,
    sh_grid_um: &[f64],
) -> Result<SampledSpectrum> {
    sh_spectrum_with(model, process, crystal, temp_c, pump, sh_grid_um, Quadrature::default())
}

pub fn sh_spectrum_with(
    model: &DispersionModel,
    process: &ProcessSpec,
    crystal: &CrystalSpec,
    temp_c: f64,
    pump: &PumpSpectrum,
    sh_grid_um: &[f64],
    quadrature: Quadrature,
) -> Result<SampledSpectrum> {
    let values = sh_response(model, process, crystal, temp_c, pump, sh_grid_um, quadrature)?;
    SampledSpectrum::new(sh_grid_um.to_vec(), values)?.normalized()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedCenter {
    pub process: ProcessSpec,
    pub lambda_fund_um: f64,
    pub sh_nm: f64,
}

/// CW phase-matched SH wavelength of each process for the fixed grating of
/// `crystal`. Where a process has several solutions in `window`, the one
/// nearest the window centre is returned.
pub fn predicted_centers(
    model: &DispersionModel,
    crystal: &CrystalSpec,
    temp_c: f64,
    processes: &[ProcessSpec],
    window: (f64, f64),
) -> Result<Vec<PredictedCenter>> {
    let centre = 0.5 * (window.0 + window.1);
    processes
        .iter()
        .map(|p| {
            let sols = phase_matched_wavelengths(
                model,
                p,
                crystal.grating_period_um,
                temp_c,
                window,
                DEFAULT_SCAN_POINTS,
            )?;
            let best = sols
                .iter()
                .min_by(|x, y| {
                    (x.lambda_fund_um - centre)
                        .abs()
                        .total_cmp(&(y.lambda_fund_um - centre).abs())
                })
                .ok_or_else(|| {
                    QpmError::NoSolutionInWindow(format!(
                        "{p} is not phase-matched by {} um in [{}, {}] um",
                        crystal.grating_period_um, window.0, window.1
                    ))
                })?;
            Ok(PredictedCenter {
                process: *p,
                lambda_fund_um: best.lambda_fund_um,
                sh_nm: best.sh_wavelength_nm(),
            })
        })
        .collect()
}
