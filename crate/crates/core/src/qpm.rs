//! Quasi-phase-matching kinematics.
//!
//! The first-order poling period for a polarization triple `ijk` (harmonic
//! polarization first) and fundamental wavelength λ is
//!
//! ```text
//! Λ_ijk = λ / [2·n_i(λ/2) − n_j(λ) − n_k(λ)]
//! ```
//!
//! and the physical grating that phase-matches the process on Fourier
//! order m has period m·|Λ_ijk|. A negative denominator (harmonic index
//! below the mean fundamental index) still phase-matches with the
//! opposite grating vector; such processes are flagged as anomalous.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dispersion::{Axis, DispersionModel};
use crate::error::{QpmError, Result};
use crate::roots::{bisect, linspace, sign_change_brackets};
use crate::spectra::SampledSpectrum;

/// Below this index difference the process needs no grating at all.
pub const PERFECT_MATCH_THRESHOLD: f64 = 1e-12;
/// Largest |Δk| accepted for a solved phase-matching point, rad/µm.
pub const SOLVER_DK_TOLERANCE: f64 = 1e-9;
/// Default number of scan points per wavelength window.
pub const DEFAULT_SCAN_POINTS: usize = 512;

/// One χ² interaction: harmonic polarization, two fundamental
/// polarizations and the QPM Fourier order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub pol_sh: Axis,
    pub pol_f1: Axis,
    pub pol_f2: Axis,
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_element: Option<f64>,
}

impl ProcessSpec {
    /// Propagation along X: all polarizations must be Y or Z.
    pub fn new(pol_sh: Axis, pol_f1: Axis, pol_f2: Axis, order: u32) -> Result<Self> {
        for p in [pol_sh, pol_f1, pol_f2] {
            if p == Axis::X {
                return Err(QpmError::InvalidProcess(
                    "X polarization is not allowed for propagation along X".into(),
                ));
            }
        }
        if order == 0 {
            return Err(QpmError::InvalidProcess("QPM order must be >= 1".into()));
        }
        Ok(ProcessSpec {
            pol_sh,
            pol_f1,
            pol_f2,
            order,
            d_element: None,
        })
    }

    pub fn with_d(mut self, d_pm_per_v: f64) -> Self {
        self.d_element = Some(d_pm_per_v);
        self
    }

    pub fn with_order(self, order: u32) -> Result<Self> {
        ProcessSpec::new(self.pol_sh, self.pol_f1, self.pol_f2, order).map(|p| ProcessSpec {
            d_element: self.d_element,
            ..p
        })
    }

    /// The polarization triple, e.g. `"YZY"`.
    pub fn triple(&self) -> String {
        format!("{}{}{}", self.pol_sh, self.pol_f1, self.pol_f2)
    }
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.triple(), self.order)
    }
}

/// Parses `"YZY"` (order 1) or `"ZYY:7"`.
impl FromStr for ProcessSpec {
    type Err = QpmError;

    fn from_str(s: &str) -> Result<Self> {
        let (triple, order) = match s.split_once(':') {
            Some((t, o)) => {
                let order = o
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| QpmError::InvalidProcess(format!("bad order in `{s}`")))?;
                (t.trim(), order)
            }
            None => (s.trim(), 1),
        };
        let axes: Vec<char> = triple.chars().collect();
        if axes.len() != 3 {
            return Err(QpmError::InvalidProcess(format!(
                "`{s}`: expected a polarization triple like ZZZ"
            )));
        }
        let parse = |c: char| Axis::try_from(c).map_err(|_| QpmError::InvalidProcess(format!("`{s}`")));
        ProcessSpec::new(parse(axes[0])?, parse(axes[1])?, parse(axes[2])?, order)
    }
}

/// Physical poled crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub length_mm: f64,
    pub grating_period_um: f64,
    pub duty_cycle: f64,
}

impl CrystalSpec {
    pub fn new(length_mm: f64, grating_period_um: f64) -> Result<Self> {
        Self::with_duty_cycle(length_mm, grating_period_um, 0.5)
    }

    pub fn with_duty_cycle(length_mm: f64, grating_period_um: f64, duty_cycle: f64) -> Result<Self> {
        if !(length_mm > 0.0 && length_mm.is_finite()) {
            return Err(QpmError::InvalidArgument(format!("crystal length {length_mm} mm")));
        }
        if !(grating_period_um > 0.0 && grating_period_um.is_finite()) {
            return Err(QpmError::InvalidArgument(format!(
                "grating period {grating_period_um} um"
            )));
        }
        if !(duty_cycle > 0.0 && duty_cycle < 1.0) {
            return Err(QpmError::InvalidArgument(format!("duty cycle {duty_cycle}")));
        }
        Ok(CrystalSpec {
            length_mm,
            grating_period_um,
            duty_cycle,
        })
    }

    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }
}

/// A poling period together with its sign convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolingPeriod {
    /// Magnitude of the period, µm.
    pub period_um: f64,
    /// Harmonic index below the mean fundamental index (negative Λ_ijk).
    pub anomalous: bool,
}

impl PolingPeriod {
    pub fn signed_um(&self) -> f64 {
        if self.anomalous {
            -self.period_um
        } else {
            self.period_um
        }
    }

    /// Rejects anomalous-ordering periods with [`QpmError::NegativePeriod`].
    pub fn require_normal(self) -> Result<f64> {
        if self.anomalous {
            Err(QpmError::NegativePeriod {
                period_um: self.signed_um(),
            })
        } else {
            Ok(self.period_um)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpmSolution {
    pub process: ProcessSpec,
    pub lambda_fund_um: f64,
    pub temp_c: f64,
    /// m·|Λ_ijk| at the solution, µm.
    pub required_period_um: f64,
    pub order: u32,
    pub residual_dk: f64,
}

impl QpmSolution {
    pub fn sh_wavelength_nm(&self) -> f64 {
        self.lambda_fund_um * 500.0
    }
}

/// k = 2π·n/λ, rad/µm.
pub fn wavevector(model: &DispersionModel, axis: Axis, lambda: f64, temp_c: f64) -> Result<f64> {
    Ok(2.0 * PI * model.index(axis, lambda, temp_c)? / lambda)
}

/// First-order period Λ_ijk for degenerate SHG of `lambda`.
pub fn poling_period(
    model: &DispersionModel,
    process: &ProcessSpec,
    lambda: f64,
    temp_c: f64,
) -> Result<PolingPeriod> {
    let n_sh = model.index(process.pol_sh, lambda / 2.0, temp_c)?;
    let n_1 = model.index(process.pol_f1, lambda, temp_c)?;
    let n_2 = model.index(process.pol_f2, lambda, temp_c)?;
    let denominator = 2.0 * n_sh - n_1 - n_2;
    if denominator.abs() < PERFECT_MATCH_THRESHOLD {
        return Err(QpmError::PerfectPhaseMatch { denominator });
    }
    let signed = lambda / denominator;
    Ok(PolingPeriod {
        period_um: signed.abs(),
        anomalous: signed < 0.0,
    })
}

/// Physical grating period m·|Λ_ijk| phase-matching `process` on its order.
pub fn grating_period_for_order(
    model: &DispersionModel,
    process: &ProcessSpec,
    lambda: f64,
    temp_c: f64,
) -> Result<PolingPeriod> {
    let base = poling_period(model, process, lambda, temp_c)?;
    Ok(PolingPeriod {
        period_um: f64::from(process.order) * base.period_um,
        anomalous: base.anomalous,
    })
}

/// Residual mismatch k₃ − k₁ − k₂ ∓ 2πm/Λ_g for sum-frequency mixing of
/// λ1 (on `pol_f1`) and λ2 (on `pol_f2`). The grating vector is taken
/// with the sign that opposes the material mismatch.
pub fn phase_mismatch(
    model: &DispersionModel,
    process: &ProcessSpec,
    lambda1: f64,
    lambda2: f64,
    crystal: &CrystalSpec,
    temp_c: f64,
) -> Result<f64> {
    let material = material_mismatch(model, process, lambda1, lambda2, temp_c)?;
    Ok(subtract_grating(material, process, crystal))
}

/// Removes the grating vector 2πm/Λ_g from a material mismatch, choosing
/// the Fourier component that opposes it.
pub fn subtract_grating(material: f64, process: &ProcessSpec, crystal: &CrystalSpec) -> f64 {
    let grating = 2.0 * PI * f64::from(process.order) / crystal.grating_period_um;
    if material >= 0.0 {
        material - grating
    } else {
        material + grating
    }
}

/// k₃ − k₁ − k₂ without the grating contribution.
pub fn material_mismatch(
    model: &DispersionModel,
    process: &ProcessSpec,
    lambda1: f64,
    lambda2: f64,
    temp_c: f64,
) -> Result<f64> {
    let lambda3 = if lambda1 == lambda2 {
        lambda1 / 2.0
    } else {
        1.0 / (1.0 / lambda1 + 1.0 / lambda2)
    };
    let k3 = wavevector(model, process.pol_sh, lambda3, temp_c)?;
    let k1 = wavevector(model, process.pol_f1, lambda1, temp_c)?;
    let k2 = wavevector(model, process.pol_f2, lambda2, temp_c)?;
    Ok(k3 - (k1 + k2))
}

/// sin(x)/x with the removable singularity filled.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Low-conversion plane-wave efficiency sinc²(Δk·L/2) for a mismatch in rad/µm.
pub fn sinc2_efficiency(delta_k: f64, length_um: f64) -> f64 {
    let s = sinc(0.5 * delta_k * length_um);
    s * s
}

/// Degenerate SHG efficiency sinc²(Δk·L/2) across a fundamental-wavelength grid.
pub fn tuning_curve(
    model: &DispersionModel,
    process: &ProcessSpec,
    crystal: &CrystalSpec,
    temp_c: f64,
    lambda_grid: &[f64],
) -> Result<SampledSpectrum> {
    if lambda_grid.is_empty() {
        return Err(QpmError::InvalidArgument("empty wavelength grid".into()));
    }
    let length = crystal.length_um();
    let values = lambda_grid
        .iter()
        .map(|&l| {
            phase_mismatch(model, process, l, l, crystal, temp_c).map(|dk| sinc2_efficiency(dk, length))
        })
        .collect::<Result<Vec<_>>>()?;
    SampledSpectrum::new(lambda_grid.to_vec(), values)
}

/// Effective nonlinearity on Fourier order `order` at 50 % duty cycle:
/// 2d/(πm) for odd m, zero for even m.
pub fn effective_nonlinearity(d: f64, order: u32) -> f64 {
    effective_nonlinearity_with_duty(d, order, 0.5)
}

/// 2d·|sin(πmD)|/(πm). Order 0 returns the DC component d·|2D − 1|.
pub fn effective_nonlinearity_with_duty(d: f64, order: u32, duty_cycle: f64) -> f64 {
    if order == 0 {
        return d * (2.0 * duty_cycle - 1.0).abs();
    }
    let m = f64::from(order);
    if duty_cycle == 0.5 {
        return if order.is_multiple_of(2) { 0.0 } else { 2.0 * d / (PI * m) };
    }
    2.0 * d * (PI * m * duty_cycle).sin().abs() / (PI * m)
}

/// Validates a fundamental scan window: inside the model window, with
/// room for the harmonic at λ/2.
pub fn check_scan_window(model: &DispersionModel, window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QpmError::InvalidWindow(format!("[{lo}, {hi}] um")));
    }
    let (min, max) = model.wavelength_window();
    if lo < min || hi > max || lo / 2.0 < min {
        return Err(QpmError::InvalidWindow(format!(
            "scan window [{lo}, {hi}] um (harmonic down to {} um) leaves model window [{min}, {max}] um",
            lo / 2.0
        )));
    }
    Ok(())
}

/// All fundamental wavelengths in `window` at which `process` is
/// phase-matched by a grating of period `grating_period_um`, sorted by λ.
pub fn phase_matched_wavelengths(
    model: &DispersionModel,
    process: &ProcessSpec,
    grating_period_um: f64,
    temp_c: f64,
    window: (f64, f64),
    scan_points: usize,
) -> Result<Vec<QpmSolution>> {
    check_scan_window(model, window)?;
    model.check_temperature(temp_c)?;
    if scan_points < 2 {
        return Err(QpmError::InvalidArgument("scan needs at least 2 points".into()));
    }
    let target = |l: f64| -> Result<f64> {
        Ok(grating_period_for_order(model, process, l, temp_c)?.period_um - grating_period_um)
    };
    let grid = linspace(window.0, window.1, scan_points);
    let values = grid.iter().map(|&l| target(l)).collect::<Result<Vec<_>>>()?;
    let crystal = CrystalSpec::new(1.0, grating_period_um)?;
    sign_change_brackets(&grid, &values)
        .into_iter()
        .map(|(a, b)| {
            let lambda = bisect(target, a, b, 1e-6)?;
            let required = grating_period_for_order(model, process, lambda, temp_c)?.period_um;
            let residual_dk = phase_mismatch(model, process, lambda, lambda, &crystal, temp_c)?;
            Ok(QpmSolution {
                process: *process,
                lambda_fund_um: lambda,
                temp_c,
                required_period_um: required,
                order: process.order,
                residual_dk,
            })
        })
        .collect()
}
