//! Coincidences between grating-period curves of distinct processes.
//!
//! Two processes coincide when the same physical grating phase-matches
//! both at one wavelength and temperature. Pairwise coincidences are
//! roots of the period difference and are located by scan + bisection.
//! Three or more curves generally do not meet in a single point, so a
//! multi-way coincidence is the wavelength of minimum spread and the
//! achieved spread is reported rather than assumed to be zero.

use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::error::{QpmError, Result};
use crate::qpm::{
    check_scan_window, grating_period_for_order, phase_matched_wavelengths, CrystalSpec, ProcessSpec,
    DEFAULT_SCAN_POINTS,
};
use crate::roots::{bisect, golden_section, linspace, sign_change_brackets};

/// Largest period difference accepted at a pairwise root, µm.
pub const PAIRWISE_PERIOD_TOLERANCE: f64 = 1e-6;
/// Curves closer than this everywhere on the scan are treated as identical, µm.
pub const DEGENERATE_TOLERANCE: f64 = 1e-9;
/// Wavelength resolution of the multi-way refinement, µm. Near an exact
/// crossing the spread grows at ~10² µm per µm, so sub-1e-9 spreads need
/// λ to ~1e-12.
pub const MULTIWAY_RESOLUTION: f64 = 1e-13;
/// Minimum coarse grid for the multi-way search.
pub const MULTIWAY_COARSE_POINTS: usize = 512;
pub const DEFAULT_TEMPERATURE_SCAN_POINTS: usize = 256;
/// Slack on the bandwidth comparison covering root-solver resolution, nm.
pub const OVERLAP_SLACK_NM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoincidenceKind {
    /// Pairwise root with spread below [`PAIRWISE_PERIOD_TOLERANCE`].
    Exact,
    /// Multi-way minimum of the spread.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coincidence {
    pub participants: Vec<ProcessSpec>,
    pub lambda_star_um: f64,
    pub temp_c: f64,
    /// Mean of the participants' grating periods at `lambda_star_um`.
    pub common_period_um: f64,
    /// Max minus min of the participants' grating periods.
    pub spread_um: f64,
    pub kind: CoincidenceKind,
}

fn periods_at(
    model: &DispersionModel,
    participants: &[ProcessSpec],
    lambda: f64,
    temp_c: f64,
) -> Result<Vec<f64>> {
    participants
        .iter()
        .map(|p| grating_period_for_order(model, p, lambda, temp_c).map(|g| g.period_um))
        .collect()
}

fn spread_of(periods: &[f64]) -> (f64, f64) {
    let max = periods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = periods.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = periods.iter().sum::<f64>() / periods.len() as f64;
    (max - min, mean)
}

fn coincidence_at(
    model: &DispersionModel,
    participants: &[ProcessSpec],
    lambda: f64,
    temp_c: f64,
    kind: CoincidenceKind,
) -> Result<Coincidence> {
    let periods = periods_at(model, participants, lambda, temp_c)?;
    let (spread, mean) = spread_of(&periods);
    Ok(Coincidence {
        participants: participants.to_vec(),
        lambda_star_um: lambda,
        temp_c,
        common_period_um: mean,
        spread_um: spread,
        kind,
    })
}

/// Every crossing of the grating-period curves of `a` and `b` inside
/// `window`, sorted by wavelength.
pub fn find_pairwise(
    model: &DispersionModel,
    a: &ProcessSpec,
    b: &ProcessSpec,
    window: (f64, f64),
    temp_c: f64,
    scan_points: usize,
) -> Result<Vec<Coincidence>> {
    if scan_points < 16 {
        return Err(QpmError::InvalidArgument(format!(
            "scan_points = {scan_points}, need at least 16"
        )));
    }
    check_scan_window(model, window)?;
    model.check_temperature(temp_c)?;

    let diff = |l: f64| -> Result<f64> {
        Ok(grating_period_for_order(model, a, l, temp_c)?.period_um
            - grating_period_for_order(model, b, l, temp_c)?.period_um)
    };
    let grid = linspace(window.0, window.1, scan_points);
    let values = grid.iter().map(|&l| diff(l)).collect::<Result<Vec<_>>>()?;
    if values.iter().all(|v| v.abs() <= DEGENERATE_TOLERANCE) {
        return Err(QpmError::DegenerateCurves);
    }
    let pair = [*a, *b];
    sign_change_brackets(&grid, &values)
        .into_iter()
        .map(|(lo, hi)| {
            let lambda = bisect(diff, lo, hi, PAIRWISE_PERIOD_TOLERANCE)?;
            coincidence_at(model, &pair, lambda, temp_c, CoincidenceKind::Exact)
        })
        .collect()
}

/// Wavelength of minimum spread among three or more processes.
pub fn find_multiway(
    model: &DispersionModel,
    participants: &[ProcessSpec],
    window: (f64, f64),
    temp_c: f64,
) -> Result<Coincidence> {
    find_multiway_with(model, participants, window, temp_c, MULTIWAY_COARSE_POINTS)
}

pub fn find_multiway_with(
    model: &DispersionModel,
    participants: &[ProcessSpec],
    window: (f64, f64),
    temp_c: f64,
    coarse_points: usize,
) -> Result<Coincidence> {
    if participants.len() < 3 {
        return Err(QpmError::InvalidArgument(format!(
            "multi-way search needs at least 3 participants, got {}",
            participants.len()
        )));
    }
    if coarse_points < MULTIWAY_COARSE_POINTS {
        return Err(QpmError::InvalidArgument(format!(
            "coarse grid of {coarse_points} points, need at least {MULTIWAY_COARSE_POINTS}"
        )));
    }
    check_scan_window(model, window)?;
    model.check_temperature(temp_c)?;

    let spread = |l: f64| -> Result<f64> { Ok(spread_of(&periods_at(model, participants, l, temp_c)?).0) };
    let grid = linspace(window.0, window.1, coarse_points);
    let values = grid.iter().map(|&l| spread(l)).collect::<Result<Vec<_>>>()?;
    let (best_i, &best_v) = values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty grid");

    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let (mut lambda, refined) = golden_section(spread, lo, hi, MULTIWAY_RESOLUTION)?;
    if best_v < refined {
        lambda = grid[best_i];
    }
    coincidence_at(model, participants, lambda, temp_c, CoincidenceKind::Approximate)
}

/// Temperature in `temp_window` at which the curves of `a` and `b` cross
/// exactly at `lambda_target`. With several crossings the lowest
/// temperature is returned.
pub fn tune_temperature(
    model: &DispersionModel,
    a: &ProcessSpec,
    b: &ProcessSpec,
    lambda_target: f64,
    temp_window: (f64, f64),
) -> Result<(f64, Coincidence)> {
    let (t_lo, t_hi) = temp_window;
    if !(t_lo.is_finite() && t_hi.is_finite() && t_lo < t_hi) {
        return Err(QpmError::InvalidWindow(format!("temperature window [{t_lo}, {t_hi}]")));
    }
    model.check_temperature(t_lo)?;
    model.check_temperature(t_hi)?;
    model.check_wavelength(lambda_target)?;
    model.check_wavelength(lambda_target / 2.0)?;

    let diff = |t: f64| -> Result<f64> {
        Ok(grating_period_for_order(model, a, lambda_target, t)?.period_um
            - grating_period_for_order(model, b, lambda_target, t)?.period_um)
    };
    let grid = linspace(t_lo, t_hi, DEFAULT_TEMPERATURE_SCAN_POINTS);
    let values = grid.iter().map(|&t| diff(t)).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = sign_change_brackets(&grid, &values)
        .into_iter()
        .next()
        .ok_or_else(|| {
            QpmError::NoSolutionInWindow(format!(
                "{a} and {b} do not cross at {lambda_target} um for T in [{t_lo}, {t_hi}] degC"
            ))
        })?;
    let temp = bisect(diff, lo, hi, PAIRWISE_PERIOD_TOLERANCE)?;
    let c = coincidence_at(model, &[*a, *b], lambda_target, temp, CoincidenceKind::Exact)?;
    Ok((temp, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantOverlap {
    pub process: ProcessSpec,
    /// Phase-matched fundamental wavelength, µm; `None` if no solution in the window.
    pub lambda_fund_um: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub grating_period_um: f64,
    pub temp_c: f64,
    pub bandwidth_nm: f64,
    pub participants: Vec<ParticipantOverlap>,
    /// Spread of the phase-matched fundamental wavelengths, nm.
    pub span_nm: f64,
    pub pass: bool,
}

/// Checks whether every participant, phase-matched by the fixed grating of
/// `crystal`, falls inside one window of `bandwidth_nm` at the fundamental.
/// Where a process has several solutions in `window`, the one nearest the
/// window centre is used.
pub fn pulsed_overlap(
    model: &DispersionModel,
    participants: &[ProcessSpec],
    crystal: &CrystalSpec,
    temp_c: f64,
    bandwidth_nm: f64,
    window: (f64, f64),
) -> Result<OverlapReport> {
    if bandwidth_nm.is_nan() || bandwidth_nm < 0.0 {
        return Err(QpmError::InvalidArgument(format!("bandwidth {bandwidth_nm} nm")));
    }
    if participants.is_empty() {
        return Err(QpmError::InvalidArgument("no participants".into()));
    }
    let centre = 0.5 * (window.0 + window.1);
    let mut rows = Vec::with_capacity(participants.len());
    for p in participants {
        let sols = phase_matched_wavelengths(
            model,
            p,
            crystal.grating_period_um,
            temp_c,
            window,
            DEFAULT_SCAN_POINTS,
        )?;
        let lambda = sols
            .iter()
            .map(|s| s.lambda_fund_um)
            .min_by(|x, y| (x - centre).abs().total_cmp(&(y - centre).abs()));
        rows.push(ParticipantOverlap {
            process: *p,
            lambda_fund_um: lambda,
        });
    }
    let found: Vec<f64> = rows.iter().filter_map(|r| r.lambda_fund_um).collect();
    let all_found = found.len() == rows.len();
    let span_nm = if found.is_empty() {
        f64::INFINITY
    } else {
        let max = found.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = found.iter().copied().fold(f64::INFINITY, f64::min);
        (max - min) * 1e3
    };
    Ok(OverlapReport {
        grating_period_um: crystal.grating_period_um,
        temp_c,
        bandwidth_nm,
        participants: rows,
        span_nm,
        pass: all_found && span_nm <= bandwidth_nm + OVERLAP_SLACK_NM,
    })
}
