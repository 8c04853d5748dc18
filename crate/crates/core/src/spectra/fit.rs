//! Three-parameter Gaussian peak fit (Levenberg–Marquardt).

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::SampledSpectrum;
use crate::error::{QpmError, Result};

/// Samples below this fraction of the peak, outside the main lobe, are
/// left out of the fit.
pub const DEFAULT_FIT_FLOOR: f64 = 0.05;
const MAX_ITERATIONS: usize = 500;
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    pub amplitude: f64,
    pub center_nm: f64,
    pub fwhm_nm: f64,
    /// RMS of the fit residual over the fitted samples.
    pub residual_rms: f64,
    pub samples_used: usize,
    pub iterations: usize,
}

pub fn fit_peak(spectrum: &SampledSpectrum) -> Result<PeakFit> {
    fit_peak_with(spectrum, DEFAULT_FIT_FLOOR)
}

/// Fits `a·exp(−(x − μ)²/(2σ²))` to the contiguous run of samples around
/// the global maximum that stay above `floor`·max. Wavelengths in nm.
pub fn fit_peak_with(spectrum: &SampledSpectrum, floor: f64) -> Result<PeakFit> {
    let y = spectrum.intensity();
    let x: Vec<f64> = spectrum.wavelength_um().iter().map(|l| l * 1e3).collect();
    let (peak, &y_max) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("spectra are non-empty");
    if peak == 0 || peak == y.len() - 1 {
        return Err(QpmError::PeakAtBoundary);
    }
    if y_max <= 0.0 {
        return Err(QpmError::InvalidArgument("spectrum is identically zero".into()));
    }

    let threshold = floor * y_max;
    let mut lo = peak;
    while lo > 0 && y[lo - 1] > threshold {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < y.len() && y[hi + 1] > threshold {
        hi += 1;
    }
    let xs = &x[lo..=hi];
    let ys = &y[lo..=hi];
    if xs.len() < 4 {
        return Err(QpmError::InvalidArgument(format!(
            "only {} samples above the fit floor",
            xs.len()
        )));
    }

    // Second-moment start.
    let w: f64 = ys.iter().sum();
    let centroid = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / w;
    let var = xs.iter().zip(ys).map(|(x, y)| y * (x - centroid).powi(2)).sum::<f64>() / w;
    let mut p = Vector3::new(y_max, x[peak], var.sqrt().max(1e-12));

    let cost = |p: &Vector3<f64>| -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| (gaussian(p, x) - y).powi(2))
            .sum()
    };
    let mut c = cost(&p);
    let mut damping = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&x, &y) in xs.iter().zip(ys) {
            let (a, mu, s) = (p[0], p[1], p[2]);
            let d = x - mu;
            let g = (-d * d / (2.0 * s * s)).exp();
            let r = a * g - y;
            let j = Vector3::new(g, a * g * d / (s * s), a * g * d * d / (s * s * s));
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut accepted = false;
        while damping < 1e16 {
            let mut lhs = jtj;
            for k in 0..3 {
                lhs[(k, k)] += damping * jtj[(k, k)].max(1e-300);
            }
            let step = match lhs.lu().solve(&(-jtr)) {
                Some(s) => s,
                None => {
                    damping *= 10.0;
                    continue;
                }
            };
            let trial = p + step;
            let tc = if trial[2] > 0.0 { cost(&trial) } else { f64::INFINITY };
            if tc <= c {
                let small = step.iter().zip(p.iter()).all(|(s, v)| s.abs() <= 1e-13 * v.abs().max(1e-300));
                p = trial;
                let improvement = c - tc;
                c = tc;
                damping = (damping * 0.1).max(1e-12);
                accepted = true;
                if small || improvement <= 1e-30 + 1e-15 * c {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: already at the minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(QpmError::NoConvergence(format!(
            "Gaussian fit did not settle in {MAX_ITERATIONS} iterations"
        )));
    }
    Ok(PeakFit {
        amplitude: p[0],
        center_nm: p[1],
        fwhm_nm: FWHM_PER_SIGMA * p[2].abs(),
        residual_rms: (c / xs.len() as f64).sqrt(),
        samples_used: xs.len(),
        iterations,
    })
}

fn gaussian(p: &Vector3<f64>, x: f64) -> f64 {
    let d = x - p[1];
    p[0] * (-d * d / (2.0 * p[2] * p[2])).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::linspace;

    fn sampled(f: impl Fn(f64) -> f64, lo_nm: f64, hi_nm: f64, n: usize) -> SampledSpectrum {
        let grid = linspace(lo_nm * 1e-3, hi_nm * 1e-3, n);
        let vals = grid.iter().map(|&l| f(l * 1e3)).collect();
        SampledSpectrum::new(grid, vals).unwrap()
    }

    #[test]
    fn exact_gaussian_recovered() {
        let (a, mu, s) = (0.8, 745.3, 2.1);
        let spec = sampled(|x| a * (-(x - mu).powi(2) / (2.0 * s * s)).exp(), 735.0, 757.0, 301);
        let fit = fit_peak(&spec).unwrap();
        assert!((fit.amplitude - a).abs() / a < 1e-6, "{fit:?}");
        assert!((fit.center_nm - mu).abs() / mu < 1e-6);
        assert!((fit.fwhm_nm - FWHM_PER_SIGMA * s).abs() / (FWHM_PER_SIGMA * s) < 1e-6);
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn sinc2_center_at_main_lobe() {
        let mu = 744.0;
        let f = |x: f64| {
            let u = (x - mu) * 1.7;
            if u == 0.0 {
                1.0
            } else {
                (u.sin() / u).powi(2)
            }
        };
        let spec = sampled(f, 735.0, 753.0, 1801);
        let fit = fit_peak(&spec).unwrap();
        // argmax of the dense grid
        let (imax, _) = spec
            .intensity()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((fit.center_nm - spec.wavelength_um()[imax] * 1e3).abs() < 0.011);
        assert!(fit.residual_rms > 0.0);
    }

    #[test]
    fn boundary_peak_rejected() {
        let spec = sampled(|x| x, 700.0, 710.0, 11);
        assert!(matches!(fit_peak(&spec), Err(QpmError::PeakAtBoundary)));
    }
}
