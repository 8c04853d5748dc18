//! Refractive indices of biaxial crystals.
//!
//! A crystal is described by one Sellmeier fit per principal axis plus an
//! optional additive thermo-optic correction:
//!
//! ```text
//! n(λ, T) = sqrt(A + Σ resonance(λ) + Σ c·λ^p) + Δn(λ, T)
//! Δn(λ, T) = P1(1/λ)·(T − T_ref) + P2(1/λ)·(T − T_ref)²
//! ```
//!
//! Wavelengths are in µm, temperatures in °C. Evaluation outside the
//! model's validity windows is an error; nothing is extrapolated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QpmError, Result};

/// Step used by the central-difference derivative, µm.
pub const DERIVATIVE_STEP_UM: f64 = 1e-4;

const VALIDATION_WAVELENGTHS: usize = 1001;
const VALIDATION_TEMPERATURES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for Axis {
    type Err = QpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            "Z" | "z" => Ok(Axis::Z),
            other => Err(QpmError::InvalidArgument(format!("unknown axis `{other}`"))),
        }
    }
}

impl TryFrom<char> for Axis {
    type Error = QpmError;

    fn try_from(c: char) -> Result<Self> {
        let mut buf = [0u8; 4];
        c.encode_utf8(&mut buf).parse()
    }
}

/// Functional shape of one resonance term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermShape {
    /// `p·λ²/(λ² − q)`
    #[serde(rename = "lambda2_over")]
    Lambda2Over,
    /// `p/(λ² − q)`
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceTerm {
    pub p: f64,
    /// Pole position, µm².
    pub q: f64,
    pub shape: TermShape,
}

impl ResonanceTerm {
    fn value(&self, lambda_sq: f64) -> f64 {
        match self.shape {
            TermShape::Lambda2Over => self.p * lambda_sq / (lambda_sq - self.q),
            TermShape::Inverse => self.p / (lambda_sq - self.q),
        }
    }

    /// d/dλ of [`Self::value`].
    fn slope(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        let den = (l2 - self.q) * (l2 - self.q);
        match self.shape {
            TermShape::Lambda2Over => -2.0 * self.p * self.q * lambda / den,
            TermShape::Inverse => -2.0 * self.p * lambda / den,
        }
    }
}

/// `coeff·λ^power`, power even (may be negative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialTerm {
    pub coeff: f64,
    pub power: i32,
}

/// Sellmeier fit for n² on one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierForm {
    pub constant: f64,
    #[serde(default)]
    pub resonance_terms: Vec<ResonanceTerm>,
    #[serde(default)]
    pub polynomial_terms: Vec<PolynomialTerm>,
}

impl SellmeierForm {
    pub fn constant(constant: f64) -> Self {
        SellmeierForm {
            constant,
            resonance_terms: Vec::new(),
            polynomial_terms: Vec::new(),
        }
    }

    /// n² at `lambda` (µm).
    pub fn n_squared(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        let resonances: f64 = self.resonance_terms.iter().map(|t| t.value(l2)).sum();
        let poly: f64 = self
            .polynomial_terms
            .iter()
            .map(|t| t.coeff * lambda.powi(t.power))
            .sum();
        self.constant + resonances + poly
    }

    /// d(n²)/dλ, 1/µm.
    pub fn n_squared_slope(&self, lambda: f64) -> f64 {
        let resonances: f64 = self.resonance_terms.iter().map(|t| t.slope(lambda)).sum();
        let poly: f64 = self
            .polynomial_terms
            .iter()
            .filter(|t| t.power != 0)
            .map(|t| t.coeff * f64::from(t.power) * lambda.powi(t.power - 1))
            .sum();
        resonances + poly
    }
}

/// Temperature correction Δn = P1(1/λ)·ΔT + P2(1/λ)·ΔT².
///
/// Polynomials are ascending coefficient arrays in 1/λ (λ in µm).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoOpticForm {
    pub linear_poly: Vec<f64>,
    #[serde(default)]
    pub quadratic_poly: Vec<f64>,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_slope(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc * x + c * i as f64)
}

impl ThermoOpticForm {
    pub fn delta_n(&self, lambda: f64, delta_t: f64) -> f64 {
        if delta_t == 0.0 {
            return 0.0;
        }
        let u = 1.0 / lambda;
        horner(&self.linear_poly, u) * delta_t + horner(&self.quadratic_poly, u) * delta_t * delta_t
    }

    /// ∂Δn/∂λ at fixed temperature offset.
    pub fn delta_n_slope(&self, lambda: f64, delta_t: f64) -> f64 {
        if delta_t == 0.0 {
            return 0.0;
        }
        let u = 1.0 / lambda;
        let du_dlambda = -u * u;
        let d_du = horner_slope(&self.linear_poly, u) * delta_t
            + horner_slope(&self.quadratic_poly, u) * delta_t * delta_t;
        d_du * du_dlambda
    }
}

/// Crystal-database document, one crystal per file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalDocument {
    pub crystal_id: String,
    pub reference_temperature_c: f64,
    pub wavelength_window_um: [f64; 2],
    pub temperature_window_c: [f64; 2],
    pub provenance: String,
    pub axes: BTreeMap<Axis, SellmeierForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermo_optic: Option<BTreeMap<Axis, ThermoOpticForm>>,
}

/// Validated dispersion model. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    doc: CrystalDocument,
}

/// Parse and validate a crystal-database document.
pub fn load_model(source: &str) -> Result<DispersionModel> {
    DispersionModel::from_json_str(source)
}

impl DispersionModel {
    pub fn from_json_str(source: &str) -> Result<Self> {
        let doc: CrystalDocument =
            serde_json::from_str(source).map_err(|e| QpmError::Schema(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| QpmError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn from_document(doc: CrystalDocument) -> Result<Self> {
        validate_document(&doc)?;
        let model = DispersionModel { doc };
        model.validate_grid()?;
        Ok(model)
    }

    pub fn document(&self) -> &CrystalDocument {
        &self.doc
    }

    pub fn crystal_id(&self) -> &str {
        &self.doc.crystal_id
    }

    pub fn provenance(&self) -> &str {
        &self.doc.provenance
    }

    pub fn reference_temperature(&self) -> f64 {
        self.doc.reference_temperature_c
    }

    pub fn wavelength_window(&self) -> (f64, f64) {
        (self.doc.wavelength_window_um[0], self.doc.wavelength_window_um[1])
    }

    pub fn temperature_window(&self) -> (f64, f64) {
        (self.doc.temperature_window_c[0], self.doc.temperature_window_c[1])
    }

    pub fn axes(&self) -> impl Iterator<Item = Axis> + '_ {
        self.doc.axes.keys().copied()
    }

    pub fn has_axis(&self, axis: Axis) -> bool {
        self.doc.axes.contains_key(&axis)
    }

    pub fn has_thermo_optic(&self) -> bool {
        self.doc
            .thermo_optic
            .as_ref()
            .is_some_and(|m| m.values().any(|t| !t.linear_poly.is_empty() || !t.quadratic_poly.is_empty()))
    }

    fn sellmeier(&self, axis: Axis) -> Result<&SellmeierForm> {
        self.doc.axes.get(&axis).ok_or(QpmError::MissingAxis(axis))
    }

    fn thermo(&self, axis: Axis) -> Option<&ThermoOpticForm> {
        self.doc.thermo_optic.as_ref().and_then(|m| m.get(&axis))
    }

    pub fn check_wavelength(&self, lambda: f64) -> Result<()> {
        let (min, max) = self.wavelength_window();
        if lambda.is_finite() && lambda >= min && lambda <= max {
            Ok(())
        } else {
            Err(QpmError::WavelengthOutOfWindow {
                lambda_um: lambda,
                min,
                max,
            })
        }
    }

    pub fn check_temperature(&self, temp_c: f64) -> Result<()> {
        let (min, max) = self.temperature_window();
        if temp_c.is_finite() && temp_c >= min && temp_c <= max {
            Ok(())
        } else {
            Err(QpmError::TemperatureOutOfWindow { temp_c, min, max })
        }
    }

    /// Refractive index on `axis` at wavelength `lambda` (µm) and `temp_c` (°C).
    pub fn index(&self, axis: Axis, lambda: f64, temp_c: f64) -> Result<f64> {
        let form = self.sellmeier(axis)?;
        self.check_wavelength(lambda)?;
        self.check_temperature(temp_c)?;
        Ok(self.index_unchecked(form, axis, lambda, temp_c))
    }

    fn index_unchecked(&self, form: &SellmeierForm, axis: Axis, lambda: f64, temp_c: f64) -> f64 {
        let base = form.n_squared(lambda).sqrt();
        let delta_t = temp_c - self.doc.reference_temperature_c;
        match self.thermo(axis) {
            Some(t) => base + t.delta_n(lambda, delta_t),
            None => base,
        }
    }

    /// Analytic dn/dλ (1/µm). Requires room for the central-difference
    /// stencil so the two routes are always comparable.
    pub fn index_derivative(&self, axis: Axis, lambda: f64, temp_c: f64) -> Result<f64> {
        let form = self.sellmeier(axis)?;
        self.check_stencil(lambda)?;
        self.check_temperature(temp_c)?;
        let n_sq = form.n_squared(lambda);
        let mut slope = form.n_squared_slope(lambda) / (2.0 * n_sq.sqrt());
        if let Some(t) = self.thermo(axis) {
            slope += t.delta_n_slope(lambda, temp_c - self.doc.reference_temperature_c);
        }
        Ok(slope)
    }

    /// Central difference with step [`DERIVATIVE_STEP_UM`].
    pub fn index_derivative_numeric(&self, axis: Axis, lambda: f64, temp_c: f64) -> Result<f64> {
        self.check_stencil(lambda)?;
        let h = DERIVATIVE_STEP_UM;
        let hi = self.index(axis, lambda + h, temp_c)?;
        let lo = self.index(axis, lambda - h, temp_c)?;
        Ok((hi - lo) / (2.0 * h))
    }

    fn check_stencil(&self, lambda: f64) -> Result<()> {
        self.check_wavelength(lambda)?;
        let (min, max) = self.wavelength_window();
        if lambda - DERIVATIVE_STEP_UM < min || lambda + DERIVATIVE_STEP_UM > max {
            return Err(QpmError::StencilOutOfWindow { lambda_um: lambda });
        }
        Ok(())
    }

    fn validate_grid(&self) -> Result<()> {
        let (lmin, lmax) = self.wavelength_window();
        let (tmin, tmax) = self.temperature_window();
        let mut temps: Vec<f64> = (0..VALIDATION_TEMPERATURES)
            .map(|i| tmin + (tmax - tmin) * i as f64 / (VALIDATION_TEMPERATURES - 1) as f64)
            .collect();
        temps.push(self.doc.reference_temperature_c);
        for (&axis, form) in &self.doc.axes {
            for i in 0..VALIDATION_WAVELENGTHS {
                let lambda = lmin + (lmax - lmin) * i as f64 / (VALIDATION_WAVELENGTHS - 1) as f64;
                if form.n_squared(lambda) <= 0.0 {
                    return Err(QpmError::NonPhysicalIndex {
                        axis,
                        lambda_um: lambda,
                        temp_c: self.doc.reference_temperature_c,
                        n: f64::NAN,
                    });
                }
                for &t in &temps {
                    let n = self.index_unchecked(form, axis, lambda, t);
                    if !(n.is_finite() && n > 1.0) {
                        return Err(QpmError::NonPhysicalIndex {
                            axis,
                            lambda_um: lambda,
                            temp_c: t,
                            n,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn validate_document(doc: &CrystalDocument) -> Result<()> {
    if doc.crystal_id.trim().is_empty() {
        return Err(QpmError::Schema("empty crystal_id".into()));
    }
    for required in [Axis::Y, Axis::Z] {
        if !doc.axes.contains_key(&required) {
            return Err(QpmError::Schema(format!("missing required axis {required}")));
        }
    }
    let [lmin, lmax] = doc.wavelength_window_um;
    if !(lmin.is_finite() && lmax.is_finite() && lmin > 0.0 && lmin < lmax) {
        return Err(QpmError::InvalidWindow(format!(
            "wavelength window [{lmin}, {lmax}] um"
        )));
    }
    let [tmin, tmax] = doc.temperature_window_c;
    let tref = doc.reference_temperature_c;
    if !(tmin.is_finite() && tmax.is_finite() && tmin <= tref && tref <= tmax) {
        return Err(QpmError::InvalidWindow(format!(
            "temperature window [{tmin}, {tmax}] degC must contain reference {tref} degC"
        )));
    }
    for (&axis, form) in &doc.axes {
        for term in &form.resonance_terms {
            if !(term.p.is_finite() && term.q.is_finite()) {
                return Err(QpmError::Schema(format!("axis {axis}: non-finite resonance term")));
            }
            if term.q >= lmin * lmin && term.q <= lmax * lmax {
                return Err(QpmError::PoleInWindow { axis, q: term.q });
            }
        }
        for term in &form.polynomial_terms {
            if term.power % 2 != 0 {
                return Err(QpmError::Schema(format!(
                    "axis {axis}: polynomial power {} is not even",
                    term.power
                )));
            }
        }
    }
    if let Some(thermo) = &doc.thermo_optic {
        for axis in thermo.keys() {
            if !doc.axes.contains_key(axis) {
                return Err(QpmError::Schema(format!(
                    "thermo_optic block for undefined axis {axis}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn constant_model(n_squared: f64) -> DispersionModel {
        let mut axes = BTreeMap::new();
        axes.insert(Axis::Y, SellmeierForm::constant(n_squared));
        axes.insert(Axis::Z, SellmeierForm::constant(n_squared));
        DispersionModel::from_document(CrystalDocument {
            crystal_id: "const".into(),
            reference_temperature_c: 20.0,
            wavelength_window_um: [0.3, 3.0],
            temperature_window_c: [0.0, 100.0],
            provenance: "synthetic".into(),
            axes,
            thermo_optic: None,
        })
        .unwrap()
    }

    fn single_resonance() -> DispersionModel {
        let form = SellmeierForm {
            constant: 4.0,
            resonance_terms: vec![ResonanceTerm {
                p: 0.25,
                q: 0.04,
                shape: TermShape::Lambda2Over,
            }],
            polynomial_terms: vec![],
        };
        let mut axes = BTreeMap::new();
        axes.insert(Axis::Y, form.clone());
        axes.insert(Axis::Z, form);
        DispersionModel::from_document(CrystalDocument {
            crystal_id: "single".into(),
            reference_temperature_c: 20.0,
            wavelength_window_um: [0.4, 2.0],
            temperature_window_c: [0.0, 100.0],
            provenance: "synthetic".into(),
            axes,
            thermo_optic: None,
        })
        .unwrap()
    }

    #[test]
    fn constant_form_gives_constant_index() {
        let m = constant_model(4.0);
        for &l in &[0.5, 1.0, 2.5] {
            for &t in &[0.0, 20.0, 77.0] {
                assert_eq!(m.index(Axis::Z, l, t).unwrap(), 2.0);
            }
        }
        assert_eq!(m.index_derivative(Axis::Y, 1.0, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn single_resonance_hand_value() {
        // sqrt(4 + 0.25/0.96), evaluated with 30-digit arithmetic
        #[allow(clippy::excessive_precision)]
        let expected = 2.064_077_679_416_805_9;
        let n = single_resonance().index(Axis::Y, 1.0, 20.0).unwrap();
        assert!((n - expected).abs() < 1e-14, "{n}");
    }

    #[test]
    fn single_resonance_derivative_matches_central_difference() {
        let m = single_resonance();
        // away from the pole at 0.2 um, where the O(h²) stencil error grows
        for i in 0..50 {
            let l = 0.6 + 1.3 * i as f64 / 49.0;
            let a = m.index_derivative(Axis::Z, l, 20.0).unwrap();
            let b = m.index_derivative_numeric(Axis::Z, l, 20.0).unwrap();
            assert!((a - b).abs() < 1e-8, "{l}: {a} vs {b}");
        }
    }

    #[test]
    fn out_of_window_is_an_error() {
        let m = single_resonance();
        assert!(matches!(
            m.index(Axis::Y, 2.1, 20.0),
            Err(QpmError::WavelengthOutOfWindow { .. })
        ));
        assert!(matches!(
            m.index(Axis::Y, 1.0, 120.0),
            Err(QpmError::TemperatureOutOfWindow { .. })
        ));
        assert!(matches!(
            m.index_derivative(Axis::Y, 2.0, 20.0),
            Err(QpmError::StencilOutOfWindow { .. })
        ));
        assert!(matches!(m.index(Axis::X, 1.0, 20.0), Err(QpmError::MissingAxis(Axis::X))));
    }

    #[test]
    fn pole_inside_window_rejected() {
        let doc = r#"{
            "crystal_id": "bad", "reference_temperature_c": 20,
            "wavelength_window_um": [1.0, 2.0], "temperature_window_c": [0, 50],
            "provenance": "test",
            "axes": {
                "Y": {"constant": 3.0, "resonance_terms": [], "polynomial_terms": []},
                "Z": {"constant": 3.0, "resonance_terms": [{"p": 0.1, "q": 2.25, "shape": "inverse"}], "polynomial_terms": []}
            }
        }"#;
        assert!(matches!(
            load_model(doc),
            Err(QpmError::PoleInWindow { axis: Axis::Z, .. })
        ));
    }

    #[test]
    fn missing_axis_is_schema_error() {
        let doc = r#"{
            "crystal_id": "noz", "reference_temperature_c": 20,
            "wavelength_window_um": [1.0, 2.0], "temperature_window_c": [0, 50],
            "provenance": "test",
            "axes": { "Y": {"constant": 3.0, "resonance_terms": [], "polynomial_terms": []} }
        }"#;
        assert!(matches!(load_model(doc), Err(QpmError::Schema(_))));
    }

    #[test]
    fn unknown_shape_is_schema_error() {
        let doc = r#"{
            "crystal_id": "shape", "reference_temperature_c": 20,
            "wavelength_window_um": [1.0, 2.0], "temperature_window_c": [0, 50],
            "provenance": "test",
            "axes": {
                "Y": {"constant": 3.0, "resonance_terms": [{"p": 1, "q": 0.01, "shape": "cauchy"}], "polynomial_terms": []},
                "Z": {"constant": 3.0}
            }
        }"#;
        assert!(matches!(load_model(doc), Err(QpmError::Schema(_))));
    }

    #[test]
    fn index_below_one_rejected() {
        let doc = r#"{
            "crystal_id": "thin", "reference_temperature_c": 20,
            "wavelength_window_um": [1.0, 2.0], "temperature_window_c": [0, 50],
            "provenance": "test",
            "axes": {
                "Y": {"constant": 0.81},
                "Z": {"constant": 3.0}
            }
        }"#;
        assert!(matches!(load_model(doc), Err(QpmError::NonPhysicalIndex { .. })));
    }

    #[test]
    fn thermo_correction_vanishes_at_reference() {
        let t = ThermoOpticForm {
            linear_poly: vec![1e-5, 2e-5, -3e-5],
            quadratic_poly: vec![1e-8],
        };
        assert_eq!(t.delta_n(1.3, 0.0), 0.0);
        let dt = 15.0;
        let u = 1.0 / 1.3;
        let expected = (1e-5 + 2e-5 * u - 3e-5 * u * u) * dt + 1e-8 * dt * dt;
        assert!((t.delta_n(1.3, dt) - expected).abs() < 1e-18);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("y".parse::<Axis>().unwrap(), Axis::Y);
        assert_eq!(Axis::try_from('Z').unwrap(), Axis::Z);
        assert!("W".parse::<Axis>().is_err());
    }
}
