#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use qpm_core::dispersion::{CrystalDocument, PolynomialTerm, SellmeierForm, ThermoOpticForm};
use qpm_core::{Axis, CrystalDatabase, DispersionModel, ProcessSpec};

pub fn database() -> CrystalDatabase {
    CrystalDatabase::open(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../crystals"))
}

pub fn kato() -> DispersionModel {
    database().load("ktp-kato").unwrap()
}

/// Shared instance for property tests that evaluate many cases.
pub fn kato_cached() -> &'static DispersionModel {
    static MODEL: OnceLock<DispersionModel> = OnceLock::new();
    MODEL.get_or_init(kato)
}

pub fn emanueli() -> DispersionModel {
    database().load("ktp-emanueli").unwrap()
}

pub fn process(s: &str) -> ProcessSpec {
    s.parse().unwrap()
}

pub fn triple() -> [ProcessSpec; 3] {
    [process("YZY:1"), process("ZZZ:2"), process("ZYY:7")]
}

/// n² = A + C/λ² through (l1, n1) and (l2, n2).
pub fn inverse_square_form(l1: f64, n1: f64, l2: f64, n2: f64) -> SellmeierForm {
    let c = (n1 * n1 - n2 * n2) / (1.0 / (l1 * l1) - 1.0 / (l2 * l2));
    let a = n2 * n2 - c / (l2 * l2);
    SellmeierForm {
        constant: a,
        resonance_terms: vec![],
        polynomial_terms: vec![PolynomialTerm { coeff: c, power: -2 }],
    }
}

pub fn document(id: &str, y: SellmeierForm, z: SellmeierForm) -> CrystalDocument {
    let mut axes = BTreeMap::new();
    axes.insert(Axis::Y, y);
    axes.insert(Axis::Z, z);
    CrystalDocument {
        crystal_id: id.into(),
        reference_temperature_c: 20.0,
        wavelength_window_um: [0.6, 2.0],
        temperature_window_c: [0.0, 100.0],
        provenance: "synthetic".into(),
        axes,
        thermo_optic: None,
    }
}

/// Indices chosen so that YZY (m=1), ZZZ (m=2) and ZYY (m=7) all need a
/// 40 µm grating at λ = 1.5 µm:
///   2 n_z(.75) − 2 n_z(1.5)          = 3/40
///   2 n_z(.75) − 2 n_y(1.5)          = 10.5/40
///   2 n_y(.75) − n_z(1.5) − n_y(1.5) = 1.5/40
/// with n_z(1.5) = 2 fixed.
pub const TRIPLE_NZ: (f64, f64) = (2.0375, 2.0);
pub const TRIPLE_NY: (f64, f64) = (1.971875, 1.90625);

pub fn triple_crossing_model() -> DispersionModel {
    triple_crossing_model_shifted(0.0)
}

/// As [`triple_crossing_model`] with n_y(0.75) raised by `dy`.
pub fn triple_crossing_model_shifted(dy: f64) -> DispersionModel {
    let z = inverse_square_form(0.75, TRIPLE_NZ.0, 1.5, TRIPLE_NZ.1);
    let y = inverse_square_form(0.75, TRIPLE_NY.0 + dy, 1.5, TRIPLE_NY.1);
    DispersionModel::from_document(document("triple", y, z)).unwrap()
}

/// Shifted triple model with a linear thermo-optic slope c1/λ on Z only.
/// At λ = 1.5 the ZZZ:2 denominator moves by (4/3)·c1·ΔT and the YZY:1
/// denominator by 2·dy − (2/3)·c1·ΔT, so the two periods agree when
/// c1 = 1.5·dy / (T_cross − T_ref).
pub fn thermo_model(dy: f64, t_cross: f64) -> DispersionModel {
    let mut doc = triple_crossing_model_shifted(dy).document().clone();
    let c1 = 1.5 * dy / (t_cross - doc.reference_temperature_c);
    let mut thermo = BTreeMap::new();
    thermo.insert(
        Axis::Z,
        ThermoOpticForm {
            linear_poly: vec![0.0, c1],
            quadratic_poly: vec![],
        },
    );
    doc.thermo_optic = Some(thermo);
    doc.crystal_id = "thermo".into();
    DispersionModel::from_document(doc).unwrap()
}

pub fn constant_model(n: f64) -> DispersionModel {
    let doc = document("flat", SellmeierForm::constant(n * n), SellmeierForm::constant(n * n));
    DispersionModel::from_document(doc).unwrap()
}

/// Independent grating period m·|λ/(2n_i(λ/2) − n_j(λ) − n_k(λ))| straight
/// from the index, bypassing the qpm module.
pub fn oracle_period(model: &DispersionModel, p: &ProcessSpec, lambda: f64, t: f64) -> f64 {
    let n = |axis, l| model.index(axis, l, t).unwrap();
    let den = 2.0 * n(p.pol_sh, lambda / 2.0) - n(p.pol_f1, lambda) - n(p.pol_f2, lambda);
    f64::from(p.order) * (lambda / den).abs()
}

pub fn dense_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Sign changes of `f` on a dense grid, returned as bracket midpoints.
pub fn dense_sign_changes(grid: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let v: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    (0..grid.len() - 1)
        .filter(|&i| v[i] == 0.0 || v[i].signum() != v[i + 1].signum())
        .map(|i| 0.5 * (grid[i] + grid[i + 1]))
        .collect()
}

/// Full width at half maximum from samples, linear interpolation at the
/// half-max crossings around the global maximum.
pub fn sampled_fwhm(x: &[f64], y: &[f64]) -> f64 {
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let half = 0.5 * ymax;
    let mut i = imax;
    while y[i - 1] > half {
        i -= 1;
    }
    let left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]);
    let mut j = imax;
    while y[j + 1] > half {
        j += 1;
    }
    let right = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j]);
    right - left
}
