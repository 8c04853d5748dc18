use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpm_core::{
    find_multiway, grating_period_for_order, poling_period, Axis, CrystalDatabase, DispersionModel, ProcessSpec,
};

fn db_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../crystals")
}

fn kato() -> DispersionModel {
    CrystalDatabase::open(db_dir()).load("ktp-kato").unwrap()
}

fn qpm_in(db: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpm"))
        .arg("--db")
        .arg(db)
        .args(args)
        .env_remove("QPM_CRYSTAL_DB")
        .output()
        .unwrap()
}

fn qpm(args: &[&str]) -> Output {
    qpm_in(&db_dir(), args)
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn p(s: &str) -> ProcessSpec {
    s.parse().unwrap()
}

#[test]
fn index_matches_library_bit_for_bit() {
    let out = stdout(&qpm(&["index", "--crystal", "ktp-kato", "--axis", "Z", "--lambda-um", "1.49", "--temp-c", "40"]));
    assert_eq!(out.lines().count(), 1);
    assert_eq!(f(out.trim()), kato().index(Axis::Z, 1.49, 40.0).unwrap());
}

#[test]
fn unknown_crystal_exits_2() {
    let o = qpm(&["index", "--crystal", "ktp-nope", "--axis", "Z", "--lambda-um", "1.49"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("crystal not found"));
    assert!(stderr(&o).contains("CrystalNotFound"));
}

#[test]
fn out_of_window_exits_3() {
    let o = qpm(&["index", "--axis", "Z", "--lambda-um", "4.0", "--temp-c", "40"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn period_values() {
    let m = kato();
    for (proc_arg, order) in [("YZY", None), ("ZZZ:2", None), ("ZZZ", Some("2")), ("ZYY:7", None)] {
        let mut args = vec!["period", "--process", proc_arg, "--lambda-um", "1.49", "--temp-c", "40"];
        if let Some(o) = order {
            args.extend(["--order", o]);
        }
        let (header, rows) = csv(&stdout(&qpm(&args)));
        assert_eq!(header, ["process", "lambda_um", "temp_c", "period_um", "grating_period_um", "anomalous"]);
        let spec = p(&rows[0][0]);
        let base = poling_period(&m, &spec, 1.49, 40.0).unwrap();
        let grating = grating_period_for_order(&m, &spec, 1.49, 40.0).unwrap();
        assert_eq!(f(&rows[0][3]), base.signed_um());
        assert_eq!(f(&rows[0][4]), grating.period_um);
        assert!((grating.period_um - 45.5).abs() < 0.3, "{proc_arg}: {}", grating.period_um);
    }
}

#[test]
fn dispersionless_period_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let flat = r#"{
        "crystal_id": "flat",
        "reference_temperature_c": 20.0,
        "wavelength_window_um": [0.5, 2.0],
        "temperature_window_c": [0.0, 100.0],
        "provenance": "synthetic, n = 2 on every axis",
        "axes": {
            "Y": { "constant": 4.0, "resonance_terms": [], "polynomial_terms": [] },
            "Z": { "constant": 4.0, "resonance_terms": [], "polynomial_terms": [] }
        }
    }"#;
    std::fs::write(dir.path().join("flat.json"), flat).unwrap();
    let o = qpm_in(dir.path(), &["period", "--crystal", "flat", "--process", "ZZZ", "--lambda-um", "1.5"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("PerfectPhaseMatch"));
}

#[test]
fn curves_columns_match_library() {
    let text = stdout(&qpm(&[
        "curves",
        "--temp-c",
        "40",
        "--lambda-min-um",
        "1.3",
        "--lambda-max-um",
        "1.7",
        "--samples",
        "41",
        "YZY:1",
        "ZZZ:2",
        "ZYY:7",
    ]));
    let (header, rows) = csv(&text);
    assert_eq!(header, ["lambda_um", "YZY:1", "ZZZ:2", "ZYY:7"]);
    assert_eq!(rows.len(), 41);
    let m = kato();
    for row in &rows {
        assert_eq!(row.len(), 4);
        let l = f(&row[0]);
        for (col, proc_arg) in ["YZY:1", "ZZZ:2", "ZYY:7"].iter().enumerate() {
            let expect = grating_period_for_order(&m, &p(proc_arg), l, 40.0).unwrap().period_um;
            assert_eq!(f(&row[col + 1]), expect);
        }
    }
    assert_eq!(f(&rows[0][0]), 1.3);
    assert_eq!(f(&rows[40][0]), 1.7);
}

#[test]
fn curves_mark_period_and_usage() {
    let text = stdout(&qpm(&["curves", "--samples", "5", "--mark-period", "45.65", "ZZZ:2"]));
    let (header, rows) = csv(&text);
    assert_eq!(header.last().unwrap(), "mark_period_um");
    assert!(rows.iter().all(|r| f(&r[2]) == 45.65));

    let o = qpm(&["curves", "--samples", "0", "ZZZ:2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = qpm(&["curves"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn coincide_multi() {
    let text = stdout(&qpm(&["coincide", "--multi", "YZY:1", "ZZZ:2", "ZYY:7", "--crystal", "ktp-kato", "--temp-c", "40"]));
    let (header, rows) = csv(&text);
    assert_eq!(header[2], "lambda_star_um");
    assert_eq!(rows[0][1], "YZY:1;ZZZ:2;ZYY:7");
    let lambda = f(&rows[0][2]);
    let period = f(&rows[0][4]);
    assert!((lambda - 1.49).abs() < 0.01 && (period - 45.5).abs() < 0.3);
    let lib = find_multiway(&kato(), &[p("YZY:1"), p("ZZZ:2"), p("ZYY:7")], (1.40, 1.60), 40.0).unwrap();
    assert_eq!(lambda, lib.lambda_star_um);
    assert_eq!(period, lib.common_period_um);
    assert_eq!(f(&rows[0][5]), lib.spread_um);
}

#[test]
fn coincide_pairwise_json() {
    let text = stdout(&qpm(&[
        "--format",
        "json",
        "coincide",
        "--crystal",
        "ktp-emanueli",
        "--temp-c",
        "40",
        "--lambda-min-um",
        "1.45",
        "--lambda-max-um",
        "1.57",
        "YZY:1",
        "ZZZ:2",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let list = v.as_array().or_else(|| v["coincidences"].as_array()).expect("coincidence list");
    let hit = list
        .iter()
        .find(|c| (c["lambda_star_um"].as_f64().unwrap() - 1.529).abs() < 0.01)
        .expect("crossing near 1.529 um");
    assert!((hit["common_period_um"].as_f64().unwrap() - 47.97).abs() < 0.5);
}

#[test]
fn coincide_degenerate_exits_4() {
    let o = qpm(&["coincide", "ZZZ:2", "ZZZ:2"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn coincide_tune_temperature() {
    let text = stdout(&qpm(&["coincide", "--tune-lambda-um", "1.49", "--temp-window", "20", "150", "YZY:1", "ZZZ:2"]));
    let (_, rows) = csv(&text);
    let t = f(&rows[0][3]);
    assert!((20.0..=150.0).contains(&t));
    assert_eq!(f(&rows[0][2]), 1.49);
}

#[test]
fn spectrum_centers_table() {
    let text = stdout(&qpm(&["spectrum", "--centers", "--period-um", "45.65"]));
    let (header, rows) = csv(&text);
    assert_eq!(
        header,
        ["process", "temp_c", "lambda_fund_um", "predicted_sh_nm", "observed_sh_nm", "systematic_nm"]
    );
    let target = [("ZZZ:2", 744.3), ("YZY:1", 746.0), ("ZYY:7", 742.8)];
    let at_ref: Vec<_> = rows.iter().filter(|r| f(&r[1]) == 20.0).collect();
    assert_eq!(at_ref.len(), 3);
    for row in at_ref {
        let q = target.iter().find(|(k, _)| *k == row[0]).unwrap().1;
        assert!((f(&row[3]) - q).abs() < 1.0, "{row:?}");
        assert!((f(&row[3]) - f(&row[4])).abs() < 4.5, "{row:?}");
    }
}

#[test]
fn spectrum_csv() {
    let text = stdout(&qpm(&["spectrum", "--temp-c", "22", "--samples", "61", "--nodes", "801", "ZZZ:2"]));
    let (header, rows) = csv(&text);
    assert_eq!(header, ["wavelength_nm", "intensity"]);
    assert_eq!(rows.len(), 61);
    let values: Vec<f64> = rows.iter().map(|r| f(&r[1])).collect();
    assert!(values.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    assert!(values.iter().cloned().fold(0.0, f64::max) > 0.1);
    assert!((f(&rows[0][0]) - 730.0).abs() < 1e-9);
}

#[test]
fn entangle_tables() {
    let (header, rows) = csv(&stdout(&qpm(&["entangle", "--r", "0"])));
    assert_eq!(header, ["subset", "modes", "ppt_min_eigenvalue", "entangled"]);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| f(&r[2]) == 0.5 && r[3] == "false"));

    let (_, rows) = csv(&stdout(&qpm(&["entangle", "--r", "0.3"])));
    assert!(rows.iter().all(|r| f(&r[2]) < 0.5 && r[3] == "true"), "{rows:?}");
}

#[test]
fn database_path_resolution() {
    // The environment variable is used when no flag is given.
    let o = Command::new(env!("CARGO_BIN_EXE_qpm"))
        .args(["index", "--axis", "Z", "--lambda-um", "1.49", "--temp-c", "40"])
        .env("QPM_CRYSTAL_DB", db_dir())
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert_eq!(f(stdout(&o).trim()), kato().index(Axis::Z, 1.49, 40.0).unwrap());

    // The flag wins over the environment.
    let empty = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qpm"))
        .arg("--db")
        .arg(empty.path())
        .args(["index", "--axis", "Z", "--lambda-um", "1.49"])
        .env("QPM_CRYSTAL_DB", db_dir())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    // Otherwise ./crystals.
    let o = Command::new(env!("CARGO_BIN_EXE_qpm"))
        .args(["index", "--axis", "Z", "--lambda-um", "1.49", "--temp-c", "40"])
        .env_remove("QPM_CRYSTAL_DB")
        .current_dir(db_dir().join(".."))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn output_file_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curves.csv");
    let o = qpm(&["--output", path.to_str().unwrap(), "curves", "--samples", "3", "ZZZ:2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);

    let bad = dir.path().join("missing-dir").join("out.csv");
    let o = qpm(&["--output", bad.to_str().unwrap(), "curves", "--samples", "3", "ZZZ:2"]);
    assert_eq!(o.status.code(), Some(5));

    std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let o = qpm_in(dir.path(), &["index", "--crystal", "broken", "--axis", "Z", "--lambda-um", "1.0"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn overlap_report() {
    let args = |bw: &'static str| {
        vec!["overlap", "--temp-c", "40", "--bandwidth-nm", bw, "YZY:1", "ZZZ:2", "ZYY:7"]
    };
    let (header, rows) = csv(&stdout(&qpm(&args("10"))));
    assert_eq!(header, ["process", "lambda_fund_um", "span_nm", "bandwidth_nm", "pass"]);
    assert!(rows.iter().all(|r| r[4] == "true"));
    let (_, rows) = csv(&stdout(&qpm(&args("1"))));
    assert!(rows.iter().all(|r| r[4] == "false"));
}

#[test]
fn help_exits_0() {
    let o = qpm(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("coincide"));
}
