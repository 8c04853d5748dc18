use qpm_core::coincide::{pulsed_overlap, OverlapReport};
use qpm_core::entangle::{analyze, build_quadripartite, EntanglementReport};
use qpm_core::roots::linspace;
use qpm_core::spectra::{measured, sh_spectrum_with, PredictedCenter, Quadrature};
use qpm_core::{
    find_multiway, find_pairwise, fit_peak, grating_period_for_order, poling_period, predicted_centers,
    tune_temperature, Axis, Coincidence, CrystalDatabase, CrystalSpec, ProcessSpec, PumpSpectrum,
    QpmError, Result,
};
use serde_json::json;

use crate::output::{num, Sink};
use crate::{Cli, Command, Format};

pub fn run(cli: &Cli) -> Result<()> {
    let db = CrystalDatabase::open(&cli.db);
    let mut sink = Sink::open(cli.output.as_deref())?;
    match &cli.command {
        Command::Index {
            crystal,
            axis,
            lambda_um,
            temp_c,
        } => {
            let model = db.load(&crystal.crystal)?;
            let axis: Axis = axis.parse()?;
            let t = temp_c.unwrap_or(model.reference_temperature());
            let n = model.index(axis, *lambda_um, t)?;
            match cli.format {
                Format::Csv => sink.line(&num(n))?,
                Format::Json => sink.json(&json!({
                    "crystal_id": model.crystal_id(),
                    "axis": axis,
                    "lambda_um": lambda_um,
                    "temp_c": t,
                    "n": n,
                }))?,
            }
        }
        Command::Period {
            crystal,
            process,
            order,
            lambda_um,
            temp_c,
        } => {
            let model = db.load(&crystal.crystal)?;
            let mut p: ProcessSpec = process.parse()?;
            if let Some(m) = order {
                p = p.with_order(*m)?;
            }
            let t = temp_c.unwrap_or(model.reference_temperature());
            let base = poling_period(&model, &p, *lambda_um, t)?;
            let grating = grating_period_for_order(&model, &p, *lambda_um, t)?;
            match cli.format {
                Format::Csv => {
                    sink.row(&["process", "lambda_um", "temp_c", "period_um", "grating_period_um", "anomalous"])?;
                    sink.row(&[
                        p.to_string(),
                        num(*lambda_um),
                        num(t),
                        num(base.signed_um()),
                        num(grating.period_um),
                        base.anomalous.to_string(),
                    ])?;
                }
                Format::Json => sink.json(&json!({
                    "process": p.to_string(),
                    "lambda_um": lambda_um,
                    "temp_c": t,
                    "period_um": base.signed_um(),
                    "grating_period_um": grating.period_um,
                    "anomalous": base.anomalous,
                }))?,
            }
        }
        Command::Curves {
            crystal,
            window,
            temp_c,
            samples,
            mark_period,
            processes,
        } => {
            let model = db.load(&crystal.crystal)?;
            let procs = parse_processes(processes)?;
            let t = temp_c.unwrap_or(model.reference_temperature());
            qpm_core::qpm::check_scan_window(&model, window.window())?;
            let grid = linspace(window.lambda_min_um, window.lambda_max_um, *samples as usize);
            let columns = procs
                .iter()
                .map(|p| {
                    grid.iter()
                        .map(|&l| grating_period_for_order(&model, p, l, t).map(|g| g.period_um))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            write_curves(&mut sink, cli.format, &grid, &procs, &columns, *mark_period, t)?;
        }
        Command::Coincide {
            crystal,
            window,
            temp_c,
            multi,
            tune_lambda_um,
            temp_window,
            scan_points,
            processes,
        } => {
            let model = db.load(&crystal.crystal)?;
            let procs = parse_processes(processes)?;
            let t = temp_c.unwrap_or(model.reference_temperature());
            let found = if *multi {
                vec![find_multiway(&model, &procs, window.window(), t)?]
            } else {
                let [a, b] = pair(&procs)?;
                match tune_lambda_um {
                    Some(l) => {
                        let tw = match temp_window.as_deref() {
                            Some([lo, hi]) => (*lo, *hi),
                            _ => model.temperature_window(),
                        };
                        vec![tune_temperature(&model, &a, &b, *l, tw)?.1]
                    }
                    None => find_pairwise(&model, &a, &b, window.window(), t, *scan_points as usize)?,
                }
            };
            write_coincidences(&mut sink, cli.format, &found)?;
        }
        Command::Overlap {
            crystal,
            window,
            temp_c,
            period_um,
            length_mm,
            bandwidth_nm,
            processes,
        } => {
            let model = db.load(&crystal.crystal)?;
            let procs = parse_processes(processes)?;
            let t = temp_c.unwrap_or(model.reference_temperature());
            let spec = CrystalSpec::new(*length_mm, *period_um)?;
            let report = pulsed_overlap(&model, &procs, &spec, t, *bandwidth_nm, window.window())?;
            write_overlap(&mut sink, cli.format, &report)?;
        }
        Command::Spectrum {
            crystal,
            window,
            temp_c,
            period_um,
            length_mm,
            pump_um,
            pump_fwhm_nm,
            centers,
            sh_min_um,
            sh_max_um,
            samples,
            nodes,
            fit,
            processes,
        } => {
            let model = db.load(&crystal.crystal)?;
            let spec = CrystalSpec::new(*length_mm, *period_um)?;
            if *centers {
                let procs = if processes.is_empty() {
                    ["YZY:1", "ZZZ:2", "ZYY:7"].iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?
                } else {
                    parse_processes(processes)?
                };
                let mut temps = temp_c.clone();
                if temps.is_empty() {
                    temps = vec![model.reference_temperature(), measured::TEMPERATURE_C, 40.0];
                    temps.dedup();
                }
                let mut rows = Vec::new();
                for &t in &temps {
                    rows.push((t, predicted_centers(&model, &spec, t, &procs, window.window())?));
                }
                write_centers(&mut sink, cli.format, &rows)?;
            } else {
                let p = match parse_processes(processes)?.as_slice() {
                    [p] => *p,
                    _ => {
                        return Err(QpmError::InvalidArgument(
                            "a spectrum takes exactly one process".into(),
                        ))
                    }
                };
                let t = match temp_c.as_slice() {
                    [] => model.reference_temperature(),
                    [t] => *t,
                    _ => {
                        return Err(QpmError::InvalidArgument(
                            "a spectrum takes one temperature".into(),
                        ))
                    }
                };
                if *fit && cli.format != Format::Json {
                    return Err(QpmError::InvalidArgument("--fit needs --format json".into()));
                }
                let pump = PumpSpectrum::new(*pump_um, *pump_fwhm_nm)?;
                let grid = linspace(*sh_min_um, *sh_max_um, *samples as usize);
                let spectrum = sh_spectrum_with(&model, &p, &spec, t, &pump, &grid, Quadrature { nodes: *nodes })?;
                match cli.format {
                    Format::Csv => spectrum.write_csv(sink.writer()).map_err(|e| sink.error(e))?,
                    Format::Json => {
                        let fitted = if *fit { Some(fit_peak(&spectrum)?) } else { None };
                        sink.json(&json!({
                            "process": p.to_string(),
                            "temp_c": t,
                            "crystal": spec,
                            "pump": pump,
                            "wavelength_um": spectrum.wavelength_um(),
                            "intensity": spectrum.intensity(),
                            "fit": fitted,
                        }))?
                    }
                }
            }
        }
        Command::Entangle {
            preset: _,
            r,
            k_zzz,
            k_yzy,
            k_zyy,
        } => {
            let graph = build_quadripartite(*k_zzz, *k_yzy, *k_zyy)?;
            let report = analyze(&graph, *r)?;
            write_entangle(&mut sink, cli.format, &report)?;
        }
    }
    sink.finish()
}

fn parse_processes(raw: &[String]) -> Result<Vec<ProcessSpec>> {
    raw.iter().map(|s| s.parse()).collect()
}

fn pair(procs: &[ProcessSpec]) -> Result<[ProcessSpec; 2]> {
    match procs {
        [a, b] => Ok([*a, *b]),
        _ => Err(QpmError::InvalidArgument(format!(
            "expected two processes, got {} (use --multi for three or more)",
            procs.len()
        ))),
    }
}

fn labels(procs: &[ProcessSpec]) -> Vec<String> {
    procs.iter().map(ToString::to_string).collect()
}

fn write_curves(
    sink: &mut Sink,
    format: Format,
    grid: &[f64],
    procs: &[ProcessSpec],
    columns: &[Vec<f64>],
    mark: Option<f64>,
    temp_c: f64,
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut header = vec!["lambda_um".to_string()];
            header.extend(labels(procs));
            if mark.is_some() {
                header.push("mark_period_um".into());
            }
            sink.row(&header)?;
            for (i, &l) in grid.iter().enumerate() {
                let mut row = vec![num(l)];
                row.extend(columns.iter().map(|c| num(c[i])));
                if let Some(m) = mark {
                    row.push(num(m));
                }
                sink.row(&row)?;
            }
            Ok(())
        }
        Format::Json => sink.json(&json!({
            "temp_c": temp_c,
            "lambda_um": grid,
            "processes": labels(procs),
            "grating_period_um": columns,
            "mark_period_um": mark,
        })),
    }
}

fn write_coincidences(sink: &mut Sink, format: Format, found: &[Coincidence]) -> Result<()> {
    match format {
        Format::Csv => {
            sink.row(&["kind", "participants", "lambda_star_um", "temp_c", "common_period_um", "spread_um"])?;
            for c in found {
                sink.row(&[
                    json!(c.kind).as_str().unwrap_or_default().to_string(),
                    labels(&c.participants).join(";"),
                    num(c.lambda_star_um),
                    num(c.temp_c),
                    num(c.common_period_um),
                    num(c.spread_um),
                ])?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<_> = found
                .iter()
                .map(|c| {
                    json!({
                        "kind": c.kind,
                        "participants": labels(&c.participants),
                        "lambda_star_um": c.lambda_star_um,
                        "temp_c": c.temp_c,
                        "common_period_um": c.common_period_um,
                        "spread_um": c.spread_um,
                    })
                })
                .collect();
            sink.json(&json!({ "coincidences": rows }))
        }
    }
}

fn write_overlap(sink: &mut Sink, format: Format, report: &OverlapReport) -> Result<()> {
    match format {
        Format::Csv => {
            sink.row(&["process", "lambda_fund_um", "span_nm", "bandwidth_nm", "pass"])?;
            for p in &report.participants {
                sink.row(&[
                    p.process.to_string(),
                    p.lambda_fund_um.map(num).unwrap_or_default(),
                    num(report.span_nm),
                    num(report.bandwidth_nm),
                    report.pass.to_string(),
                ])?;
            }
            Ok(())
        }
        Format::Json => {
            let participants: Vec<_> = report
                .participants
                .iter()
                .map(|p| json!({ "process": p.process.to_string(), "lambda_fund_um": p.lambda_fund_um }))
                .collect();
            sink.json(&json!({
                "grating_period_um": report.grating_period_um,
                "temp_c": report.temp_c,
                "bandwidth_nm": report.bandwidth_nm,
                "span_nm": report.span_nm,
                "pass": report.pass,
                "participants": participants,
            }))
        }
    }
}

fn observed(p: &ProcessSpec) -> Option<f64> {
    let tag = p.to_string();
    measured::SH_CENTERS_NM
        .iter()
        .find(|(k, _)| *k == tag)
        .map(|&(_, v)| v)
}

fn write_centers(sink: &mut Sink, format: Format, rows: &[(f64, Vec<PredictedCenter>)]) -> Result<()> {
    match format {
        Format::Csv => {
            sink.row(&[
                "process",
                "temp_c",
                "lambda_fund_um",
                "predicted_sh_nm",
                "observed_sh_nm",
                "systematic_nm",
            ])?;
            for (t, centers) in rows {
                for c in centers {
                    sink.row(&[
                        c.process.to_string(),
                        num(*t),
                        num(c.lambda_fund_um),
                        num(c.sh_nm),
                        observed(&c.process).map(num).unwrap_or_default(),
                        num(measured::SYSTEMATIC_ERROR_NM),
                    ])?;
                }
            }
            Ok(())
        }
        Format::Json => {
            let out: Vec<_> = rows
                .iter()
                .flat_map(|(t, centers)| {
                    centers.iter().map(move |c| {
                        json!({
                            "process": c.process.to_string(),
                            "temp_c": t,
                            "lambda_fund_um": c.lambda_fund_um,
                            "predicted_sh_nm": c.sh_nm,
                            "observed_sh_nm": observed(&c.process),
                            "systematic_nm": measured::SYSTEMATIC_ERROR_NM,
                        })
                    })
                })
                .collect();
            sink.json(&json!({ "centers": out }))
        }
    }
}

fn write_entangle(sink: &mut Sink, format: Format, report: &EntanglementReport) -> Result<()> {
    let modes = report.graph.modes();
    let names = |subset: &[usize]| -> String {
        subset
            .iter()
            .map(|&i| format!("{}{}", modes[i].label, modes[i].polarization))
            .collect::<Vec<_>>()
            .join(";")
    };
    match format {
        Format::Csv => {
            sink.row(&["subset", "modes", "ppt_min_eigenvalue", "entangled"])?;
            for b in &report.bipartitions {
                let idx: Vec<String> = b.subset.iter().map(ToString::to_string).collect();
                sink.row(&[
                    idx.join(";"),
                    names(&b.subset),
                    num(b.ppt_min_eigenvalue),
                    b.entangled.to_string(),
                ])?;
            }
            Ok(())
        }
        Format::Json => {
            let mut value = json!(report);
            value["bipartition_modes"] = json!(report
                .bipartitions
                .iter()
                .map(|b| names(&b.subset))
                .collect::<Vec<_>>());
            sink.json(&value)
        }
    }
}
