//! Subcommand bodies. Each returns an [`Outcome`]; printing and file
//! writing happen in the binary.

use std::path::PathBuf;

use palais_core::leafspace::{prop26_witness, table1_report, LeafSpaceOptions, Stratum};
use palais_core::lift::{
    classify_tol, classify_within, fit_return_map_within, holonomy_closed_forms, holonomy_of_d, holonomy_of_d_quadrature, monodromy_sigma1,
    monodromy_sigma2, monodromy_sx, monodromy_sy, sigma2_closed_form_shift, sigma2_quadrature_shift,
    sx_closed_form_shift, sy_closed_form_shift, HolonomyMap, LiftOptions, HOLONOMY_SAMPLES,
};
use palais_core::semicomplete::{classify_univalence, nonsemicomplete_witness, VerdictStatus};
use palais_core::verify::{run_all, VerifySettings, DEFAULT_ODE_TOL};
use palais_core::{Error, PairParams, C64, TWO_PI_I};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Generator, RunConfig};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// Loosest tolerance the integrator accepts; looser config values are clamped.
pub const MAX_ODE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: u8,
    pub json: Value,
    pub table: String,
    pub csv: String,
    /// Extra files, relative to the output directory.
    pub files: Vec<(PathBuf, String)>,
    /// Printed to stderr when the run does not pass.
    pub message: Option<String>,
}

impl Outcome {
    pub fn input_error(message: impl Into<String>) -> Self {
        let message = message.into();
        Self {
            code: EXIT_INPUT,
            json: json!({ "error": message }),
            table: format!("input error: {message}\n"),
            csv: String::new(),
            files: Vec::new(),
            message: Some(message),
        }
    }

    fn from_error(err: &Error) -> Self {
        let mut out = Self::input_error(err.to_string());
        out.code = error_code(err);
        if out.code == EXIT_NUMERIC {
            out.table = format!("numerical failure: {err}\n");
        }
        out
    }
}

/// Input errors map to 2, everything raised while integrating to 3.
pub fn error_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParams(_) | Error::Precondition(_) | Error::Domain(_) | Error::Degenerate(_) | Error::ZeroSeries => {
            EXIT_INPUT
        }
        Error::Pole(_)
        | Error::Escaped { .. }
        | Error::StepUnderflow { .. }
        | Error::StepLimit { .. }
        | Error::Tangency { .. }
        | Error::NotConverged(_) => EXIT_NUMERIC,
    }
}

/// Integrator tolerance actually used for a config.
pub fn effective_ode_tol(config: &RunConfig) -> f64 {
    config.tolerances.ode_tol.min(MAX_ODE_TOL)
}

fn lift_options(config: &RunConfig) -> LiftOptions {
    LiftOptions::new(effective_ode_tol(config)).with_loop_radius(config.loop_radii.generator)
}

fn valid_params(config: &RunConfig) -> Result<PairParams, Error> {
    let params = config.params.to_params();
    let report = params.validate();
    if report.is_valid() {
        Ok(params)
    } else {
        Err(Error::InvalidParams(report))
    }
}

fn csv_rows<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn fmt_c(z: C64) -> String {
    format!("{:.6e}{:+.6e}i", z.re, z.im)
}

pub fn cmd_classify(config: &RunConfig) -> Outcome {
    let params = config.params.to_params();
    let verdict = classify_univalence(&params);
    let code = match verdict.status {
        VerdictStatus::Univalent => EXIT_PASS,
        VerdictStatus::NotUnivalent => EXIT_NEGATIVE,
        VerdictStatus::OutsideClassifiedFamily => EXIT_INPUT,
    };
    let witness = match verdict.status {
        VerdictStatus::NotUnivalent => match nonsemicomplete_witness(&params) {
            Ok(w) => json!(w),
            Err(e) => json!({ "error": e.to_string() }),
        },
        _ => Value::Null,
    };
    let mut table = format!("verdict: {:?}\n", verdict.status);
    for r in &verdict.reasons {
        table += &format!("  {} {}: {}\n", if r.passed { "pass" } else { "FAIL" }, r.name, r.detail);
    }
    #[derive(Serialize)]
    struct Row<'a> {
        name: &'a str,
        passed: bool,
        detail: &'a str,
    }
    let rows: Vec<Row> = verdict.reasons.iter().map(|r| Row { name: &r.name, passed: r.passed, detail: &r.detail }).collect();
    let message = match code {
        EXIT_PASS => None,
        _ => Some(format!("{:?}: {}", verdict.status, verdict.failed().map(|r| r.name.as_str()).collect::<Vec<_>>().join(", "))),
    };
    Outcome {
        code,
        json: json!({ "verdict": verdict, "witness": witness }),
        table,
        csv: csv_rows(&rows),
        files: Vec::new(),
        message,
    }
}

/// Images of the configured starts with the closed-form prediction.
struct Samples {
    closed_form: Value,
    starts: Vec<C64>,
    images: Vec<C64>,
    predicted: Vec<C64>,
    oracle_error: f64,
    fit_residual: f64,
    fitted: Vec<HolonomyMap>,
}

/// Fits through the first three pairs; the residual over all of them is
/// judged against `fit_tol` by the caller.
fn fit(pairs: &[(C64, C64)], ode_tol: f64) -> Result<(HolonomyMap, f64), Error> {
    let mut map = fit_return_map_within(pairs, f64::INFINITY)?;
    map.classification = classify_within(&map, classify_tol(ode_tol));
    let residual = pairs.iter().map(|(z, w)| (map.apply(*z) - w).norm()).fold(0.0, f64::max);
    Ok((map, residual))
}

/// Fitted map, residual and predicted images for a translation by `shift`.
fn fit_translation(pairs: &[(C64, C64)], shift: C64, ode_tol: f64) -> Result<(Vec<C64>, HolonomyMap, f64), Error> {
    let (map, residual) = fit(pairs, ode_tol)?;
    Ok((pairs.iter().map(|(z, _)| z + shift).collect(), map, residual))
}

fn run_generator(params: &PairParams, generator: Generator, config: &RunConfig) -> Result<Samples, Error> {
    let opts = lift_options(config);
    let starts: Vec<C64> = config.monodromy.starts.iter().map(|&(re, im)| C64::new(re, im)).collect();
    match generator {
        Generator::Sigma1 | Generator::Sigma2 => {
            let shift = match generator {
                Generator::Sigma1 => [C64::new(0.0, 0.0); 2],
                _ => sigma2_closed_form_shift(params)?,
            };
            // the t and s coordinates move independently: fit one map per coordinate
            let lift = |z: C64| {
                let p = [z, z.conj()];
                match generator {
                    Generator::Sigma1 => monodromy_sigma1(params, p, &opts),
                    _ => monodromy_sigma2(params, p, &opts),
                }
            };
            let ends = starts.iter().map(|&z| lift(z)).collect::<Result<Vec<_>, _>>()?;
            let mut out = Samples {
                closed_form: json!(shift),
                starts: Vec::new(),
                images: Vec::new(),
                predicted: Vec::new(),
                oracle_error: 0.0,
                fit_residual: 0.0,
                fitted: Vec::new(),
            };
            for coord in 0..2 {
                let pairs: Vec<(C64, C64)> = starts
                    .iter()
                    .zip(&ends)
                    .map(|(z, e)| (if coord == 0 { *z } else { z.conj() }, e[coord]))
                    .collect();
                let (pred, map, res) = fit_translation(&pairs, shift[coord], opts.tol)?;
                out.starts.extend(pairs.iter().map(|p| p.0));
                out.images.extend(pairs.iter().map(|p| p.1));
                out.predicted.extend(pred);
                out.fitted.push(map);
                out.fit_residual = out.fit_residual.max(res);
            }
            if generator == Generator::Sigma2 {
                let quad = sigma2_quadrature_shift(params, opts.loop_radius)?;
                out.oracle_error = (quad[0] - shift[0]).norm().max((quad[1] - shift[1]).norm());
            }
            Ok(out)
        }
        Generator::Sy | Generator::Sx => {
            let (shift, lift): (C64, &dyn Fn(C64) -> Result<C64, Error>) = match generator {
                Generator::Sy => (sy_closed_form_shift(params)?, &|s| monodromy_sy(params, s, &opts)),
                _ => (sx_closed_form_shift(params)?, &|s| monodromy_sx(params, s, &opts)),
            };
            let images = starts.iter().map(|&z| lift(z)).collect::<Result<Vec<_>, _>>()?;
            let pairs: Vec<_> = starts.iter().copied().zip(images.iter().copied()).collect();
            let (predicted, map, fit_residual) = fit_translation(&pairs, shift, opts.tol)?;
            Ok(Samples {
                closed_form: json!(shift),
                starts,
                images,
                predicted,
                oracle_error: 0.0,
                fit_residual,
                fitted: vec![map],
            })
        }
        Generator::HolonomyD => {
            let radius = config.loop_radii.holonomy;
            let starts = HOLONOMY_SAMPLES.to_vec();
            let images = starts
                .iter()
                .map(|&z| holonomy_of_d(params, z, radius, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let predicted: Vec<C64> = starts.iter().map(|&z| holonomy_closed_forms(params, z, radius).with_m).collect();
            let mut oracle_error: f64 = 0.0;
            for (z, w) in starts.iter().zip(&images) {
                oracle_error = oracle_error.max((holonomy_of_d_quadrature(params, *z, radius)? - w).norm());
            }
            let pairs: Vec<_> = starts.iter().copied().zip(images.iter().copied()).collect();
            let (map, fit_residual) = fit(&pairs, opts.tol)?;
            // z/(1 + cz) has matrix [[1, 0], [c, 1]]
            let coefficient = TWO_PI_I * radius * params.f0() / f64::from(params.m);
            let fitted_coefficient = map.gamma / map.alpha;
            oracle_error = oracle_error.max((fitted_coefficient - coefficient).norm());
            Ok(Samples {
                closed_form: json!({ "map": "z/(1 + c z)", "c": coefficient, "fitted_c": fitted_coefficient }),
                starts,
                images,
                predicted,
                oracle_error,
                fit_residual,
                fitted: vec![map],
            })
        }
    }
}

pub fn cmd_monodromy(config: &RunConfig, generator: Generator) -> Outcome {
    let params = match valid_params(config) {
        Ok(p) => p,
        Err(e) => return Outcome::from_error(&e),
    };
    if config.monodromy.starts.len() < 3 {
        return Outcome::input_error("at least three monodromy starts are needed to fit a return map");
    }
    let samples = match run_generator(&params, generator, config) {
        Ok(s) => s,
        Err(e) => return Outcome::from_error(&e),
    };
    let error = samples
        .images
        .iter()
        .zip(&samples.predicted)
        .map(|(w, p)| (w - p).norm())
        .fold(0.0, f64::max);
    let tol = config.tolerances;
    let agreement = error.max(samples.oracle_error);
    let passed = agreement <= tol.report_tol && samples.fit_residual <= tol.fit_tol;
    let name = serde_json::to_value(generator).expect("generator serializes");
    let json = json!({
        "generator": name,
        "closed_form": samples.closed_form,
        "numeric": samples.fitted,
        "error": error,
        "oracle_error": samples.oracle_error,
        "fit_residual": samples.fit_residual,
        "report_tol": tol.report_tol,
        "fit_tol": tol.fit_tol,
        "ode_tol": effective_ode_tol(config),
        "passed": passed,
    });
    let mut table = format!("generator {}\n", name.as_str().unwrap_or_default());
    for (i, map) in samples.fitted.iter().enumerate() {
        table += &format!("  fitted map {i}: {:?}", map.classification);
        if let Some(s) = map.shift() {
            table += &format!(", shift {}", fmt_c(s));
        }
        table += "\n";
    }
    table += &format!(
        "  closed form {}\n  error {error:.3e}, oracle {:.3e}, fit residual {:.3e}\n  {}\n",
        samples.closed_form,
        samples.oracle_error,
        samples.fit_residual,
        if passed { "agrees" } else { "DISAGREES" }
    );
    #[derive(Serialize)]
    struct Row {
        start_re: f64,
        start_im: f64,
        image_re: f64,
        image_im: f64,
        predicted_re: f64,
        predicted_im: f64,
    }
    let rows: Vec<Row> = samples
        .starts
        .iter()
        .zip(&samples.images)
        .zip(&samples.predicted)
        .map(|((s, w), p)| Row { start_re: s.re, start_im: s.im, image_re: w.re, image_im: w.im, predicted_re: p.re, predicted_im: p.im })
        .collect();
    Outcome {
        code: if passed { EXIT_PASS } else { EXIT_NUMERIC },
        json,
        table,
        csv: csv_rows(&rows),
        files: Vec::new(),
        message: (!passed).then(|| {
            format!(
                "agreement {agreement:.3e} (report_tol {:e}), fit residual {:.3e} (fit_tol {:e})",
                tol.report_tol, samples.fit_residual, tol.fit_tol
            )
        }),
    }
}

pub fn cmd_leafspace(config: &RunConfig) -> Outcome {
    let params = match valid_params(config) {
        Ok(p) => p,
        Err(e) => return Outcome::from_error(&e),
    };
    let mut opts = LeafSpaceOptions::new(effective_ode_tol(config), config.tolerances.report_tol);
    opts.lift = opts.lift.with_loop_radius(config.loop_radii.generator);
    let report = match table1_report(&params, &opts) {
        Ok(r) => r,
        Err(e) => return Outcome::from_error(&e),
    };
    #[derive(Serialize)]
    struct Row {
        stratum: &'static str,
        condition: &'static str,
        model: String,
        agreement_error: Option<f64>,
        verified: bool,
    }
    let rows: Vec<Row> = report
        .strata
        .iter()
        .map(|e| Row {
            stratum: e.stratum.label(),
            condition: e.condition,
            model: e.model.render(),
            agreement_error: e.agreement_error,
            verified: e.verified,
        })
        .collect();
    let passed = report.all_verified();
    let failing: Vec<&str> = Stratum::ALL.iter().filter(|s| !report.entry(**s).verified).map(|s| s.label()).collect();
    Outcome {
        code: if passed { EXIT_PASS } else { EXIT_NUMERIC },
        json: report.to_json(),
        table: report.render_table(),
        csv: csv_rows(&rows),
        files: Vec::new(),
        message: (!passed).then(|| format!("unverified strata: {failing:?}, Hausdorff checks passed: {}", report.hausdorff)),
    }
}

pub fn cmd_witness_prop26(config: &RunConfig) -> Outcome {
    let w = &config.witness;
    let report = match prop26_witness(w.epsilon, &w.deltas, effective_ode_tol(config)) {
        Ok(r) => r,
        Err(e) => return Outcome::from_error(&e),
    };
    #[derive(Serialize)]
    struct Row {
        delta: f64,
        c: f64,
        t_star: f64,
        endpoint_error: f64,
        max_radius_sq: f64,
        inside_ball: bool,
        max_h_drift: f64,
    }
    let rows: Vec<Row> = report
        .u2
        .iter()
        .map(|l| Row {
            delta: l.delta,
            c: l.c,
            t_star: l.t_star,
            endpoint_error: l.endpoint_error,
            max_radius_sq: l.max_radius_sq,
            inside_ball: l.inside_ball,
            max_h_drift: l.max_h_drift,
        })
        .collect();
    let u1 = &report.u1;
    if w.u1_mode {
        let table = format!(
            "U1: {} starts, H levels {:?}, max H drift {:.3e}, invariant {}, Hausdorff {}\n",
            u1.starts, u1.h_levels, u1.max_h_drift, u1.invariant, u1.hausdorff
        );
        return Outcome {
            code: if u1.hausdorff { EXIT_PASS } else { EXIT_NUMERIC },
            json: json!({ "epsilon": report.epsilon, "u1": u1, "hausdorff": u1.hausdorff }),
            table,
            csv: csv_rows(&[u1.h_levels.iter().map(|h| h.to_string()).collect::<Vec<_>>()]),
            files: Vec::new(),
            message: (!u1.hausdorff).then(|| "U1 chart checks failed".to_string()),
        };
    }
    let files: Vec<(PathBuf, String)> = report
        .u2
        .iter()
        .enumerate()
        .map(|(i, l)| (PathBuf::from(format!("merging_leaf_{i}.csv")), l.trajectory.to_csv()))
        .chain([(PathBuf::from("merging_leaves.csv"), csv_rows(&rows))])
        .collect();
    let mut table = format!("epsilon {}\n", report.epsilon);
    for r in &rows {
        table += &format!(
            "  delta {:<8} T* {:.12} endpoint error {:.2e} inside ball {}\n",
            r.delta, r.t_star, r.endpoint_error, r.inside_ball
        );
    }
    let b = &report.boundary_touch;
    table += &format!("  boundary touch at time {:.12}, |p|^2 = {:.12}\n", b.time, b.radius_sq);
    table += &format!("  U1 Hausdorff {}, non-Hausdorff witness on U2 {}\n", u1.hausdorff, report.non_hausdorff_witness);
    let passed = u1.hausdorff && report.non_hausdorff_witness;
    let mut json = report.to_json();
    json["trajectory_files"] = json!(files.iter().map(|(p, _)| p.display().to_string()).collect::<Vec<_>>());
    Outcome {
        code: if passed { EXIT_PASS } else { EXIT_NUMERIC },
        json,
        table,
        csv: csv_rows(&rows),
        files,
        message: (!passed).then(|| "merging-leaf witness not established".to_string()),
    }
}

/// Criteria thresholds are the pinned ones, raised to `report_tol` when the
/// integrator tolerance is looser than the default.
pub fn verify_settings(config: &RunConfig) -> VerifySettings {
    let loose = config.tolerances.ode_tol > DEFAULT_ODE_TOL;
    VerifySettings {
        seed: config.verify.seed,
        ode_tol: effective_ode_tol(config),
        threshold_floor: if loose { config.tolerances.report_tol } else { 0.0 },
    }
}

pub fn cmd_verify_all(config: &RunConfig) -> Outcome {
    let settings = verify_settings(config);
    let results = run_all(&settings);
    let first_failure = results.iter().find(|r| !r.passed);
    let passed = first_failure.is_none();
    let table: String = results.iter().map(|r| r.line() + "\n").collect();
    #[derive(Serialize)]
    struct Row<'a> {
        id: u8,
        name: &'a str,
        passed: bool,
        measured: f64,
        threshold: f64,
        margin: f64,
    }
    let rows: Vec<Row> = results
        .iter()
        .map(|r| Row {
            id: r.id,
            name: r.name,
            passed: r.passed,
            measured: r.measured,
            threshold: r.threshold,
            margin: r.margin(),
        })
        .collect();
    let criteria: Vec<Value> = results
        .iter()
        .map(|r| {
            let mut v = json!(r);
            v["margin"] = json!(r.margin());
            v
        })
        .collect();
    let json = json!({
        "settings": settings,
        "passed": passed,
        "count": results.len(),
        "first_failure": first_failure.map(|r| format!("criterion {:02} {}", r.id, r.name)),
        "criteria": criteria,
    });
    Outcome {
        code: if passed { EXIT_PASS } else { EXIT_NUMERIC },
        json,
        table,
        csv: csv_rows(&rows),
        files: Vec::new(),
        message: first_failure.map(|r| format!("first failing criterion: {}", r.line())),
    }
}
