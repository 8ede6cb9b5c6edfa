use std::fmt::Write as _;

use serde::Serialize;

use super::flows::complex_time_flow;
use super::separation::{axis_separation_coordinate, hyperplane_invariant, SeparationCoordinate};
use crate::error::{Error, Result};
use crate::fields::{PairParams, Vector4};
use crate::lift::{
    check_sigma2_loop, consistency_tol, fit_return_map_within, monodromy_sigma1, monodromy_sigma2, monodromy_sx, monodromy_sy,
    sigma2_closed_form_shift, sigma2_quadrature_shift, sx_closed_form_shift, sy_closed_form_shift, Axis,
    LiftOptions,
};
use crate::semicomplete::ZERO_TOL;
use crate::{C64, TWO_PI_I};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stratum {
    S0,
    Sx,
    Sy,
    Sxy,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [Stratum::S0, Stratum::Sx, Stratum::Sy, Stratum::Sxy];

    pub fn label(self) -> &'static str {
        match self {
            Stratum::S0 => "S0",
            Stratum::Sx => "Sx",
            Stratum::Sy => "Sy",
            Stratum::Sxy => "Sxy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StratumModel {
    Point,
    Plane,
    PuncturedDisc,
    /// `ℂ/⟨s ↦ s + shift⟩`
    Cylinder { shift: C64 },
    /// `ℂ²/⟨(t, s) ↦ (t + shift_t, s + shift_s)⟩`
    Quotient { shift_t: C64, shift_s: C64 },
}

impl StratumModel {
    pub fn render(&self) -> String {
        match self {
            StratumModel::Point => "point".into(),
            StratumModel::Plane => "C".into(),
            StratumModel::PuncturedDisc => "D*".into(),
            StratumModel::Cylinder { shift } => format!("C/<s -> s {}>", signed(*shift)),
            StratumModel::Quotient { shift_t, shift_s } => {
                format!("C^2/<(t,s) -> (t {}, s {})>", signed(*shift_t), signed(*shift_s))
            }
        }
    }

    /// Translation data carried by the model, in `(t, s)` order for the quotient.
    pub fn translation(&self) -> Vec<C64> {
        match self {
            StratumModel::Cylinder { shift } => vec![*shift],
            StratumModel::Quotient { shift_t, shift_s } => vec![*shift_t, *shift_s],
            _ => Vec::new(),
        }
    }
}

/// Data the table depends on. `g_at_zero` is exactly zero when `g(0)`
/// is negligible against the coefficients of `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Input {
    pub a: u32,
    pub b: u32,
    pub m: u32,
    pub g_at_zero: C64,
    pub f0: C64,
    /// Constant coefficient of `1/g`.
    pub g0: C64,
}

impl Table1Input {
    pub fn from_params(params: &PairParams) -> Result<Self> {
        let scale = params.g.nonzero_terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let g_at_zero = params.g_at_zero();
        let g_at_zero = if g_at_zero.norm() <= ZERO_TOL * scale { ZERO } else { g_at_zero };
        Ok(Self { a: params.a, b: params.b, m: params.m, g_at_zero, f0: params.f0(), g0: params.g0_inverse()? })
    }
}

/// Model and row condition for `stratum`, by the case analysis of the table.
pub fn table1_model(stratum: Stratum, input: &Table1Input) -> (StratumModel, &'static str) {
    let m = f64::from(input.m);
    let g_zero = input.g_at_zero == ZERO;
    match stratum {
        Stratum::S0 => (StratumModel::Point, "always"),
        Stratum::Sy if input.a == 0 => (StratumModel::Plane, "a = 0"),
        Stratum::Sy if g_zero => (StratumModel::PuncturedDisc, "a != 0, g(0) = 0"),
        Stratum::Sy => (
            StratumModel::Cylinder { shift: TWO_PI_I / (f64::from(input.a) * m * input.g_at_zero) },
            "a != 0, g(0) != 0",
        ),
        Stratum::Sx if input.b == 0 => (StratumModel::Plane, "b = 0"),
        Stratum::Sx if g_zero => (StratumModel::PuncturedDisc, "b != 0, g(0) = 0"),
        Stratum::Sx => (
            StratumModel::Cylinder { shift: -TWO_PI_I / (f64::from(input.b) * m * input.g_at_zero) },
            "b != 0, g(0) != 0",
        ),
        Stratum::Sxy => (
            StratumModel::Quotient { shift_t: -TWO_PI_I * input.f0 / (m * m), shift_s: TWO_PI_I * input.g0 / m },
            "always",
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, passed: value <= threshold }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 0.0 } else { 1.0 }, threshold: 0.0, passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumEntry {
    pub stratum: Stratum,
    pub condition: &'static str,
    pub model: StratumModel,
    pub closed_form: Vec<C64>,
    pub numeric: Vec<C64>,
    pub agreement_error: Option<f64>,
    pub checks: Vec<Check>,
    /// Set when the data fall outside the combinations the table lists.
    pub unlisted: Option<String>,
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafSpaceOptions {
    pub lift: LiftOptions,
    pub report_tol: f64,
}

impl LeafSpaceOptions {
    pub fn new(ode_tol: f64, report_tol: f64) -> Self {
        Self { lift: LiftOptions::new(ode_tol), report_tol }
    }
}

impl Default for LeafSpaceOptions {
    fn default() -> Self {
        Self::new(1e-12, 1e-8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafSpaceReport {
    pub input: Table1Input,
    pub strata: Vec<StratumEntry>,
    /// `g(0)` when the report normalizes `Y` by it.
    pub rescale: Option<C64>,
    pub loop_radius: f64,
    pub separation_checks: Vec<Check>,
    pub hausdorff: bool,
}

impl LeafSpaceReport {
    pub fn entry(&self, stratum: Stratum) -> &StratumEntry {
        self.strata.iter().find(|e| e.stratum == stratum).expect("all strata present")
    }

    pub fn all_verified(&self) -> bool {
        self.strata.iter().all(|e| e.verified) && self.hausdorff
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let rows: Vec<[String; 6]> = self
            .strata
            .iter()
            .map(|e| {
                [
                    e.stratum.label().to_string(),
                    e.condition.to_string(),
                    e.model.render(),
                    e.numeric.iter().map(|z| fmt_c(*z)).collect::<Vec<_>>().join(", "),
                    e.agreement_error.map_or("-".into(), |v| format!("{v:.2e}")),
                    if e.verified { "yes".into() } else { "NO".into() },
                ]
            })
            .collect();
        let header = ["stratum", "condition", "leaf space", "numeric", "error", "verified"];
        let widths: Vec<usize> = (0..6)
            .map(|i| rows.iter().map(|r| r[i].chars().count()).chain([header[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[&str]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", line(&header));
        let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
        for r in &rows {
            let cells: Vec<&str> = r.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}", line(&cells));
        }
        for e in &self.strata {
            if let Some(note) = &e.unlisted {
                let _ = writeln!(out, "note ({}): {note}", e.stratum.label());
            }
        }
        if let Some(r) = self.rescale {
            let _ = writeln!(out, "Y rescaled by 1/g(0), g(0) = {}", fmt_c(r));
        }
        let _ = writeln!(out, "Hausdorff: {}", if self.hausdorff { "yes" } else { "not verified" });
        out
    }
}

/// `"+ z"`, `"- |z|"` for a negative real or imaginary `z`, and `"+ (z)"` otherwise.
fn signed(z: C64) -> String {
    let (re, im) = (z.re.abs() >= 5e-13, z.im.abs() >= 5e-13);
    if re && im {
        return format!("+ ({})", fmt_c(z));
    }
    let lead = if re { z.re } else { z.im };
    if lead < 0.0 {
        format!("- {}", fmt_c(-z))
    } else {
        format!("+ {}", fmt_c(z))
    }
}

pub(crate) fn fmt_c(z: C64) -> String {
    let clean = |v: f64| if v.abs() < 5e-13 { 0.0 } else { v };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re == 0.0, im == 0.0) {
        (true, true) => "0".into(),
        (false, true) => format!("{re:.6}"),
        (true, false) => format!("{im:.6}i"),
        (false, false) => format!("{re:.6}{}{:.6}i", if im < 0.0 { "-" } else { "+" }, im.abs()),
    }
}

/// Retained `f_p` with `P(0, y)` or `P(x, 0)` picking up the term.
fn unlisted_term(params: &PairParams, axis: Axis) -> Option<String> {
    let (exp, scale, name) = match axis {
        Axis::Y => (params.a, params.n, "P(0, y)"),
        Axis::X => (params.b, params.m, "P(x, 0)"),
    };
    if exp == 0 {
        return None;
    }
    params
        .f
        .nonzero_terms()
        .find(|(p, _)| i64::from(exp) + i64::from(scale) * i64::from(*p) == 0)
        .map(|(p, _)| format!("f_{p} != 0 makes {name} nonzero; no table row covers this"))
}

const FIBER_STARTS: [C64; 3] = [C64::new(0.0, 0.0), C64::new(0.7, 0.0), C64::new(0.0, 0.5)];

fn axis_entry(params: &PairParams, axis: Axis, input: &Table1Input, opts: &LeafSpaceOptions) -> Result<StratumEntry> {
    let stratum = match axis {
        Axis::X => Stratum::Sx,
        Axis::Y => Stratum::Sy,
    };
    let (model, condition) = table1_model(stratum, input);
    let unlisted = unlisted_term(params, axis);
    let mut entry = StratumEntry {
        stratum,
        condition,
        model,
        closed_form: model.translation(),
        numeric: Vec::new(),
        agreement_error: None,
        checks: Vec::new(),
        unlisted,
        verified: false,
    };
    let tol = opts.report_tol;
    match model {
        StratumModel::Plane => {
            entry.checks.extend(first_integral_checks(params, axis, input, opts)?);
        }
        StratumModel::PuncturedDisc => {
            // Both fields are tangent to the fibers of the axis coordinate.
            let worst = axis_samples(axis)
                .iter()
                .map(|p| {
                    let (xv, yv) = (params.eval_x(p[0], p[1]), params.eval_y(p[0], p[1]));
                    let i = axis_index(axis);
                    xv[i].norm().max(yv[i].norm())
                })
                .fold(0.0, f64::max);
            entry.checks.push(Check::new("axis component of X and Y", worst, 1e-14));
        }
        StratumModel::Cylinder { shift } => {
            let pairs = FIBER_STARTS
                .iter()
                .map(|&s0| {
                    let s1 = match axis {
                        Axis::Y => monodromy_sy(params, s0, &opts.lift)?,
                        Axis::X => monodromy_sx(params, s0, &opts.lift)?,
                    };
                    Ok((s0, s1))
                })
                .collect::<Result<Vec<_>>>()?;
            let map = fit_return_map_within(&pairs, consistency_tol(opts.lift.tol))?;
            let fitted = map.shift();
            entry.checks.push(Check::flag("fitted map is a translation", fitted.is_some()));
            let numeric = fitted.unwrap_or(C64::new(f64::NAN, f64::NAN));
            let closed = match axis {
                Axis::Y => sy_closed_form_shift(params)?,
                Axis::X => sx_closed_form_shift(params)?,
            };
            let err = pairs
                .iter()
                .map(|(s0, s1)| (s1 - s0 - shift).norm())
                .fold((numeric - shift).norm(), f64::max);
            entry.checks.push(Check::new("lift-module closed form", (closed - shift).norm(), 1e-14));
            entry.numeric = vec![numeric];
            entry.agreement_error = Some(err);
            entry.checks.push(Check::new("monodromy agreement", err, tol));
        }
        _ => unreachable!("axis strata are plane, disc or cylinder"),
    }
    entry.verified = entry.unlisted.is_none() && entry.checks.iter().all(|c| c.passed);
    Ok(entry)
}

fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
    }
}

fn axis_samples(axis: Axis) -> Vec<[C64; 2]> {
    [C64::new(0.3, 0.0), C64::new(-0.2, 0.4), C64::new(0.05, -0.6)]
        .iter()
        .map(|&w| match axis {
            Axis::Y => [ZERO, w],
            Axis::X => [w, ZERO],
        })
        .collect()
}

/// On `a = 0` (resp. `b = 0`) the stratum is foliated by the level sets of
/// `1/y − t − g(0) f₀ s/m` (resp. `−1/x − t − g(0) f₀ s`).
fn first_integral_checks(
    params: &PairParams,
    axis: Axis,
    input: &Table1Input,
    opts: &LeafSpaceOptions,
) -> Result<Vec<Check>> {
    let m = f64::from(params.m);
    let c = match axis {
        Axis::Y => input.g_at_zero * f64::from(params.n) * input.f0 / m,
        Axis::X => input.g_at_zero * input.f0,
    };
    let integral = |p: &Vector4| match axis {
        Axis::Y => 1.0 / p[3] - p[0] - c * p[1],
        Axis::X => -1.0 / p[2] - p[0] - c * p[1],
    };
    let sp = params.suspend();
    let mut worst: f64 = 0.0;
    for w in axis_samples(axis) {
        let start: Vector4 = [C64::new(0.1, -0.2), C64::new(-0.3, 0.1), w[0], w[1]];
        for time in [C64::new(0.05, 0.0), C64::new(0.0, -0.04)] {
            let ex = complex_time_flow(|p: &Vector4| sp.eval_xbar(*p), start, time, opts.lift.tol, 1e3)?;
            let ey = complex_time_flow(|p: &Vector4| sp.eval_ybar(*p), start, time, opts.lift.tol, 1e3)?;
            let f0 = integral(&start);
            worst = worst.max((integral(&ex) - f0).norm()).max((integral(&ey) - f0).norm());
        }
    }
    let name = match axis {
        Axis::Y => "1/y - t - g(0) n f0 s/m conserved",
        Axis::X => "-1/x - t - g(0) f0 s conserved",
    };
    Ok(vec![Check::new(name, worst, (opts.report_tol * 10.0).max(1e-9))])
}

fn s0_entry(params: &PairParams, input: &Table1Input) -> StratumEntry {
    let (model, condition) = table1_model(Stratum::S0, input);
    let o = [ZERO, ZERO];
    let mut checks = Vec::new();
    let xv = params.eval_x(o[0], o[1]);
    let yv = params.eval_y(o[0], o[1]);
    let r = xv.iter().chain(&yv).map(|z| z.norm()).fold(0.0, f64::max);
    checks.push(Check::new("X and Y vanish at the origin", if r.is_finite() { r } else { f64::INFINITY }, 0.0));
    let verified = checks.iter().all(|c| c.passed);
    StratumEntry {
        stratum: Stratum::S0,
        condition,
        model,
        closed_form: Vec::new(),
        numeric: Vec::new(),
        agreement_error: None,
        checks,
        unlisted: None,
        verified,
    }
}

/// Largest radius `ρ·2^{-j}` for which the `σ₂` closed form applies.
fn sigma2_radius(params: &PairParams, start: f64) -> Result<f64> {
    let mut r = start;
    for _ in 0..12 {
        if check_sigma2_loop(params, r).is_ok() {
            return Ok(r);
        }
        r *= 0.5;
    }
    check_sigma2_loop(params, r).map(|_| r)
}

const TORUS_STARTS: [[C64; 2]; 3] = [
    [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    [C64::new(0.3, -0.1), C64::new(-0.2, 0.4)],
    [C64::new(-0.5, 0.2), C64::new(0.6, 0.0)],
];

fn sxy_entry(params: &PairParams, input: &Table1Input, opts: &LeafSpaceOptions) -> Result<(StratumEntry, f64)> {
    let (model, condition) = table1_model(Stratum::Sxy, input);
    let closed = model.translation();
    let radius = sigma2_radius(params, opts.lift.loop_radius)?;
    let lift = opts.lift.with_loop_radius(radius);
    let tol = opts.report_tol;
    let mut checks = Vec::new();

    let lift_closed = sigma2_closed_form_shift(params)?;
    checks.push(Check::new(
        "lift-module closed form",
        (lift_closed[0] - closed[0]).norm().max((lift_closed[1] - closed[1]).norm()),
        1e-14,
    ));

    let mut shifts = Vec::new();
    let mut sigma1_err: f64 = 0.0;
    for start in TORUS_STARTS {
        let end = monodromy_sigma2(params, start, &lift)?;
        shifts.push([end[0] - start[0], end[1] - start[1]]);
        let back = monodromy_sigma1(params, start, &lift)?;
        sigma1_err = sigma1_err.max((back[0] - start[0]).norm()).max((back[1] - start[1]).norm());
    }
    let spread = shifts
        .iter()
        .map(|s| (s[0] - shifts[0][0]).norm().max((s[1] - shifts[0][1]).norm()))
        .fold(0.0, f64::max);
    checks.push(Check::new("sigma2 return map is a translation", spread, tol));
    checks.push(Check::new("sigma1 return map is the identity", sigma1_err, tol));

    let quad = sigma2_quadrature_shift(params, radius)?;
    let quad_err = (quad[0] - closed[0]).norm().max((quad[1] - closed[1]).norm());
    checks.push(Check::new("quadrature agreement", quad_err, tol));

    let numeric = shifts[0].to_vec();
    let err = shifts
        .iter()
        .map(|s| (s[0] - closed[0]).norm().max((s[1] - closed[1]).norm()))
        .fold(0.0, f64::max);
    checks.push(Check::new("monodromy agreement", err, tol));
    let verified = checks.iter().all(|c| c.passed);
    Ok((
        StratumEntry {
            stratum: Stratum::Sxy,
            condition,
            model,
            closed_form: closed,
            numeric,
            agreement_error: Some(err),
            checks,
            unlisted: None,
            verified,
        },
        radius,
    ))
}

/// Separation invariants: the axis coordinates on cylinder strata and the
/// `{x = 1}` invariant of `Z̄` on the open stratum.
fn separation_checks(params: &PairParams, input: &Table1Input, opts: &LeafSpaceOptions) -> Result<Vec<Check>> {
    let tol = (opts.report_tol * 10.0).max(1e-9);
    let sp = params.suspend();
    let mut checks = Vec::new();
    for axis in [Axis::Y, Axis::X] {
        let stratum = if axis == Axis::Y { Stratum::Sy } else { Stratum::Sx };
        if !matches!(table1_model(stratum, input).0, StratumModel::Cylinder { .. }) || unlisted_term(params, axis).is_some() {
            continue;
        }
        let mut worst: f64 = 0.0;
        for w in axis_samples(axis) {
            let start: Vector4 = [ZERO, C64::new(0.2, -0.1), w[0], w[1]];
            let c0 = axis_coordinate(params, axis, &start)?;
            for time in [C64::new(0.1, 0.0), C64::new(-0.05, 0.08), C64::new(0.0, 0.3)] {
                let ey = complex_time_flow(|p: &Vector4| sp.eval_ybar(*p), start, time, opts.lift.tol, 1e3)?;
                let ex = complex_time_flow(|p: &Vector4| sp.eval_xbar(*p), start, time, opts.lift.tol, 1e3)?;
                worst = worst
                    .max(c0.distance(&axis_coordinate(params, axis, &ey)?))
                    .max(c0.distance(&axis_coordinate(params, axis, &ex)?));
            }
        }
        checks.push(Check::new(format!("{} separation coordinate constant on leaves", stratum.label()), worst, tol));
    }

    let mut worst: f64 = 0.0;
    for y0 in [C64::new(0.3, 0.0), C64::new(-0.1, 0.25)] {
        let start: Vector4 = [ZERO, C64::new(0.1, 0.1), C64::new(1.0, 0.0), y0];
        let traj = super::separation::zbar_trajectory(params, start, 0.5, opts.lift.tol)?;
        worst = worst.max(hyperplane_invariant(params, &traj)?);
    }
    checks.push(Check::new("Z-bar invariant on x = 1", worst, tol));
    Ok(checks)
}

fn join<T>(h: std::thread::ScopedJoinHandle<'_, T>) -> T {
    h.join().expect("stratum worker panicked")
}

fn axis_coordinate(params: &PairParams, axis: Axis, p: &Vector4) -> Result<SeparationCoordinate> {
    let w = match axis {
        Axis::Y => p[3],
        Axis::X => p[2],
    };
    axis_separation_coordinate(params, axis, p[1], w)
}

/// Leaf-space classification with every stratum verified numerically.
pub fn table1_report(params: &PairParams, opts: &LeafSpaceOptions) -> Result<LeafSpaceReport> {
    let report = params.validate();
    if !report.is_valid() {
        return Err(Error::InvalidParams(report));
    }
    let input = Table1Input::from_params(params)?;
    let (s0, sx, sy, sxy, sep) = std::thread::scope(|scope| {
        let sx = scope.spawn(|| axis_entry(params, Axis::X, &input, opts));
        let sy = scope.spawn(|| axis_entry(params, Axis::Y, &input, opts));
        let sxy = scope.spawn(|| sxy_entry(params, &input, opts));
        let sep = scope.spawn(|| separation_checks(params, &input, opts));
        (s0_entry(params, &input), join(sx), join(sy), join(sxy), join(sep))
    });
    let (sxy, loop_radius) = sxy?;
    let separation_checks = sep?;
    let strata = vec![s0, sx?, sy?, sxy];
    let hausdorff = separation_checks.iter().all(|c| c.passed) && strata.iter().all(|e| e.verified);
    Ok(LeafSpaceReport {
        rescale: (input.g_at_zero != ZERO).then_some(input.g_at_zero),
        input,
        strata,
        loop_radius,
        separation_checks,
        hausdorff,
    })
}
