//! Univalence of the pair from its Laurent data, time-form integrals along
//! leaf paths, and explicit witnesses of non-semicompleteness.
//!
//! The pair is univalent near the origin exactly when `g(0) ≠ 0`, or when
//! `g(0) = g''(0) = f₀ = 0` with `g'(0) ≠ 0`. Everything else in the family
//! fails one of three tests: the lowest homogeneous component of `Y`
//! (order `l = ord g ≥ 2` needs `l(am − bn) = ±1`), the residue of
//! `dw/(w g(w))` for the projected field `w g(w) d/dw`, or `f₀`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{PairParams, Vector2};
use crate::lift::{default_singular_start, lift_singular_chart_loop};
use crate::quadrature::{integrate_adaptive, CompositeGaussLegendre};
use crate::series::{residue_of_inverse_wg, LaurentSeries};
use crate::{C64, TWO_PI_I};

/// Coefficients below this (relative to the data scale) count as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Largest relative mismatch between a path velocity and the field direction.
pub const TANGENCY_TOL: f64 = 1e-6;

/// Quadrature tolerance for time-form integrals.
pub const TIME_FORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Univalent,
    NotUnivalent,
    OutsideClassifiedFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Validation,
    NonvanishingG0,
    SimpleZeroCondition,
    HomogeneousComponent,
    Residue,
    ConstantTermF,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reason {
    pub criterion: Criterion,
    /// Human-readable name, e.g. `homogeneous component l=2`.
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Every number the classifier looked at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsultedValues {
    pub g_0: C64,
    pub g_prime_0: C64,
    pub g_second_0: C64,
    pub f0: C64,
    pub order_l: Option<i32>,
    pub residue: Option<C64>,
    pub determinant: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnivalenceVerdict {
    pub status: VerdictStatus,
    pub reasons: Vec<Reason>,
    pub consulted: ConsultedValues,
}

impl UnivalenceVerdict {
    pub fn failed(&self) -> impl Iterator<Item = &Reason> {
        self.reasons.iter().filter(|r| !r.passed)
    }
}

fn negligible(x: C64, scale: f64) -> bool {
    x.norm() <= ZERO_TOL * scale.max(1.0)
}

/// `l·(am − bn) ∈ {−1, 1}`
pub fn homogeneous_component_test(a: u32, b: u32, m: u32, n: u32, l: u32) -> bool {
    let det = i64::from(a) * i64::from(m) - i64::from(b) * i64::from(n);
    let v = i64::from(l) * det;
    v == 1 || v == -1
}

pub fn classify_univalence(params: &PairParams) -> UnivalenceVerdict {
    let g = &params.g;
    let der = |k| g.derivative_at_zero(k).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let mut consulted = ConsultedValues {
        g_0: der(0),
        g_prime_0: der(1),
        g_second_0: der(2),
        f0: params.f0(),
        order_l: None,
        residue: None,
        determinant: params.determinant(),
    };
    let mut reasons = Vec::new();
    let report = params.validate();
    reasons.push(Reason {
        criterion: Criterion::Validation,
        name: "family constraints".into(),
        passed: report.is_valid(),
        detail: report.to_string(),
    });
    if !report.is_valid() {
        return UnivalenceVerdict { status: VerdictStatus::OutsideClassifiedFamily, reasons, consulted };
    }

    let scale = g.nonzero_terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let l = g
        .nonzero_terms()
        .find(|(_, c)| !negligible(*c, scale))
        .map(|(p, _)| p)
        .expect("validated g is nonzero");
    consulted.order_l = Some(l);
    consulted.residue = residue_of_inverse_wg(g).ok();

    let cond1 = l == 0;
    reasons.push(Reason {
        criterion: Criterion::NonvanishingG0,
        name: "g(0) != 0".into(),
        passed: cond1,
        detail: format!("g(0) = {}", consulted.g_0),
    });
    if cond1 {
        return UnivalenceVerdict { status: VerdictStatus::Univalent, reasons, consulted };
    }

    let homogeneous = homogeneous_component_test(params.a, params.b, params.m, params.n, l as u32);
    reasons.push(Reason {
        criterion: Criterion::HomogeneousComponent,
        name: format!("homogeneous component l={l}"),
        passed: homogeneous,
        detail: format!("l(am - bn) = {}", i64::from(l) * consulted.determinant),
    });
    if !homogeneous {
        return UnivalenceVerdict { status: VerdictStatus::NotUnivalent, reasons, consulted };
    }

    // l = 1 from here on
    let residue_zero = negligible(consulted.g_second_0, scale);
    let residue = consulted.residue.unwrap_or(C64::new(f64::NAN, f64::NAN));
    reasons.push(Reason {
        criterion: Criterion::Residue,
        name: "residue of dw/(w g(w)) vanishes".into(),
        passed: residue_zero,
        detail: format!("g''(0) = {}, residue = {residue}", consulted.g_second_0),
    });
    let f0_zero = negligible(consulted.f0, params.f.nonzero_terms().map(|(_, c)| c.norm()).fold(0.0, f64::max));
    reasons.push(Reason {
        criterion: Criterion::ConstantTermF,
        name: "f0 = 0".into(),
        passed: f0_zero,
        detail: format!("f0 = {}", consulted.f0),
    });
    let cond2 = residue_zero && f0_zero;
    reasons.push(Reason {
        criterion: Criterion::SimpleZeroCondition,
        name: "g(0) = g''(0) = f0 = 0, g'(0) != 0".into(),
        passed: cond2,
        detail: format!("g'(0) = {}", consulted.g_prime_0),
    });
    let status = if cond2 { VerdictStatus::Univalent } else { VerdictStatus::NotUnivalent };
    UnivalenceVerdict { status, reasons, consulted }
}

/// The projection `Z = w g(w) d/dw` of `Y` to the `u = x^n y^m` line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedField {
    /// Vanishing order of `w g(w)` at 0.
    pub order: u32,
    /// Residue of `dw/(w g(w))` at 0.
    pub residue: C64,
}

pub fn projected_field_z(params: &PairParams) -> Result<ProjectedField> {
    let l = params.g.valuation().ok_or(Error::ZeroSeries)?;
    if l < 0 {
        return Err(Error::Domain("g has a pole".into()));
    }
    Ok(ProjectedField { order: 1 + l as u32, residue: residue_of_inverse_wg(&params.g)? })
}

type PathFn<T> = Arc<dyn Fn(f64) -> T + Send + Sync>;

/// Parametrized path `k ∈ [0, 1]` with its velocity.
#[derive(Clone)]
pub struct Path<T> {
    point: PathFn<T>,
    velocity: PathFn<T>,
}

impl<T> Path<T> {
    pub fn new(
        point: impl Fn(f64) -> T + Send + Sync + 'static,
        velocity: impl Fn(f64) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { point: Arc::new(point), velocity: Arc::new(velocity) }
    }

    pub fn point(&self, k: f64) -> T {
        (self.point)(k)
    }

    pub fn velocity(&self, k: f64) -> T {
        (self.velocity)(k)
    }
}

impl Path<C64> {
    /// `center + radius·e^{2πi·winding·k}`
    pub fn circle(center: C64, radius: f64, winding: i32) -> Self {
        let wn = f64::from(winding);
        Self::new(
            move |k| center + C64::from_polar(radius, std::f64::consts::TAU * wn * k),
            move |k| TWO_PI_I * wn * C64::from_polar(radius, std::f64::consts::TAU * wn * k),
        )
    }

    /// `start·e^{kL}`
    pub fn spiral(start: C64, log_ratio: C64) -> Self {
        Self::new(move |k| start * (log_ratio * k).exp(), move |k| start * log_ratio * (log_ratio * k).exp())
    }

    pub fn segment(from: C64, to: C64) -> Self {
        Self::new(move |k| from + (to - from) * k, move |_| to - from)
    }
}

/// `∫ dT` for the one-dimensional field `a(w) d/dw`: `∫ w'(k)/a(w(k)) dk`.
pub fn time_form_integral(field: &dyn Fn(C64) -> Result<C64>, path: &Path<C64>, tol: f64) -> Result<C64> {
    integrate_adaptive(
        |k| {
            let a = field(path.point(k)).unwrap_or(C64::new(f64::NAN, f64::NAN));
            path.velocity(k) / a
        },
        0.0,
        1.0,
        tol,
    )
}

fn tangency_factor(field: Vector2, v: Vector2) -> (C64, f64) {
    let ff = field[0].norm_sqr() + field[1].norm_sqr();
    let lambda = (field[0].conj() * v[0] + field[1].conj() * v[1]) / ff;
    let res = ((v[0] - lambda * field[0]).norm_sqr() + (v[1] - lambda * field[1]).norm_sqr()).sqrt();
    let vn = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    (lambda, if vn > 0.0 { res / vn } else { 0.0 })
}

/// `∫ dT` for a two-dimensional field along a path tangent to it. Tangency is
/// checked at 257 equispaced parameters.
pub fn time_form_integral_2d(
    field: &dyn Fn(Vector2) -> Result<Vector2>,
    path: &Path<Vector2>,
    tol: f64,
) -> Result<C64> {
    let mut worst = 0.0f64;
    for j in 0..=256 {
        let k = j as f64 / 256.0;
        let f = field(path.point(k))?;
        if f[0].norm() == 0.0 && f[1].norm() == 0.0 {
            return Err(Error::Pole(format!("field vanishes on the path at k = {k}")));
        }
        worst = worst.max(tangency_factor(f, path.velocity(k)).1);
    }
    if worst > TANGENCY_TOL {
        return Err(Error::Tangency { residual: worst });
    }
    integrate_adaptive(
        |k| match field(path.point(k)) {
            Ok(f) => tangency_factor(f, path.velocity(k)).0,
            Err(_) => C64::new(f64::NAN, f64::NAN),
        },
        0.0,
        1.0,
        tol,
    )
}

/// Evidence that `Y` is not semicomplete near the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Embedded open path `w(k) = start·e^{kL}` in a leaf of `w g(w) d/dw`
    /// over which `dw/(w g(w))` integrates to zero.
    NearLoop {
        order: u32,
        residue: C64,
        start: C64,
        end: C64,
        log_ratio: C64,
        /// Adaptive Gauss-Kronrod value.
        integral: C64,
        /// Independent composite Gauss-Legendre value.
        integral_check: C64,
    },
    /// Open lift of `w = δe^{2πik}` to a leaf of the singular-chart field
    /// whose time form integrates to zero; valid for the reported `δ`.
    LiftedLoop {
        delta: f64,
        epsilon: f64,
        z_start: C64,
        z_end: C64,
        integral: C64,
        tangency_residual: f64,
        chart_exact: bool,
    },
}

impl Witness {
    pub fn integral(&self) -> C64 {
        match self {
            Witness::NearLoop { integral, .. } | Witness::LiftedLoop { integral, .. } => *integral,
        }
    }
}

/// Tolerance the witness integral must meet.
pub const WITNESS_TOL: f64 = 1e-10;

/// Chart radius for the lifted-loop witness; `V` must contain the start
/// `|z| = δ^{1/(m+τ)}` for the δ values tried.
pub const LIFTED_LOOP_EPSILON: f64 = 0.9;

/// A witness when one exists, `None` for the univalent cases.
pub fn nonsemicomplete_witness(params: &PairParams) -> Result<Option<Witness>> {
    let report = params.validate();
    if !report.is_valid() {
        return Err(Error::InvalidParams(report));
    }
    let verdict = classify_univalence(params);
    if verdict.status == VerdictStatus::Univalent {
        return Ok(None);
    }
    let z = projected_field_z(params)?;
    let residue_zero = verdict.reasons.iter().any(|r| r.criterion == Criterion::Residue && r.passed);
    if z.order == 2 && residue_zero {
        return lifted_loop_witness(params).map(Some);
    }
    near_loop_witness(&params.g, z.order, z.residue).map(Some)
}

fn wg_field(g: &LaurentSeries) -> impl Fn(C64) -> Result<C64> + '_ {
    move |w| Ok(w * g.eval(w)?)
}

fn spiral_log_ratio(start: C64, end: C64, turns: f64) -> C64 {
    let ratio = end / start;
    let mut theta = ratio.arg();
    let target = std::f64::consts::TAU * turns;
    theta += std::f64::consts::TAU * ((target - theta) / std::f64::consts::TAU).round();
    C64::new(ratio.norm().ln(), theta)
}

fn near_loop_witness(g: &LaurentSeries, order: u32, residue: C64) -> Result<Witness> {
    let l = order as i32 - 1;
    let lead = g.coeff(l);
    let field = wg_field(g);
    let mut start_radius = 0.1;
    for _ in 0..8 {
        let a = C64::new(start_radius, 0.0);
        for sigma in [1.0, -1.0] {
            if let Some(w) = try_near_loop(&field, a, order, residue, lead, sigma)? {
                return Ok(w);
            }
        }
        start_radius *= 0.5;
    }
    Err(Error::NotConverged("near-loop witness".into()))
}

fn try_near_loop(
    field: &dyn Fn(C64) -> Result<C64>,
    a: C64,
    order: u32,
    residue: C64,
    lead: C64,
    sigma: f64,
) -> Result<Option<Witness>> {
    let turns = if order == 2 { sigma } else { sigma / f64::from(order - 1) };
    let mut end = if order == 2 {
        // -1/(g'(0) B) + 1/(g'(0) A) + 2πiσR = 0
        (a.inv() + TWO_PI_I * sigma * residue * lead).inv()
    } else {
        a * C64::from_polar(1.0, std::f64::consts::TAU * turns)
    };
    if !end.is_finite() || end.norm() > 2.0 * a.norm() || end.norm() < 1e-3 * a.norm() {
        return Ok(None);
    }
    let integral_to = |end: C64| -> Result<(C64, C64)> {
        let l = spiral_log_ratio(a, end, turns);
        Ok((time_form_integral(field, &Path::spiral(a, l), TIME_FORM_TOL)?, l))
    };
    let mut last_step = f64::INFINITY;
    for _ in 0..50 {
        let (value, l) = match integral_to(end) {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        if value.norm() <= TIME_FORM_TOL || last_step <= 1e-15 * end.norm() {
            let rule = CompositeGaussLegendre::new(64, 16);
            let path = Path::spiral(a, l);
            let check = rule.integrate(|k| path.velocity(k) / field(path.point(k)).unwrap_or(C64::new(f64::NAN, f64::NAN)), 0.0, 1.0);
            let embedded = l.re.abs() > 1e-9 || l.im.abs() < std::f64::consts::TAU - 1e-9;
            if !embedded || (end - a).norm() < 1e-9 * a.norm() || value.norm() > WITNESS_TOL || check.norm() > WITNESS_TOL {
                return Ok(None);
            }
            return Ok(Some(Witness::NearLoop {
                order,
                residue,
                start: a,
                end,
                log_ratio: l,
                integral: value,
                integral_check: check,
            }));
        }
        // d/dB ∫_A^B dw/(w g(w)) = 1/(B g(B))
        let step = value * field(end)?;
        last_step = step.norm();
        end -= step;
        if !end.is_finite() || end.norm() > 2.0 * a.norm() {
            return Ok(None);
        }
    }
    Ok(None)
}

fn lifted_loop_witness(params: &PairParams) -> Result<Witness> {
    let epsilon = LIFTED_LOOP_EPSILON;
    let mut delta: f64 = 1e-1;
    let mut last_err = None;
    while delta >= 1e-12 {
        let z0 = default_singular_start(params, delta);
        match lift_singular_chart_loop(params, delta, z0, epsilon, 1e-12) {
            Ok(lift) => {
                let z1 = lift.trajectory.last().state[0];
                let m = f64::from(params.m);
                let b = f64::from(params.b);
                let g = &params.g;
                let dt = |k: f64| {
                    let w = C64::from_polar(delta, std::f64::consts::TAU * k);
                    TWO_PI_I / g.eval(w.powu(params.m)).unwrap_or(C64::new(f64::NAN, f64::NAN))
                };
                // 1/g(w^m) grows like δ^{-m}: the tolerance is relative to its size
                let scale = (0..64).map(|j| dt(j as f64 / 64.0).norm()).fold(1.0, f64::max);
                let integral = integrate_adaptive(dt, 0.0, 1.0, TIME_FORM_TOL * scale)?;
                let tangency_residual = lift
                    .trajectory
                    .samples
                    .iter()
                    .map(|s| {
                        let z = s.state[0];
                        let w = C64::from_polar(delta, std::f64::consts::TAU * s.k);
                        let dz = TWO_PI_I * z * (-b + z * params.wb_f_wm(w) / m);
                        let v = [dz, TWO_PI_I * w];
                        match params.singular_chart_fields(z, w, epsilon) {
                            Ok((_, f)) => tangency_factor(f, v).1,
                            Err(_) => f64::INFINITY,
                        }
                    })
                    .fold(0.0, f64::max);
                if (z1 - z0).norm() <= 1e-12 * z0.norm() {
                    return Err(Error::Degenerate("lifted loop closes up".into()));
                }
                return Ok(Witness::LiftedLoop {
                    delta,
                    epsilon,
                    z_start: z0,
                    z_end: z1,
                    integral,
                    tangency_residual,
                    chart_exact: params.singular_chart_is_exact(),
                });
            }
            Err(e) => last_err = Some(e),
        }
        delta *= 0.1;
    }
    Err(last_err.unwrap_or_else(|| Error::NotConverged("lifted-loop witness".into())))
}
