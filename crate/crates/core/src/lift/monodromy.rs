use serde::Serialize;

use super::integrator::{integrate, integrate_in, Status, Trajectory};
use super::mobius::{consistency_tol, fit_return_map_within, HolonomyMap};
use super::{Axis, BaseLoop, LiftOptions};
use crate::error::{Error, Result};
use crate::fields::{eval_meromorphic, PairParams, Vector2};
use crate::quadrature::CompositeGaussLegendre;
use crate::series::LaurentSeries;
use crate::{C64, TWO_PI_I};

const NAN: C64 = C64::new(f64::NAN, f64::NAN);

/// Coefficients `(λ, μ)` with `λX + μY = v` at the base point `p`.
pub fn time_coefficients(params: &PairParams, p: Vector2, v: Vector2) -> [C64; 2] {
    let xf = params.eval_x(p[0], p[1]);
    let yf = params.eval_y(p[0], p[1]);
    let det = xf[0] * yf[1] - xf[1] * yf[0];
    if det.norm() == 0.0 {
        return [NAN, NAN];
    }
    [
        (v[0] * yf[1] - v[1] * yf[0]) / det,
        (xf[0] * v[1] - xf[1] * v[0]) / det,
    ]
}

/// Lifts `base` to the leaf of the suspended foliation through `(t₀, s₀)`:
/// the fiber coordinates obey `dt/dk = λ`, `ds/dk = μ` with `λX + μY = γ'`.
pub fn lift_loop(params: &PairParams, base: &BaseLoop, start: Vector2, opts: &LiftOptions) -> Result<Trajectory<2>> {
    let rhs = |k: f64, _: &[C64; 2]| time_coefficients(params, base.point(k), base.velocity(k));
    let mut cuts = vec![0.0];
    cuts.extend(base.breakpoints());
    cuts.push(1.0);
    let mut combined: Option<Trajectory<2>> = None;
    let mut state = start;
    for w in cuts.windows(2) {
        let piece = integrate_in(rhs, (w[0], w[1]), state, &opts.integrator(), |_, _| true)?;
        state = piece.endpoint()?;
        combined = Some(match combined {
            None => piece,
            Some(mut acc) => {
                acc.samples.extend_from_slice(&piece.samples[1..]);
                acc.error_estimate += piece.error_estimate;
                acc.rejected_steps += piece.rejected_steps;
                acc.rhs_evaluations += piece.rhs_evaluations;
                acc.stopped_at = piece.stopped_at;
                acc
            }
        });
    }
    Ok(combined.expect("at least one segment"))
}

/// Lift of `σ₁` along `X̄`. The loop is tangent to `X`, so `s` never moves
/// and `dt/dk = 2πi / (x^a y^b)`.
pub fn lift_sigma1(params: &PairParams, start: Vector2, opts: &LiftOptions) -> Result<Trajectory<2>> {
    let base = BaseLoop::Sigma1 { m: params.m, n: params.n, radius: opts.loop_radius };
    let zero = C64::new(0.0, 0.0);
    let rhs = |k: f64, _: &[C64; 2]| {
        let [x, y] = base.point(k);
        [TWO_PI_I / (x.powu(params.a) * y.powu(params.b)), zero]
    };
    integrate(rhs, start, &opts.integrator())
}

/// Largest `|γ' − λX|` along `σ₁`, relative to `|γ'|`.
pub fn sigma1_tangency_residual(params: &PairParams, radius: f64) -> f64 {
    let base = BaseLoop::Sigma1 { m: params.m, n: params.n, radius };
    (0..=64)
        .map(|j| {
            let k = j as f64 / 64.0;
            let [x, y] = base.point(k);
            let v = base.velocity(k);
            let xf = params.eval_x(x, y);
            let lambda = TWO_PI_I / (x.powu(params.a) * y.powu(params.b));
            let r = ((v[0] - lambda * xf[0]).norm_sqr() + (v[1] - lambda * xf[1]).norm_sqr()).sqrt();
            r / (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn monodromy_sigma1(params: &PairParams, start: Vector2, opts: &LiftOptions) -> Result<Vector2> {
    lift_sigma1(params, start, opts)?.endpoint()
}

/// Number of zeros of `g` inside `|u| < radius`, by the argument principle.
/// Fails when `g` vanishes on the circle.
pub fn zeros_inside(g: &LaurentSeries, radius: f64) -> Result<i64> {
    let mut samples = 1024usize;
    loop {
        let vals: Vec<C64> = (0..=samples)
            .map(|j| g.eval(C64::from_polar(radius, std::f64::consts::TAU * j as f64 / samples as f64)))
            .collect::<Result<_>>()?;
        let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if vals.iter().any(|v| !(v.norm() > 1e-13 * scale)) {
            return Err(Error::Pole(format!("g vanishes on the circle of radius {radius}")));
        }
        let steps: Vec<f64> = vals.windows(2).map(|w| (w[1] / w[0]).arg()).collect();
        if steps.iter().all(|s| s.abs() < 1.0) {
            let total: f64 = steps.iter().sum();
            return Ok((total / std::f64::consts::TAU).round() as i64);
        }
        if samples >= 1 << 18 {
            return Err(Error::NotConverged("winding number of g".into()));
        }
        samples *= 4;
    }
}

fn sigma2_u_radius(params: &PairParams, radius: f64) -> f64 {
    radius.powi((params.n + params.m) as i32)
}

/// The constant coefficient of `1/g` is the mean of `1/g` over the loop only
/// when the loop encloses no zero of `g` besides the origin.
pub fn check_sigma2_loop(params: &PairParams, radius: f64) -> Result<()> {
    let r = sigma2_u_radius(params, radius);
    let inside = zeros_inside(&params.g, r)?;
    let at_origin = i64::from(params.g.valuation().unwrap_or(0).max(0));
    if inside != at_origin {
        return Err(Error::Precondition(format!(
            "g has {} zero(s) in 0 < |u| < {r:e}; shrink the loop radius",
            inside - at_origin
        )));
    }
    Ok(())
}

/// `(−2πi f₀/m², 2πi g₀/m)`, `g₀` the constant coefficient of `1/g`.
pub fn sigma2_closed_form_shift(params: &PairParams) -> Result<Vector2> {
    let m = f64::from(params.m);
    Ok([-TWO_PI_I * params.f0() / (m * m), TWO_PI_I * params.g0_inverse()? / m])
}

/// Shift of `σ₂` by composite Gauss-Legendre quadrature of
/// `dt/dk = −2πi f(u)/m²`, `ds/dk = 2πi/(m g(u))` along `u = x^n y^m`.
pub fn sigma2_quadrature_shift(params: &PairParams, radius: f64) -> Result<Vector2> {
    check_sigma2_loop(params, radius)?;
    let m = f64::from(params.m);
    let r = sigma2_u_radius(params, radius);
    let d = params.determinant() as f64;
    let u = |k: f64| C64::from_polar(r, std::f64::consts::TAU * d * k);
    let rule = CompositeGaussLegendre::default();
    let dt = rule.integrate(|k| -TWO_PI_I * params.f.eval(u(k)).unwrap_or(NAN) / (m * m), 0.0, 1.0);
    let ds = rule.integrate(|k| TWO_PI_I / (m * params.g.eval(u(k)).unwrap_or(NAN)), 0.0, 1.0);
    if !(dt.is_finite() && ds.is_finite()) {
        return Err(Error::Pole("σ₂ integrand not finite".into()));
    }
    Ok([dt, ds])
}

/// Endpoint of the lift of `σ₂` from `(t₀, s₀)` (general `λX + μY` solve).
pub fn monodromy_sigma2(params: &PairParams, start: Vector2, opts: &LiftOptions) -> Result<Vector2> {
    check_sigma2_loop(params, opts.loop_radius)?;
    let base = BaseLoop::Sigma2 { a: params.a, b: params.b, radius: opts.loop_radius };
    lift_loop(params, &base, start, opts)?.endpoint()
}

/// `2πi / (a m g(0))`
pub fn sy_closed_form_shift(params: &PairParams) -> Result<C64> {
    axis_precondition(params, Axis::Y)?;
    Ok(TWO_PI_I / (f64::from(params.a * params.m) * params.g_at_zero()))
}

/// `−2πi / (b m g(0))`
pub fn sx_closed_form_shift(params: &PairParams) -> Result<C64> {
    axis_precondition(params, Axis::X)?;
    Ok(-TWO_PI_I / (f64::from(params.b * params.m) * params.g_at_zero()))
}

fn axis_precondition(params: &PairParams, axis: Axis) -> Result<()> {
    let (exp, name) = match axis {
        Axis::Y => (params.a, "a"),
        Axis::X => (params.b, "b"),
    };
    if exp == 0 {
        return Err(Error::Precondition(format!(
            "{name} = 0: X does not vanish on the stratum, which has no monodromy"
        )));
    }
    if params.g_at_zero().norm() == 0.0 {
        return Err(Error::Precondition(
            "g(0) = 0: the stratum carries no monodromy map".into(),
        ));
    }
    Ok(())
}

fn axis_monodromy(params: &PairParams, axis: Axis, s0: C64, opts: &LiftOptions) -> Result<C64> {
    axis_precondition(params, axis)?;
    let base = BaseLoop::Circle { axis, radius: opts.loop_radius, center: C64::new(0.0, 0.0), winding: 1 };
    let idx = match axis {
        Axis::X => 0,
        Axis::Y => 1,
    };
    let rhs = |k: f64, _: &[C64; 1]| {
        let p = base.point(k);
        let yf = params.eval_y(p[0], p[1]);
        [base.velocity(k)[idx] / yf[idx]]
    };
    let traj = integrate(rhs, [s0], &opts.integrator())?;
    Ok(traj.endpoint()?[0])
}

/// Lift of the loop `y = ρe^{2πik}` inside `S_y = {x = 0}` along `Ȳ`.
pub fn monodromy_sy(params: &PairParams, s0: C64, opts: &LiftOptions) -> Result<C64> {
    axis_monodromy(params, Axis::Y, s0, opts)
}

/// Lift of the loop `x = ρe^{2πik}` inside `S_x = {y = 0}` along `Ȳ`.
pub fn monodromy_sx(params: &PairParams, s0: C64, opts: &LiftOptions) -> Result<C64> {
    axis_monodromy(params, Axis::X, s0, opts)
}

fn holonomy_rhs(params: &PairParams, radius: f64) -> impl Fn(f64, &[C64; 1]) -> [C64; 1] + Copy + '_ {
    let m = f64::from(params.m);
    move |k: f64, z: &[C64; 1]| {
        let w = C64::from_polar(radius, std::f64::consts::TAU * k);
        let fw = eval_meromorphic(&params.f, w).unwrap_or(NAN);
        [-TWO_PI_I * z[0] * (1.0 + w * z[0] * fw / m)]
    }
}

/// `z(1)` for `dz/dk = −2πi z (1 + w z f(w)/m)`, `w = ρe^{2πik}`: the
/// holonomy of the invariant curve `D = {z = 0}` along its generating loop.
pub fn holonomy_of_d(params: &PairParams, z0: C64, loop_radius: f64, opts: &LiftOptions) -> Result<C64> {
    Ok(holonomy_of_d_trajectory(params, z0, loop_radius, opts)?.endpoint()?[0])
}

pub fn holonomy_of_d_trajectory(
    params: &PairParams,
    z0: C64,
    loop_radius: f64,
    opts: &LiftOptions,
) -> Result<Trajectory<1>> {
    let bound = opts.escape_radius;
    let traj = integrate_in(holonomy_rhs(params, loop_radius), (0.0, 1.0), [z0], &opts.integrator(), |_, z| {
        z[0].norm() < bound
    })?;
    if traj.status == Status::Escaped {
        return Err(Error::Escaped { k: traj.stopped_at });
    }
    Ok(traj)
}

/// `∫₀¹ ρ f(ρe^{2πik}) dk` by composite Gauss-Legendre quadrature.
fn mean_rf(params: &PairParams, radius: f64) -> Result<C64> {
    let rule = CompositeGaussLegendre::default();
    let v = rule.integrate(
        |k| {
            let w = C64::from_polar(radius, std::f64::consts::TAU * k);
            radius * params.f.eval(w).unwrap_or(NAN)
        },
        0.0,
        1.0,
    );
    if !v.is_finite() {
        return Err(Error::Pole("f on the holonomy loop".into()));
    }
    Ok(v)
}

/// Quadrature oracle for [`holonomy_of_d`]: with `c = z e^{2πik}` the lift is
/// the Riccati equation `(1/c)' = 2πi ρ f(w)/m`, solved by one quadrature.
pub fn holonomy_of_d_quadrature(params: &PairParams, z0: C64, loop_radius: f64) -> Result<C64> {
    let integral = mean_rf(params, loop_radius)?;
    Ok(z0 / (1.0 + TWO_PI_I * integral * z0 / f64::from(params.m)))
}

/// The two candidate closed forms `z/(1 + 2πi ρ f₀ z/m)` and `z/(1 + 2πi ρ f₀ z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolonomyCandidates {
    pub with_m: C64,
    pub without_m: C64,
}

pub fn holonomy_closed_forms(params: &PairParams, z0: C64, loop_radius: f64) -> HolonomyCandidates {
    let q = TWO_PI_I * loop_radius * params.f0() * z0;
    HolonomyCandidates {
        with_m: z0 / (1.0 + q / f64::from(params.m)),
        without_m: z0 / (1.0 + q),
    }
}

/// Sample points on the transversal used to fit holonomy maps.
pub const HOLONOMY_SAMPLES: [C64; 4] = [
    C64::new(0.05, 0.0),
    C64::new(0.0, 0.06),
    C64::new(-0.04, 0.03),
    C64::new(0.02, -0.07),
];

/// Möbius map fitted through the holonomy at [`HOLONOMY_SAMPLES`].
pub fn fit_holonomy_of_d(params: &PairParams, loop_radius: f64, opts: &LiftOptions) -> Result<HolonomyMap> {
    let pairs = HOLONOMY_SAMPLES
        .iter()
        .map(|&z| Ok((z, holonomy_of_d(params, z, loop_radius, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_return_map_within(&pairs, consistency_tol(opts.tol))
}
