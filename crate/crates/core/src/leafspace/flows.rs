use crate::error::{Error, Result};
use crate::fields::{PairParams, Vector2};
use crate::lift::{integrate_in, IntegratorOptions, Status};
use crate::C64;

/// Time-`τ` map of a holomorphic field for complex `τ`: integrates
/// `dp/dk = τ·F(p)` over `k ∈ [0, 1]`, failing with `Escaped` once `|p|`
/// exceeds `bound`.
pub fn complex_time_flow<const N: usize>(
    field: impl Fn(&[C64; N]) -> [C64; N],
    start: [C64; N],
    time: C64,
    tol: f64,
    bound: f64,
) -> Result<[C64; N]> {
    if time == C64::new(0.0, 0.0) {
        return Ok(start);
    }
    let rhs = |_: f64, p: &[C64; N]| {
        let v = field(p);
        std::array::from_fn(|i| time * v[i])
    };
    let within = |p: &[C64; N]| p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < bound;
    let traj = integrate_in(rhs, (0.0, 1.0), start, &IntegratorOptions::new(tol), |_, p| within(p))?;
    if traj.status == Status::Escaped {
        return Err(Error::Escaped { k: traj.stopped_at });
    }
    traj.endpoint()
}

pub fn flow_x(params: &PairParams, p: Vector2, t: C64, tol: f64, bound: f64) -> Result<Vector2> {
    complex_time_flow(|q: &Vector2| params.eval_x(q[0], q[1]), p, t, tol, bound)
}

pub fn flow_y(params: &PairParams, p: Vector2, s: C64, tol: f64, bound: f64) -> Result<Vector2> {
    complex_time_flow(|q: &Vector2| params.eval_y(q[0], q[1]), p, s, tol, bound)
}

fn distance(p: &Vector2, q: &Vector2) -> f64 {
    ((p[0] - q[0]).norm_sqr() + (p[1] - q[1]).norm_sqr()).sqrt()
}

/// Bounds for the local action: flows are integrated at `tol` and must stay
/// in the ball of radius `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionOptions {
    pub tol: f64,
    pub bound: f64,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self { tol: 1e-12, bound: 2.0 }
    }
}

/// Distance between `Φ_X^{t₁}Φ_Y^{s₁}Φ_X^{t₂}Φ_Y^{s₂}(p)` and
/// `Φ_X^{t₁+t₂}Φ_Y^{s₁+s₂}(p)`. `Escaped` means a point left the domain of
/// the local action.
pub fn local_action_check(
    params: &PairParams,
    first: (C64, C64),
    second: (C64, C64),
    p: Vector2,
    opts: &ActionOptions,
) -> Result<f64> {
    let (tol, bound) = (opts.tol, opts.bound);
    let (t1, s1) = first;
    let (t2, s2) = second;
    let q = flow_y(params, p, s2, tol, bound)?;
    let q = flow_x(params, q, t2, tol, bound)?;
    let q = flow_y(params, q, s1, tol, bound)?;
    let lhs = flow_x(params, q, t1, tol, bound)?;
    let r = flow_y(params, p, s1 + s2, tol, bound)?;
    let rhs = flow_x(params, r, t1 + t2, tol, bound)?;
    Ok(distance(&lhs, &rhs))
}

/// Distance between `Φ_X^t Φ_Y^s(p)` and `Φ_Y^s Φ_X^t(p)`.
pub fn flow_order_deviation(params: &PairParams, t: C64, s: C64, p: Vector2, opts: &ActionOptions) -> Result<f64> {
    let (tol, bound) = (opts.tol, opts.bound);
    let a = flow_x(params, flow_y(params, p, s, tol, bound)?, t, tol, bound)?;
    let b = flow_y(params, flow_x(params, p, t, tol, bound)?, s, tol, bound)?;
    Ok(distance(&a, &b))
}
