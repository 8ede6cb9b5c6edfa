use serde::Serialize;

use super::integrator::{integrate_in, IntegratorOptions, Status, Trajectory};
use crate::error::{Error, Result};
use crate::fields::PairParams;
use crate::{C64, TWO_PI_I};

/// Default exponent offset `τ` in `|z(0)| = δ^{1/(m+τ)}`.
pub const DEFAULT_TAU: f64 = 0.1;

/// Lift of `w = δe^{2πik}` in the singular chart together with the bound data.
#[derive(Debug, Clone)]
pub struct SingularLift {
    pub delta: f64,
    pub z0: C64,
    pub epsilon: f64,
    pub trajectory: Trajectory<1>,
    pub stayed_in_v: bool,
    /// Smallest `β` with `|c(k) − c(0)| ≤ β|c(0)|²k` over the accepted steps,
    /// `c(k) = z(k)e^{2πibk}`.
    pub beta: f64,
    /// `sup_k δ^b |f(δ^m e^{2πimk})|` on a uniform grid.
    pub sup_wb_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularLiftSummary {
    pub delta: f64,
    pub z0_modulus: f64,
    pub stayed_in_v: bool,
    pub beta: f64,
    pub sup_wb_f: f64,
    pub steps: usize,
}

impl SingularLift {
    pub fn summary(&self) -> SingularLiftSummary {
        SingularLiftSummary {
            delta: self.delta,
            z0_modulus: self.z0.norm(),
            stayed_in_v: self.stayed_in_v,
            beta: self.beta,
            sup_wb_f: self.sup_wb_f,
            steps: self.trajectory.accepted_steps(),
        }
    }
}

/// `δ^{1/(m+τ)}`
pub fn default_singular_start(params: &PairParams, delta: f64) -> C64 {
    C64::new(delta.powf(1.0 / (f64::from(params.m) + DEFAULT_TAU)), 0.0)
}

fn base_point(delta: f64, k: f64) -> C64 {
    C64::from_polar(delta, std::f64::consts::TAU * k)
}

/// Integrates `dz/dk = 2πi z(−b + z δ^b e^{2πibk} f(δ^m e^{2πimk})/m)` from
/// `z0` over `[0, 1]`, requiring `(z(k), δe^{2πik}) ∈ V` throughout.
pub fn lift_singular_chart_loop(
    params: &PairParams,
    delta: f64,
    z0: C64,
    epsilon: f64,
    tol: f64,
) -> Result<SingularLift> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!("δ = {delta} must be positive")));
    }
    if !params.in_singular_domain(z0, base_point(delta, 0.0), epsilon) {
        return Err(Error::Precondition(format!(
            "(z0, δ) = ({z0}, {delta:e}) is not in V for ε = {epsilon}"
        )));
    }
    let m = f64::from(params.m);
    let b = f64::from(params.b);
    let rhs = |k: f64, z: &[C64; 1]| {
        let w = base_point(delta, k);
        [TWO_PI_I * z[0] * (-b + z[0] * params.wb_f_wm(w) / m)]
    };
    let opts = IntegratorOptions::new(tol).with_max_step(1.0 / 32.0);
    let traj = integrate_in(rhs, (0.0, 1.0), [z0], &opts, |k, z| {
        params.in_singular_domain(z[0], base_point(delta, k), epsilon)
    })?;
    if traj.status == Status::Escaped {
        return Err(Error::Escaped { k: traj.stopped_at });
    }
    traj.endpoint()?;

    let c = |k: f64, z: C64| z * C64::from_polar(1.0, std::f64::consts::TAU * b * k);
    let c0 = c(0.0, z0);
    let beta = traj
        .samples
        .iter()
        .filter(|s| s.k > 0.0)
        .map(|s| (c(s.k, s.state[0]) - c0).norm() / (c0.norm_sqr() * s.k))
        .fold(0.0, f64::max);
    let sup_wb_f = (0..=512)
        .map(|j| params.wb_f_wm(base_point(delta, j as f64 / 512.0)).norm())
        .fold(0.0, f64::max);
    Ok(SingularLift { delta, z0, epsilon, trajectory: traj, stayed_in_v: true, beta, sup_wb_f })
}

/// `sup_k |(2π/m) ∫₀^k δ^b f(δ^m e^{2πimt}) dt| / k` from the termwise
/// antiderivative of the Laurent series, evaluated on a uniform grid.
pub fn lifting_bound_constant(params: &PairParams, delta: f64) -> f64 {
    let m = f64::from(params.m);
    let integral = |k: f64| -> C64 {
        params
            .f
            .nonzero_terms()
            .map(|(p, coef)| {
                let scale = delta.powi(params.b as i32 + params.m as i32 * p);
                if p == 0 {
                    coef * scale * k
                } else {
                    let freq = TWO_PI_I * m * f64::from(p);
                    coef * scale * ((freq * k).exp() - 1.0) / freq
                }
            })
            .sum()
    };
    (1..=2048)
        .map(|j| {
            let k = j as f64 / 2048.0;
            std::f64::consts::TAU / m * integral(k).norm() / k
        })
        .chain(std::iter::once(std::f64::consts::TAU / m * integral(1e-9).norm() / 1e-9))
        .fold(0.0, f64::max)
}
