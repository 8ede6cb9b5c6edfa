use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{PairParams, Vector4};
use crate::lift::{integrate_in, Axis, IntegratorOptions, Status, Trajectory};
use crate::C64;

/// Leaf coordinates on a cylinder stratum after normalizing `g(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationCoordinate {
    pub mu: f64,
    /// Defined modulo `period`, reduced into `[0, period)`.
    pub nu: f64,
    pub period: f64,
    /// `g(0)`, the factor removed from `Y`.
    pub rescale: C64,
}

impl SeparationCoordinate {
    /// Sup-distance with `ν` compared on the circle.
    pub fn distance(&self, other: &SeparationCoordinate) -> f64 {
        let d = (self.nu - other.nu).rem_euclid(self.period);
        (self.mu - other.mu).abs().max(d.min(self.period - d))
    }
}

/// `μ = Re(g(0)s) − ln|y|/(am)`, `ν = Im(g(0)s) − arg(y)/(am)` at `(t, s, 0, y)`.
pub fn separation_coordinate_sy(params: &PairParams, point: Vector4) -> Result<SeparationCoordinate> {
    if point[2] != C64::new(0.0, 0.0) {
        return Err(Error::Domain(format!("x = {} is not on the stratum x = 0", point[2])));
    }
    axis_separation_coordinate(params, Axis::Y, point[1], point[3])
}

/// Coordinate on the stratum where the other axis variable vanishes; `w` is
/// `y` on `Sy` and `x` on `Sx` (where the log term enters with the opposite sign).
pub fn axis_separation_coordinate(params: &PairParams, axis: Axis, s: C64, w: C64) -> Result<SeparationCoordinate> {
    if w.norm() == 0.0 {
        return Err(Error::Domain("the coordinate vanishes: point lies on S0".into()));
    }
    let (exp, sign) = match axis {
        Axis::Y => (params.a, -1.0),
        Axis::X => (params.b, 1.0),
    };
    if exp == 0 {
        return Err(Error::Precondition("the stratum carries no cylinder structure".into()));
    }
    let g0 = params.g_at_zero();
    if g0.norm() == 0.0 {
        return Err(Error::Precondition("g(0) = 0".into()));
    }
    let k = f64::from(exp * params.m);
    let st = g0 * s;
    let period = std::f64::consts::TAU / k;
    Ok(SeparationCoordinate {
        mu: st.re + sign * w.norm().ln() / k,
        nu: (st.im + sign * w.arg() / k).rem_euclid(period),
        period,
        rescale: g0,
    })
}

/// Disjoint saturated neighborhoods `{μ < threshold}` and `{μ > threshold}`
/// (or the analogous `ν`-arcs) separating two leaves of `Sy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationWitness {
    pub coordinate: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub threshold: f64,
    /// `Re(g(0)s)` value of the threshold on the fiber through the first point.
    pub re_s_threshold: f64,
}

/// `None` when both points lie on one leaf to within `tol`.
pub fn separate_sy_leaves(params: &PairParams, p: Vector4, q: Vector4, tol: f64) -> Result<Option<SeparationWitness>> {
    let cp = separation_coordinate_sy(params, p)?;
    let cq = separation_coordinate_sy(params, q)?;
    let k = f64::from(params.a * params.m);
    let fiber = p[3].norm().ln() / k;
    if (cp.mu - cq.mu).abs() > tol {
        let (lower, upper) = (cp.mu.min(cq.mu), cp.mu.max(cq.mu));
        let threshold = 0.5 * (lower + upper);
        return Ok(Some(SeparationWitness {
            coordinate: "mu",
            lower,
            upper,
            threshold,
            re_s_threshold: threshold + fiber,
        }));
    }
    if cp.distance(&cq) > tol {
        let (lower, upper) = (cp.nu.min(cq.nu), cp.nu.max(cq.nu));
        return Ok(Some(SeparationWitness {
            coordinate: "nu",
            lower,
            upper,
            threshold: 0.5 * (lower + upper),
            re_s_threshold: f64::NAN,
        }));
    }
    Ok(None)
}

/// Neighborhood `{|y| < y_radius, |Re(g(0)s) − Re(g(0)s₀)| < 1}` of a point of
/// `S0`, on which `μ > threshold`, while the leaf through `p` has `μ < threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S0Separation {
    pub leaf_mu: f64,
    pub threshold: f64,
    pub re_s_window: (f64, f64),
    pub y_radius: f64,
}

pub fn separate_from_s0(params: &PairParams, p: Vector4, s0: C64) -> Result<S0Separation> {
    let cp = separation_coordinate_sy(params, p)?;
    let k = f64::from(params.a * params.m);
    let centre = (cp.rescale * s0).re;
    let threshold = cp.mu + 1.0;
    Ok(S0Separation {
        leaf_mu: cp.mu,
        threshold,
        re_s_window: (centre - 1.0, centre + 1.0),
        y_radius: (k * (centre - 1.0 - threshold)).exp(),
    })
}

/// Real-time trajectory of `Z̄` over `[0, span]`.
pub fn zbar_trajectory(params: &PairParams, start: Vector4, span: f64, tol: f64) -> Result<Trajectory<4>> {
    let rhs = |_: f64, p: &Vector4| params.aux_field_zbar(*p);
    let traj = integrate_in(rhs, (0.0, span), start, &IntegratorOptions::new(tol), |_, p| {
        p[3].norm() > 0.0 && p[3].norm() < 1.0
    })?;
    if traj.status == Status::Escaped {
        return Err(Error::Escaped { k: traj.stopped_at });
    }
    traj.endpoint()?;
    Ok(traj)
}

/// Largest drift of `d·s − [h₀ ln y + Σ_{p≠0} h_p y^{mp}/(mp)]` along a
/// trajectory in `{x = 1}`, `h_p` the coefficients of `1/g`, `d = am − bn`.
pub fn hyperplane_invariant(params: &PairParams, traj: &Trajectory<4>) -> Result<f64> {
    let h = params.g.reciprocal(60)?;
    let m = i64::from(params.m);
    let d = params.determinant() as f64;
    let mut log_y = traj.samples[0].state[3].ln();
    let mut prev = traj.samples[0].state[3];
    let mut worst: f64 = 0.0;
    let mut x_drift: f64 = 0.0;
    let mut first = None;
    for s in &traj.samples {
        let [_, sv, x, y] = s.state;
        log_y += (y / prev).ln();
        prev = y;
        x_drift = x_drift.max((x - 1.0).norm());
        let series: C64 = h
            .nonzero_terms()
            .map(|(p, c)| {
                if p == 0 {
                    c * log_y
                } else {
                    let e = m * i64::from(p);
                    c * crate::fields::pow_i64(y, e) / e as f64
                }
            })
            .sum();
        let value = d * sv - series;
        let v0 = *first.get_or_insert(value);
        worst = worst.max((value - v0).norm());
    }
    Ok(worst.max(x_drift))
}
