use serde::Serialize;

use crate::error::{Error, Result};
use crate::lift::{integrate_in, integrate_until_event, IntegratorOptions, Status, Trajectory};
use crate::C64;

/// Chordal distance between `[z₀ : z₁]` and `[w₀ : w₁]` on the projective line.
pub fn chordal_distance(z: [C64; 2], w: [C64; 2]) -> f64 {
    let nz = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
    let nw = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    (z[0] * w[1] - z[1] * w[0]).norm() / (nz * nw)
}

/// `π(t, x) = [x : tx + 1]`
pub fn cp1_map(t: C64, x: C64) -> [C64; 2] {
    [x, t * x + 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cp1Deviation {
    pub max_chordal: f64,
    /// The same deviation measured in the chart `[1 : (tx + 1)/x]`, over the
    /// samples with `|x| ≥ 0.1`; `None` if no sample qualifies.
    pub max_chart: Option<f64>,
    pub samples: usize,
}

/// Flows `d/dt + x² d/dx` for real time `span` from each `(t, x)` and
/// reports how far `π` moves.
pub fn cp1_leaf_map_check(samples: &[(C64, C64)], span: f64, tol: f64) -> Result<Cp1Deviation> {
    let opts = IntegratorOptions::new(tol);
    let rhs = |_: f64, p: &[C64; 2]| [C64::new(1.0, 0.0), p[1] * p[1]];
    let mut max_chordal: f64 = 0.0;
    let mut max_chart: Option<f64> = None;
    for &(t0, x0) in samples {
        let traj = integrate_in(rhs, (0.0, span), [t0, x0], &opts, |_, p| p[1].norm() < 1e6)?;
        if traj.status == Status::Escaped {
            return Err(Error::Escaped { k: traj.stopped_at });
        }
        traj.endpoint()?;
        let base = cp1_map(t0, x0);
        let chart0 = (x0.norm() >= 0.1).then(|| (t0 * x0 + 1.0) / x0);
        for s in &traj.samples {
            let [t, x] = s.state;
            max_chordal = max_chordal.max(chordal_distance(base, cp1_map(t, x)));
            if let (Some(z0), true) = (chart0, x.norm() >= 0.1) {
                let z = (t * x + 1.0) / x;
                let one = C64::new(1.0, 0.0);
                let d = chordal_distance([one, z0], [one, z]);
                max_chart = Some(max_chart.map_or(d, |m| m.max(d)));
            }
        }
    }
    Ok(Cp1Deviation { max_chordal, max_chart, samples: samples.len() })
}

/// `X = 4y d/dx − x d/dy` suspended as `d/dt + X` on `(t, x, y)`.
pub fn ellipse_rhs(_: f64, p: &[C64; 3]) -> [C64; 3] {
    [C64::new(1.0, 0.0), 4.0 * p[2], -p[1]]
}

/// `H = x² + 4y²`
pub fn ellipse_h(x: f64, y: f64) -> f64 {
    x * x + 4.0 * y * y
}

fn real_state(p: &[C64; 3]) -> [f64; 3] {
    [p[0].re, p[1].re, p[2].re]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct U1Report {
    pub starts: usize,
    /// `max |H(x(τ), y(τ)) − H(x₀, y₀)|` over every trajectory.
    pub max_h_drift: f64,
    /// Every trajectory stays in `U₁ = {H < ε²}` for one full period.
    pub invariant: bool,
    /// Each leaf meets `{t = 0}` once: `t` advances with unit speed.
    pub single_slice_crossing: bool,
    pub h_levels: Vec<f64>,
    pub hausdorff: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MergingLeaf {
    pub delta: f64,
    pub c: f64,
    pub t_star: f64,
    pub endpoint: [f64; 3],
    /// `|x(T*)| + |y(T*) + c|`
    pub endpoint_error: f64,
    pub max_radius_sq: f64,
    pub inside_ball: bool,
    pub max_h_drift: f64,
    #[serde(skip)]
    pub trajectory: Trajectory<3>,
}

/// The limiting trajectory from `(0, 0, ε/2)` reaches `∂B(0, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTouch {
    pub time: f64,
    pub point: [f64; 3],
    pub radius_sq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop26Report {
    pub epsilon: f64,
    pub u1: U1Report,
    pub u2: Vec<MergingLeaf>,
    pub boundary_touch: BoundaryTouch,
    /// `(0, 0, ε/2)` and `(T*, 0, −ε/2)` in the limit.
    pub limit_points: [[f64; 3]; 2],
    pub non_hausdorff_witness: bool,
}

impl Prop26Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Hausdorff leaf space on the invariant ellipse disc `U₁` and the merging
/// pair of leaves on the ball `U₂ = B(0, ε)`, for each `δ` in `deltas`.
pub fn prop26_witness(epsilon: f64, deltas: &[f64], tol: f64) -> Result<Prop26Report> {
    if !(epsilon > 0.0) {
        return Err(Error::Precondition(format!("ε = {epsilon} must be positive")));
    }
    if deltas.is_empty() {
        return Err(Error::Precondition("empty δ sequence".into()));
    }
    for w in deltas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Precondition("δ sequence must be decreasing".into()));
        }
    }
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d < epsilon / 4.0)) {
        return Err(Error::Precondition(format!("δ = {d} is not in (0, ε/4)")));
    }
    let opts = IntegratorOptions::new(tol);
    let u1 = u1_report(epsilon, &opts)?;
    let u2 = deltas.iter().map(|&d| merging_leaf(epsilon, d, &opts)).collect::<Result<Vec<_>>>()?;
    let boundary_touch = boundary_touch(epsilon, &opts)?;
    let limit_t = u2.last().map_or(std::f64::consts::FRAC_PI_2, |l| l.t_star);
    let accuracy = 1e-9f64.max(1e3 * tol);
    let non_hausdorff_witness = u2.iter().all(|l| l.inside_ball && l.endpoint_error <= accuracy)
        && (boundary_touch.radius_sq - epsilon * epsilon).abs() <= accuracy
        && boundary_touch.time < limit_t;
    Ok(Prop26Report {
        epsilon,
        u1,
        u2,
        boundary_touch,
        limit_points: [[0.0, 0.0, epsilon / 2.0], [limit_t, 0.0, -epsilon / 2.0]],
        non_hausdorff_witness,
    })
}

fn u1_report(epsilon: f64, opts: &IntegratorOptions) -> Result<U1Report> {
    let e2 = epsilon * epsilon;
    let mut max_h_drift: f64 = 0.0;
    let mut invariant = true;
    let mut single = true;
    let mut h_levels = Vec::new();
    for (i, frac) in [0.1f64, 0.35, 0.6, 0.85].into_iter().enumerate() {
        let angle = 0.7 * i as f64 + 0.3;
        let r = frac.sqrt() * epsilon;
        let (x0, y0) = (r * angle.cos(), 0.5 * r * angle.sin());
        let h0 = ellipse_h(x0, y0);
        h_levels.push(h0);
        let start = [C64::new(0.0, 0.0), C64::new(x0, 0.0), C64::new(y0, 0.0)];
        let traj = integrate_in(ellipse_rhs, (0.0, std::f64::consts::PI), start, opts, |_, _| true)?;
        traj.endpoint()?;
        for s in &traj.samples {
            let [t, x, y] = real_state(&s.state);
            let h = ellipse_h(x, y);
            max_h_drift = max_h_drift.max((h - h0).abs());
            invariant &= h < e2;
            single &= (t - s.k).abs() <= 1e-12 * (1.0 + s.k);
        }
    }
    Ok(U1Report {
        starts: h_levels.len(),
        max_h_drift,
        invariant,
        single_slice_crossing: single,
        h_levels,
        hausdorff: invariant && single && max_h_drift <= 1e-10f64.max(1e2 * opts.tol),
    })
}

fn merging_leaf(epsilon: f64, delta: f64, opts: &IntegratorOptions) -> Result<MergingLeaf> {
    let c = epsilon / 2.0 - delta;
    let start = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(c, 0.0)];
    let (traj, hit) = integrate_until_event(ellipse_rhs, (0.0, 2.0 * std::f64::consts::PI), start, opts, |_, p| p[1].re)?;
    let (t_star, end) = hit.ok_or_else(|| Error::NotConverged("x never returned to 0".into()))?;
    let endpoint = real_state(&end);
    let (_, peak) = integrate_until_event(ellipse_rhs, (0.0, t_star), start, opts, |_, p| p[2].re)?;
    let peak = peak.map(|(_, p)| real_state(&p));
    let h0 = ellipse_h(0.0, c);
    let (mut max_radius_sq, mut max_h_drift) = (0.0f64, 0.0f64);
    for p in traj.samples.iter().map(|s| real_state(&s.state)).chain([endpoint]).chain(peak) {
        max_radius_sq = max_radius_sq.max(p[1] * p[1] + p[2] * p[2]);
        max_h_drift = max_h_drift.max((ellipse_h(p[1], p[2]) - h0).abs());
    }
    Ok(MergingLeaf {
        delta,
        c,
        t_star,
        endpoint,
        endpoint_error: endpoint[1].abs() + (endpoint[2] + c).abs(),
        max_radius_sq,
        inside_ball: max_radius_sq < epsilon * epsilon,
        max_h_drift,
        trajectory: traj,
    })
}

fn boundary_touch(epsilon: f64, opts: &IntegratorOptions) -> Result<BoundaryTouch> {
    let start = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(epsilon / 2.0, 0.0)];
    // |(x, y)|² = 4c² − 3y² peaks where y vanishes
    let (_, hit) = integrate_until_event(ellipse_rhs, (0.0, std::f64::consts::PI), start, opts, |_, p| p[2].re)?;
    let (time, p) = hit.ok_or_else(|| Error::NotConverged("y never vanished".into()))?;
    let point = real_state(&p);
    Ok(BoundaryTouch { time, point, radius_sq: point[1] * point[1] + point[2] * point[2] })
}
