//! Dormand-Prince 5(4) integrator for complex systems over a real parameter,
//! with PI step-size control and optional admissible-region checks.

use std::fmt::Write as _;

use serde_json::json;

use crate::error::{Error, Result};
use crate::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;

/// Smallest admissible step.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Absolute and relative tolerance.
    pub tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl IntegratorOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_step: f64::INFINITY, max_steps: 200_000 }
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    fn check(&self) -> Result<()> {
        if !(1e-13..=1e-6).contains(&self.tol) {
            return Err(Error::Precondition(format!(
                "integrator tolerance {:e} outside [1e-13, 1e-6]",
                self.tol
            )));
        }
        Ok(())
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self::new(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    Escaped,
    StepUnderflow,
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const N: usize> {
    pub k: f64,
    pub state: [C64; N],
    /// Absolute local error estimate of the step ending here (0 for the start).
    pub local_error: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub samples: Vec<Sample<N>>,
    /// Sum of the accepted local error estimates.
    pub error_estimate: f64,
    pub status: Status,
    /// Parameter value where integration stopped (the offending step for
    /// non-completed runs).
    pub stopped_at: f64,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &Sample<N> {
        self.samples.last().expect("a trajectory always holds its start")
    }

    pub fn accepted_steps(&self) -> usize {
        self.samples.len() - 1
    }

    /// Final state, or the integration failure as an error.
    pub fn endpoint(&self) -> Result<[C64; N]> {
        match self.status {
            Status::Completed => Ok(self.last().state),
            Status::Escaped => Err(Error::Escaped { k: self.stopped_at }),
            Status::StepUnderflow => Err(Error::StepUnderflow { k: self.stopped_at, h: MIN_STEP }),
            Status::StepLimit => Err(Error::StepLimit { k: self.stopped_at }),
        }
    }

    /// CSV with columns `k`, `re_i`/`im_i` per coordinate and `local_error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for i in 0..N {
            let _ = write!(out, ",re_{i},im_{i}");
        }
        out.push_str(",local_error\n");
        for s in &self.samples {
            let _ = write!(out, "{:.17e}", s.k);
            for z in &s.state {
                let _ = write!(out, ",{:.17e},{:.17e}", z.re, z.im);
            }
            let _ = writeln!(out, ",{:.17e}", s.local_error);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let samples: Vec<_> = self
            .samples
            .iter()
            .map(|s| {
                json!({
                    "k": s.k,
                    "state": s.state.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "local_error": s.local_error,
                })
            })
            .collect();
        json!({
            "status": self.status,
            "error_estimate": self.error_estimate,
            "stopped_at": self.stopped_at,
            "samples": samples,
        })
    }
}

fn axpy<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    std::array::from_fn(|i| {
        let incr: C64 = terms.iter().map(|(c, k)| k[i] * *c).sum();
        y[i] + incr * h
    })
}

fn scaled_norm<const N: usize>(v: &[C64; N], y0: &[C64; N], y1: &[C64; N], tol: f64) -> f64 {
    if N == 0 {
        return 0.0;
    }
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = tol + tol * y0[i].norm().max(y1[i].norm());
            (v[i].norm() / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn finite<const N: usize>(v: &[C64; N]) -> bool {
    v.iter().all(|z| z.is_finite())
}

/// Integrates `dy/dk = rhs(k, y)` over `[0, 1]`.
pub fn integrate<const N: usize, F>(rhs: F, y0: [C64; N], opts: &IntegratorOptions) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[C64; N]) -> [C64; N],
{
    integrate_in(rhs, (0.0, 1.0), y0, opts, |_, _| true)
}

/// Integrates over `span = (k0, k1)`, `k1 > k0`, stopping with
/// [`Status::Escaped`] at the first accepted state for which `admissible`
/// returns false.
pub fn integrate_in<const N: usize, F, A>(
    rhs: F,
    span: (f64, f64),
    y0: [C64; N],
    opts: &IntegratorOptions,
    admissible: A,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[C64; N]) -> [C64; N],
    A: Fn(f64, &[C64; N]) -> bool,
{
    opts.check()?;
    let (k0, k1) = span;
    if k1 <= k0 {
        return Err(Error::Precondition(format!("empty span [{k0}, {k1}]")));
    }
    let tol = opts.tol;
    let mut evals = 0usize;
    let f = |k: f64, y: &[C64; N], evals: &mut usize| {
        *evals += 1;
        rhs(k, y)
    };

    let mut traj = Trajectory {
        samples: vec![Sample { k: k0, state: y0, local_error: 0.0 }],
        error_estimate: 0.0,
        status: Status::Completed,
        stopped_at: k0,
        rejected_steps: 0,
        rhs_evaluations: 0,
    };
    if !admissible(k0, &y0) {
        traj.status = Status::Escaped;
        return Ok(traj);
    }

    let mut k = k0;
    let mut y = y0;
    let mut k1v = f(k, &y, &mut evals);
    let mut h = initial_step(&f, k, &y, &k1v, tol, &mut evals)
        .min(opts.max_step)
        .min(k1 - k0);
    let mut err_prev: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    while k < k1 {
        if steps >= opts.max_steps {
            traj.status = Status::StepLimit;
            traj.stopped_at = k;
            break;
        }
        steps += 1;
        let last_step = k + h >= k1 - 1e-15 * k1.abs().max(1.0);
        if last_step {
            h = k1 - k;
        }
        if h < MIN_STEP {
            traj.status = Status::StepUnderflow;
            traj.stopped_at = k;
            break;
        }

        let ks2 = f(k + C2 * h, &axpy(&y, h, &[(A21, &k1v)]), &mut evals);
        let ks3 = f(k + C3 * h, &axpy(&y, h, &[(A31, &k1v), (A32, &ks2)]), &mut evals);
        let ks4 = f(k + C4 * h, &axpy(&y, h, &[(A41, &k1v), (A42, &ks2), (A43, &ks3)]), &mut evals);
        let ks5 = f(
            k + C5 * h,
            &axpy(&y, h, &[(A51, &k1v), (A52, &ks2), (A53, &ks3), (A54, &ks4)]),
            &mut evals,
        );
        let ks6 = f(
            k + h,
            &axpy(&y, h, &[(A61, &k1v), (A62, &ks2), (A63, &ks3), (A64, &ks4), (A65, &ks5)]),
            &mut evals,
        );
        let y_new = axpy(&y, h, &[(A71, &k1v), (A73, &ks3), (A74, &ks4), (A75, &ks5), (A76, &ks6)]);
        let k_next = if last_step { k1 } else { k + h };
        let ks7 = f(k_next, &y_new, &mut evals);
        let err_vec: [C64; N] = std::array::from_fn(|i| {
            (k1v[i] * E1 + ks3[i] * E3 + ks4[i] * E4 + ks5[i] * E5 + ks6[i] * E6 + ks7[i] * E7) * h
        });

        let stages_finite = finite(&y_new) && finite(&ks7) && finite(&err_vec);
        let err = if stages_finite {
            scaled_norm(&err_vec, &y, &y_new, tol)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            let local = err_vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            traj.error_estimate += local;
            k = k_next;
            y = y_new;
            k1v = ks7;
            traj.samples.push(Sample { k, state: y, local_error: local });
            if !admissible(k, &y) {
                traj.status = Status::Escaped;
                traj.stopped_at = k;
                break;
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                SAFETY * err.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)
            };
            let fac_max = if last_rejected { 1.0 } else { FAC_MAX };
            h = (h * fac.clamp(FAC_MIN, fac_max)).min(opts.max_step);
            err_prev = err.max(1e-4);
            last_rejected = false;
        } else {
            traj.rejected_steps += 1;
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-PI_ALPHA)).max(FAC_MIN)
            } else {
                0.1
            };
            h *= fac.min(1.0);
            last_rejected = true;
        }
    }
    if traj.status == Status::Completed {
        traj.stopped_at = k;
    }
    traj.rhs_evaluations = evals;
    Ok(traj)
}

fn initial_step<const N: usize, F>(
    f: &F,
    k: f64,
    y: &[C64; N],
    f0: &[C64; N],
    tol: f64,
    evals: &mut usize,
) -> f64
where
    F: Fn(f64, &[C64; N], &mut usize) -> [C64; N],
{
    let d0 = scaled_norm(y, y, y, tol);
    let d1 = scaled_norm(f0, y, y, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, h0, &[(1.0, f0)]);
    let f1 = f(k + h0, &y1, evals);
    let diff: [C64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = scaled_norm(&diff, y, y, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    if h1.is_finite() {
        (100.0 * h0).min(h1)
    } else {
        h0
    }
}

/// Parameter and state at an event crossing.
pub type EventHit<const N: usize> = (f64, [C64; N]);

/// Integrates over `(k0, k_max)` until `event(k, y)` changes sign, then
/// locates the crossing by safeguarded regula falsi on re-integrations from
/// the bracketing accepted step. Returns the trajectory up to the crossing and
/// the event point, or `None` when no sign change occurs.
pub fn integrate_until_event<const N: usize, F, E>(
    rhs: F,
    span: (f64, f64),
    y0: [C64; N],
    opts: &IntegratorOptions,
    event: E,
) -> Result<(Trajectory<N>, Option<EventHit<N>>)>
where
    F: Fn(f64, &[C64; N]) -> [C64; N] + Copy,
    E: Fn(f64, &[C64; N]) -> f64 + Copy,
{
    // a start exactly on the event surface takes its sign from the first step
    let reference = std::cell::Cell::new(event(span.0, &y0));
    let traj = integrate_in(rhs, span, y0, opts, |k, y| {
        let v = event(k, y);
        let r = reference.get();
        if r == 0.0 {
            reference.set(v);
            true
        } else {
            v == 0.0 || v.signum() == r.signum()
        }
    })?;
    if traj.status != Status::Escaped {
        traj.endpoint()?;
        return Ok((traj, None));
    }
    let n = traj.samples.len();
    let before = traj.samples[n - 2];
    let after = traj.samples[n - 1];
    let state_at = |k: f64| -> Result<[C64; N]> {
        if k <= before.k {
            return Ok(before.state);
        }
        integrate_in(rhs, (before.k, k), before.state, opts, |_, _| true)?.endpoint()
    };
    let (mut lo, mut hi) = (before.k, after.k);
    let (mut flo, mut fhi) = (event(lo, &before.state), event(hi, &after.state));
    let mut side = 0i8;
    let mut crossing = (hi, after.state);
    for _ in 0..100 {
        if (hi - lo) <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
        let mut mid = (lo * fhi - hi * flo) / (fhi - flo);
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let state = state_at(mid)?;
        let fm = event(mid, &state);
        crossing = (mid, state);
        if fm == 0.0 {
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if fm.abs() <= 1e-15 {
            break;
        }
    }
    let mut trimmed = traj;
    trimmed.samples.pop();
    trimmed.samples.push(Sample { k: crossing.0, state: crossing.1, local_error: 0.0 });
    trimmed.status = Status::Completed;
    trimmed.stopped_at = crossing.0;
    Ok((trimmed, Some(crossing)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI_I;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_field_is_constant() {
        let y0 = [c(0.3, -2.0)];
        let traj = integrate(|_, _| [c(0.0, 0.0)], y0, &IntegratorOptions::new(1e-10)).unwrap();
        assert_eq!(traj.status, Status::Completed);
        assert!(traj.samples.iter().all(|s| s.state == y0));
        assert_eq!(traj.last().k, 1.0);
    }

    #[test]
    fn exponential_loop_returns() {
        let traj = integrate(|_, y: &[C64; 1]| [TWO_PI_I * y[0]], [c(1.0, 0.0)], &IntegratorOptions::new(1e-12)).unwrap();
        let end = traj.endpoint().unwrap()[0];
        assert!((end - c(1.0, 0.0)).norm() < 1e-10, "{end}");
        assert!(traj.samples.windows(2).all(|w| w[0].k < w[1].k));
    }

    #[test]
    fn riccati_matches_exact_solution() {
        let y0 = c(0.1, 0.0);
        let traj = integrate(|_, y: &[C64; 1]| [-TWO_PI_I * y[0] * y[0]], [y0], &IntegratorOptions::new(1e-12)).unwrap();
        let exact = y0 / (1.0 + TWO_PI_I * y0);
        assert!((traj.endpoint().unwrap()[0] - exact).norm() < 1e-11);
        assert!((exact - c(0.1, 0.0) / c(1.0, 0.2 * std::f64::consts::PI)).norm() < 1e-15);
    }

    #[test]
    fn pole_causes_underflow() {
        // y' = y^2, y(0) = 2 blows up at k = 1/2
        let traj = integrate(|_, y: &[C64; 1]| [y[0] * y[0]], [c(2.0, 0.0)], &IntegratorOptions::new(1e-10)).unwrap();
        assert_eq!(traj.status, Status::StepUnderflow);
        assert!((traj.stopped_at - 0.5).abs() < 1e-3);
        assert!(matches!(traj.endpoint(), Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn escape_is_reported() {
        let traj = integrate_in(
            |_, _: &[C64; 1]| [c(1.0, 0.0)],
            (0.0, 1.0),
            [c(0.0, 0.0)],
            &IntegratorOptions::new(1e-10).with_max_step(0.05),
            |_, y| y[0].re < 0.5,
        )
        .unwrap();
        assert_eq!(traj.status, Status::Escaped);
        assert!(traj.stopped_at >= 0.5 && traj.stopped_at <= 0.56);
    }

    #[test]
    fn tolerance_out_of_range_is_rejected() {
        let r = integrate(|_, y: &[C64; 1]| *y, [c(1.0, 0.0)], &IntegratorOptions::new(1e-3));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn event_location() {
        // (x, y) rotation; x crosses zero downward at k = π/2 from (1, 0)
        let rhs = |_, s: &[C64; 2]| [-s[1], s[0]];
        let (traj, hit) = integrate_until_event(rhs, (0.0, 3.0), [c(1.0, 0.0), c(0.0, 0.0)], &IntegratorOptions::new(1e-12), |_, s| s[0].re).unwrap();
        let (k, state) = hit.unwrap();
        assert!((k - std::f64::consts::FRAC_PI_2).abs() < 1e-10, "{k}");
        assert!((state[1] - c(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(traj.last().k, k);
    }

    #[test]
    fn event_from_a_zero_start() {
        // x = sin k starts on the surface x = 0 and returns to it at k = π
        let rhs = |_, s: &[C64; 2]| [s[1], -s[0]];
        let (_, hit) = integrate_until_event(rhs, (0.0, 4.0), [c(0.0, 0.0), c(1.0, 0.0)], &IntegratorOptions::new(1e-12), |_, s| s[0].re).unwrap();
        assert!((hit.unwrap().0 - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn csv_header_is_stable() {
        let traj = integrate(|_, _: &[C64; 2]| [c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, 0.0); 2], &IntegratorOptions::new(1e-8)).unwrap();
        let csv = traj.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "k,re_0,im_0,re_1,im_1,local_error");
        assert_eq!(csv.lines().count(), traj.samples.len() + 1);
    }
}
