//! Path lifting along the leaves of the suspended foliation and the
//! holonomy/monodromy maps read off from the lifts.
//!
//! Every lift is integrated with the adaptive pair in [`integrator`]; the
//! closed-form maps are cross-checked against composite Gauss-Legendre
//! quadrature of the explicit `dk`-integrands, which does not use the lift.

pub mod integrator;
pub mod mobius;
mod monodromy;
mod singular;

use serde::Serialize;

pub use integrator::{integrate, integrate_in, integrate_until_event, EventHit, IntegratorOptions, Sample, Status, Trajectory};
pub use mobius::{classify, classify_tol, classify_within, consistency_tol, fit_return_map, fit_return_map_within, HolonomyMap, MobiusClass};
pub use monodromy::*;
pub use singular::*;

use crate::fields::Vector2;
use crate::{C64, TWO_PI_I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// A closed base path in the `(x, y)`-plane, parametrized by `k ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseLoop {
    /// `(ρ e^{2πimk}, ρ e^{−2πink})`
    Sigma1 { m: u32, n: u32, radius: f64 },
    /// `(ρ e^{−2πibk}, ρ e^{2πiak})`
    Sigma2 { a: u32, b: u32, radius: f64 },
    /// `center + radius·e^{2πi·winding·k}` in one coordinate, the other held at 0.
    Circle { axis: Axis, radius: f64, center: C64, winding: i32 },
    /// Closed polyline through the samples at uniform parameter speed.
    Custom(Vec<Vector2>),
}

impl BaseLoop {
    pub fn point(&self, k: f64) -> Vector2 {
        match self {
            BaseLoop::Sigma1 { m, n, radius } => [
                C64::from_polar(*radius, std::f64::consts::TAU * f64::from(*m) * k),
                C64::from_polar(*radius, -std::f64::consts::TAU * f64::from(*n) * k),
            ],
            BaseLoop::Sigma2 { a, b, radius } => [
                C64::from_polar(*radius, -std::f64::consts::TAU * f64::from(*b) * k),
                C64::from_polar(*radius, std::f64::consts::TAU * f64::from(*a) * k),
            ],
            BaseLoop::Circle { axis, radius, center, winding } => {
                let w = center + C64::from_polar(*radius, std::f64::consts::TAU * f64::from(*winding) * k);
                on_axis(*axis, w)
            }
            BaseLoop::Custom(pts) => {
                let (i, frac) = polyline_segment(pts.len(), k);
                let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
                [p[0] + (q[0] - p[0]) * frac, p[1] + (q[1] - p[1]) * frac]
            }
        }
    }

    /// `d/dk` of [`BaseLoop::point`] (one-sided at polyline corners).
    pub fn velocity(&self, k: f64) -> Vector2 {
        match self {
            BaseLoop::Sigma1 { m, n, .. } => {
                let p = self.point(k);
                [TWO_PI_I * f64::from(*m) * p[0], -TWO_PI_I * f64::from(*n) * p[1]]
            }
            BaseLoop::Sigma2 { a, b, .. } => {
                let p = self.point(k);
                [-TWO_PI_I * f64::from(*b) * p[0], TWO_PI_I * f64::from(*a) * p[1]]
            }
            BaseLoop::Circle { axis, radius, winding, .. } => {
                let wn = f64::from(*winding);
                let dw = TWO_PI_I * wn * C64::from_polar(*radius, std::f64::consts::TAU * wn * k);
                on_axis(*axis, dw)
            }
            BaseLoop::Custom(pts) => {
                let n = pts.len();
                let (i, _) = polyline_segment(n, k);
                let (p, q) = (pts[i], pts[(i + 1) % n]);
                [(q[0] - p[0]) * n as f64, (q[1] - p[1]) * n as f64]
            }
        }
    }

    /// Polyline vertices at which the velocity jumps.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            BaseLoop::Custom(pts) => (1..pts.len()).map(|i| i as f64 / pts.len() as f64).collect(),
            _ => Vec::new(),
        }
    }
}

fn on_axis(axis: Axis, w: C64) -> Vector2 {
    let zero = C64::new(0.0, 0.0);
    match axis {
        Axis::X => [w, zero],
        Axis::Y => [zero, w],
    }
}

fn polyline_segment(n: usize, k: f64) -> (usize, f64) {
    let scaled = k.clamp(0.0, 1.0) * n as f64;
    let i = (scaled.floor() as usize).min(n - 1);
    (i, scaled - i as f64)
}

/// Tolerance and loop size shared by the lifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftOptions {
    pub tol: f64,
    /// Radius `ρ` of the base loops; `1` unless the series data require a smaller loop.
    pub loop_radius: f64,
    /// Fiber coordinates must stay below this modulus.
    pub escape_radius: f64,
}

impl LiftOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, loop_radius: 1.0, escape_radius: 10.0 }
    }

    pub fn with_loop_radius(mut self, loop_radius: f64) -> Self {
        self.loop_radius = loop_radius;
        self
    }

    pub(crate) fn integrator(&self) -> IntegratorOptions {
        IntegratorOptions::new(self.tol)
    }
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self::new(1e-12)
    }
}
