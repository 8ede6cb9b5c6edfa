//! Möbius maps fitted through sampled return-map pairs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

/// Coefficient tolerance used by [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Maximum image mismatch allowed for a fourth consistency pair.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MobiusClass {
    Identity,
    Translation,
    Parabolic,
    General,
}

/// `z ↦ (αz + β)/(γz + δ)` with `αδ − βγ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolonomyMap {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
    pub classification: MobiusClass,
}

impl HolonomyMap {
    /// Normalizes `[[α, β], [γ, δ]]` to determinant one and fixes the sign.
    pub fn from_matrix(m: [[C64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let scale = m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        if !(det.norm() > 1e-300 && det.norm() > 1e-14 * scale * scale) {
            return Err(Error::Degenerate("singular Möbius matrix".into()));
        }
        let root = det.sqrt();
        let mut coeffs = [m[0][0] / root, m[0][1] / root, m[1][0] / root, m[1][1] / root];
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if let Some(lead) = coeffs.iter().find(|c| c.norm() > 1e-12 * max) {
            if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
                coeffs.iter_mut().for_each(|c| *c = -*c);
            }
        }
        let [alpha, beta, gamma, delta] = coeffs;
        let mut map = Self { alpha, beta, gamma, delta, classification: MobiusClass::General };
        map.classification = classify(&map);
        Ok(map)
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self::from_matrix([[one, zero], [zero, one]]).expect("identity is regular")
    }

    pub fn translation(shift: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::from_matrix([[one, shift], [C64::new(0.0, 0.0), one]]).expect("translation is regular")
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.alpha * z + self.beta) / (self.gamma * z + self.delta)
    }

    pub fn trace(&self) -> C64 {
        self.alpha + self.delta
    }

    pub fn determinant(&self) -> C64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    /// Shift of a translation, `β/δ`; `None` for other classes.
    pub fn shift(&self) -> Option<C64> {
        matches!(self.classification, MobiusClass::Identity | MobiusClass::Translation)
            .then(|| self.beta / self.delta)
    }

    /// Largest coefficient difference after both maps are normalized.
    pub fn distance(&self, other: &HolonomyMap) -> f64 {
        let a = [self.alpha, self.beta, self.gamma, self.delta];
        let b = [other.alpha, other.beta, other.gamma, other.delta];
        a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

/// Classification by coefficient tests at [`CLASSIFY_TOL`].
pub fn classify(map: &HolonomyMap) -> MobiusClass {
    classify_within(map, CLASSIFY_TOL)
}

/// Coefficient tolerance for maps fitted from images at integrator tolerance `ode_tol`.
pub fn classify_tol(ode_tol: f64) -> f64 {
    CLASSIFY_TOL.max(1e3 * ode_tol)
}

pub fn classify_within(map: &HolonomyMap, tol: f64) -> MobiusClass {
    let one = C64::new(1.0, 0.0);
    let is_identity = map.beta.norm() < tol
        && map.gamma.norm() < tol
        && (((map.alpha - one).norm() < tol && (map.delta - one).norm() < tol)
            || ((map.alpha + one).norm() < tol && (map.delta + one).norm() < tol));
    if is_identity {
        MobiusClass::Identity
    } else if map.gamma.norm() < tol && (map.alpha - map.delta).norm() < tol {
        MobiusClass::Translation
    } else if (map.trace() * map.trace() - 4.0).norm() < tol {
        MobiusClass::Parabolic
    } else {
        MobiusClass::General
    }
}

// Matrix sending (p1, p2, p3) to (0, 1, ∞).
fn cross_ratio_matrix(p: [C64; 3]) -> [[C64; 2]; 2] {
    let [p1, p2, p3] = p;
    [[p2 - p3, -p1 * (p2 - p3)], [p2 - p1, -p3 * (p2 - p1)]]
}

fn distinct(p: [C64; 3]) -> bool {
    let scale = p.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let eps = 1e-12 * scale;
    (p[0] - p[1]).norm() > eps && (p[0] - p[2]).norm() > eps && (p[1] - p[2]).norm() > eps
}

/// Consistency tolerance for images computed at integrator tolerance `ode_tol`.
pub fn consistency_tol(ode_tol: f64) -> f64 {
    CONSISTENCY_TOL.max(1e3 * ode_tol)
}

/// The Möbius map through the first three `(input, output)` pairs. A fourth
/// pair, when present, must be reproduced within [`CONSISTENCY_TOL`].
pub fn fit_return_map(pairs: &[(C64, C64)]) -> Result<HolonomyMap> {
    fit_return_map_within(pairs, CONSISTENCY_TOL)
}

/// [`fit_return_map`] with an explicit relative tolerance for the fourth pair.
pub fn fit_return_map_within(pairs: &[(C64, C64)], tol: f64) -> Result<HolonomyMap> {
    if pairs.len() < 3 {
        return Err(Error::Degenerate(format!("need three pairs, got {}", pairs.len())));
    }
    let inputs = [pairs[0].0, pairs[1].0, pairs[2].0];
    let outputs = [pairs[0].1, pairs[1].1, pairs[2].1];
    if !distinct(inputs) {
        return Err(Error::Degenerate("sample inputs are not pairwise distinct".into()));
    }
    if !distinct(outputs) {
        return Err(Error::Degenerate("sample outputs are not pairwise distinct".into()));
    }
    let a = cross_ratio_matrix(inputs);
    let b = cross_ratio_matrix(outputs);
    // adj(B) A is proportional to B⁻¹A
    let adj_b = [[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]];
    let prod: [[C64; 2]; 2] = std::array::from_fn(|i| {
        std::array::from_fn(|j| adj_b[i][0] * a[0][j] + adj_b[i][1] * a[1][j])
    });
    let map = HolonomyMap::from_matrix(prod)?;
    if let Some(&(z4, w4)) = pairs.get(3) {
        let miss = (map.apply(z4) - w4).norm();
        if !(miss <= tol * w4.norm().max(1.0)) {
            return Err(Error::Degenerate(format!(
                "fourth pair misses the fitted map by {miss:e}"
            )));
        }
    }
    Ok(map)
}
