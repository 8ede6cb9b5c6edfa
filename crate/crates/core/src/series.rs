//! Truncated Laurent series around the origin.
//!
//! A [`LaurentSeries`] stores the coefficients `c_p` for
//! `lowest_index <= p <= truncation_degree`; every coefficient outside that
//! window is treated as zero. The lowest stored coefficient is nonzero unless
//! the whole series vanishes, so `lowest_index` is the valuation (and
//! `-lowest_index` the pole order when it is negative).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Highest retained index used when a series is built from a finite list of terms.
pub const DEFAULT_TRUNCATION: i32 = 32;

/// Caller-declared annulus `inner < |z| < outer` on which the series is meant
/// to converge. Informational only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    lowest_index: i32,
    coefficients: Vec<C64>,
    truncation_degree: i32,
    annulus: Option<Annulus>,
}

impl LaurentSeries {
    /// Series with coefficients `coefficients[j]` at index `lowest_index + j`,
    /// retained up to `max(DEFAULT_TRUNCATION, highest given index)`.
    pub fn new(lowest_index: i32, coefficients: Vec<C64>) -> Self {
        let highest = lowest_index + coefficients.len() as i32 - 1;
        Self::with_window(lowest_index, coefficients, highest.max(DEFAULT_TRUNCATION))
    }

    /// Builds a series from `(index, coefficient)` terms. Repeated indices add up.
    pub fn from_terms(terms: &[(i32, C64)]) -> Self {
        if terms.is_empty() {
            return Self::zero();
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coefficients = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for &(p, c) in terms {
            coefficients[(p - lo) as usize] += c;
        }
        Self::new(lo, coefficients)
    }

    /// Builds a series from `[index, re, im]` triples, the configuration-file encoding.
    pub fn from_triples(triples: &[(i32, f64, f64)]) -> Self {
        let terms: Vec<(i32, C64)> = triples
            .iter()
            .map(|&(p, re, im)| (p, C64::new(re, im)))
            .collect();
        Self::from_terms(&terms)
    }

    /// Nonzero terms as `(index, re, im)` triples.
    pub fn to_triples(&self) -> Vec<(i32, f64, f64)> {
        self.nonzero_terms().map(|(p, c)| (p, c.re, c.im)).collect()
    }

    pub fn zero() -> Self {
        Self {
            lowest_index: DEFAULT_TRUNCATION,
            coefficients: vec![C64::new(0.0, 0.0)],
            truncation_degree: DEFAULT_TRUNCATION,
            annulus: None,
        }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(0, vec![c])
    }

    pub fn monomial(c: C64, p: i32) -> Self {
        Self::new(p, vec![c])
    }

    fn with_window(lowest_index: i32, mut coefficients: Vec<C64>, truncation_degree: i32) -> Self {
        let lead = coefficients.iter().position(|c| *c != C64::new(0.0, 0.0));
        let Some(lead) = lead else {
            let mut z = Self::zero();
            z.lowest_index = truncation_degree;
            z.truncation_degree = truncation_degree;
            return z;
        };
        coefficients.drain(..lead);
        let lowest_index = lowest_index + lead as i32;
        if truncation_degree < lowest_index {
            let mut z = Self::zero();
            z.lowest_index = truncation_degree;
            z.truncation_degree = truncation_degree;
            return z;
        }
        coefficients.resize((truncation_degree - lowest_index + 1) as usize, C64::new(0.0, 0.0));
        Self {
            lowest_index,
            coefficients,
            truncation_degree,
            annulus: None,
        }
    }

    /// Same coefficients, retained window cut or zero-padded to `truncation_degree`.
    pub fn with_truncation(&self, truncation_degree: i32) -> Self {
        let mut out = Self::with_window(self.lowest_index, self.coefficients.clone(), truncation_degree);
        out.annulus = self.annulus;
        out
    }

    pub fn with_annulus(mut self, inner: f64, outer: f64) -> Self {
        self.annulus = Some(Annulus { inner, outer });
        self
    }

    pub fn annulus(&self) -> Option<Annulus> {
        self.annulus
    }

    pub fn lowest_index(&self) -> i32 {
        self.lowest_index
    }

    pub fn truncation_degree(&self) -> i32 {
        self.truncation_degree
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// Order of vanishing at 0 (negative for a pole); `None` for the zero series.
    pub fn valuation(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.lowest_index)
    }

    pub fn pole_order(&self) -> u32 {
        match self.valuation() {
            Some(v) if v < 0 => (-v) as u32,
            _ => 0,
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        self.pole_order() == 0
    }

    pub fn nonzero_terms(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != C64::new(0.0, 0.0))
            .map(move |(j, c)| (self.lowest_index + j as i32, *c))
    }

    /// Coefficient at index `p`, zero outside the retained window.
    pub fn coeff(&self, p: i32) -> C64 {
        if p < self.lowest_index || p > self.truncation_degree {
            return C64::new(0.0, 0.0);
        }
        self.coefficients[(p - self.lowest_index) as usize]
    }

    /// `Σ c_p z^p` over the retained window.
    pub fn eval(&self, z: C64) -> Result<C64> {
        if self.is_zero() {
            return Ok(C64::new(0.0, 0.0));
        }
        if self.lowest_index < 0 && z == C64::new(0.0, 0.0) {
            return Err(Error::Domain(format!(
                "evaluating a series with a pole of order {} at z = 0",
                -self.lowest_index
            )));
        }
        let last = self
            .coefficients
            .iter()
            .rposition(|c| *c != C64::new(0.0, 0.0))
            .unwrap_or(0);
        let horner = self.coefficients[..=last]
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, c| acc * z + c);
        Ok(horner * z.powi(self.lowest_index))
    }

    /// `k!` times the coefficient of `z^k`; only defined for series holomorphic at 0.
    pub fn derivative_at_zero(&self, k: i32) -> Result<C64> {
        if !self.is_holomorphic() {
            return Err(Error::Domain(
                "derivative at 0 of a series with a pole".to_string(),
            ));
        }
        if k < 0 {
            return Err(Error::Domain(format!("negative derivative order {k}")));
        }
        let factorial: f64 = (1..=k).map(f64::from).product();
        Ok(self.coeff(k) * factorial)
    }

    /// The expansion of `1/self` retained up to index `out_truncation`, so
    /// that `self * r = 1 + O(z^{out_truncation + v + 1})` for valuation `v`.
    pub fn reciprocal(&self, out_truncation: i32) -> Result<LaurentSeries> {
        if self.is_zero() {
            return Err(Error::ZeroSeries);
        }
        let v = self.lowest_index;
        if out_truncation < -v {
            return Err(Error::Domain(format!(
                "reciprocal truncated at {out_truncation} is below its leading index {}",
                -v
            )));
        }
        let len = (out_truncation + v + 1) as usize;
        let unit = &self.coefficients;
        let inv_lead = unit[0].inv();
        let mut r = Vec::with_capacity(len);
        r.push(inv_lead);
        for k in 1..len {
            let upper = k.min(unit.len() - 1);
            let acc: C64 = (1..=upper).map(|j| unit[j] * r[k - j]).sum();
            r.push(-acc * inv_lead);
        }
        Ok(Self::with_window(-v, r, out_truncation))
    }

    /// Truncated product, retained up to index `out_truncation`.
    pub fn mul(&self, other: &LaurentSeries, out_truncation: i32) -> LaurentSeries {
        if self.is_zero() || other.is_zero() {
            let mut z = Self::zero();
            z.lowest_index = out_truncation;
            z.truncation_degree = out_truncation;
            return z;
        }
        let lo = self.lowest_index + other.lowest_index;
        if out_truncation < lo {
            return Self::with_window(lo, vec![C64::new(0.0, 0.0)], out_truncation);
        }
        let len = (out_truncation - lo + 1) as usize;
        let mut out = vec![C64::new(0.0, 0.0); len];
        for (i, a) in self.coefficients.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in other.coefficients.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        Self::with_window(lo, out, out_truncation)
    }
}

/// Coefficient of `w^{-1}` in `1 / (w g(w))`, i.e. the residue of the time
/// form `dw / (w g(w))` of the one-dimensional field `w g(w) d/dw`.
///
/// When `g(0) != 0` this is `1/g(0)`; when `g(0) = 0`, `g'(0) != 0` it is
/// `-g''(0) / (2 g'(0)^2)`.
pub fn residue_of_inverse_wg(g: &LaurentSeries) -> Result<C64> {
    if g.is_zero() {
        return Err(Error::ZeroSeries);
    }
    if !g.is_holomorphic() {
        return Err(Error::Domain("g must be holomorphic at 0".to_string()));
    }
    Ok(g.reciprocal(0)?.coeff(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eval_examples() {
        let one = LaurentSeries::constant(c(1.0, 0.0));
        assert_eq!(one.eval(c(5.0, 2.0)).unwrap(), c(1.0, 0.0));
        let inv = LaurentSeries::monomial(c(1.0, 0.0), -1);
        assert!(close(inv.eval(c(2.0, 0.0)).unwrap(), c(0.5, 0.0), 1e-15));
        let f = LaurentSeries::from_terms(&[(-1, c(1.0, 0.0)), (1, c(3.0, 0.0))]);
        let oracle = 1.0 / 0.5 + 3.0 * 0.5;
        assert!(close(f.eval(c(0.5, 0.0)).unwrap(), c(oracle, 0.0), 1e-14));
    }

    #[test]
    fn eval_at_pole_is_domain_error() {
        let inv = LaurentSeries::monomial(c(1.0, 0.0), -1);
        assert!(matches!(inv.eval(c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn coeff_reads() {
        let f = LaurentSeries::from_terms(&[(-1, c(2.0, 0.0)), (0, c(5.0, 0.0))]);
        assert_eq!(f.coeff(0), c(5.0, 0.0));
        assert_eq!(f.coeff(-1), c(2.0, 0.0));
        assert_eq!(f.coeff(7), c(0.0, 0.0));
        assert_eq!(f.coeff(-9), c(0.0, 0.0));
        assert_eq!(f.pole_order(), 1);
    }

    #[test]
    fn leading_zeros_are_stripped() {
        let s = LaurentSeries::new(-2, vec![c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(s.lowest_index(), 0);
        assert!(s.is_holomorphic());
        assert_eq!(LaurentSeries::zero().valuation(), None);
    }

    #[test]
    fn derivative_examples() {
        let id = LaurentSeries::monomial(c(1.0, 0.0), 1);
        assert_eq!(id.derivative_at_zero(1).unwrap(), c(1.0, 0.0));
        let g = LaurentSeries::from_terms(&[(0, c(1.0, 0.0)), (2, c(3.0, 0.0))]);
        assert_eq!(g.derivative_at_zero(2).unwrap(), c(6.0, 0.0));
        let h = LaurentSeries::from_terms(&[(1, c(1.0, 0.0)), (3, c(-1.0, 0.0))]);
        assert_eq!(h.derivative_at_zero(0).unwrap(), c(0.0, 0.0));
        let pole = LaurentSeries::monomial(c(1.0, 0.0), -1);
        assert!(pole.derivative_at_zero(0).is_err());
    }

    #[test]
    fn reciprocal_examples() {
        let g = LaurentSeries::from_terms(&[(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]);
        let r = g.reciprocal(3).unwrap();
        for (p, want) in [(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)] {
            assert_eq!(r.coeff(p), c(want, 0.0));
        }
        assert_eq!(r.truncation_degree(), 3);

        let z = LaurentSeries::monomial(c(1.0, 0.0), 1);
        let r = z.reciprocal(2).unwrap();
        assert_eq!(r.lowest_index(), -1);
        assert_eq!(r.coeff(-1), c(1.0, 0.0));
        assert_eq!(r.coeff(0), c(0.0, 0.0));

        // z + z^2/2 -> 1/z - 1/2 + z/4; oracle: the product is 1 + O(z^2).
        let g = LaurentSeries::from_terms(&[(1, c(1.0, 0.0)), (2, c(0.5, 0.0))]);
        let r = g.reciprocal(1).unwrap();
        assert_eq!(r.coeff(-1), c(1.0, 0.0));
        assert_eq!(r.coeff(0), c(-0.5, 0.0));
        assert_eq!(r.coeff(1), c(0.25, 0.0));
        let prod = g.mul(&r, 1);
        assert_eq!(prod.coeff(0), c(1.0, 0.0));
        assert_eq!(prod.coeff(1), c(0.0, 0.0));
    }

    #[test]
    fn reciprocal_of_zero_fails() {
        assert!(matches!(LaurentSeries::zero().reciprocal(3), Err(Error::ZeroSeries)));
    }

    #[test]
    fn residue_examples() {
        let one = LaurentSeries::constant(c(1.0, 0.0));
        assert_eq!(residue_of_inverse_wg(&one).unwrap(), c(1.0, 0.0));
        let z = LaurentSeries::monomial(c(1.0, 0.0), 1);
        assert_eq!(residue_of_inverse_wg(&z).unwrap(), c(0.0, 0.0));
        let g = LaurentSeries::from_terms(&[(1, c(1.0, 0.0)), (2, c(1.0, 0.0))]);
        // oracle: reciprocal of w*g, then the w^-1 coefficient
        let wg = g.mul(&LaurentSeries::monomial(c(1.0, 0.0), 1), 10);
        let oracle = wg.reciprocal(4).unwrap().coeff(-1);
        let got = residue_of_inverse_wg(&g).unwrap();
        assert!(close(got, oracle, 1e-15));
        assert!(close(got, c(-1.0, 0.0), 1e-15));
        assert!(residue_of_inverse_wg(&LaurentSeries::zero()).is_err());
    }

    #[test]
    fn triples_round_trip() {
        let f = LaurentSeries::from_triples(&[(-1, 2.0, 0.5), (0, 5.0, 0.0), (3, 0.0, -1.0)]);
        assert_eq!(LaurentSeries::from_triples(&f.to_triples()), f);
    }

    fn arb_series() -> impl Strategy<Value = LaurentSeries> {
        (-3i32..3, prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6), 0.3f64..1.0, 0.0f64..6.3)
            .prop_map(|(lo, rest, lead_mod, lead_arg)| {
                let mut coefficients = vec![C64::from_polar(lead_mod, lead_arg)];
                coefficients.extend(rest.into_iter().map(|(re, im)| C64::new(re, im)));
                LaurentSeries::new(lo, coefficients)
            })
    }

    proptest! {
        #[test]
        fn reciprocal_product_is_one(s in arb_series(), n in 4i32..20, r in 0.1f64..0.5, arg in 0.0f64..6.3) {
            let r_series = s.reciprocal(n).unwrap();
            let prod = s.mul(&r_series, n + s.lowest_index());
            let z = C64::from_polar(r, arg);
            let v = prod.eval(z).unwrap();
            prop_assert!((v - C64::new(1.0, 0.0)).norm() <= 1e-12, "got {v}");
        }

        #[test]
        fn derivative_is_factorial_times_coeff(s in arb_series(), k in 0i32..6) {
            let s = if s.is_holomorphic() { s } else { s.mul(&LaurentSeries::monomial(C64::new(1.0, 0.0), 3), 40) };
            let factorial: f64 = (1..=k).map(f64::from).product();
            prop_assert_eq!(s.derivative_at_zero(k).unwrap(), s.coeff(k) * factorial);
        }

        #[test]
        fn residue_matches_closed_forms(g0 in -1.0f64..1.0, g1 in 0.2f64..2.0, g2 in -2.0f64..2.0, g3 in -2.0f64..2.0) {
            let unit = LaurentSeries::from_terms(&[(0, C64::new(g0 + 1.5, 0.0)), (1, C64::new(g1, 0.0)), (2, C64::new(g2, 0.0))]);
            let res = residue_of_inverse_wg(&unit).unwrap();
            prop_assert!((res - unit.eval(C64::new(0.0, 0.0)).unwrap().inv()).norm() <= 1e-14);

            let vanishing = LaurentSeries::from_terms(&[(1, C64::new(g1, 0.0)), (2, C64::new(g2, 0.0)), (3, C64::new(g3, 0.0))]);
            let d1 = vanishing.derivative_at_zero(1).unwrap();
            let d2 = vanishing.derivative_at_zero(2).unwrap();
            let closed = -d2 / (d1 * d1 * 2.0);
            let res = residue_of_inverse_wg(&vanishing).unwrap();
            prop_assert!((res - closed).norm() <= 1e-12 * (1.0 + closed.norm()));
        }
    }
}
