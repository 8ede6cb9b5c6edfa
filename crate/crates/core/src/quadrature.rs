//! Quadrature for complex-valued integrands on real intervals: adaptive
//! Gauss-Kronrod 7/15 and fixed composite Gauss-Legendre rules.

use crate::error::{Error, Result};
use crate::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SUBDIVISIONS: usize = 2000;

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += sum * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`; every accepted
/// subinterval meets the absolute tolerance scaled by its share of `[a, b]`.
pub fn integrate_adaptive<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<C64> {
    let mut pending = vec![(a, b)];
    let mut total = C64::new(0.0, 0.0);
    let width = (b - a).abs();
    let mut splits = 0;
    while let Some((lo, hi)) = pending.pop() {
        let (value, err) = gk15(&f, lo, hi);
        if !value.is_finite() {
            return Err(Error::Pole(format!("integrand not finite on [{lo}, {hi}]")));
        }
        let share = abs_tol * ((hi - lo).abs() / width).max(1e-3);
        if err <= share || (hi - lo).abs() <= 1e-12 * width.max(1.0) {
            total += value;
            continue;
        }
        splits += 1;
        if splits > MAX_SUBDIVISIONS {
            return Err(Error::NotConverged(format!(
                "adaptive quadrature exceeded {MAX_SUBDIVISIONS} subdivisions"
            )));
        }
        let mid = 0.5 * (lo + hi);
        pending.push((lo, mid));
        pending.push((mid, hi));
    }
    Ok(total)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule: `panels` equal panels of `nodes` points each.
#[derive(Debug, Clone)]
pub struct CompositeGaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl CompositeGaussLegendre {
    pub fn new(nodes: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(nodes);
        Self { nodes, weights, panels: panels.max(1) }
    }

    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F, a: f64, b: f64) -> C64 {
        let width = (b - a) / self.panels as f64;
        (0..self.panels)
            .map(|p| {
                let lo = a + p as f64 * width;
                let center = lo + 0.5 * width;
                let sum: C64 = self
                    .nodes
                    .iter()
                    .zip(&self.weights)
                    .map(|(x, w)| f(center + 0.5 * width * x) * *w)
                    .sum();
                sum * (0.5 * width)
            })
            .sum()
    }
}

impl Default for CompositeGaussLegendre {
    /// 64-node rule on four panels.
    fn default() -> Self {
        Self::new(64, 4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(deg: i32) -> impl Fn(f64) -> C64 {
        move |x| C64::new(x.powi(deg), -0.5 * x.powi(deg))
    }

    #[test]
    fn kronrod_rule_is_exact_through_degree_22() {
        for deg in 0..=22 {
            let (v, _) = gk15(&poly(deg), 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - C64::new(exact, -0.5 * exact)).norm() < 1e-15, "degree {deg}");
        }
    }

    #[test]
    fn gauss_rule_is_exact_through_degree_13() {
        for deg in 0..=13 {
            let (_, err) = gk15(&poly(deg), -1.0, 1.0);
            assert!(err < 1e-14, "degree {deg}: {err}");
        }
    }

    #[test]
    fn legendre_nodes() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        let (x, w) = gauss_legendre(5);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m4 - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn unit_circle_integrals() {
        let tau = std::f64::consts::TAU;
        // ∮ dw/w over the unit circle, parametrized on [0, 1]
        let dw_over_w = |_k: f64| C64::new(0.0, tau);
        let v = integrate_adaptive(dw_over_w, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - C64::new(0.0, tau)).norm() < 1e-13);
        let dw_over_w2 = |k: f64| {
            let w = C64::from_polar(1.0, tau * k);
            C64::new(0.0, tau) * w / (w * w)
        };
        assert!(integrate_adaptive(dw_over_w2, 0.0, 1.0, 1e-12).unwrap().norm() < 1e-12);
        assert!(CompositeGaussLegendre::default().integrate(dw_over_w2, 0.0, 1.0).norm() < 1e-13);
    }

    #[test]
    fn adaptive_handles_sharp_peak() {
        let f = |x: f64| C64::new(1.0 / (1e-4 + (x - 0.3).powi(2)), 0.0);
        let exact = (0.7f64 / 1e-2).atan() / 1e-2 + (0.3f64 / 1e-2).atan() / 1e-2;
        let v = integrate_adaptive(f, 0.0, 1.0, 1e-10).unwrap();
        assert!((v.re - exact).abs() < 1e-8, "{} vs {exact}", v.re);
    }
}
