use std::f64::consts::{PI, TAU};

use palais_core::fields::PairParams;
use palais_core::leafspace::*;
use palais_core::series::LaurentSeries;
use palais_core::C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pair(a: u32, b: u32, m: u32, n: u32, f: LaurentSeries, g: LaurentSeries) -> PairParams {
    PairParams::checked(a, b, m, n, f, g).unwrap()
}

fn one() -> LaurentSeries {
    LaurentSeries::constant(c(1.0, 0.0))
}

/// Hand transcription of the table, indexed by (a = 0, b = 0, g(0) = 0).
fn expected(stratum: Stratum, a_zero: bool, b_zero: bool, g_zero: bool) -> &'static str {
    match (stratum, a_zero, b_zero, g_zero) {
        (Stratum::S0, ..) => "point",
        (Stratum::Sy, true, _, _) => "plane",
        (Stratum::Sy, false, _, true) => "disc",
        (Stratum::Sy, false, _, false) => "cylinder",
        (Stratum::Sx, _, true, _) => "plane",
        (Stratum::Sx, _, false, true) => "disc",
        (Stratum::Sx, _, false, false) => "cylinder",
        (Stratum::Sxy, ..) => "quotient",
    }
}

fn kind(model: &StratumModel) -> &'static str {
    match model {
        StratumModel::Point => "point",
        StratumModel::Plane => "plane",
        StratumModel::PuncturedDisc => "disc",
        StratumModel::Cylinder { .. } => "cylinder",
        StratumModel::Quotient { .. } => "quotient",
    }
}

#[test]
fn truth_table_is_exhaustive() {
    for (a, b) in [(0, 1), (1, 0), (2, 1), (3, 2)] {
        for g_at_zero in [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)] {
            for f0 in [c(0.0, 0.0), c(0.5, -1.0)] {
                let input = Table1Input { a, b, m: 1, g_at_zero, f0, g0: c(0.3, 0.0) };
                for stratum in Stratum::ALL {
                    let (model, _) = table1_model(stratum, &input);
                    assert_eq!(kind(&model), expected(stratum, a == 0, b == 0, g_at_zero == c(0.0, 0.0)));
                }
            }
        }
    }
}

#[test]
fn basic_pair_rows() {
    let p = pair(2, 1, 1, 1, LaurentSeries::zero(), one());
    let r = table1_report(&p, &LeafSpaceOptions::default()).unwrap();
    assert!(r.all_verified(), "{}", r.render_table());
    assert_eq!(r.entry(Stratum::S0).model, StratumModel::Point);
    assert_eq!(r.entry(Stratum::Sy).model, StratumModel::Cylinder { shift: c(0.0, PI) });
    assert_eq!(r.entry(Stratum::Sx).model, StratumModel::Cylinder { shift: c(0.0, -TAU) });
    let StratumModel::Quotient { shift_t, shift_s } = r.entry(Stratum::Sxy).model else { panic!() };
    assert!(shift_t.norm() < 1e-15 && (shift_s - c(0.0, TAU)).norm() < 1e-14);
    for s in [Stratum::Sx, Stratum::Sy, Stratum::Sxy] {
        assert!(r.entry(s).agreement_error.unwrap() <= 1e-8);
    }
    assert_eq!(r.rescale, Some(c(1.0, 0.0)));
    assert!(r.hausdorff);
}

#[test]
fn vanishing_g_gives_punctured_discs() {
    let p = pair(2, 1, 1, 1, LaurentSeries::from_terms(&[(1, c(0.2, 0.0))]), LaurentSeries::monomial(c(1.0, 0.0), 1));
    let r = table1_report(&p, &LeafSpaceOptions::default()).unwrap();
    assert_eq!(r.entry(Stratum::Sy).model, StratumModel::PuncturedDisc);
    assert_eq!(r.entry(Stratum::Sx).model, StratumModel::PuncturedDisc);
    assert!(r.rescale.is_none());
    assert!(r.all_verified(), "{}", r.render_table());
}

#[test]
fn a_zero_gives_a_plane_with_first_integral() {
    let f = LaurentSeries::from_terms(&[(0, c(0.4, 0.3)), (1, c(0.1, 0.0))]);
    let g = LaurentSeries::from_terms(&[(0, c(1.5, 0.0)), (1, c(0.2, 0.1))]);
    let p = pair(0, 1, 2, 1, f, g);
    let r = table1_report(&p, &LeafSpaceOptions::default()).unwrap();
    let sy = r.entry(Stratum::Sy);
    assert_eq!(sy.model, StratumModel::Plane);
    assert!(sy.checks.iter().all(|c| c.passed), "{:?}", sy.checks);
    assert!(matches!(r.entry(Stratum::Sx).model, StratumModel::Cylinder { .. }));
    assert!(r.all_verified(), "{}", r.render_table());
}

#[test]
fn b_zero_gives_a_plane_with_first_integral() {
    let f = LaurentSeries::from_terms(&[(0, c(-0.3, 0.2))]);
    let p = pair(1, 0, 1, 2, f, LaurentSeries::constant(c(0.5, 0.5)));
    let r = table1_report(&p, &LeafSpaceOptions::default()).unwrap();
    assert_eq!(r.entry(Stratum::Sx).model, StratumModel::Plane);
    assert!(r.all_verified(), "{}", r.render_table());
}

#[test]
fn poles_and_complex_g_verify() {
    let f = LaurentSeries::from_terms(&[(-1, c(0.3, -0.1)), (0, c(1.0, 2.0)), (2, c(0.2, 0.0))]);
    let g = LaurentSeries::from_terms(&[(0, c(1.0, 1.0)), (1, c(0.3, 0.0)), (2, c(0.0, 0.1))]);
    let p = pair(3, 2, 1, 1, f, g);
    let r = table1_report(&p, &LeafSpaceOptions::default()).unwrap();
    assert!(r.all_verified(), "{}", r.render_table());
    let json = r.to_json();
    assert_eq!(json["strata"].as_array().unwrap().len(), 4);
}

#[test]
fn uncovered_combination_is_flagged() {
    // a + n p = 0 at p = -1 puts f_{-1} y into P(0, y)
    let f = LaurentSeries::from_terms(&[(-1, c(0.5, 0.0)), (1, c(0.1, 0.0))]);
    let p = PairParams::new(1, 2, 1, 1, f, one());
    if !p.validate().is_valid() {
        return;
    }
    let r = table1_report(&p, &LeafSpaceOptions::default()).unwrap();
    let sy = r.entry(Stratum::Sy);
    assert!(sy.unlisted.is_some());
    assert!(!sy.verified);
}

#[test]
fn ellipse_first_integral_is_conserved() {
    let r = prop26_witness(0.5, &[0.1, 0.05, 0.01], 1e-12).unwrap();
    assert!(r.u1.max_h_drift <= 1e-10);
    for l in &r.u2 {
        assert!(l.max_h_drift <= 1e-10);
        assert!(l.trajectory.to_csv().starts_with("k,re_0,im_0,re_1,im_1,re_2,im_2,local_error"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mu_is_monotone_in_log_y(s_re in -1.0f64..1.0, s_im in -1.0f64..1.0, r1 in 0.01f64..0.9, r2 in 0.01f64..0.9, th in 0.0f64..6.0) {
        prop_assume!((r1 - r2).abs() > 1e-6);
        let p = pair(2, 1, 1, 1, LaurentSeries::zero(), one());
        let s = c(s_re, s_im);
        let pt = |r: f64| [c(0.0, 0.0), s, c(0.0, 0.0), C64::from_polar(r, th)];
        let a = separation_coordinate_sy(&p, pt(r1)).unwrap();
        let b = separation_coordinate_sy(&p, pt(r2)).unwrap();
        prop_assert_eq!(r1 < r2, a.mu > b.mu);
        prop_assert!(a.nu >= 0.0 && a.nu < a.period);
    }

    #[test]
    fn cp1_map_is_a_first_integral(t_re in -1.0f64..1.0, t_im in -1.0f64..1.0, x_re in -1.0f64..1.0, x_im in -1.0f64..1.0) {
        let d = cp1_leaf_map_check(&[(c(t_re, t_im), c(x_re, x_im))], 0.4, 1e-12).unwrap();
        prop_assert!(d.max_chordal <= 1e-9);
    }
}
