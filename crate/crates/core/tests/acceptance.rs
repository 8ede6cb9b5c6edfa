//! One test per acceptance criterion at its pinned tolerance.

use palais_core::verify::*;

fn check(f: CriterionFn) {
    let r = f(&VerifySettings::default());
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_sigma1_identity() {
    check(criterion_01);
}

#[test]
fn criterion_02_sigma2_translation() {
    check(criterion_02);
}

#[test]
fn criterion_03_sy_monodromy() {
    check(criterion_03);
}

#[test]
fn criterion_04_holonomy_of_d() {
    check(criterion_04);
}

#[test]
fn criterion_05_classifier_truth_table() {
    check(criterion_05);
}

#[test]
fn criterion_06_commutation() {
    check(criterion_06);
}

#[test]
fn criterion_07_first_integrals() {
    check(criterion_07);
}

#[test]
fn criterion_08_projective_line_example() {
    check(criterion_08);
}

#[test]
fn criterion_09_merging_leaves() {
    check(criterion_09);
}

#[test]
fn criterion_10_singular_chart_lifts() {
    check(criterion_10);
}

#[test]
fn criterion_11_local_action_law() {
    check(criterion_11);
}

#[test]
fn criterion_12_integrator_order() {
    check(criterion_12);
}

#[test]
fn summary() {
    let results = run_all(&VerifySettings::default());
    for r in &results {
        println!("{}", r.line());
    }
    assert_eq!(results.len(), 12);
    assert!(results.iter().all(|r| r.passed));
}
