//! The acceptance gate: each criterion prints one pass/fail line and
//! asserts its own verdict.

use teichkit::config::Config;
use teichkit::suite::{run_one, CRITERIA};

fn run(id: usize) {
    let cfg = Config::default();
    let outcome = run_one(id, &cfg);
    println!(
        "{} criterion {:>2} ({}): {} [{:.1}s]",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.id,
        CRITERIA[id - 1].1,
        outcome.details,
        outcome.seconds
    );
    assert!(outcome.passed, "criterion {id} failed: {}", outcome.details);
}

#[test]
fn criterion_01_constant_coefficient_oracle() {
    run(1);
}

#[test]
fn criterion_02_radial_stretch_triviality() {
    run(2);
}

#[test]
fn criterion_03_pointwise_translation_inequality() {
    run(3);
}

#[test]
fn criterion_04_integral_schwarzian_bound() {
    run(4);
}

#[test]
fn criterion_05_section_round_trip() {
    run(5);
}

#[test]
fn criterion_06_pullback_isometry() {
    run(6);
}

#[test]
fn criterion_07_coset_inclusion_evidence() {
    run(7);
}

#[test]
fn criterion_08_distortion_exponents() {
    run(8);
}

#[test]
fn criterion_09_germ_linearization() {
    run(9);
}

#[test]
fn criterion_10_barycentric_naturality() {
    run(10);
}
