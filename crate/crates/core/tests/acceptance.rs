//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line (visible with --nocapture). The bounds are the full defaults, so
//! this target performs scans up to 1e7 and takes a few minutes in total.

use indexmap_core::acceptance::{self, AcceptanceConfig};

fn run(f: fn(&AcceptanceConfig) -> acceptance::CriterionResult) {
    let cfg = AcceptanceConfig::default();
    let result = f(&cfg);
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

#[test]
fn criterion_01_surjectivity_witnesses() {
    run(acceptance::criterion_1);
}

#[test]
fn criterion_02_exceptional_set_soundness() {
    run(acceptance::criterion_2);
}

#[test]
fn criterion_03_exceptional_set_completeness() {
    run(acceptance::criterion_3);
}

#[test]
fn criterion_04_minus_hundred_descriptor() {
    run(acceptance::criterion_4);
}

#[test]
fn criterion_05_gaussian_pattern() {
    run(acceptance::criterion_5);
}

#[test]
fn criterion_06_density_convergence() {
    run(acceptance::criterion_6);
}

#[test]
fn criterion_07_zero_density_iff_empty() {
    run(acceptance::criterion_7);
}

#[test]
fn criterion_08_solver_differential() {
    run(acceptance::criterion_8);
}

#[test]
fn criterion_09_sum_rule() {
    run(acceptance::criterion_9);
}

#[test]
fn criterion_10_kummer_oracle() {
    run(acceptance::criterion_10);
}

#[test]
fn criterion_11_separation_suite() {
    run(acceptance::criterion_11);
}
