//! The acceptance battery: one test per criterion. Each prints its
//! pass/fail line (visible with `--nocapture` or on failure) and asserts
//! the verdict.

use injectlab::harness::accept::{self, CriterionOutcome};
use injectlab::Result;

fn run(criterion: fn() -> Result<CriterionOutcome>) {
    let outcome = criterion().expect("criterion machinery must not error");
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn c01_mistake_ceiling() {
    run(accept::criterion1);
}

#[test]
fn c02_rectangle_score_goodness() {
    run(accept::criterion2);
}

#[test]
fn c03_segment_score_goodness() {
    run(accept::criterion3);
}

#[test]
fn c04_halfspace_certificates() {
    run(accept::criterion4);
}

#[test]
fn c05_engine_enumeration_agreement() {
    run(accept::criterion5);
}

#[test]
fn c06_hard_tree_lower_bound() {
    run(accept::criterion6);
}

#[test]
fn c07_rectangle_scaling() {
    run(accept::criterion7);
}

#[test]
fn c08_halfspace_scaling() {
    run(accept::criterion8);
}

#[test]
fn c09_abstention_ceiling() {
    run(accept::criterion9);
}

#[test]
fn c10_attackability_ceiling() {
    run(accept::criterion10);
}
