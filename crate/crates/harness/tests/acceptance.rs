//! Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

use std::io::Write;

use oscavg::criteria::evaluate;

fn check(id: usize) {
    let outcome = evaluate(id);
    let _ = writeln!(std::io::stdout().lock(), "{outcome}");
    assert!(outcome.passed, "{outcome}");
}

#[test]
fn c01_constant_forcing() {
    check(1);
}

#[test]
fn c02_decomposition() {
    check(2);
}

#[test]
fn c03_steady_table() {
    check(3);
}

#[test]
fn c04_sink() {
    check(4);
}

#[test]
fn c05_threshold() {
    check(5);
}

#[test]
fn c06_basin() {
    check(6);
}

#[test]
fn c07_closed_form() {
    check(7);
}

#[test]
fn c08_chain() {
    check(8);
}

#[test]
fn c09_pde_periodic() {
    check(9);
}

#[test]
fn c10_pde_quasiperiodic() {
    check(10);
}

#[test]
fn c11_convergence() {
    check(11);
}
