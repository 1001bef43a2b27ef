//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use sordering::verify::{run_check, Mode};

fn criterion(n: usize) {
    let c = run_check(n - 1, Mode::Full);
    let verdict = if c.passed { "PASS" } else { "FAIL" };
    println!(
        "criterion {n:>2} {verdict} {} measured={:.3e} tolerance={:.1e}",
        c.check_id, c.measured_error, c.tolerance
    );
    for d in &c.detail {
        println!("    {d}");
    }
    assert!(c.passed, "criterion {n} ({}) failed: {:?}", c.check_id, c.detail);
}

#[test]
fn criterion_01_ordering_anchors() {
    criterion(1);
}

#[test]
fn criterion_02_exp_number_realization() {
    criterion(2);
}

#[test]
fn criterion_03_coherent_symbol() {
    criterion(3);
}

#[test]
fn criterion_04_antinormal_kernel() {
    criterion(4);
}

#[test]
fn criterion_05_fourier_form() {
    criterion(5);
}

#[test]
fn criterion_06_completeness() {
    criterion(6);
}

#[test]
fn criterion_07_symbol_duality() {
    criterion(7);
}

#[test]
fn criterion_08_coherent_element_expansion() {
    criterion(8);
}

#[test]
fn criterion_09_mehta_p() {
    criterion(9);
}

#[test]
fn criterion_10_weyl_monomials() {
    criterion(10);
}

#[test]
fn criterion_11_trace_orthogonality() {
    criterion(11);
}

#[test]
fn criterion_12_state_grammar() {
    criterion(12);
}
