//! Acceptance suite: one test per criterion, each running the corresponding
//! self-checks at their pinned tolerances and printing a pass/fail line.
//!
//! Run with `cargo test -p polyhardy --test acceptance` (add
//! `-- --nocapture` to see the lines for passing criteria too).

use polyhardy::verify::{run_suite, Check, Suite};

const SEED: u64 = 7;

fn criterion(number: usize, label: &str, checks: Vec<Check>) {
    let mut all_pass = true;
    for check in &checks {
        let status = if check.pass() { "PASS" } else { "FAIL" };
        println!(
            "criterion {number:02} {status}  {label}: {}  measured={:.3e} tolerance={:.3e}",
            check.name, check.measured, check.tolerance
        );
        all_pass &= check.pass();
    }
    assert!(all_pass, "criterion {number} ({label}) failed");
}

fn named(checks: &[Check], needle: &str) -> Vec<Check> {
    let picked: Vec<Check> = checks
        .iter()
        .filter(|c| c.name.contains(needle))
        .cloned()
        .collect();
    assert!(!picked.is_empty(), "no check matches {needle:?}");
    picked
}

#[test]
fn criterion_01_orthonormality_and_addition_theorem() {
    criterion(
        1,
        "sphere-rule Gram identity and zonal sums",
        run_suite(Suite::Sphere, SEED),
    );
}

#[test]
fn criterion_02_basis_orthonormality_on_the_boundary() {
    criterion(
        2,
        "boundary Gram of z^(k+2j) Y_{k,l}",
        run_suite(Suite::Basis, SEED),
    );
}

#[test]
fn criterion_03_kernel_duality() {
    criterion(
        3,
        "closed forms vs truncated series",
        run_suite(Suite::Kernels, SEED),
    );
}

#[test]
fn criterion_04_reproducing_property() {
    criterion(
        4,
        "boundary integral recovers interior values",
        run_suite(Suite::Reproduce, SEED),
    );
}

#[test]
fn criterion_05_gamma_oracle() {
    let checks = named(&run_suite(Suite::Bvp, SEED), "gamma-oracle");
    criterion(5, "exact ladder coefficients", checks);
}

#[test]
fn criterion_06_bvp_roundtrip() {
    let checks = named(&run_suite(Suite::Bvp, SEED), "dirichlet-roundtrip");
    criterion(6, "forward then solve is the identity", checks);
}

#[test]
fn criterion_07_interpolation_exactness_and_bound() {
    criterion(
        7,
        "interpolation reproduction and error majorant",
        run_suite(Suite::Interp, SEED),
    );
}

#[test]
fn criterion_08_cubature_exactness() {
    let checks = run_suite(Suite::Cubature, SEED);
    let mut picked = named(&checks, "cubature-exactness");
    picked.extend(named(&checks, "lebesgue-volume"));
    criterion(8, "exactness on the ladder span and the ball volume", picked);
}

#[test]
fn criterion_09_cubature_error_bound() {
    let checks = named(&run_suite(Suite::Cubature, SEED), "error-bound-domination");
    criterion(9, "certified majorant dominates the true error", checks);
}

#[test]
fn criterion_10_maximum_principle() {
    let checks = named(&run_suite(Suite::Hardy, SEED), "max-principle");
    criterion(10, "sampled sup stays under (1-q)^-d", checks);
}

#[test]
fn criterion_11_norm_consistency() {
    let checks = named(&run_suite(Suite::Hardy, SEED), "norm-via");
    criterion(11, "coefficient norm vs boundary quadrature", checks);
}
