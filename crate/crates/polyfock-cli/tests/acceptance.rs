//! Acceptance gate: one test per headline property, each printing a
//! single "ACCEPTANCE n <label>: PASS/FAIL" verdict line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines for
//! passing tests too.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyfock::basis::SpaceTag;
use polyfock::operators::weyl_matrix;
use polyfock_cli::checks::{run_check, CheckConfig, CHECKS};
use polyfock_cli::report::Report;

fn verdict(n: u32, label: &str, ok: bool, detail: &str) {
    let s = if ok { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {n} {label}: {s}");
    assert!(ok, "criterion {n} ({label}) failed: {detail}");
}

fn run(name: &str) -> Result<Report, String> {
    run_check(name, &CheckConfig::default()).map_err(|e| e.to_string())
}

/// True when every named metric exists in the report and passes.
fn metrics_pass(report: &Report, names: &[&str]) -> bool {
    names.iter().all(|want| {
        report
            .metrics
            .iter()
            .any(|m| m.name == *want && m.pass)
    })
}

fn summary(report: &Result<Report, String>) -> String {
    match report {
        Ok(r) => r
            .metrics
            .iter()
            .map(|m| format!("{}={:.3e}{}", m.name, m.value, if m.pass { "" } else { " (FAIL)" }))
            .collect::<Vec<_>>()
            .join(", "),
        Err(e) => format!("check errored: {e}"),
    }
}

#[test]
fn acceptance_01_basis_gram_identity() {
    let report = run("pairing");
    let ok = report
        .as_ref()
        .map(|r| metrics_pass(r, &["gram_identity_dev"]))
        .unwrap_or(false);
    verdict(1, "basis Gram identity", ok, &summary(&report));
}

#[test]
fn acceptance_02_kernel_reconstruction() {
    let report = run("pairing");
    let ok = report
        .as_ref()
        .map(|r| metrics_pass(r, &["kernel_reconstruction_dev", "pairing_closed_form_dev"]))
        .unwrap_or(false);
    verdict(2, "kernel reconstruction closed form", ok, &summary(&report));
}

#[test]
fn acceptance_03_shift_composition_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let lim = 1.5 / std::f64::consts::SQRT_2;
    let pairs: Vec<(Complex64, Complex64)> = (0..5)
        .map(|_| {
            (
                Complex64::new(rng.random_range(-lim..lim), rng.random_range(-lim..lim)),
                Complex64::new(rng.random_range(-lim..lim), rng.random_range(-lim..lim)),
            )
        })
        .collect();

    let mut worst: f64 = 0.0;
    for k in [1, 2, 3] {
        let space = SpaceTag::true_poly(k, 64).expect("space");
        for &(z, w) in &pairs {
            let left = weyl_matrix(z, space)
                .compose(&weyl_matrix(w, space))
                .expect("compose");
            let sigma = 2.0 * (z * w.conj()).im;
            let right =
                weyl_matrix(z + w, space).scale(Complex64::from_polar(1.0, -sigma / 2.0));
            let gap = left
                .sub(&right)
                .expect("sub")
                .restrict(32)
                .expect("restrict")
                .operator_norm();
            worst = worst.max(gap);
        }
    }
    verdict(
        3,
        "shift composition phase",
        worst <= 1e-6,
        &format!("worst inner-block gap {worst:.3e}"),
    );
}

#[test]
fn acceptance_04_rank_one_convolution_closed_forms() {
    let report = run("prop-identities");
    let ok = report.as_ref().map(|r| r.overall_pass).unwrap_or(false);
    verdict(4, "rank-one convolution closed forms", ok, &summary(&report));
}

#[test]
fn acceptance_05_vanishing_toeplitz_witness() {
    let report = run("vanishing-toeplitz");
    let ok = report.as_ref().map(|r| r.overall_pass).unwrap_or(false);
    verdict(5, "vanishing Toeplitz witness", ok, &summary(&report));
}

#[test]
fn acceptance_06_toeplitz_character_shift_identity() {
    let report = run("toeplitz-character");
    let ok = report.as_ref().map(|r| r.overall_pass).unwrap_or(false);
    verdict(6, "Toeplitz character shift identity", ok, &summary(&report));
}

#[test]
fn acceptance_07_berezin_zero_circles() {
    let report = run("berezin-kernel");
    let ok = report.as_ref().map(|r| r.overall_pass).unwrap_or(false);
    verdict(7, "Berezin transform zero circles", ok, &summary(&report));
}

#[test]
fn acceptance_08_heat_approximation_ladder() {
    let report = run("heat-approximation");
    let ok = report.as_ref().map(|r| r.overall_pass).unwrap_or(false);
    verdict(8, "heat approximation ladder", ok, &summary(&report));
}

#[test]
fn acceptance_09_kernel_tails_and_smoothed_decay() {
    let report = run("localization");
    let wanted = [
        "tail_shape_excess_n1",
        "tail_shape_excess_n2",
        "tail_shape_excess_n3",
        "smoothed_rate_t0.5",
        "smoothed_rate_t1",
        "smoothed_rate_t2",
    ];
    let ok = report
        .as_ref()
        .map(|r| r.overall_pass && metrics_pass(r, &wanted))
        .unwrap_or(false);
    verdict(9, "kernel tails and smoothed decay", ok, &summary(&report));
}

#[test]
fn acceptance_10_projector_convolution_chain() {
    let report = run("berezin-toeplitz-chain");
    let ok = report.as_ref().map(|r| r.overall_pass).unwrap_or(false);
    verdict(10, "projector convolution chain", ok, &summary(&report));
}

#[test]
fn acceptance_11_block_partition_diagnostics() {
    let report = run("partition-demo");
    let ok = report.as_ref().map(|r| r.overall_pass).unwrap_or(false);
    verdict(11, "block partition diagnostics", ok, &summary(&report));
}

#[test]
fn acceptance_12_perturbation_controls() {
    let mut not_flipped: Vec<&str> = Vec::new();
    for (name, _, _) in CHECKS {
        let cfg = CheckConfig {
            perturb: 1e-2,
            ..CheckConfig::default()
        };
        let flipped = match run_check(name, &cfg) {
            Ok(r) => !r.overall_pass,
            Err(_) => false,
        };
        if !flipped {
            not_flipped.push(name);
        }
    }
    verdict(
        12,
        "perturbation controls",
        not_flipped.is_empty(),
        &format!("controls that did not flip to FAIL: {not_flipped:?}"),
    );
}
