//! The registered experiment checks.
//!
//! Each check builds a family of operators, measures scalar metrics against
//! stated tolerances, and returns a [`Report`]. Checks are pure functions of
//! the configuration, so a rerun with the same flags reproduces the same
//! numbers bit for bit (timing aside).
//!
//! The `perturb` knob injects a relative error into one closed-form
//! reference per check. It keeps the failure path honest: perturbing by
//! 1e-2 must flip the check to FAIL, and the test suite asserts that for
//! every registered check.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyfock::basis::{normalized_kernel_coeffs, SpaceTag};
use polyfock::localization::{heat_smoothed_decay, kernel_tail_norm, weak_localization_integral};
use polyfock::operators::{
    assemble_blocks, extract_block, rank_one, toeplitz_matrix, weyl_matrix, SymbolSpec,
    ToeplitzBuilder, TruncatedOperator,
};
use polyfock::qha::{
    berezin, convolve_fn_op, convolve_op_op, fourier_weyl, generalized_berezin, heat_rule,
    heat_smooth, lebesgue_rule_for, symplectic_fourier, DecayClass, PhaseFunction,
};
use polyfock::regularity::{
    default_zero_tol, infty_regularity_scan, m_regularity_scan, regularity_scan,
    respects_partition, sigma_set, tile_block, toeplitz_kernel_witness, Partition, PolarGrid,
};
use polyfock::special::{build_gaussian_quadrature, build_lebesgue_quadrature, laguerre};
use polyfock::FockError;

use crate::report::{param_f64, param_str, param_u64, Metric, Report};

/// Errors a check can surface, split by exit code: `Config` for caller
/// mistakes (exit 2), `Quadrature` for rules that cannot resolve the
/// requested integrand (exit 3). Metric failures are not errors; they stay
/// in the report and drive exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Quadrature(String),
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::QuadratureInsufficient(msg) => CliError::Quadrature(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Knobs shared by all checks. Every field has a default; command-line
/// flags override. Checks record the values they actually used in the
/// report's `params` map.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Restrict a component sweep to one component (1-based).
    pub k: Option<usize>,
    /// Component count for the block checks.
    pub n: Option<usize>,
    /// Basis truncation per component.
    pub trunc: usize,
    /// Distinguished phase-space point for checks that take one.
    pub xi: Option<Complex64>,
    /// Time parameter for heat kernels and Gaussian symbols.
    pub t: Option<f64>,
    /// Radial order of the Gaussian-measure quadrature rule.
    pub grid_radial: usize,
    /// Angular order of the Gaussian-measure quadrature rule.
    pub grid_angular: usize,
    /// Per-axis order of Lebesgue-measure rules.
    pub lebesgue_order: usize,
    /// Overrides the check's headline tolerance.
    pub tol: Option<f64>,
    /// Seed for the jittered sample points.
    pub seed: u64,
    /// Relative error injected into one reference quantity per check.
    pub perturb: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            k: None,
            n: None,
            trunc: 64,
            xi: None,
            t: None,
            grid_radial: 80,
            grid_angular: 160,
            lebesgue_order: 40,
            tol: None,
            seed: 7,
            perturb: 0.0,
        }
    }
}

pub type CheckFn = fn(&CheckConfig) -> Result<Report, CliError>;

/// Registry of all checks: name, one-line description, runner.
pub const CHECKS: &[(&str, &str, CheckFn)] = &[
    (
        "pairing",
        "orthonormality of the component bases and the closed form of the kernel pairing",
        check_pairing,
    ),
    (
        "shifted-kernel",
        "phase-space shifts carry normalized kernels to normalized kernels with a symplectic phase",
        check_shifted_kernel,
    ),
    (
        "prop-identities",
        "closed forms for the Fourier transform, self-convolution, and its spectral factorization on kernel rank-ones",
        check_prop_identities,
    ),
    (
        "toeplitz-character",
        "Toeplitz operators of plane-wave symbols are Laguerre-scaled phase-space shifts",
        check_toeplitz_character,
    ),
    (
        "vanishing-toeplitz",
        "a bounded symbol whose Toeplitz operator is a unitary shift on the analytic component and zero on component k",
        check_vanishing_toeplitz,
    ),
    (
        "berezin-kernel",
        "the Berezin transform of a shift vanishes exactly when the shift radius lies on the component's critical circles",
        check_berezin_kernel,
    ),
    (
        "berezin-toeplitz-chain",
        "convolving the vacuum projector with a symbol reproduces pi times its Toeplitz operator",
        check_berezin_toeplitz_chain,
    ),
    (
        "heat-approximation",
        "heat smoothing converges to the operator as t shrinks and scales shifts by the exact Gaussian factor",
        check_heat_approximation,
    ),
    (
        "regularity-scan",
        "zero sets of operator Fourier transforms: projector scans, zero rings, thinness of the zero set",
        check_regularity_scan,
    ),
    (
        "localization",
        "kernel tail mass, smoothed off-diagonal decay rates, and stability of the localization integral",
        check_localization,
    ),
    (
        "partition-demo",
        "block-partition diagnostics separating transported-frame operators from component-kernel operators",
        check_partition_demo,
    ),
    (
        "berezin-decay",
        "transported-frame matrix elements: identity normalization, cross-component vanishing, far-field decay",
        check_berezin_decay,
    ),
];

/// Runs the named check, or errors with the registered names.
pub fn run_check(name: &str, cfg: &CheckConfig) -> Result<Report, CliError> {
    for (n, _, f) in CHECKS {
        if *n == name {
            return f(cfg);
        }
    }
    Err(CliError::Config(format!(
        "unknown check '{name}'; `list` prints the registered names"
    )))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dvec(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

/// Deterministic jittered points in the square |Re z|, |Im z| <= max_abs/sqrt(2),
/// so |z| <= max_abs. The tag decouples streams of different checks.
fn seeded_points(seed: u64, tag: u64, count: usize, max_abs: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag);
    let lim = max_abs / std::f64::consts::SQRT_2;
    (0..count)
        .map(|_| c(rng.random_range(-lim..lim), rng.random_range(-lim..lim)))
        .collect()
}

fn ks_for(cfg: &CheckConfig, default: &[usize]) -> Vec<usize> {
    match cfg.k {
        Some(k) => vec![k],
        None => default.to_vec(),
    }
}

fn vacuum_projector(space: SpaceTag) -> Result<TruncatedOperator, CliError> {
    let u = normalized_kernel_coeffs(space, c(0.0, 0.0))?;
    Ok(rank_one(space, &u, &u)?)
}

/// Inner-block operator norm of a - b.
fn inner_gap(a: &TruncatedOperator, b: &TruncatedOperator, inner: usize) -> Result<f64, CliError> {
    Ok(a.sub(b)?.restrict(inner)?.operator_norm())
}

/// Closed kernel pairing <k_a, k_b> on component k.
fn pairing_closed(k: usize, a: Complex64, b: Complex64) -> Complex64 {
    let mag = (-(a.norm_sqr() + b.norm_sqr()) / 2.0).exp()
        * laguerre(k - 1, 0.0, (b - a).norm_sqr());
    Complex64::new(mag, 0.0) * (b * a.conj()).exp()
}

fn base_params(name: &str, cfg: &CheckConfig) -> BTreeMap<String, serde_json::Value> {
    let mut p = BTreeMap::new();
    param_str(&mut p, "check", name);
    param_u64(&mut p, "trunc", cfg.trunc as u64);
    param_u64(&mut p, "seed", cfg.seed);
    param_f64(&mut p, "perturb", cfg.perturb);
    p
}

fn param_ks(p: &mut BTreeMap<String, serde_json::Value>, ks: &[usize]) {
    let list = ks
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    param_str(p, "components", &list);
}

fn param_xi(p: &mut BTreeMap<String, serde_json::Value>, key: &str, xi: Complex64) {
    param_str(p, key, &format!("{:.9}{:+.9}i", xi.re, xi.im));
}

/// Basis orthonormality through the quadrature Gram matrix, the closed
/// form of the kernel pairing, and the bare kernel reconstruction sum.
fn check_pairing(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-9);
    let ks = ks_for(cfg, &[1, 2, 3]);
    let rule = build_gaussian_quadrature(cfg.grid_radial, cfg.grid_angular)?;

    // Gram matrix of the first three component bases, 17 functions each,
    // assembled as the quadrature matrix of the constant symbol 1.
    let gram_space = SpaceTag::full_poly(3, 17)?;
    let gram = toeplitz_matrix(
        &SymbolSpec::Constant {
            value: c(1.0, 0.0),
        },
        gram_space,
        &rule,
    )?;
    let mut gram_dev: f64 = 0.0;
    for i in 0..gram_space.dim() {
        for j in 0..gram_space.dim() {
            let expect = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((gram.matrix[(i, j)] - c(expect, 0.0)).norm());
        }
    }

    let mut pairs: Vec<(Complex64, Complex64)> = vec![
        (c(0.0, 0.0), c(1.0, 0.0)),
        (c(0.3, 0.4), c(-1.2, 0.5)),
        (c(2.0, 0.0), c(0.0, -2.0)),
        (c(-1.4, -1.4), c(1.4, 1.4)),
        (c(0.7, -0.3), c(0.7, -0.3)),
        (c(1.0, 1.0), c(-0.5, 0.8)),
    ];
    let extra = seeded_points(cfg.seed, 0x7061_6972, 6, 1.9);
    for ch in extra.chunks(2) {
        pairs.push((ch[0], ch[1]));
    }

    let mut pairing_dev: f64 = 0.0;
    let mut recon_dev: f64 = 0.0;
    for &k in &ks {
        let space = SpaceTag::true_poly(k, cfg.trunc)?;
        for &(a, b) in &pairs {
            let ka = dvec(&normalized_kernel_coeffs(space, a)?);
            let kb = dvec(&normalized_kernel_coeffs(space, b)?);
            // <k_a, k_b> = sum_m c_m(a) conj(c_m(b)).
            let numeric = kb.dotc(&ka);
            let closed = pairing_closed(k, a + cfg.perturb, b);
            pairing_dev = pairing_dev.max((numeric - closed).norm());

            // Bare kernel sum, with the Gaussian half-weights scaled away.
            let recon = ka.dotc(&kb) * ((a.norm_sqr() + b.norm_sqr()) / 2.0).exp();
            let closed_recon = Complex64::new(laguerre(k - 1, 0.0, (a - b).norm_sqr()), 0.0)
                * (a * b.conj()).exp();
            recon_dev = recon_dev.max((recon - closed_recon).norm());
        }
    }

    let mut params = base_params("pairing", cfg);
    param_ks(&mut params, &ks);
    param_u64(&mut params, "grid_radial", cfg.grid_radial as u64);
    param_u64(&mut params, "grid_angular", cfg.grid_angular as u64);
    param_u64(&mut params, "sample_pairs", pairs.len() as u64);
    let metrics = vec![
        Metric::upper("gram_identity_dev", gram_dev, tol),
        Metric::upper("pairing_closed_form_dev", pairing_dev, tol),
        Metric::upper("kernel_reconstruction_dev", recon_dev, 1e-6),
    ];
    Ok(Report::new("pairing", params, metrics))
}

/// The shift orbit of normalized kernels: W_z k_w = e^{-i Im(z conj(w))} k_{z+w},
/// plus norm preservation of the shifted vectors.
fn check_shifted_kernel(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-8);
    let ks = ks_for(cfg, &[1, 2, 3]);
    let mut pairs = vec![
        (c(0.5, 0.0), c(0.0, 0.7)),
        (c(-0.6, 0.4), c(0.8, 0.3)),
        (c(1.2, -0.9), c(-0.4, -1.1)),
        (c(0.0, 1.5), c(1.5, 0.0)),
    ];
    let extra = seeded_points(cfg.seed, 0x7368_6966, 4, 1.5);
    pairs.push((extra[0], extra[1]));
    pairs.push((extra[2], extra[3]));

    let mut orbit_dev: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    for &k in &ks {
        let space = SpaceTag::true_poly(k, cfg.trunc)?;
        for &(z, w) in &pairs {
            let shift_op = weyl_matrix(z, space);
            let lhs = shift_op.apply(&dvec(&normalized_kernel_coeffs(space, w)?))?;
            let phase = -(z * w.conj()).im * (1.0 + cfg.perturb);
            let rhs =
                dvec(&normalized_kernel_coeffs(space, z + w)?) * Complex64::new(0.0, phase).exp();
            orbit_dev = orbit_dev.max((&lhs - &rhs).norm());
            norm_dev = norm_dev.max((lhs.norm() - 1.0).abs());
        }
    }

    let mut params = base_params("shifted-kernel", cfg);
    param_ks(&mut params, &ks);
    param_u64(&mut params, "sample_pairs", pairs.len() as u64);
    let metrics = vec![
        Metric::upper("orbit_relation_dev", orbit_dev, tol),
        Metric::upper("shifted_norm_dev", norm_dev, 1e-9),
    ];
    Ok(Report::new("shifted-kernel", params, metrics))
}

/// Closed Fourier transform of a kernel rank-one. `eps` scales the squared
/// distance in the argument, the perturbation target of this check.
fn closed_fourier_weyl(
    k: usize,
    z: Complex64,
    w: Complex64,
    xi: Complex64,
    eps: f64,
) -> Complex64 {
    let s = (w - z - xi).norm_sqr() * (1.0 + eps);
    let phase = (z * xi.conj()).im + (w * (xi.conj() + z.conj())).im;
    laguerre(k - 1, 0.0, s) * Complex64::new(-s / 2.0, phase).exp()
}

/// Closed self-convolution of a kernel rank-one, evaluated at u.
fn closed_self_convolution(
    k: usize,
    z: Complex64,
    w: Complex64,
    u: Complex64,
    eps: f64,
) -> Complex64 {
    let s = (w + z - u).norm_sqr() * (1.0 + eps);
    let lag = laguerre(k - 1, 0.0, s);
    let phase = -2.0 * ((z * u.conj()).im + (u * w.conj()).im + (w * z.conj()).im);
    lag * lag * (-s).exp() * Complex64::new(0.0, phase).exp()
}

/// Closed spectral transform of the self-convolution: the square of the
/// rank-one's Fourier transform.
fn closed_convolution_transform(
    k: usize,
    z: Complex64,
    w: Complex64,
    xi: Complex64,
    eps: f64,
) -> Complex64 {
    let s = (w - z - xi).norm_sqr() * (1.0 + eps);
    let lag = laguerre(k - 1, 0.0, s);
    let phase = 2.0 * ((z * xi.conj()).im + (w * xi.conj()).im + (w * z.conj()).im);
    lag * lag * (-s).exp() * Complex64::new(0.0, phase).exp()
}

/// Three closed-form identities on kernel rank-ones: the Fourier transform,
/// the self-convolution, and the transform of that convolution (which
/// factorizes as the square of the first).
fn check_prop_identities(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-6);
    let tol_transform = 1e-4;
    let ks = ks_for(cfg, &[1, 2, 3]);
    let n_ops = cfg.trunc.min(48);
    let eps = cfg.perturb;

    let mut pairs = vec![(c(0.4, 0.2), c(-0.3, 0.5))];
    let extra = seeded_points(cfg.seed, 0x7072_6f70, 2, 1.5);
    pairs.push((extra[0], extra[1]));

    let xis = [c(0.0, 0.0), c(0.7, 0.0), c(0.0, -0.7), c(-0.5, 0.6), c(1.5, 0.0)];
    let us = [c(0.0, 0.0), c(0.6, 0.3), c(-0.8, 0.2), c(0.1, -1.0), c(1.1, 1.0)];

    let mut fw_dev: f64 = 0.0;
    let mut conv_dev: f64 = 0.0;
    let mut transform_dev: f64 = 0.0;
    let rule = build_lebesgue_quadrature(cfg.lebesgue_order, 1.0)?;
    for &k in &ks {
        let space = SpaceTag::true_poly(k, n_ops)?;
        for &(z, w) in &pairs {
            let kz = normalized_kernel_coeffs(space, z)?;
            let kw = normalized_kernel_coeffs(space, w)?;
            let a = rank_one(space, &kz, &kw)?;
            for &xi in &xis {
                let numeric = fourier_weyl(&a, xi)?;
                fw_dev = fw_dev.max((numeric - closed_fourier_weyl(k, z, w, xi, eps)).norm());
            }
            for &u in &us {
                let numeric = convolve_op_op(&a, &a, u)?;
                conv_dev =
                    conv_dev.max((numeric - closed_self_convolution(k, z, w, u, eps)).norm());
            }
        }

        // Feed the exact convolution samples through the plane-integral
        // transform and compare against the factorized closed form.
        let (z, w) = pairs[0];
        let values: Vec<Complex64> = rule
            .nodes
            .iter()
            .map(|&u| closed_self_convolution(k, z, w, u, 0.0))
            .collect();
        let f = PhaseFunction::new(
            SymbolSpec::Grid { values },
            DecayClass::GaussianDecay { t: 1.0 },
        );
        for &xi in &xis {
            let numeric = symplectic_fourier(&f, xi, &rule)?;
            transform_dev = transform_dev
                .max((numeric - closed_convolution_transform(k, z, w, xi, eps)).norm());
        }
    }

    let mut params = base_params("prop-identities", cfg);
    param_ks(&mut params, &ks);
    param_u64(&mut params, "operator_trunc", n_ops as u64);
    param_u64(&mut params, "lebesgue_order", cfg.lebesgue_order as u64);
    let metrics = vec![
        Metric::upper("fourier_transform_dev", fw_dev, tol),
        Metric::upper("self_convolution_dev", conv_dev, tol),
        Metric::upper("convolution_transform_dev", transform_dev, tol_transform),
    ];
    Ok(Report::new("prop-identities", params, metrics))
}

/// Toeplitz operators of plane waves against their closed form: a
/// Laguerre-damped shift in the opposite direction.
fn check_toeplitz_character(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-5);
    let ks = ks_for(cfg, &[1, 2, 3]);
    let rule = build_gaussian_quadrature(cfg.grid_radial, cfg.grid_angular)?;
    let inner = (cfg.trunc / 2).max(1);
    let xis: Vec<Complex64> = match cfg.xi {
        Some(xi) => vec![xi],
        None => (0..10)
            .map(|j| Complex64::from_polar(0.2 * (j + 1) as f64, 0.7 * j as f64))
            .collect(),
    };

    let mut metrics = Vec::new();
    for &k in &ks {
        let space = SpaceTag::true_poly(k, cfg.trunc)?;
        let builder = ToeplitzBuilder::new(space, &rule)?;
        let mut dev: f64 = 0.0;
        for &xi in &xis {
            let t_op = builder.build(&SymbolSpec::Character { xi })?;
            let scale = laguerre(k - 1, 0.0, xi.norm_sqr()) * (-xi.norm_sqr() / 2.0).exp();
            let reference =
                weyl_matrix(-xi * (1.0 + cfg.perturb), space).scale(c(scale, 0.0));
            dev = dev.max(inner_gap(&t_op, &reference, inner)?);
        }
        metrics.push(Metric::upper(&format!("toeplitz_weyl_dev_k{k}"), dev, tol));
    }

    let mut params = base_params("toeplitz-character", cfg);
    param_ks(&mut params, &ks);
    param_u64(&mut params, "grid_radial", cfg.grid_radial as u64);
    param_u64(&mut params, "grid_angular", cfg.grid_angular as u64);
    param_u64(&mut params, "xi_count", xis.len() as u64);
    param_u64(&mut params, "inner_block", inner as u64);
    Ok(Report::new("toeplitz-character", params, metrics))
}

/// The witness symbol: unitary on the analytic component, annihilated by
/// component k whenever the shift radius sits on one of its circles.
fn check_vanishing_toeplitz(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-6);
    let rule = build_gaussian_quadrature(cfg.grid_radial, cfg.grid_angular)?;

    let mut cases: Vec<(usize, Complex64)> = Vec::new();
    match (cfg.k, cfg.xi) {
        (Some(k), Some(xi)) => cases.push((k, xi)),
        (Some(k), None) => {
            let radii = sigma_set(k)?.radii;
            if radii.is_empty() {
                return Err(CliError::Config(format!(
                    "component {k} has no vanishing radii; its Laguerre factor has no zeros"
                )));
            }
            for r in radii {
                cases.push((k, c(r, 0.0)));
            }
        }
        (None, Some(xi)) => cases.push((2, xi)),
        (None, None) => {
            cases.push((2, c(1.0, 0.0)));
            for r in sigma_set(3)?.radii {
                cases.push((3, c(r, 0.0)));
            }
        }
    }

    let mut params = base_params("vanishing-toeplitz", cfg);
    param_u64(&mut params, "grid_radial", cfg.grid_radial as u64);
    param_u64(&mut params, "grid_angular", cfg.grid_angular as u64);
    let mut metrics = Vec::new();
    let single = cases.len() == 1;
    for (i, &(k, xi)) in cases.iter().enumerate() {
        let witness = toeplitz_kernel_witness(k, xi + cfg.perturb, cfg.trunc, &rule)?;
        let suffix = if single {
            String::new()
        } else {
            format!("_case{i}_k{k}")
        };
        metrics.push(Metric::upper(
            &format!("toeplitz_norm{suffix}"),
            witness.toeplitz_norm,
            tol,
        ));
        metrics.push(Metric::upper(
            &format!("weyl_check_k1{suffix}"),
            witness.weyl_check_k1,
            tol,
        ));
        param_xi(&mut params, &format!("case{i}_xi"), xi);
        param_u64(&mut params, &format!("case{i}_k"), k as u64);
    }
    Ok(Report::new("vanishing-toeplitz", params, metrics))
}

/// The Berezin transform of a shift dies exactly on the critical circles:
/// machine zero on them, first-order growth off them, and at least 1e-3 a
/// fixed 0.2 away.
fn check_berezin_kernel(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-6);
    let ks = ks_for(cfg, &[2, 3]);
    let angle = 0.3;

    let mut zs = vec![c(0.0, 0.0)];
    for i in 1..=5 {
        let r = 0.4 * i as f64;
        for j in 0..8 {
            zs.push(Complex64::from_polar(r, 2.0 * PI * j as f64 / 8.0));
        }
    }

    let mut metrics = Vec::new();
    let mut params = base_params("berezin-kernel", cfg);
    param_ks(&mut params, &ks);
    for &k in &ks {
        let sig = sigma_set(k)?;
        if sig.radii.is_empty() {
            return Err(CliError::Config(format!(
                "component {k} has no critical circles; pick k >= 2"
            )));
        }
        let space = SpaceTag::true_poly(k, cfg.trunc)?;

        // On the circles: the transform modulus at machine scale.
        let mut on_circle_sup: f64 = 0.0;
        // A window of half-width 1e-6 around each circle: the modulus grows
        // linearly with the offset, with slope |L'| 2r e^{-r^2/2}.
        let mut window_sup: f64 = 0.0;
        let mut window_bound: f64 = 0.0;
        for &r in &sig.radii {
            let slope = laguerre(k - 2, 1.0, r * r).abs() * 2.0 * r * (-r * r / 2.0).exp();
            window_bound = window_bound.max(1.5 * slope * 1e-6);
            for offset in [-1e-6, 0.0, 1e-6] {
                let xi = Complex64::from_polar(r + offset + cfg.perturb, angle);
                let shift_op = weyl_matrix(xi, space);
                let mut sup: f64 = 0.0;
                for &z in &zs {
                    sup = sup.max(berezin(&shift_op, z)?.norm());
                }
                if offset == 0.0 {
                    on_circle_sup = on_circle_sup.max(sup);
                }
                window_sup = window_sup.max(sup);
            }
        }
        metrics.push(Metric::upper(
            &format!("on_circle_sup_k{k}"),
            on_circle_sup,
            tol,
        ));
        metrics.push(Metric::upper(
            &format!("offset_window_sup_k{k}"),
            window_sup,
            window_bound.max(tol),
        ));

        // A fixed 0.2 away from every circle the transform must be alive.
        let mut far_min = f64::INFINITY;
        let mut far_count = 0u64;
        for &r in &sig.radii {
            for cand in [r - 0.2, r + 0.2] {
                if cand >= 0.05 && sig.nearest_distance(cand) >= 0.2 - 1e-9 {
                    far_count += 1;
                    let xi = Complex64::from_polar(cand, angle);
                    let shift_op = weyl_matrix(xi, space);
                    for &z in &zs[..9] {
                        far_min = far_min.min(berezin(&shift_op, z)?.norm());
                    }
                }
            }
        }
        metrics.push(Metric::lower(&format!("off_circle_min_k{k}"), far_min, 1e-3));
        param_u64(&mut params, &format!("far_points_k{k}"), far_count);

        // An explicitly requested shift argument: vanishing on a circle,
        // alive otherwise (the identity shift xi = 0 reports ~1).
        if let Some(xi) = cfg.xi {
            let shift_op = weyl_matrix(xi, space);
            let mut min_abs = f64::INFINITY;
            let mut max_abs: f64 = 0.0;
            for &z in &zs {
                let v = berezin(&shift_op, z)?.norm();
                min_abs = min_abs.min(v);
                max_abs = max_abs.max(v);
            }
            if sig.nearest_distance(xi.norm()) <= 1e-9 {
                metrics.push(Metric::upper(&format!("explicit_xi_sup_k{k}"), max_abs, tol));
            } else {
                metrics.push(Metric::lower(&format!("explicit_xi_min_k{k}"), min_abs, 1e-3));
            }
        }
    }
    if let Some(xi) = cfg.xi {
        param_xi(&mut params, "explicit_xi", xi);
    }
    Ok(Report::new("berezin-kernel", params, metrics))
}

/// Projector convolution against pi times the Toeplitz operator, for a
/// Gaussian and a plane-wave symbol.
fn check_berezin_toeplitz_chain(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-5);
    let ks = ks_for(cfg, &[1, 2]);
    let inner = (cfg.trunc / 2).max(1);
    let gauss = build_gaussian_quadrature(cfg.grid_radial, cfg.grid_angular)?;
    let t_gauss = cfg.t.unwrap_or(1.0);
    let xi = cfg.xi.unwrap_or(c(0.8, 0.3));
    let symbols = [
        ("gaussian", SymbolSpec::Gaussian { t: t_gauss }),
        ("character", SymbolSpec::Character { xi }),
    ];

    let mut metrics = Vec::new();
    for &k in &ks {
        let space = SpaceTag::true_poly(k, cfg.trunc)?;
        let proj = vacuum_projector(space)?;
        for (label, symbol) in &symbols {
            let f = PhaseFunction::auto(symbol.clone());
            let rule = lebesgue_rule_for(&f, cfg.lebesgue_order)?;
            let conv = convolve_fn_op(&f, &proj, &rule)?;
            let t_op = toeplitz_matrix(symbol, space, &gauss)?
                .scale(c(PI * (1.0 + cfg.perturb), 0.0));
            metrics.push(Metric::upper(
                &format!("chain_dev_k{k}_{label}"),
                inner_gap(&conv, &t_op, inner)?,
                tol,
            ));
        }
    }

    let mut params = base_params("berezin-toeplitz-chain", cfg);
    param_ks(&mut params, &ks);
    param_f64(&mut params, "gaussian_t", t_gauss);
    param_xi(&mut params, "character_xi", xi);
    param_u64(&mut params, "lebesgue_order", cfg.lebesgue_order as u64);
    param_u64(&mut params, "inner_block", inner as u64);
    Ok(Report::new("berezin-toeplitz-chain", params, metrics))
}

/// Heat smoothing along a shrinking time ladder: monotone approach to the
/// operator, a sub-0.1 final error, the exact Gaussian scaling law on
/// shifts, and an a-posteriori quadrature refinement gap.
fn check_heat_approximation(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol_final = cfg.tol.unwrap_or(0.1);
    let k = cfg.k.unwrap_or(1);
    let space = SpaceTag::true_poly(k, cfg.trunc)?;
    let inner = (cfg.trunc / 2).max(1);
    let gauss = build_gaussian_quadrature(cfg.grid_radial, cfg.grid_angular)?;
    let w_arg = c(0.3, 0.0);
    let ops: Vec<(&str, TruncatedOperator)> = vec![
        ("weyl_shift", weyl_matrix(w_arg, space)),
        ("vacuum_projector", vacuum_projector(space)?),
        (
            "gaussian_toeplitz",
            toeplitz_matrix(&SymbolSpec::Gaussian { t: 1.0 }, space, &gauss)?,
        ),
    ];
    let ts = [0.8, 0.4, 0.2, 0.1, 0.05];

    let mut metrics = Vec::new();
    let mut smoothed_weyl_t02: Option<TruncatedOperator> = None;
    for (label, op) in &ops {
        let base = op.restrict(inner)?;
        let mut errs = Vec::new();
        for &t in &ts {
            let rule = heat_rule(t, cfg.lebesgue_order)?;
            let sm = heat_smooth(op, t, &rule)?;
            if *label == "weyl_shift" && t == 0.2 {
                smoothed_weyl_t02 = Some(sm.clone());
            }
            errs.push(sm.restrict(inner)?.sub(&base)?.operator_norm());
        }
        let worst_increase = errs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        metrics.push(Metric::upper(
            &format!("{label}_monotonicity_margin"),
            worst_increase,
            1e-12,
        ));
        metrics.push(Metric::upper(
            &format!("{label}_final_error"),
            *errs.last().expect("five times"),
            tol_final,
        ));
    }

    // Scaling law g_t * W_w = e^{-t |w|^2} W_w on the stored t = 0.2 run.
    let sm = smoothed_weyl_t02.expect("the shift is always smoothed at t = 0.2");
    let scale = (-(0.2 * w_arg.norm_sqr()) * (1.0 + cfg.perturb)).exp();
    let expect = ops[0].1.scale(c(scale, 0.0));
    metrics.push(Metric::upper(
        "weyl_scaling_dev",
        inner_gap(&sm, &expect, inner)?,
        1e-7,
    ));

    // The shipped per-axis order against a finer rule, same integrand.
    let rule_fine = heat_rule(0.2, cfg.lebesgue_order + 20)?;
    let sm_fine = heat_smooth(&ops[0].1, 0.2, &rule_fine)?;
    metrics.push(Metric::upper(
        "quadrature_refinement_gap",
        inner_gap(&sm, &sm_fine, inner)?,
        1e-7,
    ));

    let mut params = base_params("heat-approximation", cfg);
    param_u64(&mut params, "component", k as u64);
    param_u64(&mut params, "lebesgue_order", cfg.lebesgue_order as u64);
    param_u64(&mut params, "inner_block", inner as u64);
    param_str(&mut params, "times", "0.8,0.4,0.2,0.1,0.05");
    Ok(Report::new("heat-approximation", params, metrics))
}

/// Regularity scans of vacuum projectors: the scan minimum against the
/// closed transform modulus, the regular/irregular verdict, zero rings on
/// the critical circles, and thinness of the zero set.
fn check_regularity_scan(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-9);
    let ks = ks_for(cfg, &[1, 2]);
    let grid = PolarGrid::default_scan();
    let pts = grid.points();

    let mut metrics = Vec::new();
    let mut params = base_params("regularity-scan", cfg);
    param_ks(&mut params, &ks);
    param_u64(&mut params, "grid_radii", grid.radii.len() as u64);
    param_u64(&mut params, "grid_angles", grid.n_angles as u64);
    for &k in &ks {
        let space = SpaceTag::true_poly(k, cfg.trunc)?;
        let proj = vacuum_projector(space)?;
        let ztol = default_zero_tol(&proj);
        let report = regularity_scan(&proj, &pts, ztol)?;

        // |F(P_k)| on a circle of radius r is |L_{k-1}(r^2)| e^{-r^2/2}.
        let closed = |r: f64| -> f64 {
            let rp = r * (1.0 + cfg.perturb);
            laguerre(k - 1, 0.0, rp * rp).abs() * (-rp * rp / 2.0).exp()
        };
        let closed_min = grid
            .radii
            .iter()
            .copied()
            .map(closed)
            .fold(f64::INFINITY, f64::min);
        metrics.push(Metric::upper(
            &format!("scan_min_dev_k{k}"),
            (report.min_abs - closed_min).abs(),
            tol,
        ));
        metrics.push(Metric::flag(
            &format!("regular_flag_matches_k{k}"),
            report.is_regular_on_grid == (closed_min > ztol),
        ));

        // Zero rings appear when a critical circle lands on a grid radius.
        let sig = sigma_set(k)?;
        let rings_on_grid = sig
            .radii
            .iter()
            .filter(|r| grid.radii.iter().any(|g| (g - *r).abs() < 1e-9))
            .count();
        if rings_on_grid > 0 {
            let ring_dev = report
                .zero_points
                .iter()
                .map(|z| sig.nearest_distance(z.norm()))
                .fold(0.0, f64::max);
            metrics.push(Metric::upper(&format!("zero_ring_dev_k{k}"), ring_dev, tol));
            metrics.push(Metric::flag(
                &format!("zero_count_matches_k{k}"),
                report.zero_points.len() == rings_on_grid * grid.n_angles,
            ));
        }

        let infty = infty_regularity_scan(&proj, &grid, ztol)?;
        let max_fraction = rings_on_grid as f64 / grid.radii.len() as f64 + 1e-12;
        metrics.push(Metric::flag(
            &format!("thin_zero_set_k{k}"),
            infty.complement_dense_proxy && infty.zero_fraction <= max_fraction,
        ));
    }
    Ok(Report::new("regularity-scan", params, metrics))
}

/// Kernel tail mass and smoothed decay: the closed tail at R = 2, the
/// Gaussian shape cap on [0, 4], fitted decay rates of the smoothed
/// vacuum projector, polynomial domination, and stability of the
/// localization integral between two far radii.
fn check_localization(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-9);
    let mut metrics = Vec::new();
    let mut params = base_params("localization", cfg);

    // Closed tail of the analytic component: exactly e^{-R^2} at R = 2.
    let tail = kernel_tail_norm(1, 2.0)?;
    let expect = (-4.0 * (1.0 + cfg.perturb)).exp();
    metrics.push(Metric::upper(
        "tail_closed_form_dev",
        (tail - expect).abs(),
        1e-8,
    ));

    // Shape: log tail + R^2/4 stays under the cap fitted on [0, 2].
    let ns = match cfg.n {
        Some(n) => vec![n],
        None => vec![1, 2, 3],
    };
    for &n in &ns {
        let mut cap = f64::NEG_INFINITY;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..=20 {
            let r = 0.2 * i as f64;
            let s = kernel_tail_norm(n, r)?.ln() + r * r / 4.0;
            if r <= 2.0 + 1e-12 {
                cap = cap.max(s);
            }
            worst = worst.max(s);
        }
        metrics.push(Metric::upper(
            &format!("tail_shape_excess_n{n}"),
            worst - cap,
            tol,
        ));
    }

    // Smoothed off-diagonal decay of the vacuum projector.
    let space = SpaceTag::true_poly(1, cfg.trunc)?;
    let proj = vacuum_projector(space)?;
    let seps: Vec<f64> = (0..9).map(|i| 0.5 + 0.25 * i as f64).collect();
    let ts = match cfg.t {
        Some(t) => vec![t],
        None => vec![0.5, 1.0, 2.0],
    };
    let mut profile_t1 = None;
    for &t in &ts {
        let prof = heat_smoothed_decay(&proj, t, &seps)?;
        let fit = prof.fit.clone().ok_or_else(|| {
            CliError::Config("decay fit needs at least two usable separations".into())
        })?;
        let floor = t / (2.0 * t + 1.0) - 0.05;
        metrics.push(Metric::lower(&format!("smoothed_rate_t{t}"), fit.rate, floor));
        if (t - 1.0).abs() < 1e-12 {
            profile_t1 = Some(prof);
        }
    }

    if let Some(prof) = profile_t1 {
        // Gaussian decay beats any polynomial rate eventually: the
        // cubic-weighted profile v(d) (1 + d)^3 must be strictly decreasing
        // over the far half, which bounds v by its peak times (1 + d)^{-3}
        // from there on.
        let weighted: Vec<f64> = prof
            .separations
            .iter()
            .zip(&prof.values)
            .map(|(d, v)| v * (1.0 + d).powi(3))
            .collect();
        let half = weighted.len() / 2;
        let dominated = weighted[half..].windows(2).all(|w| w[1] < w[0]);
        metrics.push(Metric::flag("polynomial_domination_t1", dominated));

        // Localization integral of the smoothed projector between radii
        // 2.5 and 3.0. The diagnostic reaches |w| = 3, so it gets its own
        // truncation floor regardless of --trunc.
        let weak_trunc = cfg.trunc.max(64);
        let wspace = SpaceTag::true_poly(1, weak_trunc)?;
        let smoothed = heat_smooth(
            &vacuum_projector(wspace)?,
            1.0,
            &heat_rule(1.0, cfg.lebesgue_order)?,
        )?;
        let near = weak_localization_integral(&smoothed, c(0.0, 0.0), 2.5, 160, 64)?;
        let far = weak_localization_integral(&smoothed, c(0.0, 0.0), 3.0, 192, 64)?;
        let rel = (far - near) / far;
        metrics.push(Metric::upper("localization_integral_rel_change", rel, 0.05));
        param_u64(&mut params, "weak_trunc", weak_trunc as u64);
    }

    let t_list = ts
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(",");
    param_str(&mut params, "times", &t_list);
    param_u64(&mut params, "separations", seps.len() as u64);
    Ok(Report::new("localization", params, metrics))
}

/// Block diagnostics on the full n-component space: transported-frame
/// blocks pass the per-block scan, component-kernel blocks fail it with a
/// zero ring on the unit circle, and a tiled block respects the coarsest
/// partition.
fn check_partition_demo(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-9);
    let n = cfg.n.unwrap_or(2);
    if n < 2 {
        return Err(CliError::Config(
            "block diagnostics need at least two components".into(),
        ));
    }
    let nt = cfg.trunc;
    let full = SpaceTag::full_poly(n, nt)?;
    let grid = PolarGrid::default_scan();
    let pts = grid.points();
    let m_max = Partition::m_max(n)?;

    let mut metrics = Vec::new();

    // Transported-frame operator: every block the same vacuum projector in
    // transported coordinates, which is the elementary matrix E_00.
    let mut e00 = DMatrix::<Complex64>::zeros(nt, nt);
    e00[(0, 0)] = c(1.0, 0.0);
    let blocks_l: Vec<Vec<DMatrix<Complex64>>> = vec![vec![e00; n]; n];
    let op_l = assemble_blocks(full, full, &blocks_l)?;
    let scan_l = m_regularity_scan(&op_l, &m_max, &pts, default_zero_tol(&op_l))?;
    metrics.push(Metric::flag("transported_blocks_m_regular", scan_l.is_m_regular));

    // Component-kernel operator: block (i, j) pairs the component vacuum
    // kernels of components i+1 and j+1.
    let units: Vec<DVector<Complex64>> = (1..=n)
        .map(|k| -> Result<DVector<Complex64>, CliError> {
            Ok(dvec(&normalized_kernel_coeffs(
                SpaceTag::true_poly(k, nt)?,
                c(0.0, 0.0),
            )?))
        })
        .collect::<Result<_, _>>()?;
    let mut blocks_k = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(&units[i] * units[j].adjoint());
        }
        blocks_k.push(row);
    }
    let op_k = assemble_blocks(full, full, &blocks_k)?;
    let scan_k = m_regularity_scan(&op_k, &m_max, &pts, default_zero_tol(&op_k))?;
    metrics.push(Metric::flag("component_blocks_fail_scan", !scan_k.is_m_regular));
    let ring = &scan_k.block_reports[1][1];
    metrics.push(Metric::flag(
        "component_block_22_has_zeros",
        !ring.zero_points.is_empty(),
    ));
    let ring_dev = ring
        .zero_points
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    metrics.push(Metric::upper("component_zero_ring_dev", ring_dev, tol));
    metrics.push(Metric::flag(
        "component_zero_ring_count",
        ring.zero_points.len() == grid.n_angles,
    ));

    // Tiling one block across the space respects the coarsest partition;
    // the perturbation smudges one far-block entry to break the agreement.
    let mut tiled = tile_block(full, &extract_block(&op_k, 0, 0)?)?;
    if cfg.perturb != 0.0 {
        let pos = (n - 1) * nt;
        tiled.matrix[(pos, pos)] += c(cfg.perturb, 0.0);
    }
    let respects = respects_partition(&tiled, &Partition::m_min(n)?, 1e-9)?;
    metrics.push(Metric::flag("tiled_block_respects_min_partition", respects));

    let mut params = base_params("partition-demo", cfg);
    param_u64(&mut params, "n_components", n as u64);
    param_u64(&mut params, "grid_radii", grid.radii.len() as u64);
    param_u64(&mut params, "grid_angles", grid.n_angles as u64);
    Ok(Report::new("partition-demo", params, metrics))
}

/// Matrix elements in the transported frames: the identity gives an exact
/// orthonormality pattern across components, and a component-kernel
/// rank-one decays like a Gaussian in the frame center.
fn check_berezin_decay(cfg: &CheckConfig) -> Result<Report, CliError> {
    let tol = cfg.tol.unwrap_or(1e-4);
    let n = cfg.n.unwrap_or(3);
    if n < 2 {
        return Err(CliError::Config(
            "cross-component metrics need at least two components".into(),
        ));
    }
    let nt = cfg.trunc;
    let full = SpaceTag::full_poly(n, nt)?;

    let mut ident = TruncatedOperator::identity(full);
    if cfg.perturb != 0.0 {
        // Couple the first two components to break the vanishing pattern.
        ident.matrix[(0, nt)] += c(cfg.perturb, 0.0);
    }
    let zs = [c(0.0, 0.0), c(0.5, 0.3), c(-0.4, 0.8), c(0.9, -0.2)];
    let mut cross_max: f64 = 0.0;
    let mut diag_min = f64::INFINITY;
    for j in 1..=n {
        for k in 1..=n {
            for &z in &zs {
                let v = generalized_berezin(&ident, j, k, z)?;
                if j == k {
                    diag_min = diag_min.min(v.re);
                } else {
                    cross_max = cross_max.max(v.norm());
                }
            }
        }
    }

    // Far field of the last component's vacuum kernel projector: the
    // transported pairing decays like e^{-|z|^2} times a Laguerre factor,
    // so |z| = 4 sits orders of magnitude beneath the tolerance.
    let mut u = vec![c(0.0, 0.0); full.dim()];
    let comp = n - 1;
    let block = normalized_kernel_coeffs(SpaceTag::true_poly(n, nt)?, c(0.0, 0.0))?;
    u[comp * nt..(comp + 1) * nt].copy_from_slice(&block);
    let a = rank_one(full, &u, &u)?;
    let mut far_sup: f64 = 0.0;
    for j in 1..=n {
        for k in 1..=n {
            for ang in 0..8 {
                let z = Complex64::from_polar(4.0, 2.0 * PI * ang as f64 / 8.0 + 0.1);
                far_sup = far_sup.max(generalized_berezin(&a, j, k, z)?.norm());
            }
        }
    }

    let metrics = vec![
        Metric::upper("identity_cross_component_max", cross_max, 1e-10),
        Metric::lower("identity_diagonal_min", diag_min, 0.99),
        Metric::upper("rank_one_far_field_sup", far_sup, tol),
    ];
    let mut params = base_params("berezin-decay", cfg);
    param_u64(&mut params, "n_components", n as u64);
    param_u64(&mut params, "far_radius", 4);
    Ok(Report::new("berezin-decay", params, metrics))
}
