//! Cross-module identities for the convolution calculus: shift covariance,
//! Young-type bounds, the trace integral identity, the convolution theorem,
//! the Toeplitz quantization chain, and component independence of the
//! Fourier transform.

use nalgebra::DMatrix;
use num_complex::Complex64;

use polyfock::basis::{normalized_kernel_coeffs, SpaceTag};
use polyfock::operators::{
    parity_matrix, rank_one, toeplitz_matrix, weyl_matrix, weyl_matrix_quadrature, SymbolSpec,
};
use polyfock::qha::{
    convolve_fn_op, convolve_op_op_on, fourier_weyl, lebesgue_rule_for, shift,
    symplectic_fourier, DecayClass, PhaseFunction,
};
use polyfock::special::{build_gaussian_quadrature, build_lebesgue_quadrature};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn inner_diff_norm(a: &polyfock::operators::TruncatedOperator,
                   b: &polyfock::operators::TruncatedOperator,
                   inner: usize) -> f64 {
    let ra = a.restrict(inner).unwrap();
    let rb = b.restrict(inner).unwrap();
    (ra.matrix - rb.matrix).norm()
}

fn kernel_projector(space: SpaceTag, z: Complex64) -> polyfock::operators::TruncatedOperator {
    let u = normalized_kernel_coeffs(space, z).unwrap();
    rank_one(space, &u, &u).unwrap()
}

#[test]
fn shifts_commute_with_function_convolution() {
    // Exact in infinite dimension (the composition phases cancel between
    // the conjugating pair); the tolerance absorbs what the truncation
    // cutoff loses when the shift pushes mass across it.
    let space = SpaceTag::true_poly(1, 64).unwrap();
    let f = PhaseFunction::auto(SymbolSpec::Gaussian { t: 0.5 });
    let rule = lebesgue_rule_for(&f, 40).unwrap();
    let ops = [
        kernel_projector(space, c(0.3, 0.1)),
        weyl_matrix(c(0.4, -0.2), space),
    ];
    let zs = [c(0.5, 0.0), c(-0.3, 0.8), c(0.0, -1.0)];
    for a in &ops {
        let conv = convolve_fn_op(&f, a, &rule).unwrap();
        for &z in &zs {
            let lhs = shift(&conv, z);
            let rhs = convolve_fn_op(&f, &shift(a, z), &rule).unwrap();
            let gap = inner_diff_norm(&lhs, &rhs, 32);
            assert!(gap < 1e-6, "z={z}: {gap}");
        }
    }
}

#[test]
fn young_bounds_hold_with_quadrature_slack() {
    let space = SpaceTag::true_poly(1, 48).unwrap();

    // Function-operator: the mollifier has unit mass, so the convolution
    // cannot expand the operator norm beyond quadrature slack.
    let f = PhaseFunction::auto(SymbolSpec::Gaussian { t: 0.7 });
    let rule = lebesgue_rule_for(&f, 40).unwrap();
    let ops = [
        weyl_matrix(c(0.3, 0.0), space),
        parity_matrix(space),
        kernel_projector(space, c(0.0, 0.0)),
    ];
    for a in &ops {
        let conv = convolve_fn_op(&f, a, &rule).unwrap();
        assert!(
            conv.operator_norm() <= 1.05 * a.operator_norm(),
            "{} vs {}",
            conv.operator_norm(),
            a.operator_norm()
        );
    }

    // Operator-operator: the plane integral of |A * B| is bounded by
    // pi times the product of trace norms, with equality for positive
    // rank-one pairs; both sides of the tight case are checked.
    let a = kernel_projector(space, c(0.2, 0.0));
    let b = kernel_projector(space, c(0.0, 0.1));
    let plane = build_lebesgue_quadrature(40, 1.0).unwrap();
    let vals = convolve_op_op_on(&a, &b, &plane.nodes).unwrap();
    let l1: f64 = plane
        .weights
        .iter()
        .zip(&vals)
        .map(|(w, v)| w * v.norm())
        .sum();
    let bound = std::f64::consts::PI * a.trace_norm() * b.trace_norm();
    assert!(l1 <= 1.05 * bound, "{l1} vs {bound}");
    assert!(l1 >= 0.90 * bound, "{l1} vs {bound}");
}

#[test]
fn operator_convolution_integrates_to_scaled_trace_product() {
    let space = SpaceTag::true_poly(1, 32).unwrap();
    let ka = normalized_kernel_coeffs(space, c(0.2, 0.1)).unwrap();
    let kb = normalized_kernel_coeffs(space, c(-0.1, 0.3)).unwrap();
    let kc = normalized_kernel_coeffs(space, c(0.15, -0.25)).unwrap();
    let kd = normalized_kernel_coeffs(space, c(0.0, 0.2)).unwrap();
    let a = rank_one(space, &ka, &kb).unwrap();
    let b = rank_one(space, &kc, &kd).unwrap();

    let plane = build_lebesgue_quadrature(40, 1.0).unwrap();
    let vals = convolve_op_op_on(&a, &b, &plane.nodes).unwrap();
    let integral: Complex64 = plane
        .weights
        .iter()
        .zip(&vals)
        .map(|(&w, v)| v * w)
        .sum();
    let expected = std::f64::consts::PI * a.trace().unwrap() * b.trace().unwrap();
    assert!(
        (integral - expected).norm() < 1e-4,
        "{integral} vs {expected}"
    );
}

#[test]
fn fourier_weyl_factorizes_operator_convolution() {
    let space = SpaceTag::true_poly(1, 32).unwrap();
    let ku = normalized_kernel_coeffs(space, c(0.2, 0.1)).unwrap();
    let kv = normalized_kernel_coeffs(space, c(-0.1, 0.15)).unwrap();
    let a = rank_one(space, &ku, &kv).unwrap();

    let plane = build_lebesgue_quadrature(40, 1.0).unwrap();
    let vals = convolve_op_op_on(&a, &a, &plane.nodes).unwrap();
    let f = PhaseFunction::new(
        SymbolSpec::Grid { values: vals },
        DecayClass::GaussianDecay { t: 1.0 },
    );

    let xis = [
        c(0.0, 0.0),
        c(0.5, 0.0),
        c(0.0, -0.8),
        c(1.0, 0.5),
        c(-1.2, 0.9),
    ];
    for &xi in &xis {
        let lhs = symplectic_fourier(&f, xi, &plane).unwrap();
        let fw = fourier_weyl(&a, xi).unwrap();
        let rhs = fw * fw;
        assert!((lhs - rhs).norm() < 1e-5, "xi={xi}: {lhs} vs {rhs}");
    }
}

#[test]
fn projector_convolution_realizes_toeplitz_quantization() {
    // Convolving the vacuum kernel projector of a component with a symbol
    // produces pi times the Toeplitz operator of that symbol on the same
    // component, for decaying and purely oscillating symbols alike.
    let gauss_rule = build_gaussian_quadrature(80, 160).unwrap();
    for k in [1usize, 2] {
        let space = SpaceTag::true_poly(k, 48).unwrap();
        let proj = kernel_projector(space, c(0.0, 0.0));
        let symbols = [
            SymbolSpec::Gaussian { t: 1.0 },
            SymbolSpec::Character { xi: c(0.8, 0.3) },
        ];
        for symbol in symbols {
            let f = PhaseFunction::auto(symbol.clone());
            let rule = lebesgue_rule_for(&f, 40).unwrap();
            let conv = convolve_fn_op(&f, &proj, &rule).unwrap();
            let toep = toeplitz_matrix(&symbol, space, &gauss_rule).unwrap();
            let ra = conv.restrict(24).unwrap();
            let rb = toep.restrict(24).unwrap();
            let gap = (ra.matrix - rb.matrix * Complex64::from(std::f64::consts::PI)).norm();
            assert!(gap < 1e-5, "k={k}, {symbol:?}: {gap}");
        }
    }
}

#[test]
fn fourier_weyl_is_component_independent() {
    // The transform is a trace against the Weyl matrix; computing that
    // matrix from scratch on each component by quadrature projection must
    // give the same value, because the component identifications are
    // identities in canonical coordinates.
    let n_trunc = 12;
    let rule = build_gaussian_quadrature(60, 140).unwrap();
    let m = DMatrix::from_fn(n_trunc, n_trunc, |i, j| {
        let phase = (i * 7 + j * 3) as f64 * 0.37;
        Complex64::new(phase.sin(), (i as f64 * 0.5 - j as f64 * 0.21).cos())
            / (1.0 + i as f64 + j as f64)
    });
    for &xi in &[c(0.7, -0.2), c(0.3, 0.4)] {
        let mut values = Vec::new();
        for k in [1usize, 2, 3] {
            let w = weyl_matrix_quadrature(xi, k, n_trunc, &rule).unwrap();
            let mut tr = Complex64::default();
            for i in 0..n_trunc {
                for j in 0..n_trunc {
                    tr += m[(i, j)] * w[(j, i)];
                }
            }
            values.push(tr);
        }
        for k in 1..values.len() {
            assert!(
                (values[k] - values[0]).norm() < 1e-8,
                "xi={xi}, k={}: {} vs {}",
                k + 1,
                values[k],
                values[0]
            );
        }
    }
}
