//! Canonical orthonormal bases of the true polyanalytic components and their
//! reproducing kernels.
//!
//! Component k (1-indexed) of the polyanalytic ladder carries the basis
//! e_{k,m} = raising^(k-1) (z^m / sqrt(m!)) / sqrt((k-1)!), m >= 0, where the
//! raising operator is -d/dz + conj(z). In these coordinates every unitary
//! intertwiner between components is the identity matrix, which is what makes
//! the operator modules representation-free: a matrix means the same thing on
//! every component.

use crate::error::FockError;
use crate::poly::BivariatePolynomial;
use crate::special::{laguerre, ln_factorial, Measure, QuadratureRule};
use crate::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Index of a basis vector: component k >= 1, degree m >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    pub k: usize,
    pub m: usize,
}

/// Which space a truncated object lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    /// Single true polyanalytic component of order k >= 1.
    TruePoly { k: usize },
    /// Direct sum of components 1..=n.
    FullPoly { n: usize },
}

/// Space tag plus per-component truncation: coefficients keep the first
/// `truncation` degrees of every component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTag {
    pub kind: SpaceKind,
    pub truncation: usize,
}

impl SpaceTag {
    pub fn true_poly(k: usize, truncation: usize) -> Result<Self> {
        if k == 0 || truncation == 0 {
            return Err(FockError::InvalidArgument(format!(
                "true_poly requires k >= 1 and truncation >= 1, got k={k}, N={truncation}"
            )));
        }
        Ok(Self {
            kind: SpaceKind::TruePoly { k },
            truncation,
        })
    }

    pub fn full_poly(n: usize, truncation: usize) -> Result<Self> {
        if n == 0 || truncation == 0 {
            return Err(FockError::InvalidArgument(format!(
                "full_poly requires n >= 1 and truncation >= 1, got n={n}, N={truncation}"
            )));
        }
        Ok(Self {
            kind: SpaceKind::FullPoly { n },
            truncation,
        })
    }

    /// Number of ladder components (1 for a single component).
    pub fn n_components(&self) -> usize {
        match self.kind {
            SpaceKind::TruePoly { .. } => 1,
            SpaceKind::FullPoly { n } => n,
        }
    }

    /// Component indices carried by this space.
    pub fn components(&self) -> std::ops::RangeInclusive<usize> {
        match self.kind {
            SpaceKind::TruePoly { k } => k..=k,
            SpaceKind::FullPoly { n } => 1..=n,
        }
    }

    /// Total coefficient dimension.
    pub fn dim(&self) -> usize {
        self.n_components() * self.truncation
    }
}

/// Raising operator -d/dz + conj(z); maps component k into component k+1.
pub fn raising_apply(p: &BivariatePolynomial) -> BivariatePolynomial {
    p.mul_zbar().sub(&p.diff_z())
}

/// Lowering operator d/dconj(z); annihilates the analytic component.
pub fn lowering_apply(p: &BivariatePolynomial) -> BivariatePolynomial {
    p.diff_zbar()
}

fn basis_cache() -> &'static Mutex<HashMap<BasisIndex, Arc<BivariatePolynomial>>> {
    static CACHE: OnceLock<Mutex<HashMap<BasisIndex, Arc<BivariatePolynomial>>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Basis polynomial e_{k,m}, cached.
///
/// Built recursively: e_{1,m} = z^m / sqrt(m!) (the monomial coefficient is
/// accumulated as a running product of 1/sqrt(j) to stay finite for large m),
/// and e_{k,m} = raising(e_{k-1,m}) / sqrt(k-1).
pub fn basis_function(k: usize, m: usize) -> Result<Arc<BivariatePolynomial>> {
    if k == 0 {
        return Err(FockError::InvalidArgument(
            "basis_function requires component k >= 1".into(),
        ));
    }
    let key = BasisIndex { k, m };
    if let Some(p) = basis_cache().lock().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let poly = if k == 1 {
        let mut c = 1.0;
        for j in 1..=m {
            c /= (j as f64).sqrt();
        }
        BivariatePolynomial::monomial(m, 0, Complex64::new(c, 0.0))
    } else {
        let lower = basis_function(k - 1, m)?;
        raising_apply(&lower).scale(Complex64::new(1.0 / ((k - 1) as f64).sqrt(), 0.0))
    };
    let arc = Arc::new(poly);
    basis_cache()
        .lock()
        .unwrap()
        .insert(key, arc.clone());
    Ok(arc)
}

/// Pointwise value e_{k,m}(z).
pub fn basis_eval(k: usize, m: usize, z: Complex64) -> Result<Complex64> {
    Ok(basis_function(k, m)?.eval(z))
}

/// Reproducing kernel K(z, w) of the tagged space:
/// L_{k-1}^0(|z-w|^2) e^{z conj(w)} for a component, L_{n-1}^1(|z-w|^2)
/// e^{z conj(w)} for the full space.
pub fn reproducing_kernel(space: SpaceTag, z: Complex64, w: Complex64) -> Complex64 {
    let d = (z - w).norm_sqr();
    let lag = match space.kind {
        SpaceKind::TruePoly { k } => laguerre(k - 1, 0.0, d),
        SpaceKind::FullPoly { n } => laguerre(n - 1, 1.0, d),
    };
    lag * (z * w.conj()).exp()
}

/// Kernel normalized to a unit vector in w: divides by ||K_w||, which is
/// e^{|w|^2/2} for a component and sqrt(n) e^{|w|^2/2} for the full space.
pub fn normalized_kernel(space: SpaceTag, z: Complex64, w: Complex64) -> Complex64 {
    let norm = match space.kind {
        SpaceKind::TruePoly { .. } => (w.norm_sqr() / 2.0).exp(),
        SpaceKind::FullPoly { n } => (n as f64).sqrt() * (w.norm_sqr() / 2.0).exp(),
    };
    reproducing_kernel(space, z, w) / norm
}

/// Coefficients of the normalized kernel at z in the canonical basis.
///
/// Component k block entry m is e^{-|z|^2/2} conj(e_{k,m}(z)); the full-poly
/// vector concatenates the component blocks scaled by 1/sqrt(n), ordered by
/// component then degree.
pub fn normalized_kernel_coeffs(space: SpaceTag, z: Complex64) -> Result<Vec<Complex64>> {
    let n_trunc = space.truncation;
    let gauss = Complex64::new((-z.norm_sqr() / 2.0).exp(), 0.0);
    let comp_scale = match space.kind {
        SpaceKind::TruePoly { .. } => 1.0,
        SpaceKind::FullPoly { n } => 1.0 / (n as f64).sqrt(),
    };
    let mut out = Vec::with_capacity(space.dim());
    for k in space.components() {
        for m in 0..n_trunc {
            let v = basis_eval(k, m, z)?;
            out.push(v.conj() * gauss * comp_scale);
        }
    }
    Ok(out)
}

/// Coefficients of the transported analytic kernel in component k: the block
/// carries e^{-|z|^2/2} conj(z)^m / sqrt(m!) regardless of k, because the
/// intertwiners are identities in canonical coordinates.
pub fn transported_kernel_coeffs(z: Complex64, n_trunc: usize) -> Vec<Complex64> {
    let gauss = (-z.norm_sqr() / 2.0).exp();
    let zb = z.conj();
    let mut out = Vec::with_capacity(n_trunc);
    let mut cur = Complex64::new(gauss, 0.0);
    for m in 0..n_trunc {
        if m > 0 {
            cur = cur * zb / (m as f64).sqrt();
        }
        out.push(cur);
    }
    out
}

/// Truncation tail 1 - ||coeffs||^2 of the normalized kernel at z; the exact
/// vector has unit norm, so this is the mass lost to truncation.
pub fn kernel_coeff_tail(space: SpaceTag, z: Complex64) -> Result<f64> {
    let coeffs = normalized_kernel_coeffs(space, z)?;
    let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    Ok(1.0 - norm_sq)
}

/// Gaussian-measure inner product of two pointwise functions by quadrature.
/// The rule must integrate against the Gaussian measure.
pub fn inner_product_mu_fn(
    rule: &QuadratureRule,
    f: impl Fn(Complex64) -> Complex64,
    g: impl Fn(Complex64) -> Complex64,
) -> Result<Complex64> {
    if !matches!(rule.measure, Measure::GaussianMu) {
        return Err(FockError::MeasureMismatch {
            expected: "GaussianMu".into(),
            got: format!("{:?}", rule.measure),
        });
    }
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&z, &w)| f(z) * g(z).conj() * w)
        .sum())
}

/// Gaussian-measure inner product of two polynomials; errors if the rule
/// cannot integrate the product degree exactly.
pub fn inner_product_mu(
    rule: &QuadratureRule,
    f: &BivariatePolynomial,
    g: &BivariatePolynomial,
) -> Result<Complex64> {
    let need = f.total_degree() + g.total_degree();
    if rule.exactness_degree < need {
        return Err(FockError::QuadratureInsufficient(format!(
            "product degree {need} exceeds rule exactness {}",
            rule.exactness_degree
        )));
    }
    inner_product_mu_fn(rule, |z| f.eval(z), |z| g.eval(z))
}

/// Evaluates the first `n_trunc` basis polynomials of component k on all rule
/// nodes; row = node, column = degree. Shared workhorse for projections.
pub fn evaluate_basis_on_rule(
    k: usize,
    n_trunc: usize,
    rule: &QuadratureRule,
) -> Result<nalgebra::DMatrix<Complex64>> {
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(rule.len(), n_trunc);
    for j in 0..n_trunc {
        let p = basis_function(k, j)?;
        for (i, &z) in rule.nodes.iter().enumerate() {
            m[(i, j)] = p.eval(z);
        }
    }
    Ok(m)
}

/// Factorial as f64 via the log table; exact to rounding for small n.
pub fn factorial(n: usize) -> f64 {
    ln_factorial(n).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::build_gaussian_quadrature;
    use approx::assert_relative_eq;

    #[test]
    fn first_basis_functions_match_hand_computation() {
        // e_{1,1} = z, e_{2,0} = conj(z), e_{2,1} = z conj(z) - 1
        let e11 = basis_function(1, 1).unwrap();
        assert_eq!(*e11, BivariatePolynomial::monomial(1, 0, Complex64::ONE));
        let e20 = basis_function(2, 0).unwrap();
        assert_eq!(*e20, BivariatePolynomial::monomial(0, 1, Complex64::ONE));
        let e21 = basis_function(2, 1).unwrap();
        let expect = BivariatePolynomial::monomial(1, 1, Complex64::ONE)
            .sub(&BivariatePolynomial::one());
        assert_eq!(*e21, expect);
    }

    #[test]
    fn antianalytic_degree_is_component_minus_one() {
        for k in 1..=4 {
            for m in 0..6 {
                let e = basis_function(k, m).unwrap();
                assert_eq!(e.deg_zbar(), Some(k - 1), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn ladder_commutator_is_identity_on_polynomials() {
        // lowering(raising(p)) - raising(lowering(p)) = p
        for (k, m) in [(1, 0), (1, 3), (2, 2), (3, 4)] {
            let p = basis_function(k, m).unwrap();
            let comm = lowering_apply(&raising_apply(&p)).sub(&raising_apply(&lowering_apply(&p)));
            assert!(comm.sub(&p).max_coeff_norm() < 1e-12, "k={k} m={m}");
        }
    }

    #[test]
    fn basis_is_orthonormal_within_and_across_components() {
        let rule = build_gaussian_quadrature(40, 80).unwrap();
        for k1 in 1..=3usize {
            for k2 in 1..=3usize {
                for m1 in 0..8usize {
                    for m2 in 0..8usize {
                        let f = basis_function(k1, m1).unwrap();
                        let g = basis_function(k2, m2).unwrap();
                        let ip = inner_product_mu(&rule, &f, &g).unwrap();
                        let expect = if k1 == k2 && m1 == m2 { 1.0 } else { 0.0 };
                        assert!(
                            (ip - expect).norm() < 1e-11,
                            "({k1},{m1}) vs ({k2},{m2}): {ip}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_diagonal_values() {
        // K_{(k)}(w, w) = L_{k-1}(0) e^{|w|^2} = e^{|w|^2};
        // K_n(w, w) = n e^{|w|^2}
        let w = Complex64::new(0.6, -0.9);
        let e = w.norm_sqr().exp();
        for k in 1..=3 {
            let s = SpaceTag::true_poly(k, 8).unwrap();
            assert_relative_eq!(reproducing_kernel(s, w, w).re, e, max_relative = 1e-13);
        }
        let s = SpaceTag::full_poly(3, 8).unwrap();
        assert_relative_eq!(reproducing_kernel(s, w, w).re, 3.0 * e, max_relative = 1e-13);
        // normalized diagonal: e^{|w|^2/2} resp. sqrt(n) e^{|w|^2/2}
        let sk = SpaceTag::true_poly(2, 8).unwrap();
        assert_relative_eq!(
            normalized_kernel(sk, w, w).re,
            (w.norm_sqr() / 2.0).exp(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn kernel_reconstructs_from_basis_sum() {
        // sum_m e_{k,m}(z) conj(e_{k,m}(w)) -> K_{(k)}(z, w)
        let z = Complex64::new(0.8, 0.4);
        let w = Complex64::new(-0.5, 0.7);
        for k in 1..=3 {
            let mut acc = Complex64::ZERO;
            for m in 0..48 {
                acc += basis_eval(k, m, z).unwrap() * basis_eval(k, m, w).unwrap().conj();
            }
            let space = SpaceTag::true_poly(k, 48).unwrap();
            let expect = reproducing_kernel(space, z, w);
            assert!((acc - expect).norm() < 1e-10, "k={k}: {acc} vs {expect}");
        }
    }

    #[test]
    fn kernel_coeffs_have_unit_norm_up_to_tail() {
        for &(z, tol) in &[
            (Complex64::new(1.0, -0.5), 1e-12),
            (Complex64::new(2.0, 0.0), 1e-8),
        ] {
            for k in 1..=3 {
                let space = SpaceTag::true_poly(k, 64).unwrap();
                let tail = kernel_coeff_tail(space, z).unwrap();
                assert!(tail.abs() < tol, "k={k} z={z}: tail={tail}");
            }
            let full = SpaceTag::full_poly(3, 64).unwrap();
            let tail = kernel_coeff_tail(full, z).unwrap();
            assert!(tail.abs() < tol, "full z={z}: tail={tail}");
        }
    }

    #[test]
    fn kernel_coeffs_recover_kernel_pairing() {
        // <k_z, k_w> via coefficients = normalized kernel value ratio:
        // sum_m c_m(z) conj(c_m(w)) = K(w... ) -- checked against the closed
        // pairing e^{-(|z|^2+|w|^2)/2} L_{k-1}(|w-z|^2) e^{w conj(z)}.
        let z = Complex64::new(0.4, 0.9);
        let w = Complex64::new(-0.3, 0.2);
        for k in 1..=3 {
            let space = SpaceTag::true_poly(k, 64).unwrap();
            let cz = normalized_kernel_coeffs(space, z).unwrap();
            let cw = normalized_kernel_coeffs(space, w).unwrap();
            let got: Complex64 = cz.iter().zip(&cw).map(|(a, b)| a * b.conj()).sum();
            let expect = (-(z.norm_sqr() + w.norm_sqr()) / 2.0).exp()
                * laguerre(k - 1, 0.0, (w - z).norm_sqr())
                * (w * z.conj()).exp();
            assert!((got - expect).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn transported_kernel_block_is_analytic_coefficients() {
        let z = Complex64::new(0.7, -1.1);
        let direct = transported_kernel_coeffs(z, 32);
        let analytic = normalized_kernel_coeffs(SpaceTag::true_poly(1, 32).unwrap(), z).unwrap();
        for (a, b) in direct.iter().zip(&analytic) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_invalid_indices() {
        assert!(basis_function(0, 3).is_err());
        assert!(SpaceTag::true_poly(0, 8).is_err());
        assert!(SpaceTag::full_poly(2, 0).is_err());
    }
}
