//! Generalized Laguerre polynomials, their zeros, and the quadrature rules
//! used throughout the crate.
//!
//! Two families of rules are provided. The Gaussian-measure rule integrates
//! against pi^-1 exp(-|z|^2) dA in polar form (Gauss-Laguerre radially, a
//! uniform trapezoid in angle, which is exact for trigonometric monomials).
//! The Lebesgue rule is a tensor Gauss-Hermite rule reweighted to plain area
//! measure, with a scale knob to match the Gaussian decay of the integrand.

use crate::error::FockError;
use crate::poly::BivariatePolynomial;
use crate::Result;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Degree at which Laguerre evaluation switches from the defining alternating
/// sum to the three-term recurrence.
const LAGUERRE_SUM_CUTOFF: usize = 12;

/// ln(n!) by direct summation; exact to f64 rounding for the sizes used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Binomial coefficient with a real upper argument, as a product.
fn binomial_real(n: f64, j: usize) -> f64 {
    let mut acc = 1.0;
    for i in 1..=j {
        acc *= (n - j as f64 + i as f64) / i as f64;
    }
    acc
}

/// Generalized Laguerre polynomial L_k^alpha(x).
///
/// Uses the defining alternating sum for k <= 12 and the three-term
/// recurrence above that; the two agree to ~1e-12 relative on the overlap.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    if k <= LAGUERRE_SUM_CUTOFF {
        laguerre_sum(k, alpha, x)
    } else {
        laguerre_recurrence(k, alpha, x)
    }
}

/// Defining sum: sum_{j=0}^k (-1)^j binom(k+alpha, k-j) x^j / j!.
pub(crate) fn laguerre_sum(k: usize, alpha: f64, x: f64) -> f64 {
    let mut acc = 0.0;
    let mut xpow_over_fact = 1.0;
    for j in 0..=k {
        if j > 0 {
            xpow_over_fact *= x / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial_real(k as f64 + alpha, k - j) * xpow_over_fact;
    }
    acc
}

/// Three-term recurrence: (n+1) L_{n+1} = (2n+1+alpha-x) L_n - (n+alpha) L_{n-1}.
pub(crate) fn laguerre_recurrence(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for n in 1..k {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + alpha - x) * cur - (nf + alpha) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Zeros of L_{k-1}^0, ascending. Empty for k = 1.
///
/// Golub-Welsch on the Jacobi matrix of the Laguerre weight, followed by one
/// Newton step per root (the derivative is -L_{k-2}^1).
pub fn laguerre_zeros(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(FockError::InvalidArgument(
            "laguerre_zeros requires k >= 1".into(),
        ));
    }
    let n = k - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
    let offdiag: Vec<f64> = (1..n).map(|i| i as f64).collect();
    let (mut nodes, _) = gauss_from_jacobi(&diag, &offdiag, 1.0)?;
    for x in nodes.iter_mut() {
        let fx = laguerre(n, 0.0, *x);
        let dfx = -laguerre(n - 1, 1.0, *x);
        if dfx != 0.0 {
            *x -= fx / dfx;
        }
    }
    Ok(nodes)
}

/// Nodes and weights of the Gauss rule attached to a symmetric tridiagonal
/// Jacobi matrix; mu0 is the total mass of the weight function.
fn gauss_from_jacobi(diag: &[f64], offdiag: &[f64], mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, d) in diag.iter().enumerate() {
        m[(i, i)] = *d;
    }
    for (i, b) in offdiag.iter().enumerate() {
        m[(i, i + 1)] = *b;
        m[(i + 1, i)] = *b;
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

fn gauss_laguerre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let diag: Vec<f64> = (0..order).map(|i| 2.0 * i as f64 + 1.0).collect();
    let offdiag: Vec<f64> = (1..order).map(|i| i as f64).collect();
    let (mut nodes, _) = gauss_from_jacobi(&diag, &offdiag, 1.0)?;
    // The Laguerre Jacobi matrix is ill-conditioned enough that eigenvalue
    // nodes lose ~5 digits in high moments; two Newton steps restore full
    // precision, and the closed-form weights then follow from L_{order+1}.
    let n = order;
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let fx = laguerre_recurrence(n, 0.0, *x);
            let dfx = -laguerre_recurrence(n - 1, 1.0, *x);
            if dfx != 0.0 {
                *x -= fx / dfx;
            }
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let l = (n as f64 + 1.0) * laguerre_recurrence(n + 1, 0.0, x);
            x / (l * l)
        })
        .collect();
    Ok((nodes, weights))
}

fn gauss_hermite(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let diag = vec![0.0; order];
    let offdiag: Vec<f64> = (1..order).map(|i| (i as f64 / 2.0).sqrt()).collect();
    gauss_from_jacobi(&diag, &offdiag, PI.sqrt())
}

fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let diag = vec![0.0; order];
    let offdiag: Vec<f64> = (1..order)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    gauss_from_jacobi(&diag, &offdiag, 2.0)
}

/// Reference measure a quadrature rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Measure {
    /// pi^-1 exp(-|z|^2) dA over the whole plane; weights sum to 1.
    GaussianMu,
    /// The Gaussian measure restricted to the disk of the given radius;
    /// weights sum to 1 - exp(-radius^2).
    GaussianMuDisk { radius: f64 },
    /// Plain area measure; `scale` records the node dilation the rule was
    /// built with (integrands should decay like exp(-|z|^2 / scale^2)).
    Lebesgue { scale: f64 },
}

/// Planar quadrature rule with positive weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub measure: Measure,
    /// Largest total monomial degree integrated exactly (see builders).
    pub exactness_degree: usize,
    /// Construction orders: (radial, angular) for polar rules, (per-axis,
    /// per-axis) for tensor rules. Lets consumers rebuild a compatible rule.
    pub orders: (usize, usize),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to a pointwise function.
    pub fn integrate(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| f(z) * w)
            .sum()
    }

    /// Applies the rule to samples aligned with `nodes`.
    pub fn integrate_samples(&self, samples: &[Complex64]) -> Result<Complex64> {
        if samples.len() != self.nodes.len() {
            return Err(FockError::InvalidArgument(format!(
                "sample count {} does not match rule size {}",
                samples.len(),
                self.nodes.len()
            )));
        }
        Ok(samples
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| s * w)
            .sum())
    }
}

/// Polar rule for the Gaussian measure: Gauss-Laguerre in |z|^2 crossed with
/// uniform angles.
///
/// Exact for z^p conj(z)^q whenever p + q <= exactness_degree, which is
/// min(4 * radial_order - 2, angular_order - 1): radial exactness binds on
/// the diagonal monomials (p = q), the angular count on the cross terms.
pub fn build_gaussian_quadrature(radial_order: usize, angular_order: usize) -> Result<QuadratureRule> {
    if radial_order == 0 || angular_order == 0 {
        return Err(FockError::InvalidArgument(
            "quadrature orders must be positive".into(),
        ));
    }
    let (s, ws) = gauss_laguerre(radial_order)?;
    let mut nodes = Vec::with_capacity(radial_order * angular_order);
    let mut weights = Vec::with_capacity(radial_order * angular_order);
    for (si, wi) in s.iter().zip(&ws) {
        let r = si.sqrt();
        let w = wi / angular_order as f64;
        for j in 0..angular_order {
            let th = 2.0 * PI * j as f64 / angular_order as f64;
            nodes.push(Complex64::from_polar(r, th));
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(FockError::QuadratureInsufficient(format!(
            "Gaussian rule weights sum to {total:.15}, expected 1"
        )));
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        measure: Measure::GaussianMu,
        exactness_degree: (4 * radial_order - 2).min(angular_order - 1),
        orders: (radial_order, angular_order),
    })
}

/// Gaussian-measure rule restricted to the disk |z| <= radius, for symbols
/// with a jump there: Gauss-Legendre in |z|^2 on [0, radius^2] with the
/// Gaussian density folded into the weights, crossed with uniform angles.
pub fn build_gaussian_disk_quadrature(
    radial_order: usize,
    angular_order: usize,
    radius: f64,
) -> Result<QuadratureRule> {
    if radial_order == 0 || angular_order == 0 {
        return Err(FockError::InvalidArgument(
            "quadrature orders must be positive".into(),
        ));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(FockError::InvalidArgument(format!(
            "disk radius must be positive and finite, got {radius}"
        )));
    }
    let (x, wx) = gauss_legendre(radial_order)?;
    let half = radius * radius / 2.0;
    let mut nodes = Vec::with_capacity(radial_order * angular_order);
    let mut weights = Vec::with_capacity(radial_order * angular_order);
    for (xi, wi) in x.iter().zip(&wx) {
        let s = half * (xi + 1.0);
        let w = half * wi * (-s).exp() / angular_order as f64;
        let r = s.sqrt();
        for j in 0..angular_order {
            let th = 2.0 * PI * j as f64 / angular_order as f64;
            nodes.push(Complex64::from_polar(r, th));
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    let expect = 1.0 - (-radius * radius).exp();
    if (total - expect).abs() > 1e-9 * (1.0 + expect) {
        return Err(FockError::QuadratureInsufficient(format!(
            "disk rule mass {total:.12} differs from {expect:.12}"
        )));
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        measure: Measure::GaussianMuDisk { radius },
        exactness_degree: (2 * radial_order - 1).min(angular_order - 1),
        orders: (radial_order, angular_order),
    })
}

/// Tensor Gauss-Hermite rule reweighted to Lebesgue measure, nodes dilated
/// by `scale`. Suitable for integrands decaying like exp(-|z|^2 / scale^2);
/// exactness_degree is the per-axis polynomial degree against that envelope.
pub fn build_lebesgue_quadrature(order_per_axis: usize, scale: f64) -> Result<QuadratureRule> {
    if order_per_axis == 0 {
        return Err(FockError::InvalidArgument(
            "quadrature orders must be positive".into(),
        ));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(FockError::InvalidArgument(format!(
            "lebesgue scale must be positive and finite, got {scale}"
        )));
    }
    let (x, wx) = gauss_hermite(order_per_axis)?;
    // Reweight: w_i exp(x_i^2) turns the Hermite rule into a plain rule for
    // smooth integrands with Gaussian decay.
    let lw: Vec<f64> = x
        .iter()
        .zip(&wx)
        .map(|(xi, wi)| wi * (xi * xi).exp())
        .collect();
    let n = order_per_axis;
    let mut nodes = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    let s2 = scale * scale;
    for i in 0..n {
        for j in 0..n {
            nodes.push(Complex64::new(scale * x[i], scale * x[j]));
            weights.push(s2 * lw[i] * lw[j]);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        measure: Measure::Lebesgue { scale },
        exactness_degree: 2 * order_per_axis - 1,
        orders: (order_per_axis, order_per_axis),
    })
}

/// Closed form of the Gaussian integral of a polynomial against an
/// exponential: integral of p(z, conj(z)) exp(a z + b conj(z) - c |z|^2) dA
/// equals (pi / c) [p(d/da, d/db) exp(a b / c)].
///
/// The derivative is taken symbolically: differentiating Q exp(ab/c) in a
/// maps the prefactor Q to dQ/da + (b/c) Q, and symmetrically in b, so each
/// monomial z^i conj(z)^j contributes those operators applied i and j times
/// to the constant 1, evaluated at (a, b).
pub fn gaussian_polynomial_integral(
    p: &BivariatePolynomial,
    a: Complex64,
    b: Complex64,
    c: f64,
) -> Result<Complex64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(FockError::InvalidArgument(format!(
            "gaussian_polynomial_integral requires c > 0, got {c}"
        )));
    }
    let inv_c = Complex64::new(1.0 / c, 0.0);
    // Prefactor polynomials live in the formal variables (A, B): row index =
    // power of A, column index = power of B.
    let d_a = |q: &BivariatePolynomial| q.diff_z().add(&q.mul_zbar().scale(inv_c));
    let d_b = |q: &BivariatePolynomial| q.diff_zbar().add(&q.mul_z().scale(inv_c));
    let mut total = Complex64::ZERO;
    for (i, j, coef) in p.terms() {
        let mut q = BivariatePolynomial::one();
        for _ in 0..j {
            q = d_b(&q);
        }
        for _ in 0..i {
            q = d_a(&q);
        }
        total += coef * q.eval_xy(a, b);
    }
    Ok(total * (PI / c) * (a * b / c).exp())
}
