//! Shifts, convolutions, Fourier transforms, Berezin transforms, heat
//! smoothing, and the shift-continuity modulus.
//!
//! The calculus pairs operators with phase-space functions: an operator can
//! be convolved with a function (giving an operator) or with another
//! operator (giving a function), and both transforms have a Fourier side,
//! the Fourier-Weyl transform for operators and the symplectic Fourier
//! transform for functions. All integrals over the plane are quadrature
//! sums on Lebesgue rules, with the rule's Gaussian scale checked against
//! the integrand's claimed decay.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{normalized_kernel_coeffs, transported_kernel_coeffs, SpaceTag};
use crate::error::FockError;
use crate::operators::{parity_matrix, trace_product, weyl_matrix, SymbolSpec, TruncatedOperator};
use crate::special::{build_lebesgue_quadrature, Measure, QuadratureRule};
use crate::Result;

/// Standard symplectic form 2 Im(z conj(w)).
pub fn symplectic_form(z: Complex64, w: Complex64) -> f64 {
    2.0 * (z * w.conj()).im
}

/// How fast a phase-space function decays, for matching quadrature rules to
/// integrands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decay", rename_all = "snake_case")]
pub enum DecayClass {
    /// |f(z)| falls off like exp(-|z|^2 / t).
    GaussianDecay { t: f64 },
    /// Bounded or polynomially growing. Convolution integrands then decay
    /// only through the shifted operator's matrix entries.
    SlowDecay,
}

/// A phase-space function: a symbol family plus its claimed decay class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFunction {
    pub symbol: SymbolSpec,
    pub decay: DecayClass,
}

impl PhaseFunction {
    pub fn new(symbol: SymbolSpec, decay: DecayClass) -> Self {
        Self { symbol, decay }
    }

    /// Infers the decay class from the symbol family: Gaussians carry their
    /// own rate, everything else is treated as slowly decaying.
    pub fn auto(symbol: SymbolSpec) -> Self {
        let decay = match &symbol {
            SymbolSpec::Gaussian { t } => DecayClass::GaussianDecay { t: *t },
            _ => DecayClass::SlowDecay,
        };
        Self { symbol, decay }
    }

    /// Decay time of f itself; None when no Gaussian decay is claimed.
    pub fn gaussian_time(&self) -> Option<f64> {
        match self.decay {
            DecayClass::GaussianDecay { t } => Some(t),
            DecayClass::SlowDecay => None,
        }
    }

    /// Decay time claimed for a convolution integrand f(z) alpha_z(A): the
    /// function's own Gaussian factor combined with one factor exp(-|z|^2)
    /// contributed by the matrix entries of the shifted operator. That entry
    /// decay holds for kernel-type operators (rank ones, Weyl shifts, finite
    /// combinations); operators without it need a wider rule than this
    /// estimate demands.
    fn convolution_decay_time(&self) -> f64 {
        match self.decay {
            DecayClass::GaussianDecay { t } => t / (1.0 + t),
            DecayClass::SlowDecay => 1.0,
        }
    }
}

fn lebesgue_scale(rule: &QuadratureRule) -> Result<f64> {
    match rule.measure {
        Measure::Lebesgue { scale } => Ok(scale),
        _ => Err(FockError::MeasureMismatch {
            expected: "Lebesgue".into(),
            got: format!("{:?}", rule.measure),
        }),
    }
}

fn require_square(a: &TruncatedOperator, what: &str) -> Result<()> {
    if a.domain != a.codomain {
        return Err(FockError::SpaceMismatch(format!(
            "{what} needs an operator from a space to itself"
        )));
    }
    Ok(())
}

/// Shift action on operators: W_z A W_{-z}, with the Weyl matrix of each
/// tagged space on its own side. The closed-form matrices satisfy
/// W_z^* = W_{-z} entrywise, so the reverse shift is exactly the adjoint.
pub fn shift(a: &TruncatedOperator, z: Complex64) -> TruncatedOperator {
    let wc = weyl_matrix(z, a.codomain);
    let wd = weyl_matrix(-z, a.domain);
    TruncatedOperator {
        domain: a.domain,
        codomain: a.codomain,
        matrix: &wc.matrix * &a.matrix * &wd.matrix,
    }
}

/// Convolution of a function with an operator: the quadrature sum
/// sum_i w_i f(z_i) alpha_{z_i}(A), a Bochner-type integral over the plane.
///
/// The rule must be a Lebesgue rule whose Gaussian scale covers the claimed
/// integrand decay (see `PhaseFunction::convolution_decay_time`); nodes
/// whose weighted symbol value is negligible are skipped. Summation order is
/// the node order, so results are bitwise reproducible.
pub fn convolve_fn_op(
    f: &PhaseFunction,
    a: &TruncatedOperator,
    rule: &QuadratureRule,
) -> Result<TruncatedOperator> {
    let scale = lebesgue_scale(rule)?;
    require_square(a, "convolution with a function")?;
    let tau = f.convolution_decay_time();
    if scale * scale < tau * (1.0 - 1e-9) {
        return Err(FockError::QuadratureInsufficient(format!(
            "rule scale {scale:.4} cannot resolve integrand decay exp(-|z|^2/{tau:.4}); \
             need scale >= {:.4}",
            tau.sqrt()
        )));
    }
    let values = f.symbol.values_on(rule)?;
    let weighted: Vec<Complex64> = values
        .iter()
        .zip(&rule.weights)
        .map(|(v, w)| v * *w)
        .collect();
    let max_w = weighted.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let space = a.domain;
    let mut acc = DMatrix::<Complex64>::zeros(space.dim(), space.dim());
    for (i, &z) in rule.nodes.iter().enumerate() {
        if weighted[i].norm() <= 1e-17 * max_w {
            continue;
        }
        let w = weyl_matrix(z, space);
        let moved = &w.matrix * &a.matrix * w.matrix.adjoint();
        acc += moved * weighted[i];
    }
    TruncatedOperator::on(space, acc)
}

/// Lebesgue rule matched to convolutions against the given function: the
/// scale is the square root of the claimed integrand decay time.
pub fn lebesgue_rule_for(f: &PhaseFunction, order_per_axis: usize) -> Result<QuadratureRule> {
    build_lebesgue_quadrature(order_per_axis, f.convolution_decay_time().sqrt())
}

/// Rule for heat smoothing at time t: scale sqrt(2t / (2 + t)).
pub fn heat_rule(t: f64, order_per_axis: usize) -> Result<QuadratureRule> {
    if !(t > 0.0) {
        return Err(FockError::InvalidArgument(format!(
            "heat smoothing needs t > 0, got {t}"
        )));
    }
    build_lebesgue_quadrature(order_per_axis, (2.0 * t / (2.0 + t)).sqrt())
}

/// Heat smoothing: convolution with the normalized Gaussian of time t.
pub fn heat_smooth(
    a: &TruncatedOperator,
    t: f64,
    rule: &QuadratureRule,
) -> Result<TruncatedOperator> {
    if !(t > 0.0) {
        return Err(FockError::InvalidArgument(format!(
            "heat smoothing needs t > 0, got {t}"
        )));
    }
    convolve_fn_op(&PhaseFunction::auto(SymbolSpec::Gaussian { t }), a, rule)
}

/// Convolution of two operators, evaluated at one point. See
/// `convolve_op_op_on` for the batch version.
pub fn convolve_op_op(
    a: &TruncatedOperator,
    b: &TruncatedOperator,
    z: Complex64,
) -> Result<Complex64> {
    Ok(convolve_op_op_on(a, b, &[z])?[0])
}

/// Operator-operator convolution (A * B)(z) = tr(A W_z U_a B U_b W_{-z}),
/// with each parity taken on its own space. The result is a function of z;
/// this evaluates it on a list of points, hoisting the z-independent part.
///
/// The operators may live on different components of equal truncation (the
/// identifications between components are identities in these coordinates);
/// mixed single/full spaces are rejected.
pub fn convolve_op_op_on(
    a: &TruncatedOperator,
    b: &TruncatedOperator,
    points: &[Complex64],
) -> Result<Vec<Complex64>> {
    require_square(a, "operator convolution")?;
    require_square(b, "operator convolution")?;
    if a.domain.truncation != b.domain.truncation
        || a.domain.n_components() != b.domain.n_components()
    {
        return Err(FockError::SpaceMismatch(format!(
            "operator convolution needs equal shapes, got {:?} vs {:?}",
            a.domain, b.domain
        )));
    }
    let ua = parity_matrix(a.domain);
    let ub = parity_matrix(b.domain);
    let core = &ua.matrix * &b.matrix * &ub.matrix;
    let space = a.domain;
    let dim = space.dim();
    let mut out = Vec::with_capacity(points.len());
    for &z in points {
        let w = weyl_matrix(z, space);
        let m = &w.matrix * &core * w.matrix.adjoint();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += a.matrix[(i, j)] * m[(j, i)];
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Fourier-Weyl transform of an operator at one phase-space point:
/// tr(A W_xi). The Weyl matrices are component-independent, so transported
/// operators give the same transform on every component.
pub fn fourier_weyl(a: &TruncatedOperator, xi: Complex64) -> Result<Complex64> {
    require_square(a, "the Fourier-Weyl transform")?;
    let w = weyl_matrix(xi, a.domain);
    trace_product(a, &w)
}

/// Inverse Fourier-Weyl transform: reconstructs the operator with a given
/// transform as A = pi^-1 integral of f(xi) W_{-xi} d xi, by quadrature.
/// The Weyl matrices themselves contribute entrywise decay exp(-|xi|^2/2),
/// so the rule scale must cover the combined decay 2t/(2+t) (or 2 when f
/// only claims slow decay).
pub fn fourier_weyl_inverse(
    f: &PhaseFunction,
    space: SpaceTag,
    rule: &QuadratureRule,
) -> Result<TruncatedOperator> {
    let scale = lebesgue_scale(rule)?;
    let tau = match f.gaussian_time() {
        Some(t) => 2.0 * t / (2.0 + t),
        None => 2.0,
    };
    if scale * scale < tau * (1.0 - 1e-9) {
        return Err(FockError::QuadratureInsufficient(format!(
            "rule scale {scale:.4} cannot resolve integrand decay exp(-|z|^2/{tau:.4}); \
             need scale >= {:.4}",
            tau.sqrt()
        )));
    }
    let values = f.symbol.values_on(rule)?;
    let weighted: Vec<Complex64> = values
        .iter()
        .zip(&rule.weights)
        .map(|(v, w)| v * *w)
        .collect();
    let max_w = weighted.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut acc = DMatrix::<Complex64>::zeros(space.dim(), space.dim());
    for (i, &xi) in rule.nodes.iter().enumerate() {
        if weighted[i].norm() <= 1e-17 * max_w {
            continue;
        }
        let w = weyl_matrix(-xi, space);
        acc += &w.matrix * weighted[i];
    }
    acc.unscale_mut(std::f64::consts::PI);
    TruncatedOperator::on(space, acc)
}

/// Symplectic Fourier transform with normalization 1/pi:
/// (F_sigma f)(xi) = pi^-1 integral of e^{-i sigma(xi, z)} f(z) dz.
/// Needs f with genuine Gaussian decay; characters and other bounded
/// symbols transform to point masses and are rejected.
pub fn symplectic_fourier(
    f: &PhaseFunction,
    xi: Complex64,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    let scale = lebesgue_scale(rule)?;
    let t = f.gaussian_time().ok_or_else(|| {
        FockError::InvalidArgument(
            "symplectic Fourier by quadrature needs a Gaussian-decay function".into(),
        )
    })?;
    if scale * scale < t * (1.0 - 1e-9) {
        return Err(FockError::QuadratureInsufficient(format!(
            "rule scale {scale:.4} cannot resolve decay exp(-|z|^2/{t:.4})"
        )));
    }
    let values = f.symbol.values_on(rule)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &z) in rule.nodes.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -symplectic_form(xi, z));
        acc += values[i] * phase * rule.weights[i];
    }
    Ok(acc / std::f64::consts::PI)
}

/// Berezin transform: the diagonal expectation <A k_z, k_z> against the
/// normalized kernel of the operator's space.
pub fn berezin(a: &TruncatedOperator, z: Complex64) -> Result<Complex64> {
    require_square(a, "the Berezin transform")?;
    let v = DVector::from_vec(normalized_kernel_coeffs(a.domain, z)?);
    let av = &a.matrix * &v;
    Ok(v.dotc(&av))
}

fn transported_vector(space: SpaceTag, component: usize, z: Complex64) -> Result<DVector<Complex64>> {
    let pos = space
        .components()
        .position(|c| c == component)
        .ok_or_else(|| {
            FockError::InvalidArgument(format!(
                "component {component} is not carried by {:?}",
                space.kind
            ))
        })?;
    let n = space.truncation;
    let block = transported_kernel_coeffs(z, n);
    let mut v = DVector::zeros(space.dim());
    for m in 0..n {
        v[pos * n + m] = block[m];
    }
    Ok(v)
}

/// Matrix-element Berezin transform against transported kernels:
/// <A l_{z,j}, l_{z,k}> where l_{z,k} is the analytic kernel carried into
/// component k (coefficients e^{-|z|^2/2} conj(z)^m / sqrt(m!) in that
/// component's block). j indexes a domain component, k a codomain component.
pub fn generalized_berezin(
    a: &TruncatedOperator,
    j: usize,
    k: usize,
    z: Complex64,
) -> Result<Complex64> {
    let l_dom = transported_vector(a.domain, j, z)?;
    let l_cod = transported_vector(a.codomain, k, z)?;
    let al = &a.matrix * &l_dom;
    Ok(l_cod.dotc(&al))
}

/// All matrix elements at once: entry (row, col) pairs codomain component
/// `row` with domain component `col` (positions, not labels).
pub fn generalized_berezin_matrix(
    a: &TruncatedOperator,
    z: Complex64,
) -> Result<DMatrix<Complex64>> {
    let cod: Vec<usize> = a.codomain.components().collect();
    let dom: Vec<usize> = a.domain.components().collect();
    let mut out = DMatrix::zeros(cod.len(), dom.len());
    for (i, &k) in cod.iter().enumerate() {
        for (jj, &j) in dom.iter().enumerate() {
            out[(i, jj)] = generalized_berezin(a, j, k, z)?;
        }
    }
    Ok(out)
}

/// Estimated shift-continuity modulus omega(delta) over a list of radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct C1Report {
    /// Radii, ascending.
    pub deltas: Vec<f64>,
    /// Largest shift response seen on each circle alone.
    pub circle_sup: Vec<f64>,
    /// omega(delta): running maximum over all circles of radius <= delta,
    /// so the estimate is nondecreasing by construction.
    pub moduli: Vec<f64>,
    /// Samples per circle.
    pub sample_count: usize,
}

/// Estimates omega(delta) = sup_{|z| <= delta} ||alpha_z(A) - A|| over the
/// given radii, sampling each circle at equispaced deterministic angles.
/// Norms are taken on the inner half block, where the truncated shift is
/// faithful; the raw full-block difference would be dominated by edge
/// artifacts of the cut-off.
pub fn c1_modulus(
    a: &TruncatedOperator,
    deltas: &[f64],
    samples_per_circle: usize,
) -> Result<C1Report> {
    require_square(a, "the continuity modulus")?;
    if deltas.is_empty() || samples_per_circle == 0 {
        return Err(FockError::InvalidArgument(
            "need at least one radius and one sample per circle".into(),
        ));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(FockError::InvalidArgument(
            "shift radii must be positive and finite".into(),
        ));
    }
    let mut ds = deltas.to_vec();
    ds.sort_by(f64::total_cmp);
    let inner = (a.domain.truncation / 2).max(1);
    let base = a.restrict(inner)?;
    let mut circle_sup = Vec::with_capacity(ds.len());
    for &d in &ds {
        let mut sup = 0.0f64;
        for s in 0..samples_per_circle {
            let theta = 2.0 * std::f64::consts::PI * s as f64 / samples_per_circle as f64;
            let z = Complex64::from_polar(d, theta);
            let moved = shift(a, z).restrict(inner)?;
            let diff = moved.sub(&base)?;
            sup = sup.max(diff.operator_norm());
        }
        circle_sup.push(sup);
    }
    let mut moduli = Vec::with_capacity(ds.len());
    let mut running = 0.0f64;
    for &v in &circle_sup {
        running = running.max(v);
        moduli.push(running);
    }
    Ok(C1Report {
        deltas: ds,
        circle_sup,
        moduli,
        sample_count: samples_per_circle,
    })
}
