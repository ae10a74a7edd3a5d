//! Truncated operators between polyanalytic components.
//!
//! Every operator is a dense matrix in the canonical bases, tagged with its
//! domain and codomain space so compositions and comparisons cannot silently
//! mix spaces or truncations. Weyl shifts come from a closed form per entry
//! (`weyl_matrix`); multiply-then-project operators are assembled by
//! quadrature (`toeplitz_matrix`); the unitary identifications between
//! components are identity matrices in these coordinates
//! (`intertwiner_matrix`). Quadrature variants of the closed-form
//! constructions are kept alongside as cross-checks.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{
    basis_function, evaluate_basis_on_rule, lowering_apply, raising_apply, SpaceTag,
};
use crate::error::FockError;
use crate::special::{
    build_gaussian_disk_quadrature, laguerre, ln_factorial, Measure, QuadratureRule,
};
use crate::Result;

/// Largest dimension for which norms go through a full SVD; beyond this,
/// `operator_norm` switches to power iteration on the normal matrix.
pub const SVD_DIRECT_LIMIT: usize = 256;

/// A matrix between two truncated spaces, in canonical coordinates.
///
/// Rows index the codomain basis, columns the domain basis; for a space with
/// several components the index of `e_{k,m}` is
/// `component_position * truncation + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub domain: SpaceTag,
    pub codomain: SpaceTag,
    pub matrix: DMatrix<Complex64>,
}

impl TruncatedOperator {
    pub fn new(domain: SpaceTag, codomain: SpaceTag, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != codomain.dim() || matrix.ncols() != domain.dim() {
            return Err(FockError::SpaceMismatch(format!(
                "matrix is {}x{} but the tagged spaces need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(Self {
            domain,
            codomain,
            matrix,
        })
    }

    /// Square operator acting on a single space.
    pub fn on(space: SpaceTag, matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(space, space, matrix)
    }

    pub fn identity(space: SpaceTag) -> Self {
        Self {
            domain: space,
            codomain: space,
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn zero(domain: SpaceTag, codomain: SpaceTag) -> Self {
        Self {
            domain,
            codomain,
            matrix: DMatrix::zeros(codomain.dim(), domain.dim()),
        }
    }

    pub fn apply(&self, coeffs: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if coeffs.len() != self.domain.dim() {
            return Err(FockError::SpaceMismatch(format!(
                "coefficient vector has length {}, domain dimension is {}",
                coeffs.len(),
                self.domain.dim()
            )));
        }
        Ok(&self.matrix * coeffs)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            domain: self.codomain,
            codomain: self.domain,
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self` after `other`: the product `self * other` as matrices.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.codomain != self.domain {
            return Err(FockError::SpaceMismatch(format!(
                "cannot compose: inner spaces disagree ({:?} vs {:?})",
                other.codomain, self.domain
            )));
        }
        Ok(Self {
            domain: other.domain,
            codomain: self.codomain,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_tags(other, "add")?;
        Ok(Self {
            domain: self.domain,
            codomain: self.codomain,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_tags(other, "subtract")?;
        Ok(Self {
            domain: self.domain,
            codomain: self.codomain,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            domain: self.domain,
            codomain: self.codomain,
            matrix: self.matrix.map(|x| x * c),
        }
    }

    fn check_same_tags(&self, other: &Self, what: &str) -> Result<()> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(FockError::SpaceMismatch(format!(
                "cannot {what}: operators live on different tagged spaces"
            )));
        }
        Ok(())
    }

    pub fn trace(&self) -> Result<Complex64> {
        if self.domain != self.codomain {
            return Err(FockError::SpaceMismatch(
                "trace requires an operator from a space to itself".into(),
            ));
        }
        Ok((0..self.matrix.nrows()).map(|i| self.matrix[(i, i)]).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let svd = self.matrix.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Spectral norm: full SVD up to `SVD_DIRECT_LIMIT`, power iteration on
    /// the normal matrix beyond that (relative tolerance 1e-10, at most 1e4
    /// iterations).
    pub fn operator_norm(&self) -> f64 {
        if self.matrix.nrows().max(self.matrix.ncols()) <= SVD_DIRECT_LIMIT {
            self.singular_values().first().copied().unwrap_or(0.0)
        } else {
            power_operator_norm(&self.matrix, 1e-10, 10_000)
        }
    }

    /// Sum of singular values. Always a full SVD; meant for moderate sizes.
    pub fn trace_norm(&self) -> f64 {
        self.singular_values().iter().sum()
    }

    /// Keeps the leading `new_trunc` degrees of every component block, in
    /// both domain and codomain. This is how truncation artifacts near the
    /// cut-off are excluded when two constructions are compared.
    pub fn restrict(&self, new_trunc: usize) -> Result<Self> {
        let nd = self.domain.truncation;
        let nc = self.codomain.truncation;
        if new_trunc == 0 || new_trunc > nd.min(nc) {
            return Err(FockError::InvalidArgument(format!(
                "restriction truncation {new_trunc} must lie in 1..={}",
                nd.min(nc)
            )));
        }
        let domain = SpaceTag {
            kind: self.domain.kind,
            truncation: new_trunc,
        };
        let codomain = SpaceTag {
            kind: self.codomain.kind,
            truncation: new_trunc,
        };
        let mut matrix = DMatrix::zeros(codomain.dim(), domain.dim());
        for ic in 0..self.codomain.n_components() {
            for jc in 0..self.domain.n_components() {
                let src = self.matrix.view((ic * nc, jc * nd), (new_trunc, new_trunc));
                matrix
                    .view_mut((ic * new_trunc, jc * new_trunc), (new_trunc, new_trunc))
                    .copy_from(&src);
            }
        }
        Ok(Self {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&OperatorData::pack(self))
            .map_err(|e| FockError::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let data: OperatorData =
            serde_json::from_str(text).map_err(|e| FockError::Serialization(e.to_string()))?;
        data.unpack()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// tr(A B) without forming the product; tags must make both orders square.
pub fn trace_product(a: &TruncatedOperator, b: &TruncatedOperator) -> Result<Complex64> {
    if a.domain != b.codomain || b.domain != a.codomain {
        return Err(FockError::SpaceMismatch(
            "trace of a product needs mutually inverse tags".into(),
        ));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.matrix.nrows() {
        for j in 0..a.matrix.ncols() {
            acc += a.matrix[(i, j)] * b.matrix[(j, i)];
        }
    }
    Ok(acc)
}

/// Spectral norm by power iteration on `A* A`, for matrices too large for a
/// direct SVD. Deterministic start vector; returns the last estimate if the
/// iteration cap is hit.
pub fn power_operator_norm(a: &DMatrix<Complex64>, tol: f64, max_iter: usize) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let n = a.ncols();
    let mut v = DVector::from_fn(n, |j, _| {
        Complex64::new(1.0 + 0.3 * ((j as f64) * 2.399_963_229_728_653).sin(), 0.0)
    });
    let nv = v.norm();
    v /= Complex64::new(nv, 0.0);
    let mut prev = 0.0;
    for _ in 0..max_iter {
        let w = a * &v;
        let u = a.adjoint() * w;
        let lambda = u.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        v = u / Complex64::new(lambda, 0.0);
        if (lambda - prev).abs() <= tol * lambda.max(1.0) {
            return lambda.sqrt();
        }
        prev = lambda;
    }
    prev.sqrt()
}

/// The block of `op` mapping the `domain_component`-th domain component into
/// the `codomain_component`-th codomain component (0-based positions).
pub fn extract_block(
    op: &TruncatedOperator,
    codomain_component: usize,
    domain_component: usize,
) -> Result<DMatrix<Complex64>> {
    if codomain_component >= op.codomain.n_components()
        || domain_component >= op.domain.n_components()
    {
        return Err(FockError::InvalidArgument(format!(
            "block ({codomain_component}, {domain_component}) out of range for {}x{} components",
            op.codomain.n_components(),
            op.domain.n_components()
        )));
    }
    let nc = op.codomain.truncation;
    let nd = op.domain.truncation;
    Ok(op
        .matrix
        .view((codomain_component * nc, domain_component * nd), (nc, nd))
        .into_owned())
}

/// Assembles an operator from per-component blocks, `blocks[i][j]` mapping
/// domain component j into codomain component i.
pub fn assemble_blocks(
    domain: SpaceTag,
    codomain: SpaceTag,
    blocks: &[Vec<DMatrix<Complex64>>],
) -> Result<TruncatedOperator> {
    let rows = codomain.n_components();
    let cols = domain.n_components();
    if blocks.len() != rows || blocks.iter().any(|r| r.len() != cols) {
        return Err(FockError::InvalidArgument(format!(
            "expected {rows}x{cols} blocks"
        )));
    }
    let nc = codomain.truncation;
    let nd = domain.truncation;
    let mut matrix = DMatrix::zeros(codomain.dim(), domain.dim());
    for (i, row) in blocks.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if b.nrows() != nc || b.ncols() != nd {
                return Err(FockError::InvalidArgument(format!(
                    "block ({i}, {j}) is {}x{}, expected {nc}x{nd}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            matrix.view_mut((i * nc, j * nd), (nc, nd)).copy_from(b);
        }
    }
    TruncatedOperator::new(domain, codomain, matrix)
}

/// Symbols (phase-space functions) the operator constructors understand.
///
/// The first five have pointwise formulas; `Grid` carries samples aligned
/// with a specific rule's node list and is checked for length at use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "symbol", rename_all = "snake_case")]
pub enum SymbolSpec {
    /// Unimodular plane wave z -> exp(xi conj(z) - conj(xi) z); the exponent
    /// is i times the symplectic form of (xi, z).
    Character { xi: Complex64 },
    Constant { value: Complex64 },
    /// Normalized heat kernel (pi t)^-1 exp(-|z|^2 / t), unit mass for t > 0.
    Gaussian { t: f64 },
    /// Indicator of the closed disk of the given radius.
    DiskIndicator { radius: f64 },
    /// Polynomial in |z|^2: sum_j coeffs[j] |z|^(2 j).
    RadialPoly { coeffs: Vec<f64> },
    /// Pointwise samples on the nodes of one particular quadrature rule.
    Grid { values: Vec<Complex64> },
}

impl SymbolSpec {
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            SymbolSpec::Character { xi } => Ok((xi * z.conj() - xi.conj() * z).exp()),
            SymbolSpec::Constant { value } => Ok(*value),
            SymbolSpec::Gaussian { t } => {
                if !(*t > 0.0) {
                    return Err(FockError::InvalidArgument(format!(
                        "gaussian symbol needs t > 0, got {t}"
                    )));
                }
                Ok(Complex64::new(
                    (-z.norm_sqr() / t).exp() / (std::f64::consts::PI * t),
                    0.0,
                ))
            }
            SymbolSpec::DiskIndicator { radius } => {
                if !(*radius > 0.0) {
                    return Err(FockError::InvalidArgument(format!(
                        "disk indicator needs radius > 0, got {radius}"
                    )));
                }
                Ok(Complex64::new(
                    if z.norm() <= *radius { 1.0 } else { 0.0 },
                    0.0,
                ))
            }
            SymbolSpec::RadialPoly { coeffs } => {
                let s = z.norm_sqr();
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * s + c;
                }
                Ok(Complex64::new(acc, 0.0))
            }
            SymbolSpec::Grid { .. } => Err(FockError::InvalidArgument(
                "grid symbol has samples on one rule only, no pointwise form".into(),
            )),
        }
    }

    /// Values on all nodes of a rule; the only way to consume a `Grid`.
    pub fn values_on(&self, rule: &QuadratureRule) -> Result<Vec<Complex64>> {
        if let SymbolSpec::Grid { values } = self {
            if values.len() != rule.len() {
                return Err(FockError::InvalidArgument(format!(
                    "grid symbol has {} samples, rule has {} nodes",
                    values.len(),
                    rule.len()
                )));
            }
            return Ok(values.clone());
        }
        rule.nodes.iter().map(|&z| self.eval(z)).collect()
    }

    pub fn label(&self) -> String {
        match self {
            SymbolSpec::Character { xi } => format!("character(xi={:.3}{:+.3}i)", xi.re, xi.im),
            SymbolSpec::Constant { value } => {
                format!("constant({:.3}{:+.3}i)", value.re, value.im)
            }
            SymbolSpec::Gaussian { t } => format!("gaussian(t={t:.3})"),
            SymbolSpec::DiskIndicator { radius } => format!("disk(radius={radius:.3})"),
            SymbolSpec::RadialPoly { coeffs } => format!("radial_poly(deg={})", coeffs.len()),
            SymbolSpec::Grid { values } => format!("grid({} samples)", values.len()),
        }
    }
}

/// Single-component Weyl shift matrix, in closed form. Entry (m, n) is
///
///   sqrt(n!/m!) conj(z)^(m-n) e^(-|z|^2/2) L_n^(m-n)(|z|^2)   for m >= n,
///   sqrt(m!/n!) (-z)^(n-m)    e^(-|z|^2/2) L_m^(n-m)(|z|^2)   for m < n,
///
/// evaluated through logarithms of the moduli so far off-diagonal entries
/// stay finite. The matrix is the same for every component.
fn weyl_core(z: Complex64, n_trunc: usize) -> DMatrix<Complex64> {
    if z.norm_sqr() == 0.0 {
        return DMatrix::identity(n_trunc, n_trunc);
    }
    let s = z.norm_sqr();
    let ln_r = z.norm().ln();
    let arg = z.arg();
    let mut w = DMatrix::zeros(n_trunc, n_trunc);
    for m in 0..n_trunc {
        for n in 0..n_trunc {
            let (small, d) = if m >= n { (n, m - n) } else { (m, n - m) };
            let ln_mag =
                0.5 * (ln_factorial(small) - ln_factorial(small + d)) + d as f64 * ln_r - s / 2.0;
            let lag = laguerre(small, d as f64, s);
            // conj(z)^d for m >= n, (-z)^d for m < n.
            let angle = if m >= n { -(d as f64) * arg } else { d as f64 * arg };
            let sign = if m < n && d % 2 == 1 { -1.0 } else { 1.0 };
            w[(m, n)] = Complex64::from_polar(sign * ln_mag.exp() * lag, angle);
        }
    }
    w
}

/// Weyl shift by z on the tagged space. Components are invariant under the
/// shift and all carry the same matrix, so the full-space version is block
/// diagonal with identical blocks.
pub fn weyl_matrix(z: Complex64, space: SpaceTag) -> TruncatedOperator {
    let n = space.truncation;
    let core = weyl_core(z, n);
    let comps = space.n_components();
    let mut matrix = DMatrix::zeros(space.dim(), space.dim());
    for c in 0..comps {
        matrix.view_mut((c * n, c * n), (n, n)).copy_from(&core);
    }
    TruncatedOperator {
        domain: space,
        codomain: space,
        matrix,
    }
}

/// Same matrix as `weyl_matrix`, but by projecting the shifted-and-phased
/// basis functions back onto the basis with a quadrature rule:
/// (W_z F)(w) = e^(w conj(z) - |z|^2/2) F(w - z). Kept as an independent
/// cross-check of the closed form; needs a Gaussian-measure rule with enough
/// resolution for degree 2(n_trunc + k) plus the exponential factor.
pub fn weyl_matrix_quadrature(
    z: Complex64,
    k: usize,
    n_trunc: usize,
    rule: &QuadratureRule,
) -> Result<DMatrix<Complex64>> {
    if !matches!(rule.measure, Measure::GaussianMu) {
        return Err(FockError::MeasureMismatch {
            expected: "GaussianMu".into(),
            got: format!("{:?}", rule.measure),
        });
    }
    let e = evaluate_basis_on_rule(k, n_trunc, rule)?;
    let mut shifted = DMatrix::zeros(rule.len(), n_trunc);
    for j in 0..n_trunc {
        let p = basis_function(k, j)?;
        for (i, &node) in rule.nodes.iter().enumerate() {
            shifted[(i, j)] = p.eval(node - z);
        }
    }
    let zb = z.conj();
    let half = Complex64::new(-z.norm_sqr() / 2.0, 0.0);
    for (i, &node) in rule.nodes.iter().enumerate() {
        let mult = (node * zb + half).exp() * rule.weights[i];
        for j in 0..n_trunc {
            shifted[(i, j)] *= mult;
        }
    }
    Ok(e.adjoint() * shifted)
}

/// Point reflection F(z) -> F(-z): diagonal with entries (-1)^(m + k - 1).
pub fn parity_matrix(space: SpaceTag) -> TruncatedOperator {
    let n = space.truncation;
    let mut matrix = DMatrix::zeros(space.dim(), space.dim());
    for (c, k) in space.components().enumerate() {
        for m in 0..n {
            let sign = if (m + k - 1) % 2 == 0 { 1.0 } else { -1.0 };
            matrix[(c * n + m, c * n + m)] = Complex64::new(sign, 0.0);
        }
    }
    TruncatedOperator {
        domain: space,
        codomain: space,
        matrix,
    }
}

/// Rank-one operator u (v, .) from coefficient vectors on the same space.
pub fn rank_one(space: SpaceTag, u: &[Complex64], v: &[Complex64]) -> Result<TruncatedOperator> {
    let dim = space.dim();
    if u.len() != dim || v.len() != dim {
        return Err(FockError::SpaceMismatch(format!(
            "rank-one factors have lengths {} and {}, space dimension is {dim}",
            u.len(),
            v.len()
        )));
    }
    let mut matrix = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            matrix[(i, j)] = u[i] * v[j].conj();
        }
    }
    Ok(TruncatedOperator {
        domain: space,
        codomain: space,
        matrix,
    })
}

fn toeplitz_needed_degree(space: SpaceTag) -> usize {
    let kmax = *space.components().end();
    2 * (space.truncation - 1 + kmax - 1)
}

fn check_toeplitz_exactness(space: SpaceTag, rule: &QuadratureRule) -> Result<()> {
    let needed = toeplitz_needed_degree(space);
    if rule.exactness_degree < needed {
        return Err(FockError::QuadratureInsufficient(format!(
            "basis products reach degree {needed}, rule is exact only to {}",
            rule.exactness_degree
        )));
    }
    Ok(())
}

/// Shared assembly: given basis evaluations per component and symbol values
/// on the nodes, form all blocks E_i^H diag(w f) E_j.
fn toeplitz_assemble(
    space: SpaceTag,
    weights: &[f64],
    evals: &[DMatrix<Complex64>],
    values: &[Complex64],
) -> DMatrix<Complex64> {
    let n = space.truncation;
    let mut out = DMatrix::zeros(space.dim(), space.dim());
    for (jc, ej) in evals.iter().enumerate() {
        let mut weighted = ej.clone();
        for i in 0..weights.len() {
            let wf = values[i] * weights[i];
            for col in 0..n {
                weighted[(i, col)] *= wf;
            }
        }
        for (ic, ei) in evals.iter().enumerate() {
            let block = ei.adjoint() * &weighted;
            out.view_mut((ic * n, jc * n), (n, n)).copy_from(&block);
        }
    }
    out
}

fn component_evals(space: SpaceTag, rule: &QuadratureRule) -> Result<Vec<DMatrix<Complex64>>> {
    space
        .components()
        .map(|k| evaluate_basis_on_rule(k, space.truncation, rule))
        .collect()
}

/// Multiply-by-f-then-project operator on the tagged space.
///
/// The rule must integrate against the Gaussian measure and be exact at
/// least to the degree of the basis Gram products; for smooth non-polynomial
/// symbols that floor is a necessary resolution check, not a guarantee.
/// A `DiskIndicator` symbol is routed through a disk-restricted rule built
/// at the same orders, because sampling a jump on a smooth rule converges
/// poorly.
pub fn toeplitz_matrix(
    symbol: &SymbolSpec,
    space: SpaceTag,
    rule: &QuadratureRule,
) -> Result<TruncatedOperator> {
    if let SymbolSpec::DiskIndicator { radius } = symbol {
        return toeplitz_disk(*radius, space, rule);
    }
    if !matches!(rule.measure, Measure::GaussianMu) {
        return Err(FockError::MeasureMismatch {
            expected: "GaussianMu".into(),
            got: format!("{:?}", rule.measure),
        });
    }
    check_toeplitz_exactness(space, rule)?;
    let values = symbol.values_on(rule)?;
    let evals = component_evals(space, rule)?;
    let matrix = toeplitz_assemble(space, &rule.weights, &evals, &values);
    TruncatedOperator::on(space, matrix)
}

fn toeplitz_disk(radius: f64, space: SpaceTag, rule: &QuadratureRule) -> Result<TruncatedOperator> {
    if !(radius > 0.0) {
        return Err(FockError::InvalidArgument(format!(
            "disk indicator needs radius > 0, got {radius}"
        )));
    }
    if !matches!(rule.measure, Measure::GaussianMu) {
        return Err(FockError::MeasureMismatch {
            expected: "GaussianMu".into(),
            got: format!("{:?}", rule.measure),
        });
    }
    let disk = build_gaussian_disk_quadrature(rule.orders.0, rule.orders.1, radius)?;
    check_toeplitz_exactness(space, &disk)?;
    let ones = vec![Complex64::new(1.0, 0.0); disk.len()];
    let evals = component_evals(space, &disk)?;
    let matrix = toeplitz_assemble(space, &disk.weights, &evals, &ones);
    TruncatedOperator::on(space, matrix)
}

/// Precomputed basis evaluations for building many Toeplitz operators on the
/// same space with the same rule (symbol sweeps).
pub struct ToeplitzBuilder {
    space: SpaceTag,
    rule: QuadratureRule,
    evals: Vec<DMatrix<Complex64>>,
}

impl ToeplitzBuilder {
    pub fn new(space: SpaceTag, rule: &QuadratureRule) -> Result<Self> {
        if !matches!(rule.measure, Measure::GaussianMu) {
            return Err(FockError::MeasureMismatch {
                expected: "GaussianMu".into(),
                got: format!("{:?}", rule.measure),
            });
        }
        check_toeplitz_exactness(space, rule)?;
        Ok(Self {
            space,
            rule: rule.clone(),
            evals: component_evals(space, rule)?,
        })
    }

    pub fn space(&self) -> SpaceTag {
        self.space
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn build(&self, symbol: &SymbolSpec) -> Result<TruncatedOperator> {
        if matches!(symbol, SymbolSpec::DiskIndicator { .. }) {
            // The disk route needs its own restricted rule; no cached state
            // applies.
            return toeplitz_matrix(symbol, self.space, &self.rule);
        }
        self.build_from_values(&symbol.values_on(&self.rule)?)
    }

    pub fn build_from_values(&self, values: &[Complex64]) -> Result<TruncatedOperator> {
        if values.len() != self.rule.len() {
            return Err(FockError::InvalidArgument(format!(
                "value vector has {} entries, rule has {} nodes",
                values.len(),
                self.rule.len()
            )));
        }
        let matrix = toeplitz_assemble(self.space, &self.rule.weights, &self.evals, values);
        TruncatedOperator::on(self.space, matrix)
    }
}

/// The canonical unitary identification between components: the identity
/// matrix in these coordinates, tagged with the right spaces.
pub fn intertwiner_matrix(k_from: usize, k_to: usize, n_trunc: usize) -> Result<TruncatedOperator> {
    let domain = SpaceTag::true_poly(k_from, n_trunc)?;
    let codomain = SpaceTag::true_poly(k_to, n_trunc)?;
    Ok(TruncatedOperator {
        domain,
        codomain,
        matrix: DMatrix::identity(n_trunc, n_trunc),
    })
}

/// The same identification computed the long way: walk each basis function
/// up or down the ladder (raising for k_to > k_from, lowering otherwise,
/// dividing by the sqrt normalizations) and project onto the target basis by
/// quadrature. Should reproduce the identity; kept as a cross-check.
pub fn intertwiner_matrix_quadrature(
    k_from: usize,
    k_to: usize,
    n_trunc: usize,
    rule: &QuadratureRule,
) -> Result<DMatrix<Complex64>> {
    if k_from == 0 || k_to == 0 || n_trunc == 0 {
        return Err(FockError::InvalidArgument(
            "components start at 1 and the truncation must be positive".into(),
        ));
    }
    if !matches!(rule.measure, Measure::GaussianMu) {
        return Err(FockError::MeasureMismatch {
            expected: "GaussianMu".into(),
            got: format!("{:?}", rule.measure),
        });
    }
    let needed = 2 * (n_trunc - 1 + k_from.max(k_to) - 1);
    if rule.exactness_degree < needed {
        return Err(FockError::QuadratureInsufficient(format!(
            "ladder products reach degree {needed}, rule is exact only to {}",
            rule.exactness_degree
        )));
    }
    let e_to = evaluate_basis_on_rule(k_to, n_trunc, rule)?;
    let mut chain = DMatrix::zeros(rule.len(), n_trunc);
    for m in 0..n_trunc {
        let mut p = (*basis_function(k_from, m)?).clone();
        if k_to > k_from {
            for j in k_from..k_to {
                p = raising_apply(&p).scale(Complex64::new(1.0 / (j as f64).sqrt(), 0.0));
            }
        } else {
            for j in ((k_to + 1)..=k_from).rev() {
                p = lowering_apply(&p).scale(Complex64::new(1.0 / ((j - 1) as f64).sqrt(), 0.0));
            }
        }
        for (i, &node) in rule.nodes.iter().enumerate() {
            chain[(i, m)] = p.eval(node) * rule.weights[i];
        }
    }
    Ok(e_to.adjoint() * chain)
}

/// Serialized form: space tags plus row-major interleaved re/im pairs.
/// `serde_json` prints f64 with enough digits to round-trip exactly.
#[derive(Serialize, Deserialize)]
struct OperatorData {
    domain: SpaceTag,
    codomain: SpaceTag,
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl OperatorData {
    fn pack(op: &TruncatedOperator) -> Self {
        let mut data = Vec::with_capacity(2 * op.matrix.len());
        for i in 0..op.matrix.nrows() {
            for j in 0..op.matrix.ncols() {
                data.push(op.matrix[(i, j)].re);
                data.push(op.matrix[(i, j)].im);
            }
        }
        Self {
            domain: op.domain,
            codomain: op.codomain,
            nrows: op.matrix.nrows(),
            ncols: op.matrix.ncols(),
            data,
        }
    }

    fn unpack(self) -> Result<TruncatedOperator> {
        if self.data.len() != 2 * self.nrows * self.ncols {
            return Err(FockError::Serialization(format!(
                "expected {} numbers for a {}x{} complex matrix, found {}",
                2 * self.nrows * self.ncols,
                self.nrows,
                self.ncols,
                self.data.len()
            )));
        }
        let mut matrix = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                let at = 2 * (i * self.ncols + j);
                matrix[(i, j)] = Complex64::new(self.data[at], self.data[at + 1]);
            }
        }
        TruncatedOperator::new(self.domain, self.codomain, matrix)
    }
}

/// Writes a matrix as `row,col,re,im` lines (all entries, row-major) with
/// 17 significant digits, which round-trips f64 exactly.
pub fn write_matrix_csv(m: &DMatrix<Complex64>, path: &Path) -> Result<()> {
    let mut text = String::from("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            text.push_str(&format!("{i},{j},{:.17e},{:.17e}\n", m[(i, j)].re, m[(i, j)].im));
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<Complex64>> {
    let text = std::fs::read_to_string(path)?;
    let mut entries = Vec::new();
    let mut nrows = 0usize;
    let mut ncols = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "row,col,re,im" {
                return Err(FockError::Serialization(format!(
                    "unexpected csv header: {line:?}"
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(FockError::Serialization(format!(
                "line {}: expected 4 fields, found {}",
                lineno + 1,
                parts.len()
            )));
        }
        let parse_idx = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| FockError::Serialization(format!("line {}: {e}", lineno + 1)))
        };
        let parse_f = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| FockError::Serialization(format!("line {}: {e}", lineno + 1)))
        };
        let (i, j) = (parse_idx(parts[0])?, parse_idx(parts[1])?);
        let v = Complex64::new(parse_f(parts[2])?, parse_f(parts[3])?);
        nrows = nrows.max(i + 1);
        ncols = ncols.max(j + 1);
        entries.push((i, j, v));
    }
    if entries.len() != nrows * ncols {
        return Err(FockError::Serialization(format!(
            "csv has {} entries, dense {}x{} needs {}",
            entries.len(),
            nrows,
            ncols,
            nrows * ncols
        )));
    }
    let mut m = DMatrix::zeros(nrows, ncols);
    for (i, j, v) in entries {
        m[(i, j)] = v;
    }
    Ok(m)
}
