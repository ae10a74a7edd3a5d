//! Zero sets of Laguerre polynomials, regularity scans of Fourier-Weyl
//! transforms, Toeplitz kernel witnesses, and partitions of block indices.
//!
//! An operator is called regular when its Fourier-Weyl transform never
//! vanishes; on component k >= 2 even the vacuum projector fails this, with
//! transform zeros on circles whose radii are square roots of Laguerre
//! zeros. These scans sample |F_W| on finite grids, so they certify
//! behavior on the grid only; the reports say so in their field names.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::basis::SpaceTag;
use crate::error::FockError;
use crate::operators::{
    extract_block, toeplitz_matrix, weyl_matrix, SymbolSpec, TruncatedOperator,
};
use crate::qha::fourier_weyl;
use crate::special::{laguerre_zeros, QuadratureRule};
use crate::Result;

/// The circle family on which component-k Toeplitz quantization is blind:
/// radii are square roots of the zeros of the Laguerre polynomial of
/// degree k - 1. Empty exactly when k = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSet {
    pub k: usize,
    /// Strictly increasing circle radii.
    pub radii: Vec<f64>,
}

pub fn sigma_set(k: usize) -> Result<SigmaSet> {
    let radii: Vec<f64> = laguerre_zeros(k)?.into_iter().map(f64::sqrt).collect();
    Ok(SigmaSet { k, radii })
}

impl SigmaSet {
    /// Distance from |xi| = r to the nearest circle; infinite when empty.
    pub fn nearest_distance(&self, r: f64) -> f64 {
        self.radii
            .iter()
            .map(|&rad| (r - rad).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Polar sampling grid: equispaced radii (excluding the origin) times
/// equispaced angles. Point order is radius-major, so the flat index of
/// (radius i, angle j) is i * n_angles + j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub n_angles: usize,
}

impl PolarGrid {
    pub fn new(max_radius: f64, n_radii: usize, n_angles: usize) -> Result<Self> {
        if !(max_radius > 0.0) || n_radii == 0 || n_angles == 0 {
            return Err(FockError::InvalidArgument(format!(
                "polar grid needs positive extent, got max_radius {max_radius}, \
                 {n_radii} radii, {n_angles} angles"
            )));
        }
        let step = max_radius / n_radii as f64;
        let radii = (1..=n_radii).map(|i| i as f64 * step).collect();
        Ok(Self { radii, n_angles })
    }

    /// 60 radii on (0, 3] times 32 angles: radial resolution 0.05, finer
    /// than the smallest gap between the circle radii for k <= 4.
    pub fn default_scan() -> Self {
        Self::new(3.0, 60, 32).expect("default grid parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.n_angles
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.radii {
            for j in 0..self.n_angles {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / self.n_angles as f64;
                out.push(Complex64::from_polar(r, theta));
            }
        }
        out
    }
}

/// Zero tolerance scaled to the operator: 1e-7 (1 + trace norm).
pub fn default_zero_tol(a: &TruncatedOperator) -> f64 {
    1e-7 * (1.0 + a.trace_norm())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub is_regular_on_grid: bool,
    pub min_abs: f64,
    /// Grid points where |F_W| fell to the tolerance or below.
    pub zero_points: Vec<Complex64>,
}

/// Fourier-Weyl values of one operator over a list of points.
pub fn fourier_weyl_values(a: &TruncatedOperator, grid: &[Complex64]) -> Result<Vec<Complex64>> {
    grid.iter().map(|&xi| fourier_weyl(a, xi)).collect()
}

/// Samples |F_W(A)| on the grid and reports whether it stayed above the
/// zero tolerance everywhere.
pub fn regularity_scan(
    a: &TruncatedOperator,
    grid: &[Complex64],
    tol: f64,
) -> Result<RegularityReport> {
    if grid.is_empty() {
        return Err(FockError::InvalidArgument(
            "regularity scan needs a nonempty grid".into(),
        ));
    }
    let mut min_abs = f64::INFINITY;
    let mut zero_points = Vec::new();
    for &xi in grid {
        let v = fourier_weyl(a, xi)?.norm();
        min_abs = min_abs.min(v);
        if v <= tol {
            zero_points.push(xi);
        }
    }
    Ok(RegularityReport {
        is_regular_on_grid: min_abs > tol,
        min_abs,
        zero_points,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InftyRegularityReport {
    /// Fraction of grid points with |F_W| at or below the tolerance.
    pub zero_fraction: f64,
    /// Sampling stand-in for "the complement of the zero set is dense":
    /// every grid point can see a value above the tolerance within two
    /// index steps (radially and angularly). True zero sets that are thin
    /// annuli pass; an operator whose transform dies on a fat region, or
    /// everywhere, fails. A proxy, not a proof of density.
    pub complement_dense_proxy: bool,
}

/// Scans for infinity-regularity: small zero set with nothing thick in it.
pub fn infty_regularity_scan(
    a: &TruncatedOperator,
    grid: &PolarGrid,
    tol: f64,
) -> Result<InftyRegularityReport> {
    let points = grid.points();
    if points.is_empty() {
        return Err(FockError::InvalidArgument(
            "infinity-regularity scan needs a nonempty grid".into(),
        ));
    }
    let values: Vec<f64> = fourier_weyl_values(a, &points)?
        .iter()
        .map(|v| v.norm())
        .collect();
    let n_r = grid.radii.len();
    let n_a = grid.n_angles;
    let zero_count = values.iter().filter(|&&v| v <= tol).count();
    let mut proxy = true;
    'outer: for i in 0..n_r {
        for j in 0..n_a {
            let mut witnessed = false;
            'search: for di in -2i64..=2 {
                let ii = i as i64 + di;
                if ii < 0 || ii >= n_r as i64 {
                    continue;
                }
                for dj in -2i64..=2 {
                    let jj = (j as i64 + dj).rem_euclid(n_a as i64);
                    if values[ii as usize * n_a + jj as usize] > tol {
                        witnessed = true;
                        break 'search;
                    }
                }
            }
            if !witnessed {
                proxy = false;
                break 'outer;
            }
        }
    }
    Ok(InftyRegularityReport {
        zero_fraction: zero_count as f64 / values.len() as f64,
        complement_dense_proxy: proxy,
    })
}

/// A symbol that one component's Toeplitz map annihilates while the
/// analytic component keeps it alive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelWitness {
    /// Base character; the effective symbol is `scale` times it.
    pub symbol: SymbolSpec,
    pub scale: f64,
    /// Inner-block norm of the scaled Toeplitz operator on component k.
    pub toeplitz_norm: f64,
    /// Inner-block distance of the scaled k = 1 Toeplitz operator from the
    /// Weyl shift W_xi.
    pub weyl_check_k1: f64,
}

/// Builds the witness symbol e^{|xi|^2/2} times the character at -xi, whose
/// component-k Toeplitz operator is L_{k-1}(|xi|^2) W_xi. On the analytic
/// component this is exactly W_xi; on component k it vanishes whenever |xi|
/// lies on a circle of `sigma_set(k)`.
pub fn toeplitz_kernel_witness(
    k: usize,
    xi: Complex64,
    n_trunc: usize,
    rule: &QuadratureRule,
) -> Result<KernelWitness> {
    let symbol = SymbolSpec::Character { xi: -xi };
    let scale = (xi.norm_sqr() / 2.0).exp();
    let inner = (n_trunc / 2).max(1);
    let factor = Complex64::new(scale, 0.0);

    let space_1 = SpaceTag::true_poly(1, n_trunc)?;
    let t_1 = toeplitz_matrix(&symbol, space_1, rule)?.scale(factor);
    let w = weyl_matrix(xi, space_1);
    let weyl_check_k1 = t_1.sub(&w)?.restrict(inner)?.operator_norm();

    let toeplitz_norm = if k == 1 {
        t_1.restrict(inner)?.operator_norm()
    } else {
        let space_k = SpaceTag::true_poly(k, n_trunc)?;
        let t_k = toeplitz_matrix(&symbol, space_k, rule)?.scale(factor);
        t_k.restrict(inner)?.operator_norm()
    };

    Ok(KernelWitness {
        symbol,
        scale,
        toeplitz_norm,
        weyl_check_k1,
    })
}

/// A partition of the n x n block-index set {1..n}^2 into classes. Blocks
/// of an operator on the n-component space respect the partition when they
/// agree within each class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub n: usize,
    /// Disjoint classes of (codomain component, domain component) pairs,
    /// 1-based, jointly covering {1..n}^2.
    pub classes: Vec<Vec<(usize, usize)>>,
}

impl Partition {
    pub fn new(n: usize, classes: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if n == 0 {
            return Err(FockError::InvalidArgument(
                "partition needs n >= 1".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        let mut total = 0usize;
        for class in &classes {
            if class.is_empty() {
                return Err(FockError::InvalidArgument(
                    "partition classes must be nonempty".into(),
                ));
            }
            for &(k, j) in class {
                if k == 0 || k > n || j == 0 || j > n {
                    return Err(FockError::InvalidArgument(format!(
                        "pair ({k},{j}) outside 1..={n}"
                    )));
                }
                if !seen.insert((k, j)) {
                    return Err(FockError::InvalidArgument(format!(
                        "pair ({k},{j}) appears in two classes"
                    )));
                }
                total += 1;
            }
        }
        if total != n * n {
            return Err(FockError::InvalidArgument(format!(
                "classes cover {total} of {} index pairs",
                n * n
            )));
        }
        Ok(Self { n, classes })
    }

    /// Minimal partition: one class holding every index pair.
    pub fn m_min(n: usize) -> Result<Self> {
        let class = (1..=n)
            .flat_map(|k| (1..=n).map(move |j| (k, j)))
            .collect();
        Self::new(n, vec![class])
    }

    /// Maximal partition: every index pair its own class.
    pub fn m_max(n: usize) -> Result<Self> {
        let classes = (1..=n)
            .flat_map(|k| (1..=n).map(move |j| vec![(k, j)]))
            .collect();
        Self::new(n, classes)
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }
}

/// Checks whether all blocks within each class agree entrywise (maximum
/// absolute difference at most tol). Blocks in different components are
/// directly comparable because the intertwiners are identity matrices in
/// canonical coordinates.
pub fn respects_partition(a: &TruncatedOperator, m: &Partition, tol: f64) -> Result<bool> {
    if a.domain != a.codomain || a.domain.n_components() != m.n {
        return Err(FockError::SpaceMismatch(format!(
            "partition over {} components, operator on {:?}",
            m.n, a.domain
        )));
    }
    for class in &m.classes {
        let (k0, j0) = class[0];
        let first = extract_block(a, k0 - 1, j0 - 1)?;
        for &(k, j) in &class[1..] {
            let other = extract_block(a, k - 1, j - 1)?;
            let diff = &first - &other;
            if diff.iter().any(|e| e.norm() > tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Places one block at every block position of the given space: the
/// canonical construction of an operator that respects the minimal
/// partition exactly.
pub fn tile_block(space: SpaceTag, block: &DMatrix<Complex64>) -> Result<TruncatedOperator> {
    let n = space.truncation;
    if block.nrows() != n || block.ncols() != n {
        return Err(FockError::InvalidArgument(format!(
            "block is {}x{}, space truncation is {n}",
            block.nrows(),
            block.ncols()
        )));
    }
    let parts = space.n_components();
    let mut matrix = DMatrix::zeros(space.dim(), space.dim());
    for i in 0..parts {
        for j in 0..parts {
            matrix.view_mut((i * n, j * n), (n, n)).copy_from(block);
        }
    }
    TruncatedOperator::on(space, matrix)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MRegularityReport {
    /// Scan of each block, indexed [codomain component][domain component].
    pub block_reports: Vec<Vec<RegularityReport>>,
    pub respects: bool,
    /// All blocks regular on the grid and the partition respected.
    pub is_m_regular: bool,
}

/// Block-wise regularity against a partition: every block's Fourier-Weyl
/// transform must clear the tolerance on the grid, and the blocks must
/// respect the partition. Block transforms are traces against the same
/// component-independent Weyl matrix, built once per grid point.
pub fn m_regularity_scan(
    a: &TruncatedOperator,
    m: &Partition,
    grid: &[Complex64],
    tol: f64,
) -> Result<MRegularityReport> {
    if a.domain != a.codomain || a.domain.n_components() != m.n {
        return Err(FockError::SpaceMismatch(format!(
            "partition over {} components, operator on {:?}",
            m.n, a.domain
        )));
    }
    if grid.is_empty() {
        return Err(FockError::InvalidArgument(
            "regularity scan needs a nonempty grid".into(),
        ));
    }
    let n = m.n;
    let nt = a.domain.truncation;
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(extract_block(a, i, j)?);
        }
        blocks.push(row);
    }
    let probe = SpaceTag::true_poly(1, nt)?;
    let mut min_abs = vec![vec![f64::INFINITY; n]; n];
    let mut zero_points = vec![vec![Vec::new(); n]; n];
    for &xi in grid {
        let w = weyl_matrix(xi, probe);
        for i in 0..n {
            for j in 0..n {
                let mut tr = Complex64::new(0.0, 0.0);
                for p in 0..nt {
                    for q in 0..nt {
                        tr += blocks[i][j][(p, q)] * w.matrix[(q, p)];
                    }
                }
                let v = tr.norm();
                min_abs[i][j] = min_abs[i][j].min(v);
                if v <= tol {
                    zero_points[i][j].push(xi);
                }
            }
        }
    }
    let mut all_regular = true;
    let mut block_reports = Vec::with_capacity(n);
    for (i, zrow) in zero_points.into_iter().enumerate() {
        let mut row = Vec::with_capacity(n);
        for (j, zp) in zrow.into_iter().enumerate() {
            let regular = min_abs[i][j] > tol;
            all_regular &= regular;
            row.push(RegularityReport {
                is_regular_on_grid: regular,
                min_abs: min_abs[i][j],
                zero_points: zp,
            });
        }
        block_reports.push(row);
    }
    let respects = respects_partition(a, m, tol)?;
    Ok(MRegularityReport {
        block_reports,
        respects,
        is_m_regular: all_regular && respects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::normalized_kernel_coeffs;
    use crate::operators::{rank_one, ToeplitzBuilder};
    use crate::qha::{fourier_weyl_inverse, DecayClass, PhaseFunction};
    use crate::special::{build_gaussian_quadrature, build_lebesgue_quadrature, laguerre};
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vacuum_projector(k: usize, n: usize) -> TruncatedOperator {
        let space = SpaceTag::true_poly(k, n).unwrap();
        let v = normalized_kernel_coeffs(space, c(0.0, 0.0)).unwrap();
        rank_one(space, &v, &v).unwrap()
    }

    #[test]
    fn sigma_set_matches_closed_forms() {
        assert!(sigma_set(1).unwrap().radii.is_empty());

        let s2 = sigma_set(2).unwrap();
        assert_eq!(s2.radii.len(), 1);
        assert!((s2.radii[0] - 1.0).abs() < 1e-12);

        let s3 = sigma_set(3).unwrap();
        let expect = [(2.0 - 2.0f64.sqrt()).sqrt(), (2.0 + 2.0f64.sqrt()).sqrt()];
        assert_eq!(s3.radii.len(), 2);
        for (got, want) in s3.radii.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10);
        }

        for k in 2..=6 {
            let s = sigma_set(k).unwrap();
            assert_eq!(s.radii.len(), k - 1);
            for pair in s.radii.windows(2) {
                assert!(pair[1] > pair[0]);
            }
            for &r in &s.radii {
                assert!(laguerre(k - 1, 0.0, r * r).abs() <= 1e-10);
            }
        }

        assert!((sigma_set(3).unwrap().nearest_distance(1.0) - 0.234).abs() < 1e-3);
        assert_eq!(sigma_set(1).unwrap().nearest_distance(2.0), f64::INFINITY);
    }

    #[test]
    fn polar_grid_shape_and_default() {
        let g = PolarGrid::default_scan();
        assert_eq!(g.radii.len(), 60);
        assert_eq!(g.n_angles, 32);
        assert_eq!(g.len(), 1920);
        assert!((g.radii[0] - 0.05).abs() < 1e-15);
        assert!((g.radii[59] - 3.0).abs() < 1e-15);
        let pts = g.points();
        assert_eq!(pts.len(), 1920);
        assert!((pts[0] - c(0.05, 0.0)).norm() < 1e-15);
        assert!((pts[32].norm() - 0.1).abs() < 1e-15);
        assert!(PolarGrid::new(-1.0, 10, 8).is_err());
        assert!(PolarGrid::new(2.0, 0, 8).is_err());
    }

    #[test]
    fn vacuum_projector_is_regular_on_the_analytic_component() {
        let a = vacuum_projector(1, 64);
        let grid = PolarGrid::default_scan().points();
        let rep = regularity_scan(&a, &grid, default_zero_tol(&a)).unwrap();
        assert!(rep.is_regular_on_grid);
        assert!(rep.zero_points.is_empty());
        // |F_W| = e^{-r^2/2} bottoms out at the grid rim r = 3.
        assert!((rep.min_abs - (-4.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn vacuum_projector_zeros_cluster_on_the_unit_circle_for_k2() {
        let a = vacuum_projector(2, 64);
        let grid = PolarGrid::default_scan().points();
        let rep = regularity_scan(&a, &grid, default_zero_tol(&a)).unwrap();
        assert!(!rep.is_regular_on_grid);
        assert_eq!(rep.zero_points.len(), 32, "one zero circle in the grid");
        for zp in &rep.zero_points {
            assert!((zp.norm() - 1.0).abs() < 1e-12);
        }
        // The transform changes sign across the circle along any ray.
        let before = fourier_weyl(&a, c(0.9, 0.0)).unwrap();
        let after = fourier_weyl(&a, c(1.1, 0.0)).unwrap();
        assert!(before.re > 0.0 && after.re < 0.0);
        assert!(before.im.abs() < 1e-12 && after.im.abs() < 1e-12);
    }

    #[test]
    fn squared_inverse_transform_operator_is_regular() {
        // Regular operators exist: reconstruct A with transform
        // e^{-|xi|^2/2} and square it; the scan stays clear of zero.
        let space = SpaceTag::true_poly(1, 48).unwrap();
        let rule = build_lebesgue_quadrature(40, 1.0).unwrap();
        let values: Vec<Complex64> = rule
            .nodes
            .iter()
            .map(|&xi| c((-xi.norm_sqr() / 2.0).exp(), 0.0))
            .collect();
        let f = PhaseFunction::new(
            SymbolSpec::Grid { values },
            DecayClass::GaussianDecay { t: 2.0 },
        );
        let a = fourier_weyl_inverse(&f, space, &rule).unwrap();
        let a2 = a.compose(&a).unwrap();
        let grid = PolarGrid::default_scan().points();
        let rep = regularity_scan(&a2, &grid, default_zero_tol(&a2)).unwrap();
        assert!(rep.is_regular_on_grid, "min {}", rep.min_abs);
        // A is idempotent up to quadrature error, so the squared transform
        // still bottoms out near e^{-9/2}.
        assert!((rep.min_abs - (-4.5f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn infty_regularity_proxy_separates_thin_zero_sets_from_dead_operators() {
        let grid = PolarGrid::default_scan();

        let a2 = vacuum_projector(2, 64);
        let rep = infty_regularity_scan(&a2, &grid, default_zero_tol(&a2)).unwrap();
        assert!(rep.zero_fraction > 0.0 && rep.zero_fraction <= 0.05);
        assert!(rep.complement_dense_proxy);

        let a1 = vacuum_projector(1, 64);
        let rep = infty_regularity_scan(&a1, &grid, default_zero_tol(&a1)).unwrap();
        assert_eq!(rep.zero_fraction, 0.0);
        assert!(rep.complement_dense_proxy);

        let space = SpaceTag::true_poly(2, 64).unwrap();
        let zero = TruncatedOperator::zero(space, space);
        let rep = infty_regularity_scan(&zero, &grid, 1e-12).unwrap();
        assert_eq!(rep.zero_fraction, 1.0);
        assert!(!rep.complement_dense_proxy);
    }

    #[test]
    fn kernel_witness_kills_component_two_on_the_unit_circle() {
        let rule = build_gaussian_quadrature(80, 160).unwrap();

        let w = toeplitz_kernel_witness(2, c(1.0, 0.0), 48, &rule).unwrap();
        assert!(w.toeplitz_norm <= 1e-6, "norm {}", w.toeplitz_norm);
        assert!(w.weyl_check_k1 <= 1e-6, "weyl check {}", w.weyl_check_k1);
        assert!((w.scale - 0.5f64.exp()).abs() < 1e-15);
        assert!(matches!(w.symbol, SymbolSpec::Character { xi } if (xi + c(1.0, 0.0)).norm() < 1e-15));

        // At the origin the scaled operator is the identity.
        let w0 = toeplitz_kernel_witness(2, c(0.0, 0.0), 48, &rule).unwrap();
        assert!((w0.toeplitz_norm - 1.0).abs() < 1e-9);
        assert!(w0.weyl_check_k1 <= 1e-9);

        // The analytic component never loses the symbol.
        let w1 = toeplitz_kernel_witness(1, c(0.8, -0.3), 48, &rule).unwrap();
        assert!(w1.toeplitz_norm > 0.5);
        assert!(w1.weyl_check_k1 <= 1e-6);
    }

    #[test]
    fn witness_norm_roots_sit_on_sigma_radii() {
        // The (0,0) entry of the scaled Toeplitz operator carries the sign
        // of L_{k-1}(r^2), so bisection on it localizes each vanishing
        // radius; the witness norm collapses there.
        let rule = build_gaussian_quadrature(60, 120).unwrap();
        let n = 32;
        let brackets: [(usize, f64, f64); 3] =
            [(2, 0.8, 1.2), (3, 0.6, 0.9), (3, 1.6, 2.0)];
        for (k, mut lo, mut hi) in brackets {
            let space = SpaceTag::true_poly(k, n).unwrap();
            let builder = ToeplitzBuilder::new(space, &rule).unwrap();
            let entry_sign = |r: f64| -> f64 {
                let xi = c(r, 0.0);
                let values: Vec<Complex64> = rule
                    .nodes
                    .iter()
                    .map(|&z| SymbolSpec::Character { xi: -xi }.eval(z).unwrap())
                    .collect();
                let t = builder.build_from_values(&values).unwrap();
                t.matrix[(0, 0)].re.signum()
            };
            assert!(entry_sign(lo) * entry_sign(hi) < 0.0, "bracket must straddle");
            for _ in 0..13 {
                let mid = 0.5 * (lo + hi);
                if entry_sign(lo) * entry_sign(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            let sigma = sigma_set(k).unwrap();
            assert!(
                sigma.nearest_distance(root) <= 1e-4,
                "k={k}: root {root} vs {:?}",
                sigma.radii
            );
            let w = toeplitz_kernel_witness(k, c(root, 0.0), n, &rule).unwrap();
            assert!(w.toeplitz_norm <= 1e-3, "k={k}: residual {}", w.toeplitz_norm);
        }
    }

    #[test]
    fn partition_constructors_and_validation() {
        let mn = Partition::m_min(3).unwrap();
        assert_eq!(mn.n_classes(), 1);
        assert_eq!(mn.classes[0].len(), 9);

        let mx = Partition::m_max(3).unwrap();
        assert_eq!(mx.n_classes(), 9);
        assert!(mx.classes.iter().all(|cl| cl.len() == 1));

        // Missing and duplicated pairs are rejected.
        assert!(Partition::new(2, vec![vec![(1, 1), (1, 2), (2, 1)]]).is_err());
        assert!(Partition::new(
            2,
            vec![vec![(1, 1), (1, 2)], vec![(1, 2), (2, 1), (2, 2)]]
        )
        .is_err());
        assert!(Partition::new(2, vec![vec![(1, 1), (1, 2), (2, 1), (2, 3)]]).is_err());
        assert!(Partition::new(0, vec![]).is_err());

        let diag = Partition::new(
            2,
            vec![vec![(1, 1), (2, 2)], vec![(1, 2), (2, 1)]],
        )
        .unwrap();
        assert_eq!(diag.n_classes(), 2);
    }

    #[test]
    fn respects_partition_separates_tiled_and_distinct_blocks() {
        let space = SpaceTag::full_poly(2, 12).unwrap();
        let n = 12;

        let block = DMatrix::from_fn(n, n, |i, j| c((i + 2 * j) as f64, j as f64));
        let tiled = tile_block(space, &block).unwrap();
        for m in [
            Partition::m_min(2).unwrap(),
            Partition::m_max(2).unwrap(),
            Partition::new(2, vec![vec![(1, 1), (2, 2)], vec![(1, 2), (2, 1)]]).unwrap(),
        ] {
            assert!(respects_partition(&tiled, &m, 1e-14).unwrap());
        }

        let blocks = vec![
            vec![DMatrix::identity(n, n), DMatrix::zeros(n, n)],
            vec![
                DMatrix::zeros(n, n),
                DMatrix::identity(n, n).map(|e: Complex64| e * 2.0),
            ],
        ];
        let distinct = crate::operators::assemble_blocks(space, space, &blocks).unwrap();
        assert!(respects_partition(&distinct, &Partition::m_max(2).unwrap(), 1e-14).unwrap());
        assert!(!respects_partition(&distinct, &Partition::m_min(2).unwrap(), 1e-14).unwrap());

        let probe = SpaceTag::true_poly(1, 12).unwrap();
        let wrong = TruncatedOperator::identity(probe);
        assert!(respects_partition(&wrong, &Partition::m_min(2).unwrap(), 1e-14).is_err());
    }

    #[test]
    fn gaussian_toeplitz_couples_blocks_but_its_tiling_respects_m_min() {
        let space = SpaceTag::full_poly(2, 16).unwrap();
        let rule = build_gaussian_quadrature(40, 80).unwrap();
        let t = toeplitz_matrix(&SymbolSpec::Gaussian { t: 1.0 }, space, &rule).unwrap();
        let m_min = Partition::m_min(2).unwrap();
        assert!(!respects_partition(&t, &m_min, 1e-10).unwrap());

        let b = extract_block(&t, 0, 0).unwrap();
        let tiled = tile_block(space, &b).unwrap();
        assert!(respects_partition(&tiled, &m_min, 1e-14).unwrap());
    }

    #[test]
    fn m_regularity_separates_transported_and_component_kernels() {
        let n = 48;
        let space = SpaceTag::full_poly(2, n).unwrap();
        let grid = PolarGrid::default_scan().points();
        let m_max = Partition::m_max(2).unwrap();

        // Blocks l_{0,j} (x) l_{0,k}: every block is the (0,0) matrix unit,
        // whose transform e^{-|xi|^2/2} never vanishes.
        let l0 = {
            let mut v = DVector::zeros(n);
            v[0] = c(1.0, 0.0);
            v
        };
        let unit = &l0 * l0.adjoint();
        let blocks = vec![
            vec![unit.clone(), unit.clone()],
            vec![unit.clone(), unit.clone()],
        ];
        let transported = crate::operators::assemble_blocks(space, space, &blocks).unwrap();
        let rep = m_regularity_scan(&transported, &m_max, &grid, 1e-7).unwrap();
        assert!(rep.is_m_regular);
        assert!(rep.respects);
        assert!(rep.block_reports[1][0].is_regular_on_grid);

        // Blocks k_{0,(j)} (x) k_{0,(k)}: the (2,2) block's transform
        // vanishes on the unit circle, sinking the scan.
        let u1 = DVector::from_vec(
            normalized_kernel_coeffs(SpaceTag::true_poly(1, n).unwrap(), c(0.0, 0.0)).unwrap(),
        );
        let u2 = DVector::from_vec(
            normalized_kernel_coeffs(SpaceTag::true_poly(2, n).unwrap(), c(0.0, 0.0)).unwrap(),
        );
        let comps = [u1, u2];
        let mut kblocks = Vec::new();
        for i in 0..2 {
            let mut row = Vec::new();
            for j in 0..2 {
                row.push(&comps[i] * comps[j].adjoint());
            }
            kblocks.push(row);
        }
        let component = crate::operators::assemble_blocks(space, space, &kblocks).unwrap();
        let rep = m_regularity_scan(&component, &m_max, &grid, 1e-7).unwrap();
        assert!(!rep.is_m_regular);
        assert!(!rep.block_reports[1][1].is_regular_on_grid);
        assert!(!rep.block_reports[1][1].zero_points.is_empty());
        // The purely analytic block stays regular.
        assert!(rep.block_reports[0][0].is_regular_on_grid);

        let zero = TruncatedOperator::zero(space, space);
        let rep = m_regularity_scan(&zero, &m_max, &grid, 1e-12).unwrap();
        assert!(!rep.is_m_regular);
    }
}
