//! Dense bivariate polynomials in z and conj(z).
//!
//! Coefficients are stored as a dense matrix indexed by (power of z, power of
//! conj(z)). Trailing all-zero rows and columns are trimmed by every
//! constructor and arithmetic operation, so degree queries are exact.

use num_complex::Complex64;

/// Polynomial sum of `coeff[p][q] * z^p * conj(z)^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePolynomial {
    /// `coeffs[p][q]` multiplies `z^p conj(z)^q`. Rows all have equal length.
    coeffs: Vec<Vec<Complex64>>,
}

impl BivariatePolynomial {
    /// Builds a polynomial from a coefficient matrix; rows may be ragged and
    /// trailing zeros are trimmed.
    pub fn new(rows: Vec<Vec<Complex64>>) -> Self {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut coeffs: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|mut r| {
                r.resize(width, Complex64::ZERO);
                r
            })
            .collect();
        Self::trim(&mut coeffs);
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, Complex64::ONE)
    }

    /// `c * z^p * conj(z)^q`.
    pub fn monomial(p: usize, q: usize, c: Complex64) -> Self {
        if c == Complex64::ZERO {
            return Self::zero();
        }
        let mut coeffs = vec![vec![Complex64::ZERO; q + 1]; p + 1];
        coeffs[p][q] = c;
        Self { coeffs }
    }

    fn trim(coeffs: &mut Vec<Vec<Complex64>>) {
        while coeffs
            .last()
            .is_some_and(|r| r.iter().all(|c| *c == Complex64::ZERO))
        {
            coeffs.pop();
        }
        let mut width = 0;
        for row in coeffs.iter() {
            let mut w = row.len();
            while w > 0 && row[w - 1] == Complex64::ZERO {
                w -= 1;
            }
            width = width.max(w);
        }
        for row in coeffs.iter_mut() {
            row.truncate(width);
            row.resize(width, Complex64::ZERO);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in z, or None for the zero polynomial.
    pub fn deg_z(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Degree in conj(z), or None for the zero polynomial.
    pub fn deg_zbar(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs[0].len() - 1)
        }
    }

    /// Total degree bound: deg_z + deg_zbar.
    pub fn total_degree(&self) -> usize {
        match (self.deg_z(), self.deg_zbar()) {
            (Some(p), Some(q)) => p + q,
            _ => 0,
        }
    }

    pub fn coeff(&self, p: usize, q: usize) -> Complex64 {
        self.coeffs
            .get(p)
            .and_then(|r| r.get(q))
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    /// Iterates nonzero coefficients as (p, q, c).
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.coeffs.iter().enumerate().flat_map(|(p, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| **c != Complex64::ZERO)
                .map(move |(q, c)| (p, q, *c))
        })
    }

    /// Horner evaluation: outer in z, inner in conj(z).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_xy(z, z.conj())
    }

    /// Evaluates with the two variables decoupled: sum of coeff[p][q] x^p y^q.
    /// Used where the second slot is a formal variable rather than conj(z).
    pub fn eval_xy(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for row in self.coeffs.iter().rev() {
            let mut inner = Complex64::ZERO;
            for c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|r| r.iter().map(|x| x * c).collect())
            .collect();
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let rows = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(rows);
        for p in 0..rows {
            let width = self
                .coeffs
                .get(p)
                .map_or(0, Vec::len)
                .max(other.coeffs.get(p).map_or(0, Vec::len));
            let mut row = vec![Complex64::ZERO; width];
            for (q, x) in row.iter_mut().enumerate() {
                *x = self.coeff(p, q) + other.coeff(p, q);
            }
            out.push(row);
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Complex64::ONE))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let rp = self.coeffs.len() + other.coeffs.len() - 1;
        let rq = self.coeffs[0].len() + other.coeffs[0].len() - 1;
        let mut out = vec![vec![Complex64::ZERO; rq]; rp];
        for (p1, q1, c1) in self.terms() {
            for (p2, q2, c2) in other.terms() {
                out[p1 + p2][q1 + q2] += c1 * c2;
            }
        }
        Self::new(out)
    }

    /// Multiplication by z.
    pub fn mul_z(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        if !coeffs.is_empty() {
            coeffs.insert(0, vec![Complex64::ZERO; coeffs[0].len()]);
        }
        Self { coeffs }
    }

    /// Multiplication by conj(z).
    pub fn mul_zbar(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|r| {
                let mut row = Vec::with_capacity(r.len() + 1);
                row.push(Complex64::ZERO);
                row.extend_from_slice(r);
                row
            })
            .collect();
        Self { coeffs }
    }

    /// Wirtinger derivative in z.
    pub fn diff_z(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let out = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let f = (i + 1) as f64;
                row.iter().map(|c| c * f).collect()
            })
            .collect();
        Self::new(out)
    }

    /// Wirtinger derivative in conj(z).
    pub fn diff_zbar(&self) -> Self {
        let out = self
            .coeffs
            .iter()
            .map(|row| {
                if row.len() <= 1 {
                    Vec::new()
                } else {
                    row[1..]
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * (j + 1) as f64)
                        .collect()
                }
            })
            .collect();
        Self::new(out)
    }

    /// Max absolute coefficient; 0 for the zero polynomial.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trims_trailing_zeros() {
        let p = BivariatePolynomial::new(vec![
            vec![c(1.0, 0.0), Complex64::ZERO],
            vec![Complex64::ZERO, Complex64::ZERO],
        ]);
        assert_eq!(p.deg_z(), Some(0));
        assert_eq!(p.deg_zbar(), Some(0));
    }

    #[test]
    fn eval_matches_term_sum() {
        // p(z) = 2 z^2 conj(z) - i z + 3
        let p = BivariatePolynomial::monomial(2, 1, c(2.0, 0.0))
            .add(&BivariatePolynomial::monomial(1, 0, c(0.0, -1.0)))
            .add(&BivariatePolynomial::monomial(0, 0, c(3.0, 0.0)));
        let z = c(0.7, -0.3);
        let expect = 2.0 * z * z * z.conj() + c(0.0, -1.0) * z + 3.0;
        assert!((p.eval(z) - expect).norm() < 1e-14);
    }

    #[test]
    fn product_evaluates_pointwise() {
        let a = BivariatePolynomial::monomial(1, 0, c(1.0, 0.0))
            .add(&BivariatePolynomial::monomial(0, 1, c(0.0, 2.0)));
        let b = BivariatePolynomial::monomial(2, 1, c(-1.0, 1.0))
            .add(&BivariatePolynomial::one());
        let prod = a.mul(&b);
        for &z in &[c(0.2, 0.5), c(-1.1, 0.4), c(0.0, 0.0)] {
            assert!((prod.eval(z) - a.eval(z) * b.eval(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn wirtinger_derivatives() {
        // d/dz (z^3 conj(z)^2) = 3 z^2 conj(z)^2; d/dzbar -> 2 z^3 conj(z)
        let p = BivariatePolynomial::monomial(3, 2, c(1.0, 0.0));
        assert_eq!(
            p.diff_z(),
            BivariatePolynomial::monomial(2, 2, c(3.0, 0.0))
        );
        assert_eq!(
            p.diff_zbar(),
            BivariatePolynomial::monomial(3, 1, c(2.0, 0.0))
        );
        assert!(BivariatePolynomial::one().diff_z().is_zero());
    }

    #[test]
    fn shift_multiplications() {
        let p = BivariatePolynomial::monomial(1, 1, c(4.0, 0.0));
        assert_eq!(p.mul_z(), BivariatePolynomial::monomial(2, 1, c(4.0, 0.0)));
        assert_eq!(
            p.mul_zbar(),
            BivariatePolynomial::monomial(1, 2, c(4.0, 0.0))
        );
    }
}
