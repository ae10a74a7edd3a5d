//! Numerics for true polyanalytic Fock spaces and quantum harmonic analysis.
//!
//! The library works with the Gaussian-measure Hilbert spaces of polyanalytic
//! functions on the complex plane: the analytic Fock space, its true
//! polyanalytic components, and their finite direct sums. Everything is
//! represented in canonical orthonormal coordinates, where the component
//! bases are generated from the monomial basis by the raising operator and
//! all intertwiners between components become identity matrices.
//!
//! Module map:
//! - [`special`]: generalized Laguerre polynomials, their zeros, Gaussian and
//!   Lebesgue quadrature rules, closed Gaussian integrals of polynomials.
//! - [`poly`]: dense bivariate polynomials in (z, conj(z)).
//! - [`basis`]: component basis functions, reproducing kernels, coefficient
//!   vectors, Gaussian-measure inner products.
//! - [`operators`]: truncated operators (Weyl, parity, rank-one, Toeplitz,
//!   intertwiners), norms, block assembly, CSV/JSON serialization.
//! - [`qha`]: convolutions between functions and operators, Fourier-Weyl and
//!   symplectic Fourier transforms, Berezin transforms, heat smoothing, and
//!   the C1 continuity modulus.
//! - [`regularity`]: Laguerre zero sets, regularity scans of Fourier-Weyl
//!   transforms, Toeplitz kernel witnesses, operator partitions.
//! - [`localization`]: kernel tail mass, off-diagonal kernel decay maps,
//!   heat-smoothed decay profiles.

pub mod basis;
pub mod error;
pub mod localization;
pub mod operators;
pub mod poly;
pub mod qha;
pub mod regularity;
pub mod special;

pub use error::FockError;

/// Library-wide result type.
pub type Result<T> = std::result::Result<T, FockError>;
