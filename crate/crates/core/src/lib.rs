//! Geometric-optics plane wave (GOPW) bases and a stabilized Trefftz
//! discontinuous Galerkin solver for the Helmholtz equation
//! `-(Delta + omega^2 xi(r)) u = f` on the unit square with impedance
//! boundary conditions.
//!
//! The polynomial kernel ([`poly`]) and quadrature ([`quad`]) are generic over
//! real and complex scalars of either precision; the solver layers work in
//! double precision.

pub mod amplitude;
pub mod basis;
pub mod coeff;
pub mod dg;
pub mod error;
pub mod linalg;
pub mod local;
pub mod mesh;
pub mod phase;
pub mod poly;
pub mod quad;
pub mod scalar;

pub use num_complex::Complex64;

pub use amplitude::{build_amplitudes, AmplitudeOptions, AmplitudePolynomial};
pub use basis::{select_q, BasisEval, BasisCase, GopwBasisSet, QMode};
pub use coeff::{CoefficientField, ConstantField, FnField, GaussianLensField, GradientField};
pub use error::{Error, Result};
pub use mesh::{Disc, Element, MeshPartition};
pub use phase::{build_phase, PhasePolynomial};
pub use poly::{Axis, CenteredPolynomial};
pub use scalar::{RealScalar, Scalar};

/// Polynomial with real double-precision coefficients.
pub type RealPoly = CenteredPolynomial<f64>;
/// Polynomial with complex double-precision coefficients.
pub type ComplexPoly = CenteredPolynomial<Complex64>;
/// Single-precision variants.
pub type RealPoly32 = CenteredPolynomial<f32>;
pub type ComplexPoly32 = CenteredPolynomial<num_complex::Complex32>;
/// Double-precision planar quadrature rule.
pub type QuadRule64 = quad::QuadRule<f64>;
