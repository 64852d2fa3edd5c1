//! Bivariate polynomials in shifted monomials `(x - x0)^r (y - y0)^j`.
//!
//! Coefficients are stored in graded order: all monomials of total degree 0,
//! then degree 1, and so on. Inside degree `d` the order is
//! `(d,0), (d-1,1), ..., (0,d)`, so the zero-based index of `(r, j)` is
//! `m_{d-1} + j` with `d = r + j` and `m_d = (d+1)(d+2)/2`.

use std::ops::{Add, Mul, Neg, Range, Sub};

use num_traits::{Float, FromPrimitive, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// Number of monomials of total degree at most `degree`.
#[inline]
pub const fn triangle_len(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Zero-based storage index of `(x - x0)^r (y - y0)^j`.
#[inline]
pub const fn monomial_index(r: usize, j: usize) -> usize {
    let d = r + j;
    d * (d + 1) / 2 + j
}

/// Inverse of [`monomial_index`].
pub fn monomial_exponents(index: usize) -> (usize, usize) {
    let mut d = 0;
    while triangle_len(d) <= index {
        d += 1;
    }
    let j = index - d * (d + 1) / 2;
    (d - j, j)
}

/// Storage indices of the monomials of total degree exactly `d`.
#[inline]
pub fn degree_range(d: usize) -> Range<usize> {
    d * (d + 1) / 2..triangle_len(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Powers of the shifted coordinates at one point, reusable across several
/// polynomials sharing a center.
#[derive(Debug, Clone)]
pub struct Powers<R> {
    x: Vec<R>,
    y: Vec<R>,
}

impl<R: RealScalar> Powers<R> {
    pub fn new(center: [R; 2], point: [R; 2], degree: usize) -> Self {
        let dx = point[0] - center[0];
        let dy = point[1] - center[1];
        let mut x = Vec::with_capacity(degree + 1);
        let mut y = Vec::with_capacity(degree + 1);
        let (mut px, mut py) = (R::one(), R::one());
        for _ in 0..=degree {
            x.push(px);
            y.push(py);
            px = px * dx;
            py = py * dy;
        }
        Self { x, y }
    }

    pub fn degree(&self) -> usize {
        self.x.len() - 1
    }

    #[inline]
    pub fn monomial(&self, r: usize, j: usize) -> R {
        self.x[r] * self.y[j]
    }
}

#[derive(Debug, Clone)]
pub struct CenteredPolynomial<T: Scalar> {
    center: [T::Real; 2],
    degree: usize,
    coeffs: Vec<T>,
}

fn center_f64<R: RealScalar>(c: [R; 2]) -> [f64; 2] {
    [c[0].to_f64_lossy(), c[1].to_f64_lossy()]
}

impl<T: Scalar> CenteredPolynomial<T> {
    pub fn zero(center: [T::Real; 2], degree: usize) -> Self {
        Self {
            center,
            degree,
            coeffs: vec![T::zero(); triangle_len(degree)],
        }
    }

    pub fn constant(center: [T::Real; 2], value: T) -> Self {
        Self {
            center,
            degree: 0,
            coeffs: vec![value],
        }
    }

    /// `c (x - x0)^r (y - y0)^j`.
    pub fn monomial(center: [T::Real; 2], r: usize, j: usize, c: T) -> Self {
        let mut p = Self::zero(center, r + j);
        p.coeffs[monomial_index(r, j)] = c;
        p
    }

    /// Shifted coordinate `x - x0` or `y - y0`.
    pub fn coordinate(center: [T::Real; 2], axis: Axis) -> Self {
        match axis {
            Axis::X => Self::monomial(center, 1, 0, T::one()),
            Axis::Y => Self::monomial(center, 0, 1, T::one()),
        }
    }

    pub fn new(center: [T::Real; 2], degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let expected = triangle_len(degree);
        if coeffs.len() != expected {
            return Err(Error::CoefficientLength {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self {
            center,
            degree,
            coeffs,
        })
    }

    pub fn from_fn(center: [T::Real; 2], degree: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let coeffs = (0..triangle_len(degree))
            .map(|k| {
                let (r, j) = monomial_exponents(k);
                f(r, j)
            })
            .collect();
        Self {
            center,
            degree,
            coeffs,
        }
    }

    #[inline]
    pub fn center(&self) -> [T::Real; 2] {
        self.center
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `(x - x0)^r (y - y0)^j`, zero beyond the stored degree.
    #[inline]
    pub fn coeff(&self, r: usize, j: usize) -> T {
        if r + j > self.degree {
            T::zero()
        } else {
            self.coeffs[monomial_index(r, j)]
        }
    }

    pub fn set_coeff(&mut self, r: usize, j: usize, value: T) {
        if r + j > self.degree {
            *self = self.with_degree(r + j);
        }
        self.coeffs[monomial_index(r, j)] = value;
    }

    /// Copy with storage padded or truncated to `degree`.
    pub fn with_degree(&self, degree: usize) -> Self {
        let n = triangle_len(degree);
        let mut coeffs = vec![T::zero(); n];
        let m = n.min(self.coeffs.len());
        coeffs[..m].copy_from_slice(&self.coeffs[..m]);
        Self {
            center: self.center,
            degree,
            coeffs,
        }
    }

    /// Keep the terms of total degree at most `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        self.with_degree(degree.min(self.degree))
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: usize) -> &[T] {
        if d > self.degree {
            &[]
        } else {
            &self.coeffs[degree_range(d)]
        }
    }

    pub fn evaluate(&self, point: [T::Real; 2]) -> T {
        self.evaluate_powers(&Powers::new(self.center, point, self.degree))
    }

    /// Evaluate with precomputed powers; `powers` must reach at least this degree.
    pub fn evaluate_powers(&self, powers: &Powers<T::Real>) -> T {
        let mut acc = T::zero();
        for d in 0..=self.degree {
            for (j, c) in self.coeffs[degree_range(d)].iter().enumerate() {
                acc += c.mul_real(powers.monomial(d - j, j));
            }
        }
        acc
    }

    /// Value at the center.
    #[inline]
    pub fn constant_term(&self) -> T {
        self.coeffs[0]
    }

    pub fn differentiate(&self, axis: Axis) -> Self {
        if self.degree == 0 {
            return Self::zero(self.center, 0);
        }
        Self::from_fn(self.center, self.degree - 1, |r, j| match axis {
            Axis::X => self.coeff(r + 1, j).mul_real(real::<T>(r + 1)),
            Axis::Y => self.coeff(r, j + 1).mul_real(real::<T>(j + 1)),
        })
    }

    pub fn gradient(&self) -> [Self; 2] {
        [self.differentiate(Axis::X), self.differentiate(Axis::Y)]
    }

    pub fn laplacian(&self) -> Self {
        if self.degree < 2 {
            return Self::zero(self.center, 0);
        }
        Self::from_fn(self.center, self.degree - 2, |r, j| {
            self.coeff(r + 2, j).mul_real(real::<T>((r + 2) * (r + 1)))
                + self.coeff(r, j + 2).mul_real(real::<T>((j + 2) * (j + 1)))
        })
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            center: self.center,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn scale_real(&self, c: T::Real) -> Self {
        Self {
            center: self.center,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&a| a.mul_real(c)).collect(),
        }
    }

    pub fn map<U: Scalar<Real = T::Real>>(&self, f: impl Fn(T) -> U) -> CenteredPolynomial<U> {
        CenteredPolynomial {
            center: self.center,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    fn check_center(&self, other: &Self) -> Result<()> {
        if self.center != other.center {
            return Err(Error::CenterMismatch {
                left: center_f64(self.center),
                right: center_f64(other.center),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let mut out = self.with_degree(self.degree.max(other.degree));
        for (a, &b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_center(other)?;
        let mut out = self.with_degree(self.degree.max(other.degree));
        for (a, &b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.checked_mul_truncated(other, self.degree + other.degree)
    }

    /// Product with all terms above total degree `max_degree` dropped.
    pub fn checked_mul_truncated(&self, other: &Self, max_degree: usize) -> Result<Self> {
        self.check_center(other)?;
        Ok(self.mul_truncated_unchecked(other, max_degree))
    }

    fn mul_truncated_unchecked(&self, other: &Self, max_degree: usize) -> Self {
        let degree = max_degree.min(self.degree + other.degree);
        let mut out = Self::zero(self.center, degree);
        for da in 0..=self.degree.min(degree) {
            let ra = degree_range(da);
            for db in 0..=other.degree.min(degree - da) {
                let rb = degree_range(db);
                let base = (da + db) * (da + db + 1) / 2;
                for (ja, &a) in self.coeffs[ra.clone()].iter().enumerate() {
                    if a == T::zero() {
                        continue;
                    }
                    for (jb, &b) in other.coeffs[rb.clone()].iter().enumerate() {
                        out.coeffs[base + ja + jb] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Truncated product; panics on a center mismatch.
    pub fn mul_truncated(&self, other: &Self, max_degree: usize) -> Self {
        self.checked_mul_truncated(other, max_degree)
            .unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn max_abs_coeff(&self) -> T::Real {
        self.coeffs
            .iter()
            .fold(T::Real::zero(), |m, c| Float::max(m, c.modulus()))
    }

    /// Largest total degree carrying a coefficient above `tol` in modulus.
    pub fn effective_degree(&self, tol: T::Real) -> Option<usize> {
        (0..=self.degree)
            .rev()
            .find(|&d| self.coeffs[degree_range(d)].iter().any(|c| c.modulus() > tol))
    }

    /// `sum_k series[k] (p - p(x0))^k`, truncated at total degree `max_degree`.
    ///
    /// `series[k]` is the k-th Taylor coefficient of the outer function at
    /// `p(x0)`; missing entries are treated as zero.
    pub fn compose_series(&self, series: &[T], max_degree: usize) -> Self {
        let mut shifted = self.truncate(max_degree);
        shifted.coeffs[0] = T::zero();
        let mut out = Self::zero(self.center, max_degree);
        let mut power = Self::constant(self.center, T::one());
        for (k, &s) in series.iter().enumerate().take(max_degree + 1) {
            if k > 0 {
                power = power.mul_truncated_unchecked(&shifted, max_degree);
            }
            if s != T::zero() {
                for (o, &c) in out.coeffs.iter_mut().zip(&power.coeffs) {
                    *o += s * c;
                }
            }
        }
        out
    }

    /// Taylor expansion of `exp(p)` through degree `max_degree`.
    pub fn exp_truncated(&self, max_degree: usize) -> Self {
        let e0 = self.constant_term().exp();
        let mut series = Vec::with_capacity(max_degree + 1);
        let mut fact = T::Real::one();
        for k in 0..=max_degree {
            if k > 0 {
                fact = fact * real::<T>(k);
            }
            series.push(e0.mul_real(Float::recip(fact)));
        }
        self.compose_series(&series, max_degree)
    }

    /// Taylor expansion of `p^e` (principal branch) through degree `max_degree`.
    pub fn powf_truncated(&self, e: T::Real, max_degree: usize) -> Self {
        let p0 = self.constant_term();
        let inv = T::one() / p0;
        let mut series = Vec::with_capacity(max_degree + 1);
        let mut term = p0.powf(e);
        let mut binom = T::Real::one();
        for k in 0..=max_degree {
            if k > 0 {
                let kr = real::<T>(k);
                binom = binom * (e - kr + T::Real::one()) / kr;
                term *= inv;
            }
            series.push(term.mul_real(binom));
        }
        self.compose_series(&series, max_degree)
    }

    /// Taylor expansion of `1 / p` through degree `max_degree`.
    pub fn recip_truncated(&self, max_degree: usize) -> Self {
        let inv = T::one() / self.constant_term();
        let mut series = Vec::with_capacity(max_degree + 1);
        let mut term = inv;
        for _ in 0..=max_degree {
            series.push(term);
            term = -term * inv;
        }
        self.compose_series(&series, max_degree)
    }

    pub fn sqrt_truncated(&self, max_degree: usize) -> Self {
        let half = T::Real::one() / (T::Real::one() + T::Real::one());
        self.powf_truncated(half, max_degree)
    }
}

#[inline]
fn real<T: Scalar>(k: usize) -> T::Real {
    <T::Real as FromPrimitive>::from_usize(k).expect("representable")
}

impl<T: Scalar> PartialEq for CenteredPolynomial<T> {
    /// Equal centers and equal coefficients after zero padding.
    fn eq(&self, other: &Self) -> bool {
        if self.center != other.center {
            return false;
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| {
            let a = self.coeffs.get(k).copied().unwrap_or_else(T::zero);
            let b = other.coeffs.get(k).copied().unwrap_or_else(T::zero);
            a == b
        })
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<T: Scalar> $tr<&CenteredPolynomial<T>> for &CenteredPolynomial<T> {
            type Output = CenteredPolynomial<T>;
            fn $method(self, rhs: &CenteredPolynomial<T>) -> CenteredPolynomial<T> {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl<T: Scalar> $tr for CenteredPolynomial<T> {
            type Output = CenteredPolynomial<T>;
            fn $method(self, rhs: CenteredPolynomial<T>) -> CenteredPolynomial<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl<T: Scalar> Neg for &CenteredPolynomial<T> {
    type Output = CenteredPolynomial<T>;
    fn neg(self) -> CenteredPolynomial<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Neg for CenteredPolynomial<T> {
    type Output = CenteredPolynomial<T>;
    fn neg(self) -> CenteredPolynomial<T> {
        -&self
    }
}
