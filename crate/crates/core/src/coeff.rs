//! Squared-slowness fields `xi = 1 / c^2` and their Taylor jets.

use crate::error::{Error, Result};
use crate::poly::{monomial_exponents, triangle_len, Axis, CenteredPolynomial};

/// A real squared-slowness field on the plane.
///
/// `jet(r0, n)` returns the degree-`n` Taylor polynomial of `xi` centered at
/// `r0`, whose `(r, j)` coefficient is `d_x^r d_y^j xi(r0) / (r! j!)`.
pub trait CoefficientField: Send + Sync {
    fn value(&self, r: [f64; 2]) -> f64;

    /// Largest jet degree this field can supply.
    fn smoothness_order(&self) -> usize {
        FD_MAX_ORDER
    }

    /// Taylor polynomial of degree `n`. The default uses Richardson-extrapolated
    /// central differences of [`CoefficientField::value`] and is limited to
    /// degree 4 with roughly 1e-7 relative accuracy.
    fn jet(&self, r0: [f64; 2], n: usize) -> Result<CenteredPolynomial<f64>> {
        check_order(n, self.smoothness_order())?;
        finite_difference_jet(|r| self.value(r), r0, n)
    }

    fn wavenumber(&self, omega: f64, r: [f64; 2]) -> f64 {
        omega * self.value(r).sqrt()
    }
}

impl<F: CoefficientField + ?Sized> CoefficientField for &F {
    fn value(&self, r: [f64; 2]) -> f64 {
        (**self).value(r)
    }
    fn smoothness_order(&self) -> usize {
        (**self).smoothness_order()
    }
    fn jet(&self, r0: [f64; 2], n: usize) -> Result<CenteredPolynomial<f64>> {
        (**self).jet(r0, n)
    }
}

impl<F: CoefficientField + ?Sized> CoefficientField for std::sync::Arc<F> {
    fn value(&self, r: [f64; 2]) -> f64 {
        (**self).value(r)
    }
    fn smoothness_order(&self) -> usize {
        (**self).smoothness_order()
    }
    fn jet(&self, r0: [f64; 2], n: usize) -> Result<CenteredPolynomial<f64>> {
        (**self).jet(r0, n)
    }
}

const FD_MAX_ORDER: usize = 4;
const ANALYTIC_MAX_ORDER: usize = 64;

fn check_order(n: usize, supported: usize) -> Result<()> {
    if n > supported {
        Err(Error::UnsupportedOrder {
            requested: n,
            supported,
        })
    } else {
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `d_x^r d_y^j f(r0)` by nested central differences with step `step`.
fn central_partial(f: &impl Fn([f64; 2]) -> f64, r0: [f64; 2], r: usize, j: usize, step: f64) -> f64 {
    let mut acc = 0.0;
    for a in 0..=r {
        let wa = binomial(r, a) * if a % 2 == 0 { 1.0 } else { -1.0 };
        let x = r0[0] + (r as f64 / 2.0 - a as f64) * step;
        for b in 0..=j {
            let wb = binomial(j, b) * if b % 2 == 0 { 1.0 } else { -1.0 };
            let y = r0[1] + (j as f64 / 2.0 - b as f64) * step;
            acc += wa * wb * f([x, y]);
        }
    }
    acc / step.powi((r + j) as i32)
}

/// Degree-`n` Taylor polynomial of `f` from central differences with one
/// Richardson step.
pub fn finite_difference_jet(f: impl Fn([f64; 2]) -> f64, r0: [f64; 2], n: usize) -> Result<CenteredPolynomial<f64>> {
    check_order(n, FD_MAX_ORDER)?;
    let mut coeffs = Vec::with_capacity(triangle_len(n));
    for k in 0..triangle_len(n) {
        let (r, j) = monomial_exponents(k);
        let d = if r + j == 0 {
            f(r0)
        } else {
            let step = 2e-2;
            let coarse = central_partial(&f, r0, r, j, step);
            let fine = central_partial(&f, r0, r, j, step / 2.0);
            (4.0 * fine - coarse) / 3.0
        };
        coeffs.push(d / (factorial(r) * factorial(j)));
    }
    CenteredPolynomial::new(r0, n, coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantField {
    pub xi: f64,
}

impl ConstantField {
    pub fn new(xi: f64) -> Self {
        Self { xi }
    }
}

impl CoefficientField for ConstantField {
    fn value(&self, _r: [f64; 2]) -> f64 {
        self.xi
    }
    fn smoothness_order(&self) -> usize {
        ANALYTIC_MAX_ORDER
    }
    fn jet(&self, r0: [f64; 2], n: usize) -> Result<CenteredPolynomial<f64>> {
        check_order(n, ANALYTIC_MAX_ORDER)?;
        Ok(CenteredPolynomial::constant(r0, self.xi).with_degree(n))
    }
}

/// Wave speed with constant gradient of `xi`: `xi(r) = c0^2 + 2 G0 . (r - r_ref)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientField {
    pub c0: f64,
    pub g0: [f64; 2],
    pub r_ref: [f64; 2],
}

impl Default for GradientField {
    fn default() -> Self {
        Self {
            c0: 1.0,
            g0: [0.1, -0.2],
            r_ref: [-0.1, -0.1],
        }
    }
}

impl CoefficientField for GradientField {
    fn value(&self, r: [f64; 2]) -> f64 {
        self.c0 * self.c0
            + 2.0 * (self.g0[0] * (r[0] - self.r_ref[0]) + self.g0[1] * (r[1] - self.r_ref[1]))
    }
    fn smoothness_order(&self) -> usize {
        ANALYTIC_MAX_ORDER
    }
    fn jet(&self, r0: [f64; 2], n: usize) -> Result<CenteredPolynomial<f64>> {
        check_order(n, ANALYTIC_MAX_ORDER)?;
        let mut p = CenteredPolynomial::constant(r0, self.value(r0)).with_degree(n);
        if n >= 1 {
            p.set_coeff(1, 0, 2.0 * self.g0[0]);
            p.set_coeff(0, 1, 2.0 * self.g0[1]);
        }
        Ok(p)
    }
}

/// Converging lens `c = 4/3 (1 - exp(-32 |r - center|^2) / 8)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLensField {
    pub center: [f64; 2],
}

impl Default for GaussianLensField {
    fn default() -> Self {
        Self { center: [0.5, 0.5] }
    }
}

impl GaussianLensField {
    pub fn speed(&self, r: [f64; 2]) -> f64 {
        let dx = r[0] - self.center[0];
        let dy = r[1] - self.center[1];
        4.0 / 3.0 * (1.0 - (-32.0 * (dx * dx + dy * dy)).exp() / 8.0)
    }

    /// Taylor polynomial of the wave speed `c` at `r0`.
    pub fn speed_jet(&self, r0: [f64; 2], n: usize) -> CenteredPolynomial<f64> {
        let ox = r0[0] - self.center[0];
        let oy = r0[1] - self.center[1];
        // -32 ((X + ox)^2 + (Y + oy)^2) in shifted coordinates X, Y.
        let mut g = CenteredPolynomial::<f64>::zero(r0, 2);
        g.set_coeff(0, 0, -32.0 * (ox * ox + oy * oy));
        g.set_coeff(1, 0, -64.0 * ox);
        g.set_coeff(0, 1, -64.0 * oy);
        g.set_coeff(2, 0, -32.0);
        g.set_coeff(0, 2, -32.0);
        let e = g.exp_truncated(n);
        let mut c = e.scale(-1.0 / 6.0);
        c.coeffs_mut()[0] += 4.0 / 3.0;
        c
    }
}

impl CoefficientField for GaussianLensField {
    fn value(&self, r: [f64; 2]) -> f64 {
        let c = self.speed(r);
        1.0 / (c * c)
    }
    fn smoothness_order(&self) -> usize {
        ANALYTIC_MAX_ORDER
    }
    fn jet(&self, r0: [f64; 2], n: usize) -> Result<CenteredPolynomial<f64>> {
        check_order(n, ANALYTIC_MAX_ORDER)?;
        Ok(self.speed_jet(r0, n).powf_truncated(-2.0, n))
    }
}

/// Field given only by a closure; jets come from finite differences.
pub struct FnField<F> {
    f: F,
}

impl<F: Fn([f64; 2]) -> f64 + Send + Sync> FnField<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F: Fn([f64; 2]) -> f64 + Send + Sync> CoefficientField for FnField<F> {
    fn value(&self, r: [f64; 2]) -> f64 {
        (self.f)(r)
    }
}

/// `d_x^r d_y^j` of a jet at its center.
pub fn jet_derivative(jet: &CenteredPolynomial<f64>, r: usize, j: usize) -> f64 {
    let mut p = jet.clone();
    for _ in 0..r {
        p = p.differentiate(Axis::X);
    }
    for _ in 0..j {
        p = p.differentiate(Axis::Y);
    }
    p.constant_term()
}
