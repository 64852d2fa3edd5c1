//! Spectral particular solutions on the fictitious discs.
//!
//! On the disc `D` of radius `R` around an element barycenter, find `u` of
//! total degree at most `m` with
//! `int_D (grad u . grad v - kappa^2 u v) + (i / R) int_dD u v = int_D f v`
//! for all such `v`. The trial and test functions are the scaled monomials
//! `((x - xc) / R)^i ((y - yc) / R)^j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::coeff::CoefficientField;
use crate::error::{Error, Result};
use crate::mesh::Disc;
use crate::poly::{monomial_exponents, triangle_len, CenteredPolynomial, Powers};
use crate::quad::{circle_rule, disc_rule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOptions {
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
}

impl Default for LocalOptions {
    fn default() -> Self {
        Self { n_r: None, n_theta: None }
    }
}

/// Radial and angular point counts for the disc rule.
pub fn disc_points(m: usize, omega: f64, radius: f64, opts: &LocalOptions) -> (usize, usize) {
    let n_r = opts.n_r.unwrap_or(m + 4 + (omega * radius).ceil() as usize);
    let n_theta = opts.n_theta.unwrap_or(2 * n_r + 2);
    (n_r, n_theta)
}

#[derive(Debug, Clone)]
pub struct SpectralLocalSolution {
    pub element_id: usize,
    pub m: usize,
    /// Coefficients over the scaled monomials, graded order.
    pub coeffs: Vec<Complex64>,
    pub disc: Disc,
    /// `|| A c - b || / || b ||` of the local solve (zero when `b = 0`).
    pub relative_residual: f64,
    poly: CenteredPolynomial<Complex64>,
    grad: [CenteredPolynomial<Complex64>; 2],
    lap: CenteredPolynomial<Complex64>,
}

impl SpectralLocalSolution {
    fn from_coeffs(element_id: usize, m: usize, coeffs: Vec<Complex64>, disc: Disc, relative_residual: f64) -> Self {
        let poly = CenteredPolynomial::from_fn(disc.center, m, |i, j| {
            let k = crate::poly::monomial_index(i, j);
            coeffs[k] / disc.radius.powi((i + j) as i32)
        });
        Self {
            element_id,
            m,
            grad: poly.gradient(),
            lap: poly.laplacian(),
            poly,
            coeffs,
            disc,
            relative_residual,
        }
    }

    /// The zero function, used where no source is present.
    pub fn zero(element_id: usize, m: usize, disc: Disc) -> Self {
        Self::from_coeffs(element_id, m, vec![Complex64::new(0.0, 0.0); triangle_len(m)], disc, 0.0)
    }

    /// The solution as a polynomial in the unscaled shifted coordinates.
    pub fn polynomial(&self) -> &CenteredPolynomial<Complex64> {
        &self.poly
    }

    pub fn eval_u1(&self, r: [f64; 2]) -> Complex64 {
        self.poly.evaluate(r)
    }

    pub fn eval_grad_u1(&self, r: [f64; 2]) -> [Complex64; 2] {
        let pw = Powers::new(self.disc.center, r, self.m);
        [self.grad[0].evaluate_powers(&pw), self.grad[1].evaluate_powers(&pw)]
    }

    pub fn eval_lap_u1(&self, r: [f64; 2]) -> Complex64 {
        self.lap.evaluate(r)
    }

    /// Value, gradient and Laplacian sharing one power table.
    pub fn eval_all(&self, r: [f64; 2]) -> (Complex64, [Complex64; 2], Complex64) {
        let pw = Powers::new(self.disc.center, r, self.m);
        (
            self.poly.evaluate_powers(&pw),
            [self.grad[0].evaluate_powers(&pw), self.grad[1].evaluate_powers(&pw)],
            self.lap.evaluate_powers(&pw),
        )
    }
}

/// Scaled monomials and their gradients at `r`.
fn scaled_basis(disc: &Disc, m: usize, r: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let inv = 1.0 / disc.radius;
    let s = [(r[0] - disc.center[0]) * inv, (r[1] - disc.center[1]) * inv];
    let pw = Powers::new([0.0, 0.0], s, m);
    let n = triangle_len(m);
    let mut v = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for k in 0..n {
        let (i, j) = monomial_exponents(k);
        v.push(pw.monomial(i, j));
        let gx = if i > 0 { i as f64 * pw.monomial(i - 1, j) * inv } else { 0.0 };
        let gy = if j > 0 { j as f64 * pw.monomial(i, j - 1) * inv } else { 0.0 };
        g.push([gx, gy]);
    }
    (v, g)
}

/// Assembled local system; `volume` holds the stiffness and mass part,
/// `boundary` the impedance part.
pub struct LocalSystem {
    pub volume: DMatrix<Complex64>,
    pub boundary: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

pub fn assemble_local<F: CoefficientField + ?Sized>(
    field: &F,
    source: &(dyn Fn([f64; 2]) -> Complex64 + Sync),
    boundary_data: Option<&(dyn Fn([f64; 2]) -> Complex64 + Sync)>,
    disc: &Disc,
    m: usize,
    omega: f64,
    opts: &LocalOptions,
) -> LocalSystem {
    let n = triangle_len(m);
    let (n_r, n_theta) = disc_points(m, omega, disc.radius, opts);
    let mut volume = DMatrix::<Complex64>::zeros(n, n);
    let mut boundary = DMatrix::<Complex64>::zeros(n, n);
    let mut rhs = DVector::<Complex64>::zeros(n);
    let mut stiff = DMatrix::<f64>::zeros(n, n);

    for (r, w) in disc_rule(disc.center, disc.radius, n_r, n_theta).iter() {
        let (v, g) = scaled_basis(disc, m, r);
        let k2 = omega * omega * field.value(r);
        let f = source(r);
        for a in 0..n {
            rhs[a] += f * (v[a] * w);
            for b in 0..n {
                stiff[(a, b)] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1] - k2 * v[a] * v[b]);
            }
        }
    }
    volume.zip_apply(&stiff, |z, s| *z = Complex64::new(s, 0.0));

    let imp = Complex64::new(0.0, 1.0 / disc.radius);
    for (r, w) in circle_rule(disc.center, disc.radius, n_theta).iter() {
        let (v, _) = scaled_basis(disc, m, r);
        for a in 0..n {
            for b in 0..n {
                boundary[(a, b)] += imp * (v[a] * v[b] * w);
            }
        }
        if let Some(g) = boundary_data {
            let gv = g(r);
            for a in 0..n {
                rhs[a] += gv * (v[a] * w);
            }
        }
    }
    LocalSystem { volume, boundary, rhs }
}

/// Spectral solution of the local impedance problem on `disc`.
pub fn solve_local<F: CoefficientField + ?Sized>(
    field: &F,
    source: &(dyn Fn([f64; 2]) -> Complex64 + Sync),
    element_id: usize,
    disc: &Disc,
    m: usize,
    omega: f64,
    opts: &LocalOptions,
) -> Result<SpectralLocalSolution> {
    solve_local_with_boundary(field, source, None, element_id, disc, m, omega, opts)
}

/// As [`solve_local`], with the extra load `int_dD g v` for inhomogeneous
/// impedance data `g`.
#[allow(clippy::too_many_arguments)]
pub fn solve_local_with_boundary<F: CoefficientField + ?Sized>(
    field: &F,
    source: &(dyn Fn([f64; 2]) -> Complex64 + Sync),
    boundary_data: Option<&(dyn Fn([f64; 2]) -> Complex64 + Sync)>,
    element_id: usize,
    disc: &Disc,
    m: usize,
    omega: f64,
    opts: &LocalOptions,
) -> Result<SpectralLocalSolution> {
    if m == 0 {
        return Err(Error::InvalidParameter("local polynomial order must be positive".into()));
    }
    let sys = assemble_local(field, source, boundary_data, disc, m, omega, opts);
    let a = &sys.volume + &sys.boundary;
    let bnorm = sys.rhs.norm();
    if bnorm == 0.0 {
        return Ok(SpectralLocalSolution::zero(element_id, m, *disc));
    }
    let lu = a.clone().lu();
    let x = lu
        .solve(&sys.rhs)
        .ok_or_else(|| Error::SolverFailure(format!("singular local system on element {element_id}")))?;
    let rel = (&a * &x - &sys.rhs).norm() / bnorm;
    Ok(SpectralLocalSolution::from_coeffs(element_id, m, x.iter().copied().collect(), *disc, rel))
}
