//! Local phase polynomials matching the eikonal equation to high order.

use nalgebra::{DMatrix, DVector};

use crate::coeff::CoefficientField;
use crate::error::{Error, Result};
use crate::mesh::Element;
use crate::poly::{degree_range, CenteredPolynomial, Powers};

const RANK_TOL: f64 = 1e-10;

/// A real phase `tau` without constant term, centered at an element barycenter.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePolynomial {
    pub tau: CenteredPolynomial<f64>,
    pub theta: f64,
    pub q: usize,
    pub m_tau: usize,
}

/// Degree of the phase for matching order `q`.
pub fn phase_degree(q: usize) -> usize {
    if q <= 2 {
        q + 2
    } else {
        q + 3
    }
}

impl PhasePolynomial {
    pub fn center(&self) -> [f64; 2] {
        self.tau.center()
    }

    /// `(lambda_10, lambda_01)`.
    pub fn direction(&self) -> [f64; 2] {
        [self.tau.coeff(1, 0), self.tau.coeff(0, 1)]
    }

    /// `|grad tau|^2` as a polynomial.
    pub fn grad_norm_sq(&self) -> CenteredPolynomial<f64> {
        let [tx, ty] = self.tau.gradient();
        &(&tx * &tx) + &(&ty * &ty)
    }
}

/// Build the phase for direction `theta` at `r0` with matching order `q`.
///
/// Level `k` fixes the degree-`k` coefficients so that the degree-`(k-1)`
/// part of `|grad tau|^2` equals that of the Taylor jet of `xi`. Each level is
/// a `k x (k+1)` system solved in the minimum-norm sense.
pub fn build_phase<F: CoefficientField + ?Sized>(field: &F, r0: [f64; 2], theta: f64, q: usize) -> Result<PhasePolynomial> {
    if q == 0 {
        return Err(Error::InvalidParameter("phase matching order q must be at least 1".into()));
    }
    let m_tau = phase_degree(q);
    let jet = field.jet(r0, m_tau - 1)?;
    let xi0 = jet.constant_term();
    if !(xi0 > 0.0 && xi0.is_finite()) {
        return Err(Error::InvalidMedium { point: r0, value: xi0 });
    }
    let s0 = xi0.sqrt();
    let (l10, l01) = (s0 * theta.cos(), s0 * theta.sin());

    let mut tau = CenteredPolynomial::<f64>::zero(r0, m_tau);
    tau.set_coeff(1, 0, l10);
    tau.set_coeff(0, 1, l01);

    for k in 2..=m_tau {
        let current = tau.truncate(k - 1);
        let [tx, ty] = current.gradient();
        let g2 = &tx.mul_truncated(&tx, k - 1) + &ty.mul_truncated(&ty, k - 1);
        let rhs = DVector::from_iterator(
            k,
            degree_range(k - 1).map(|idx| jet.coeffs()[idx] - g2.coeffs().get(idx).copied().unwrap_or(0.0)),
        );
        // Column c holds the unknown (k - c, c); row j is the degree-(k-1) monomial (k-1-j, j).
        let mut a = DMatrix::<f64>::zeros(k, k + 1);
        for c in 0..=k {
            let i = k - c;
            if i > 0 {
                a[(c, c)] += 2.0 * l10 * i as f64;
            }
            if c > 0 {
                a[(c - 1, c)] += 2.0 * l01 * c as f64;
            }
        }
        let sol = crate::linalg::min_norm_solve(&a, &rhs, RANK_TOL);
        if sol.rank < k {
            return Err(Error::DegenerateDirection { level: k, theta });
        }
        for c in 0..=k {
            tau.set_coeff(k - c, c, sol.solution[c]);
        }
    }

    Ok(PhasePolynomial { tau, theta, q, m_tau })
}

/// Maximum of `|xi - |grad tau|^2|` over a `samples x samples` grid on `element`.
pub fn eikonal_residual<F: CoefficientField + ?Sized>(
    phase: &PhasePolynomial,
    field: &F,
    element: &Element,
    samples: usize,
) -> f64 {
    let [tx, ty] = phase.tau.gradient();
    let center = phase.center();
    element
        .sample_grid(samples)
        .into_iter()
        .map(|r| {
            let pw = Powers::new(center, r, phase.m_tau);
            let gx = tx.evaluate_powers(&pw);
            let gy = ty.evaluate_powers(&pw);
            (field.value(r) - gx * gx - gy * gy).abs()
        })
        .fold(0.0, f64::max)
}
