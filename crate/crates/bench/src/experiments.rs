//! Manufactured problems with closed-form solutions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use gopw::dg::Impedance;
use gopw::{CoefficientField, Complex64, ComplexPoly, ConstantField, GaussianLensField, GradientField, RealPoly};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleKind {
    /// Gaussian lens medium, `u = c(r) exp(i omega x y)`.
    Example1,
    /// Constant-gradient medium with two crossing waves.
    Example2,
    /// `xi = 1`, `u = exp(i omega x)`.
    Constant,
}

impl FromStr for ExampleKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "example1" => Ok(Self::Example1),
            "2" | "example2" => Ok(Self::Example2),
            "constant" | "constant_sanity" => Ok(Self::Constant),
            other => Err(format!("unknown example `{other}` (expected 1, 2 or constant)")),
        }
    }
}

impl fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::Constant => "constant_sanity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("negative discriminant {value} at {point:?}")]
    NegativeDiscriminant { point: [f64; 2], value: f64 },
}

/// Value, gradient and Laplacian of a scalar function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointJet {
    pub value: Complex64,
    pub grad: [Complex64; 2],
    pub lap: Complex64,
}

impl PointJet {
    fn from_poly(p: &ComplexPoly) -> Self {
        Self {
            value: p.coeff(0, 0),
            grad: [p.coeff(1, 0), p.coeff(0, 1)],
            lap: (p.coeff(2, 0) + p.coeff(0, 2)) * 2.0,
        }
    }
}

fn to_complex(p: &RealPoly) -> ComplexPoly {
    p.map(|c| Complex64::new(c, 0.0))
}

/// Parameters of the constant-gradient medium.
pub const C0: f64 = 1.0;
pub const G0: [f64; 2] = [0.1, -0.2];
pub const R0: [f64; 2] = [-0.1, -0.1];

/// Degree-2 Taylor polynomials of the two crossing-ray phases at `r`.
pub fn example2_phase_jets(r: [f64; 2]) -> Result<[RealPoly; 2], DomainError> {
    let g2 = G0[0] * G0[0] + G0[1] * G0[1];
    let g = g2.sqrt();
    let (dx, dy) = (r[0] - R0[0], r[1] - R0[1]);
    let mut cbar = RealPoly::zero(r, 2);
    cbar.set_coeff(0, 0, C0 + G0[0] * dx + G0[1] * dy);
    cbar.set_coeff(1, 0, G0[0]);
    cbar.set_coeff(0, 1, G0[1]);
    let mut dist2 = RealPoly::zero(r, 2);
    dist2.set_coeff(0, 0, dx * dx + dy * dy);
    dist2.set_coeff(1, 0, 2.0 * dx);
    dist2.set_coeff(0, 1, 2.0 * dy);
    dist2.set_coeff(2, 0, 1.0);
    dist2.set_coeff(0, 2, 1.0);
    let disc = &cbar.mul_truncated(&cbar, 2) - &dist2.scale(g2);
    if disc.constant_term() < 0.0 {
        return Err(DomainError::NegativeDiscriminant {
            point: r,
            value: disc.constant_term(),
        });
    }
    let root = disc.sqrt_truncated(2);
    let phase = |sign: f64| {
        let inner = (&cbar + &root.scale(sign)).scale(2.0);
        let sigma = inner.sqrt_truncated(2).scale(1.0 / g);
        let s3 = sigma.mul_truncated(&sigma, 2).mul_truncated(&sigma, 2);
        &cbar.mul_truncated(&sigma, 2) - &s3.scale(g2 / 6.0)
    };
    // (-1)^j with j = 1, 2
    Ok([phase(-1.0), phase(1.0)])
}

/// Values of the two phases at `r`.
pub fn example2_phases(r: [f64; 2]) -> Result<(f64, f64), DomainError> {
    let [p1, p2] = example2_phase_jets(r)?;
    Ok((p1.constant_term(), p2.constant_term()))
}

/// A manufactured Helmholtz problem at a fixed frequency.
#[derive(Clone)]
pub struct Experiment {
    pub kind: ExampleKind,
    pub omega: f64,
    pub impedance: Impedance,
    field: Arc<dyn CoefficientField>,
}

impl fmt::Debug for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Experiment")
            .field("kind", &self.kind)
            .field("omega", &self.omega)
            .field("impedance", &self.impedance)
            .finish()
    }
}

impl Experiment {
    pub fn new(kind: ExampleKind, omega: f64, impedance: Impedance) -> Self {
        let field: Arc<dyn CoefficientField> = match kind {
            ExampleKind::Example1 => Arc::new(GaussianLensField::default()),
            ExampleKind::Example2 => Arc::new(GradientField {
                c0: C0,
                g0: G0,
                r_ref: R0,
            }),
            ExampleKind::Constant => Arc::new(ConstantField::new(1.0)),
        };
        Self {
            kind,
            omega,
            impedance,
            field,
        }
    }

    pub fn field(&self) -> &Arc<dyn CoefficientField> {
        &self.field
    }

    pub fn has_source(&self) -> bool {
        self.kind != ExampleKind::Constant
    }

    /// Exact solution with its derivatives at `r`.
    pub fn exact(&self, r: [f64; 2]) -> PointJet {
        self.try_exact(r).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_exact(&self, r: [f64; 2]) -> Result<PointJet, DomainError> {
        let i_omega = Complex64::new(0.0, self.omega);
        let wave = |phase: &RealPoly| to_complex(phase).scale(i_omega).exp_truncated(2);
        let p = match self.kind {
            ExampleKind::Constant => {
                let mut ph = RealPoly::zero(r, 1);
                ph.set_coeff(0, 0, r[0]);
                ph.set_coeff(1, 0, 1.0);
                wave(&ph)
            }
            ExampleKind::Example1 => {
                let c = GaussianLensField::default().speed_jet(r, 2);
                let mut xy = RealPoly::zero(r, 2);
                xy.set_coeff(0, 0, r[0] * r[1]);
                xy.set_coeff(1, 0, r[1]);
                xy.set_coeff(0, 1, r[0]);
                xy.set_coeff(1, 1, 1.0);
                to_complex(&c).mul_truncated(&wave(&xy), 2)
            }
            ExampleKind::Example2 => {
                let [p1, p2] = example2_phase_jets(r)?;
                let i = Complex64::new(0.0, 1.0);
                let mut d1 = ComplexPoly::zero(r, 2);
                d1.set_coeff(0, 0, Complex64::new(r[0] * r[1], 1.0));
                d1.set_coeff(1, 0, r[1].into());
                d1.set_coeff(0, 1, r[0].into());
                d1.set_coeff(1, 1, 1.0.into());
                let mut d2 = ComplexPoly::zero(r, 2);
                d2.set_coeff(0, 0, r[0] * r[0] + r[1] * r[1] + i);
                d2.set_coeff(1, 0, (2.0 * r[0]).into());
                d2.set_coeff(0, 1, (2.0 * r[1]).into());
                d2.set_coeff(2, 0, 1.0.into());
                d2.set_coeff(0, 2, 1.0.into());
                &wave(&p1).mul_truncated(&d1.recip_truncated(2), 2) + &wave(&p2).mul_truncated(&d2.recip_truncated(2), 2)
            }
        };
        Ok(PointJet::from_poly(&p))
    }

    pub fn u(&self, r: [f64; 2]) -> Complex64 {
        self.exact(r).value
    }

    /// `f = -lap u - omega^2 xi u`.
    pub fn f(&self, r: [f64; 2]) -> Complex64 {
        if !self.has_source() {
            return Complex64::new(0.0, 0.0);
        }
        let e = self.exact(r);
        -e.lap - e.value * (self.omega * self.omega * self.field.value(r))
    }

    /// `g = d_n u + i eta u` with the same `eta` as the discrete boundary terms.
    pub fn g(&self, r: [f64; 2], n: [f64; 2]) -> Complex64 {
        let e = self.exact(r);
        let eta = self.impedance.eta(self.field.as_ref(), self.omega, r);
        e.grad[0] * n[0] + e.grad[1] * n[1] + Complex64::new(0.0, eta) * e.value
    }
}
