//! Local GOPW spaces: members `a(r) exp(i omega tau(r))` on one element.
//!
//! Members are ordered direction-major: index `l * J + j` with `J = 1` in
//! Case 1 and `J = 2` in Case 2, and direction angles `theta_l = 2 pi l / p`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::amplitude::{build_amplitudes, AmplitudeOptions, AmplitudePolynomial};
pub use crate::amplitude::BasisCase;
use crate::coeff::CoefficientField;
use crate::error::{Error, Result};
use crate::linalg::min_norm_solve;
use crate::mesh::Element;
use crate::phase::{build_phase, PhasePolynomial};
use crate::poly::{CenteredPolynomial, Powers};

/// Default admissible bound on `omega h`.
pub const DEFAULT_C0: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QMode {
    /// Order needed for the best-approximation estimate.
    Approximation,
    /// Order needed by the DG error estimate with regularity index `s`.
    Dg { s: f64 },
}

/// Default regularity index for the DG mode: `min(m + 1, n + 1)` in Case 1,
/// `min(m + 1, 2n + 1)` in Case 2.
pub fn default_dg_index(case: BasisCase, n: usize, m: usize) -> f64 {
    let cap = match case {
        BasisCase::One => n + 1,
        BasisCase::Two => 2 * n + 1,
    };
    (m + 1).min(cap) as f64
}

/// Matching order `q` for `p = 2n + 1` directions.
pub fn select_q(n: usize, omega: f64, h: f64, case: BasisCase, mode: QMode, c0: f64) -> Result<usize> {
    if !(omega > 1.0) || !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "q selection needs omega > 1 and h > 0, got omega = {omega}, h = {h}"
        )));
    }
    let omega_h = omega * h;
    if omega_h > c0 {
        return Err(Error::ResolutionViolation { omega_h, limit: c0 });
    }
    let l = (1.0 / omega_h).ln();
    let floor = |x: f64| x.floor().max(0.0) as usize;
    let base = case.min_q();
    let q = match mode {
        QMode::Approximation => {
            let mult = match case {
                BasisCase::One => n as f64 - 4.0,
                BasisCase::Two => 2.0 * n as f64 - 4.0,
            };
            base.max(floor(mult * l / omega.ln()))
        }
        QMode::Dg { s } => {
            let t1 = floor((s - 5.0) * l / omega.ln());
            let t2 = if h < 1.0 { floor((s + 0.5) * l / (1.0 / h).ln()) } else { 0 };
            base.max(t1).max(t2)
        }
    };
    Ok(q)
}

/// Value, gradient and Laplacian of one member at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEval {
    pub value: Complex64,
    pub grad: [Complex64; 2],
    pub lap: Complex64,
}

/// One member with its derivative polynomials precomputed.
#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub direction: usize,
    pub branch: usize,
    tau: CenteredPolynomial<f64>,
    tau_grad: [CenteredPolynomial<f64>; 2],
    tau_lap: CenteredPolynomial<f64>,
    amp: CenteredPolynomial<Complex64>,
    amp_grad: [CenteredPolynomial<Complex64>; 2],
    amp_lap: CenteredPolynomial<Complex64>,
}

impl BasisFunction {
    pub fn new(phase: &PhasePolynomial, amplitude: &AmplitudePolynomial, omega: f64, direction: usize) -> Self {
        let amp = amplitude.collapse(omega);
        Self {
            direction,
            branch: amplitude.branch,
            tau: phase.tau.clone(),
            tau_grad: phase.tau.gradient(),
            tau_lap: phase.tau.laplacian(),
            amp_grad: amp.gradient(),
            amp_lap: amp.laplacian(),
            amp,
        }
    }

    pub fn amplitude(&self) -> &CenteredPolynomial<Complex64> {
        &self.amp
    }

    pub fn phase(&self) -> &CenteredPolynomial<f64> {
        &self.tau
    }

    fn degree(&self) -> usize {
        self.tau.degree().max(self.amp.degree())
    }

    #[inline]
    fn eval_powers(&self, pw: &Powers<f64>, omega: f64) -> BasisEval {
        let t = self.tau.evaluate_powers(pw);
        let tx = self.tau_grad[0].evaluate_powers(pw);
        let ty = self.tau_grad[1].evaluate_powers(pw);
        let tl = self.tau_lap.evaluate_powers(pw);
        let a = self.amp.evaluate_powers(pw);
        let ax = self.amp_grad[0].evaluate_powers(pw);
        let ay = self.amp_grad[1].evaluate_powers(pw);
        let al = self.amp_lap.evaluate_powers(pw);
        let e = Complex64::from_polar(1.0, omega * t);
        let iw = Complex64::new(0.0, omega);
        let gx = ax + iw * a * tx;
        let gy = ay + iw * a * ty;
        let lap = al + iw * (2.0 * (ax * tx + ay * ty) + a * tl) - omega * omega * a * (tx * tx + ty * ty);
        BasisEval {
            value: a * e,
            grad: [gx * e, gy * e],
            lap: lap * e,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GopwBasisSet {
    pub element_id: usize,
    pub center: [f64; 2],
    pub case: BasisCase,
    pub p: usize,
    pub q: usize,
    pub omega: f64,
    pub phases: Vec<PhasePolynomial>,
    pub amplitudes: Vec<AmplitudePolynomial>,
    functions: Vec<BasisFunction>,
    degree: usize,
}

impl GopwBasisSet {
    /// Space on `element` with `p` equispaced directions.
    pub fn build<F: CoefficientField + ?Sized>(
        field: &F,
        element: &Element,
        p: usize,
        q: usize,
        case: BasisCase,
        omega: f64,
    ) -> Result<Self> {
        let opts = AmplitudeOptions {
            omega_h: Some((omega, element.size()[0].max(element.size()[1]))),
        };
        Self::build_with(field, element, p, q, case, omega, &opts)
    }

    pub fn build_with<F: CoefficientField + ?Sized>(
        field: &F,
        element: &Element,
        p: usize,
        q: usize,
        case: BasisCase,
        omega: f64,
        opts: &AmplitudeOptions,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("need at least one direction".into()));
        }
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        case.terminal_index(q)?;
        let center = element.barycenter();
        let mut phases = Vec::with_capacity(p);
        let mut amplitudes = Vec::with_capacity(p * case.members());
        let mut functions = Vec::with_capacity(p * case.members());
        for l in 0..p {
            let theta = 2.0 * std::f64::consts::PI * l as f64 / p as f64;
            let phase = build_phase(field, center, theta, q)?;
            for amp in build_amplitudes(&phase, case, opts)? {
                functions.push(BasisFunction::new(&phase, &amp, omega, l));
                amplitudes.push(amp);
            }
            phases.push(phase);
        }
        let degree = functions.iter().map(BasisFunction::degree).max().unwrap_or(0);
        Ok(Self {
            element_id: element.id,
            center,
            case,
            p,
            q,
            omega,
            phases,
            amplitudes,
            functions,
            degree,
        })
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn member(&self, idx: usize) -> Result<&BasisFunction> {
        self.functions.get(idx).ok_or(Error::IndexOutOfRange {
            index: idx,
            len: self.functions.len(),
        })
    }

    pub fn powers(&self, r: [f64; 2]) -> Powers<f64> {
        Powers::new(self.center, r, self.degree)
    }

    pub fn eval(&self, idx: usize, r: [f64; 2]) -> Result<BasisEval> {
        let f = self.member(idx)?;
        Ok(f.eval_powers(&self.powers(r), self.omega))
    }

    pub fn eval_value(&self, idx: usize, r: [f64; 2]) -> Result<Complex64> {
        self.eval(idx, r).map(|e| e.value)
    }

    pub fn eval_gradient(&self, idx: usize, r: [f64; 2]) -> Result<[Complex64; 2]> {
        self.eval(idx, r).map(|e| e.grad)
    }

    pub fn eval_laplacian(&self, idx: usize, r: [f64; 2]) -> Result<Complex64> {
        self.eval(idx, r).map(|e| e.lap)
    }

    /// All members at `r`.
    pub fn eval_all(&self, r: [f64; 2]) -> Vec<BasisEval> {
        let pw = self.powers(r);
        self.functions.iter().map(|f| f.eval_powers(&pw, self.omega)).collect()
    }

    /// `max |lap v + omega^2 xi v| / max |v|` over a `samples x samples` grid.
    pub fn relative_residual<F: CoefficientField + ?Sized>(
        &self,
        field: &F,
        idx: usize,
        element: &Element,
        samples: usize,
    ) -> Result<f64> {
        let f = self.member(idx)?;
        let (mut res, mut val) = (0.0_f64, 0.0_f64);
        for r in element.sample_grid(samples) {
            let e = f.eval_powers(&self.powers(r), self.omega);
            let k2 = self.omega * self.omega * field.value(r);
            res = res.max((e.lap + k2 * e.value).norm());
            val = val.max(e.value.norm());
        }
        Ok(res / val)
    }

    /// Default sample-grid size `4q + 12`.
    pub fn default_samples(&self) -> usize {
        4 * self.q + 12
    }
}

/// Result of the least-squares fit of a function by a local space.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub linf_error: f64,
    /// Root-mean-square error over the samples.
    pub l2_error: f64,
    /// Largest sampled modulus of the target.
    pub linf_norm: f64,
    pub coeffs: Vec<Complex64>,
    /// Ratio of extreme singular values of the sample matrix.
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Least-squares best fit of `exact` by `space` on a `samples x samples` grid.
pub fn approximation_oracle(
    space: &GopwBasisSet,
    element: &Element,
    exact: impl Fn([f64; 2]) -> Complex64,
    samples: Option<usize>,
) -> OracleResult {
    let n = samples.unwrap_or_else(|| space.default_samples());
    let pts = element.sample_grid(n);
    let dim = space.dim();
    let mut s = DMatrix::<Complex64>::zeros(pts.len(), dim);
    let mut b = DVector::<Complex64>::zeros(pts.len());
    for (i, &r) in pts.iter().enumerate() {
        for (j, e) in space.eval_all(r).into_iter().enumerate() {
            s[(i, j)] = e.value;
        }
        b[i] = exact(r);
    }
    let sol = min_norm_solve(&s, &b, 1e-14);
    let resid = &s * &sol.solution - &b;
    let linf_error = resid.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let l2_error = (resid.norm_squared() / pts.len() as f64).sqrt();
    let linf_norm = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let smax = sol.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = sol.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    OracleResult {
        linf_error,
        l2_error,
        linf_norm,
        coeffs: sol.solution.iter().copied().collect(),
        condition,
        ill_conditioned: condition > 1e12,
    }
}
