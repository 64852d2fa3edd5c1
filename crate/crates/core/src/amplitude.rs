//! Amplitude polynomials solving the truncated transport recursion.
//!
//! An amplitude is stored as its parts `a_0, ..., a_{n_q}` with
//! `deg a_s = q + 1 - s`; the collapsed amplitude for a frequency `omega` is
//! `sum_s a_s / (i omega)^s`. Level `s` is solved on its own:
//!
//! * transport rows: the terms of `2 grad a_s . grad tau + a_s lap tau + lap a_{s-1}`
//!   of total degree below `Q_s` vanish (`Q_0 = q + 1`);
//! * harmonic rows: for `s < n_q`, the constant term of `lap a_s` and, when
//!   `Q_s > 2`, its degree-`(Q_s - 2)` terms vanish; for `s = n_q`, `lap a_s = 0`;
//! * a pin row: `a_0(r0) = 1` and `a_s(r0) = 0` for `s >= 1`, so that the
//!   collapsed amplitude equals one at the center for every `omega`.
//!
//! Each level is solved in the minimum-norm sense. In Case 2 the last level
//! keeps one free direction, which yields the second member.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{min_norm_solve, MinNorm};
use crate::phase::PhasePolynomial;
use crate::poly::{monomial_exponents, monomial_index, triangle_len, CenteredPolynomial};

const RANK_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-8;

/// Which local space: one member per direction (Case 1) or two (Case 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisCase {
    One,
    Two,
}

impl BasisCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(Error::InvalidParameter(format!("case must be 1 or 2, got {i}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }

    /// Members per direction.
    pub fn members(self) -> usize {
        self.index() as usize
    }

    pub fn min_q(self) -> usize {
        match self {
            Self::One => 2,
            Self::Two => 1,
        }
    }

    /// Last recursion index `n_q`.
    pub fn terminal_index(self, q: usize) -> Result<usize> {
        if q < self.min_q() {
            return Err(Error::InvalidParameter(format!(
                "case {} requires q >= {}, got {q}",
                self.index(),
                self.min_q()
            )));
        }
        Ok(match self {
            Self::One => q - 2,
            Self::Two => q - 1,
        })
    }
}

/// Frequency and mesh size used to derive the mesh-dependent transport orders.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AmplitudeOptions {
    pub omega_h: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePolynomial {
    pub parts: Vec<CenteredPolynomial<f64>>,
    pub q: usize,
    pub n_q: usize,
    pub case: BasisCase,
    /// 1 or 2; always 1 in Case 1.
    pub branch: usize,
}

impl AmplitudePolynomial {
    pub fn center(&self) -> [f64; 2] {
        self.parts[0].center()
    }

    /// `sum_s a_s / (i omega)^s`, rescaled so its value at the center is one.
    pub fn collapse(&self, omega: f64) -> CenteredPolynomial<Complex64> {
        let mut acc = CenteredPolynomial::<Complex64>::zero(self.center(), self.q + 1);
        let inv = Complex64::new(0.0, -1.0 / omega);
        let mut w = Complex64::new(1.0, 0.0);
        for part in &self.parts {
            for (a, &c) in acc.coeffs_mut().iter_mut().zip(part.coeffs()) {
                *a += w * c;
            }
            w *= inv;
        }
        let a0 = acc.constant_term();
        if a0.norm() > 0.0 && (a0 - 1.0).norm() > 0.0 {
            acc = acc.scale(a0.inv());
        }
        acc
    }

    /// Concatenated coefficients of all parts.
    pub fn coefficient_vector(&self) -> Vec<f64> {
        self.parts.iter().flat_map(|p| p.coeffs().iter().copied()).collect()
    }
}

/// Transport orders `Q_s` for `s = 0..=n_q`.
pub fn transport_orders(q: usize, n_q: usize, opts: &AmplitudeOptions) -> Vec<usize> {
    (0..=n_q)
        .map(|s| {
            let cap = q + 1 - s;
            if s == 0 {
                return cap;
            }
            match opts.omega_h {
                Some((omega, h)) if h > 0.0 && h < 1.0 && omega > 0.0 => {
                    // smallest integer with q^2 h^{q_s} <= h^q omega^{s-1}
                    let qf = q as f64;
                    let t = (qf * h.ln() + (s as f64 - 1.0) * omega.ln() - 2.0 * qf.ln()) / h.ln();
                    let qs = (t - 1e-12).ceil().max(1.0) as usize;
                    qs.min(cap)
                }
                _ => cap,
            }
        })
        .collect()
}

struct Level {
    a: DMatrix<f64>,
    coupling: Option<DMatrix<f64>>,
    pin_row: usize,
    /// Rows of the harmonic side constraints on non-terminal levels.
    side: std::ops::Range<usize>,
    /// Transport rows of the highest matched degree.
    top: std::ops::Range<usize>,
}

fn monomial(center: [f64; 2], k: usize) -> CenteredPolynomial<f64> {
    let (r, j) = monomial_exponents(k);
    CenteredPolynomial::monomial(center, r, j, 1.0)
}

fn level_system(phase: &PhasePolynomial, q: usize, n_q: usize, s: usize, q_s: usize) -> Level {
    let center = phase.center();
    let deg = q + 1 - s;
    let n_unknowns = triangle_len(deg);
    let [tx, ty] = phase.tau.gradient();
    let lap_tau = phase.tau.laplacian();

    let transport_rows = if q_s == 0 { 0 } else { triangle_len(q_s - 1) };
    let mut harmonic: Vec<usize> = Vec::new();
    if deg >= 2 {
        if s == n_q {
            harmonic.extend(0..triangle_len(deg - 2));
        } else {
            harmonic.push(0);
            if q_s > 2 {
                harmonic.extend(crate::poly::degree_range(q_s - 2));
            }
        }
    }
    let rows = transport_rows + harmonic.len() + 1;
    let mut a = DMatrix::<f64>::zeros(rows, n_unknowns);
    for k in 0..n_unknowns {
        let e = monomial(center, k);
        if transport_rows > 0 {
            let trunc = q_s - 1;
            let [ex, ey] = e.gradient();
            let l = &(&ex.mul_truncated(&tx, trunc) + &ey.mul_truncated(&ty, trunc)).scale(2.0)
                + &e.mul_truncated(&lap_tau, trunc);
            for (row, &c) in l.coeffs().iter().enumerate().take(transport_rows) {
                a[(row, k)] = c;
            }
        }
        let lap = e.laplacian();
        for (i, &idx) in harmonic.iter().enumerate() {
            a[(transport_rows + i, k)] = lap.coeffs().get(idx).copied().unwrap_or(0.0);
        }
    }
    let pin_row = rows - 1;
    a[(pin_row, monomial_index(0, 0))] = 1.0;
    let side = if s == n_q {
        0..0
    } else {
        transport_rows..transport_rows + harmonic.len()
    };
    let top = if q_s == 0 { 0..0 } else { triangle_len(q_s - 1) - q_s..transport_rows };

    let coupling = (s > 0 && transport_rows > 0).then(|| {
        let prev = triangle_len(deg + 1);
        let mut c = DMatrix::<f64>::zeros(rows, prev);
        for k in 0..prev {
            let lap = monomial(center, k).laplacian();
            for (row, &v) in lap.coeffs().iter().enumerate().take(transport_rows) {
                c[(row, k)] = v;
            }
        }
        c
    });
    Level {
        a,
        coupling,
        pin_row,
        side,
        top,
    }
}

fn check_consistency(level: usize, a: &DMatrix<f64>, b: &DVector<f64>, sol: &MinNorm<f64>) -> Result<()> {
    let scale = a.norm() * sol.solution.norm() + b.norm();
    if sol.residual > CONSISTENCY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ConstructionFailure {
            level,
            residual: sol.residual,
            rank: sol.rank,
            equations: a.nrows(),
            unknowns: a.ncols(),
        });
    }
    Ok(())
}

/// Amplitudes for `phase`: one in Case 1, two in Case 2.
pub fn build_amplitudes(phase: &PhasePolynomial, case: BasisCase, opts: &AmplitudeOptions) -> Result<Vec<AmplitudePolynomial>> {
    let q = phase.q;
    let n_q = case.terminal_index(q)?;
    let orders = transport_orders(q, n_q, opts);
    let center = phase.center();

    let mut parts: Vec<CenteredPolynomial<f64>> = Vec::with_capacity(n_q + 1);
    let mut last: Option<(Level, MinNorm<f64>)> = None;
    for s in 0..=n_q {
        let lvl = level_system(phase, q, n_q, s, orders[s]);
        let mut b = DVector::<f64>::zeros(lvl.a.nrows());
        if let (Some(c), Some(prev)) = (&lvl.coupling, parts.last()) {
            b -= c * DVector::from_column_slice(prev.coeffs());
        }
        b[lvl.pin_row] = if s == 0 { 1.0 } else { 0.0 };
        let sol = min_norm_solve(&lvl.a, &b, RANK_TOL);
        if let Err(e) = check_consistency(s, &lvl.a, &b, &sol) {
            return joint_fallback(phase, case, opts, e);
        }
        parts.push(CenteredPolynomial::new(center, q + 1 - s, sol.solution.iter().copied().collect())?);
        if s == n_q {
            last = Some((lvl, sol));
        }
    }

    let first = AmplitudePolynomial {
        parts,
        q,
        n_q,
        case,
        branch: 1,
    };
    if case == BasisCase::One {
        return Ok(vec![first]);
    }

    let (lvl, sol) = last.expect("at least one level");
    if sol.null_space.is_empty() {
        return Err(Error::ConstructionFailure {
            level: n_q,
            residual: 0.0,
            rank: sol.rank,
            equations: lvl.a.nrows(),
            unknowns: lvl.a.ncols(),
        });
    }
    let v = second_direction(phase, lvl.a.ncols(), &sol.null_space);
    let second = second_member(&first, &v);
    Ok(vec![first, second])
}

/// `first` plus the null direction `v` on the last part, scaled to the size
/// of `first` so the two coefficient vectors stay well separated.
fn second_member(first: &AmplitudePolynomial, v: &DVector<f64>) -> AmplitudePolynomial {
    let size = first.coefficient_vector().iter().map(|c| c * c).sum::<f64>().sqrt().max(1.0);
    let mut parts = first.parts.clone();
    for (c, dv) in parts[first.n_q].coeffs_mut().iter_mut().zip(v.iter()) {
        *c += size * dv;
    }
    AmplitudePolynomial {
        parts,
        branch: 2,
        ..first.clone()
    }
}

/// Unit null vector closest to the coefficient vector of `d_perp . (r - r0)`.
fn second_direction(phase: &PhasePolynomial, n: usize, null: &[DVector<f64>]) -> DVector<f64> {
    let [l10, l01] = phase.direction();
    let norm = l10.hypot(l01);
    let mut target = DVector::<f64>::zeros(n);
    target[monomial_index(1, 0)] = -l01 / norm;
    target[monomial_index(0, 1)] = l10 / norm;
    let mut proj = DVector::<f64>::zeros(n);
    for z in null {
        proj += z * z.dot(&target);
    }
    let pn = proj.norm();
    if pn > 1e-8 {
        return proj / pn;
    }
    let mut v = null[0].clone();
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v = -v;
    }
    v
}

struct Coupled {
    m: DMatrix<f64>,
    rhs: DVector<f64>,
    side: Vec<usize>,
    /// Top-degree transport rows of level 0.
    top: Vec<usize>,
    /// Row of `a_0(r0) = 1`.
    pin: usize,
    col_off: Vec<usize>,
    levels: Vec<Level>,
}

fn coupled_system(phase: &PhasePolynomial, case: BasisCase, opts: &AmplitudeOptions) -> Result<Coupled> {
    let q = phase.q;
    let n_q = case.terminal_index(q)?;
    let orders = transport_orders(q, n_q, opts);
    let levels: Vec<Level> = (0..=n_q).map(|s| level_system(phase, q, n_q, s, orders[s])).collect();
    let cols: Vec<usize> = levels.iter().map(|l| l.a.ncols()).collect();
    let col_off: Vec<usize> = cols
        .iter()
        .scan(0, |acc, &c| {
            let o = *acc;
            *acc += c;
            Some(o)
        })
        .collect();
    let rows: usize = levels.iter().map(|l| l.a.nrows()).sum();
    let mut m = DMatrix::<f64>::zeros(rows, cols.iter().sum());
    let mut side = Vec::new();
    let mut r0 = 0;
    for (s, l) in levels.iter().enumerate() {
        let nr = l.a.nrows();
        m.view_mut((r0, col_off[s]), (nr, cols[s])).copy_from(&l.a);
        if let Some(c) = &l.coupling {
            m.view_mut((r0, col_off[s - 1]), (nr, cols[s - 1])).copy_from(c);
        }
        side.extend(l.side.clone().map(|r| r0 + r));
        r0 += nr;
    }
    let pin = levels[0].pin_row;
    let top = levels[0].top.clone().collect();
    let mut rhs = DVector::<f64>::zeros(rows);
    rhs[pin] = 1.0;
    Ok(Coupled {
        m,
        rhs,
        side,
        top,
        pin,
        col_off,
        levels,
    })
}

/// Coupled constraint matrix over all parts, without the `a_0(r0) = 1` row.
pub fn constraint_matrix(phase: &PhasePolynomial, case: BasisCase, opts: &AmplitudeOptions) -> Result<DMatrix<f64>> {
    let c = coupled_system(phase, case, opts)?;
    Ok(c.m.remove_row(c.pin))
}

/// Used when the recursion is unsolvable with `a(r0) = 1`, as happens when the
/// medium is mirror-symmetric about the ray through `r0`. The side rows, or
/// without side rows the top-degree transport rows of level 0, are met in the
/// least-squares sense; every other row of the coupled system is enforced.
fn joint_fallback(
    phase: &PhasePolynomial,
    case: BasisCase,
    opts: &AmplitudeOptions,
    original: Error,
) -> Result<Vec<AmplitudePolynomial>> {
    let c = coupled_system(phase, case, opts)?;
    let soft = if c.side.is_empty() { &c.top } else { &c.side };
    if soft.is_empty() {
        return Err(original);
    }
    let hard: Vec<usize> = (0..c.m.nrows()).filter(|r| !soft.contains(r)).collect();
    let ah = c.m.select_rows(&hard);
    let bh = DVector::from_iterator(hard.len(), hard.iter().map(|&r| c.rhs[r]));
    let base = min_norm_solve(&ah, &bh, RANK_TOL);
    if check_consistency(0, &ah, &bh, &base).is_err() {
        return Err(original);
    }
    let mut x = base.solution.clone();
    if !base.null_space.is_empty() {
        let a_side = c.m.select_rows(soft);
        let b_side = DVector::from_iterator(soft.len(), soft.iter().map(|&r| c.rhs[r]));
        let null = DMatrix::from_columns(&base.null_space);
        let fit = min_norm_solve(&(&a_side * &null), &(b_side - &a_side * &x), RANK_TOL);
        x += &null * &fit.solution;
    }

    let q = phase.q;
    let n_q = c.levels.len() - 1;
    let center = phase.center();
    let parts = (0..=n_q)
        .map(|s| {
            let n = c.levels[s].a.ncols();
            CenteredPolynomial::new(center, q + 1 - s, x.rows(c.col_off[s], n).iter().copied().collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let first = AmplitudePolynomial {
        parts,
        q,
        n_q,
        case,
        branch: 1,
    };
    if case == BasisCase::One {
        return Ok(vec![first]);
    }
    let last = &c.levels[n_q].a;
    let homog = min_norm_solve(last, &DVector::zeros(last.nrows()), RANK_TOL);
    if homog.null_space.is_empty() {
        return Err(original);
    }
    let v = second_direction(phase, last.ncols(), &homog.null_space);
    let second = second_member(&first, &v);
    Ok(vec![first, second])
}
