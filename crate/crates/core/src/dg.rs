//! Stabilized Trefftz-DG assembly and solution.
//!
//! Matrix entries follow `A[j, k] = B_h(phi_k, phi_j)` with the global
//! unknowns ordered element by element. On an interior face with unit normal
//! `n` from the left to the right element, the jump is
//! `[[u]]_N = (u_L - u_R) n`, the normal-derivative jump is
//! `d_n u_L - d_n u_R` and the average is `(grad u_L + grad u_R) / 2`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::GopwBasisSet;
use crate::coeff::CoefficientField;
use crate::error::{Error, Result};
use crate::local::SpectralLocalSolution;
use crate::mesh::{BoundaryFace, InteriorFace, MeshPartition};
use crate::quad::{default_points, rect_rule, segment_rule, QuadRule};

pub type Source<'a> = &'a (dyn Fn([f64; 2]) -> Complex64 + Sync);
/// Boundary data `g(r, n)` with `n` the outward unit normal.
pub type BoundaryData<'a> = &'a (dyn Fn([f64; 2], [f64; 2]) -> Complex64 + Sync);

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Weight `eta` in the boundary terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Impedance {
    /// `eta = kappa(r) = omega sqrt(xi(r))`.
    #[default]
    Wavenumber,
    /// `eta = omega`.
    Omega,
}

impl Impedance {
    pub fn eta<F: CoefficientField + ?Sized>(self, field: &F, omega: f64, r: [f64; 2]) -> f64 {
        match self {
            Self::Wavenumber => field.wavenumber(omega, r),
            Self::Omega => omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub impedance: Impedance,
}

impl Default for DgParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            delta: 0.5,
            gamma: 0.5,
            impedance: Impedance::Wavenumber,
        }
    }
}

/// Selects which groups of terms are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermMask {
    /// `grad u . conj(grad v) - kappa^2 u conj(v)` on elements.
    pub volume: bool,
    /// `(i gamma / omega^2) (lap u + kappa^2 u) conj(lap v + kappa^2 v)` on elements.
    pub stabilization: bool,
    /// The two jump-average terms on interior faces.
    pub average: bool,
    /// The `alpha` jump penalty on interior faces.
    pub jump_value: bool,
    /// The `beta` normal-derivative jump penalty on interior faces.
    pub jump_flux: bool,
    /// All boundary-face terms.
    pub boundary: bool,
}

impl TermMask {
    pub const ALL: Self = Self {
        volume: true,
        stabilization: true,
        average: true,
        jump_value: true,
        jump_flux: true,
        boundary: true,
    };
    pub const NONE: Self = Self {
        volume: false,
        stabilization: false,
        average: false,
        jump_value: false,
        jump_flux: false,
        boundary: false,
    };
}

impl Default for TermMask {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub params: DgParams,
    pub mask: TermMask,
    /// Gauss points per direction on elements and faces.
    pub quad_points: Option<usize>,
    /// Local spectral order, used for the default point count.
    pub local_order: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            params: DgParams::default(),
            mask: TermMask::ALL,
            quad_points: None,
            local_order: 5,
        }
    }
}

impl AssemblyOptions {
    pub fn points(&self, omega: f64, h: f64, q: usize) -> usize {
        self.quad_points
            .unwrap_or_else(|| default_points(omega * h, q, self.local_order))
    }
}

/// Values, gradients and Laplacians of a family of functions at a point set;
/// row = point, column = function.
#[derive(Debug, Clone)]
pub struct Table {
    pub val: DMatrix<Complex64>,
    pub gx: DMatrix<Complex64>,
    pub gy: DMatrix<Complex64>,
    pub lap: DMatrix<Complex64>,
}

impl Table {
    fn normal_derivative(&self, n: [f64; 2]) -> DMatrix<Complex64> {
        &self.gx * Complex64::new(n[0], 0.0) + &self.gy * Complex64::new(n[1], 0.0)
    }
}

/// Functions living on one element that can be tabulated at points.
pub trait LocalFunctions: Sync {
    fn count(&self) -> usize;
    fn table(&self, points: &[[f64; 2]]) -> Table;
}

impl LocalFunctions for GopwBasisSet {
    fn count(&self) -> usize {
        self.dim()
    }
    fn table(&self, points: &[[f64; 2]]) -> Table {
        let (np, nf) = (points.len(), self.dim());
        let mut t = Table {
            val: DMatrix::zeros(np, nf),
            gx: DMatrix::zeros(np, nf),
            gy: DMatrix::zeros(np, nf),
            lap: DMatrix::zeros(np, nf),
        };
        for (i, &r) in points.iter().enumerate() {
            for (j, e) in self.eval_all(r).into_iter().enumerate() {
                t.val[(i, j)] = e.value;
                t.gx[(i, j)] = e.grad[0];
                t.gy[(i, j)] = e.grad[1];
                t.lap[(i, j)] = e.lap;
            }
        }
        t
    }
}

impl LocalFunctions for SpectralLocalSolution {
    fn count(&self) -> usize {
        1
    }
    fn table(&self, points: &[[f64; 2]]) -> Table {
        let np = points.len();
        let mut t = Table {
            val: DMatrix::zeros(np, 1),
            gx: DMatrix::zeros(np, 1),
            gy: DMatrix::zeros(np, 1),
            lap: DMatrix::zeros(np, 1),
        };
        for (i, &r) in points.iter().enumerate() {
            let (v, g, l) = self.eval_all(r);
            t.val[(i, 0)] = v;
            t.gx[(i, 0)] = g[0];
            t.gy[(i, 0)] = g[1];
            t.lap[(i, 0)] = l;
        }
        t
    }
}

/// `test^H diag(w) trial`.
fn weighted_product(test: &DMatrix<Complex64>, w: &[f64], trial: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut wt = trial.clone();
    for (mut row, &wi) in wt.row_iter_mut().zip(w) {
        row *= Complex64::new(wi, 0.0);
    }
    test.ad_mul(&wt)
}

struct Context<'a, F: ?Sized> {
    field: &'a F,
    omega: f64,
    opts: &'a AssemblyOptions,
}

impl<F: CoefficientField + ?Sized> Context<'_, F> {
    fn volume_block(&self, rule: &QuadRule<f64>, test: &Table, trial: &Table, stabilization: bool) -> DMatrix<Complex64> {
        let mask = self.opts.mask;
        let p = &self.opts.params;
        let mut m = DMatrix::<Complex64>::zeros(test.val.ncols(), trial.val.ncols());
        let k2: Vec<f64> = rule
            .points
            .iter()
            .map(|&r| self.omega * self.omega * self.field.value(r))
            .collect();
        if mask.volume {
            m += weighted_product(&test.gx, &rule.weights, &trial.gx);
            m += weighted_product(&test.gy, &rule.weights, &trial.gy);
            let wk: Vec<f64> = rule.weights.iter().zip(&k2).map(|(w, k)| -w * k).collect();
            m += weighted_product(&test.val, &wk, &trial.val);
        }
        if mask.stabilization && stabilization {
            let helm = |t: &Table| {
                let mut l = t.lap.clone();
                for (i, &k) in k2.iter().enumerate() {
                    for j in 0..l.ncols() {
                        l[(i, j)] += t.val[(i, j)] * k;
                    }
                }
                l
            };
            let c = I * (p.gamma / (self.omega * self.omega));
            m += weighted_product(&helm(test), &rule.weights, &helm(trial)) * c;
        }
        m
    }

    /// Contribution of trial side `a` to test side `b` on an interior face;
    /// `sa`, `sb` are `+1` on the left and `-1` on the right.
    fn interior_block(&self, w: &[f64], n: [f64; 2], test: &Table, trial: &Table, sa: f64, sb: f64) -> DMatrix<Complex64> {
        let mask = self.opts.mask;
        let p = &self.opts.params;
        let omega = self.omega;
        let dn_u = trial.normal_derivative(n);
        let dn_v = test.normal_derivative(n);
        let mut m = DMatrix::<Complex64>::zeros(test.val.ncols(), trial.val.ncols());
        if mask.average {
            m += weighted_product(&dn_v, w, &trial.val) * Complex64::new(-sa / 2.0, 0.0);
            m += weighted_product(&test.val, w, &dn_u) * Complex64::new(-sb / 2.0, 0.0);
        }
        if mask.jump_flux {
            m += weighted_product(&dn_v, w, &dn_u) * (I * (p.beta * sa * sb / omega));
        }
        if mask.jump_value {
            m += weighted_product(&test.val, w, &trial.val) * (I * (omega * p.alpha * sa * sb));
        }
        m
    }

    fn boundary_block(&self, face: &BoundaryFace, rule: &QuadRule<f64>, test: &Table, trial: &Table) -> DMatrix<Complex64> {
        let p = &self.opts.params;
        let omega = self.omega;
        let n = face.normal;
        let dn_u = trial.normal_derivative(n);
        let dn_v = test.normal_derivative(n);
        let eta: Vec<f64> = rule
            .points
            .iter()
            .map(|&r| p.impedance.eta(self.field, omega, r))
            .collect();
        let mut eta_u = trial.val.clone();
        for (mut row, &e) in eta_u.row_iter_mut().zip(&eta) {
            row *= Complex64::new(e, 0.0);
        }
        let w = &rule.weights;
        let d = p.delta;
        weighted_product(&dn_v, w, &eta_u) * Complex64::new(-d / omega, 0.0)
            + weighted_product(&test.val, w, &dn_u) * Complex64::new(-d, 0.0)
            + weighted_product(&dn_v, w, &dn_u) * (I * (d / omega))
            + weighted_product(&test.val, w, &eta_u) * (I * (1.0 - d))
    }
}

/// Blocks `(test element, trial element) -> matrix`, in a fixed order.
type Blocks = BTreeMap<(usize, usize), DMatrix<Complex64>>;

fn accumulate(blocks: &mut Blocks, key: (usize, usize), m: DMatrix<Complex64>) {
    match blocks.get_mut(&key) {
        Some(b) => *b += m,
        None => {
            blocks.insert(key, m);
        }
    }
}

fn boundary_faces_by_element(mesh: &MeshPartition) -> Vec<Vec<usize>> {
    let mut by = vec![Vec::new(); mesh.num_elements()];
    for (i, f) in mesh.boundary_faces.iter().enumerate() {
        by[f.element].push(i);
    }
    by
}

/// Block-coupled evaluation of the form with `trial` functions against `test`
/// functions over the whole mesh.
fn assemble_blocks<F, U, V>(
    mesh: &MeshPartition,
    test: &[V],
    trial: &[U],
    field: &F,
    omega: f64,
    n_1d: usize,
    opts: &AssemblyOptions,
    stabilization: bool,
) -> Blocks
where
    F: CoefficientField + ?Sized,
    U: LocalFunctions,
    V: LocalFunctions,
{
    let ctx = Context { field, omega, opts };
    let by_el = boundary_faces_by_element(mesh);

    let element_blocks: Vec<DMatrix<Complex64>> = mesh
        .elements
        .par_iter()
        .map(|el| {
            let k = el.id;
            let rule = rect_rule(el.lo, el.hi, n_1d);
            let tv = test[k].table(&rule.points);
            let tu = trial[k].table(&rule.points);
            let mut m = ctx.volume_block(&rule, &tv, &tu, stabilization);
            if opts.mask.boundary {
                for &fi in &by_el[k] {
                    let face = &mesh.boundary_faces[fi];
                    let fr = segment_rule(face.a, face.b, n_1d);
                    let tv = test[k].table(&fr.points);
                    let tu = trial[k].table(&fr.points);
                    m += ctx.boundary_block(face, &fr, &tv, &tu);
                }
            }
            m
        })
        .collect();

    let face_blocks: Vec<[DMatrix<Complex64>; 4]> = mesh
        .interior_faces
        .par_iter()
        .map(|face: &InteriorFace| {
            let fr = segment_rule(face.a, face.b, n_1d);
            let w = &fr.weights;
            let (l, r) = (face.left, face.right);
            let vl = test[l].table(&fr.points);
            let vr = test[r].table(&fr.points);
            let ul = trial[l].table(&fr.points);
            let ur = trial[r].table(&fr.points);
            let n = face.normal;
            [
                ctx.interior_block(w, n, &vl, &ul, 1.0, 1.0),
                ctx.interior_block(w, n, &vl, &ur, -1.0, 1.0),
                ctx.interior_block(w, n, &vr, &ul, 1.0, -1.0),
                ctx.interior_block(w, n, &vr, &ur, -1.0, -1.0),
            ]
        })
        .collect();

    let mut blocks = Blocks::new();
    for (k, m) in element_blocks.into_iter().enumerate() {
        accumulate(&mut blocks, (k, k), m);
    }
    let any_face = opts.mask.average || opts.mask.jump_flux || opts.mask.jump_value;
    if any_face {
        for (face, [ll, lr, rl, rr]) in mesh.interior_faces.iter().zip(face_blocks) {
            let (l, r) = (face.left, face.right);
            accumulate(&mut blocks, (l, l), ll);
            accumulate(&mut blocks, (l, r), lr);
            accumulate(&mut blocks, (r, l), rl);
            accumulate(&mut blocks, (r, r), rr);
        }
    }
    blocks
}

/// Assembled global system.
#[derive(Debug, Clone)]
pub struct DgSystem {
    /// First global index of each element's block.
    pub offsets: Vec<usize>,
    pub blocks: Blocks,
    pub rhs: DVector<Complex64>,
    pub omega: f64,
    pub params: DgParams,
    pub quad_points: usize,
}

fn check_spaces(mesh: &MeshPartition, spaces: &[GopwBasisSet], omega: f64) -> Result<()> {
    if spaces.len() != mesh.num_elements() {
        return Err(Error::InvalidParameter(format!(
            "{} local spaces for {} elements",
            spaces.len(),
            mesh.num_elements()
        )));
    }
    for (k, s) in spaces.iter().enumerate() {
        if s.omega != omega {
            return Err(Error::MixedFrequency {
                element: k,
                expected: omega,
                found: s.omega,
            });
        }
    }
    Ok(())
}

/// Assemble `B_h` over the product of the local spaces; the right-hand side is left zero.
pub fn assemble<F: CoefficientField + ?Sized>(
    mesh: &MeshPartition,
    spaces: &[GopwBasisSet],
    field: &F,
    omega: f64,
    opts: &AssemblyOptions,
) -> Result<DgSystem> {
    check_spaces(mesh, spaces, omega)?;
    let q = spaces.iter().map(|s| s.q).max().unwrap_or(1);
    let n_1d = opts.points(omega, mesh.h, q);
    let blocks = assemble_blocks(mesh, spaces, spaces, field, omega, n_1d, opts, true);
    let mut offsets = Vec::with_capacity(spaces.len() + 1);
    let mut acc = 0;
    for s in spaces {
        offsets.push(acc);
        acc += s.dim();
    }
    offsets.push(acc);
    Ok(DgSystem {
        offsets,
        blocks,
        rhs: DVector::zeros(acc),
        omega,
        params: opts.params,
        quad_points: n_1d,
    })
}

/// The load functional
/// `sum_k int f conj(v) - A_h(u1, v) + (i delta / omega) int_B g conj(d_n v) + (1 - delta) int_B g conj(v)`.
///
/// `A_h` here is the unstabilized form; `u1` enters as a piecewise field so its
/// interior jumps contribute.
#[allow(clippy::too_many_arguments)]
pub fn assemble_rhs<F: CoefficientField + ?Sized>(
    mesh: &MeshPartition,
    spaces: &[GopwBasisSet],
    u1: &[SpectralLocalSolution],
    field: &F,
    f: Source,
    g: BoundaryData,
    omega: f64,
    opts: &AssemblyOptions,
) -> Result<DVector<Complex64>> {
    check_spaces(mesh, spaces, omega)?;
    if u1.len() != spaces.len() {
        return Err(Error::InvalidParameter(format!(
            "{} local solutions for {} elements",
            u1.len(),
            spaces.len()
        )));
    }
    let q = spaces.iter().map(|s| s.q).max().unwrap_or(1);
    let n_1d = opts.points(omega, mesh.h, q);
    let mut offsets = vec![0];
    for s in spaces {
        offsets.push(offsets.last().unwrap() + s.dim());
    }
    let mut rhs = DVector::<Complex64>::zeros(*offsets.last().unwrap());

    let full = AssemblyOptions {
        mask: TermMask::ALL,
        ..*opts
    };
    let coupled = assemble_blocks(mesh, spaces, u1, field, omega, n_1d, &full, false);
    for (&(row, _), m) in &coupled {
        let mut seg = rhs.rows_mut(offsets[row], m.nrows());
        seg -= m.column(0);
    }

    let by_el = boundary_faces_by_element(mesh);
    let d = opts.params.delta;
    let loads: Vec<DVector<Complex64>> = mesh
        .elements
        .par_iter()
        .map(|el| {
            let k = el.id;
            let rule = rect_rule(el.lo, el.hi, n_1d);
            let tv = spaces[k].table(&rule.points);
            let fv = DMatrix::from_iterator(rule.len(), 1, rule.points.iter().map(|&r| f(r)));
            let mut load: DVector<Complex64> = weighted_product(&tv.val, &rule.weights, &fv).column(0).into_owned();
            for &fi in &by_el[k] {
                let face = &mesh.boundary_faces[fi];
                let fr = segment_rule(face.a, face.b, n_1d);
                let tv = spaces[k].table(&fr.points);
                let gv = DMatrix::from_iterator(fr.len(), 1, fr.points.iter().map(|&r| g(r, face.normal)));
                let dn_v = tv.normal_derivative(face.normal);
                load += weighted_product(&dn_v, &fr.weights, &gv).column(0) * (I * (d / omega));
                load += weighted_product(&tv.val, &fr.weights, &gv).column(0) * Complex64::new(1.0 - d, 0.0);
            }
            load
        })
        .collect();
    for (k, load) in loads.into_iter().enumerate() {
        let mut seg = rhs.rows_mut(offsets[k], load.len());
        seg += load;
    }
    Ok(rhs)
}

impl DgSystem {
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn num_elements(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Stored entries counted block-densely.
    pub fn nnz(&self) -> usize {
        self.blocks.values().map(|b| b.len()).sum()
    }

    pub fn block_pattern_symmetric(&self) -> bool {
        self.blocks.keys().all(|&(i, j)| self.blocks.contains_key(&(j, i)))
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for (&(bi, bj), m) in &self.blocks {
            let (r0, c0) = (self.offsets[bi], self.offsets[bj]);
            for c in 0..m.ncols() {
                for r in 0..m.nrows() {
                    t.push((r0 + r, c0 + c, m[(r, c)]));
                }
            }
        }
        t
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut a = DMatrix::zeros(n, n);
        for (&(bi, bj), m) in &self.blocks {
            a.view_mut((self.offsets[bi], self.offsets[bj]), m.shape()).copy_from(m);
        }
        a
    }

    pub fn matvec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut y = DVector::zeros(self.dim());
        for (&(bi, bj), m) in &self.blocks {
            let xs = x.rows(self.offsets[bj], m.ncols());
            let mut ys = y.rows_mut(self.offsets[bi], m.nrows());
            ys += m * xs;
        }
        y
    }

    /// `B_h(u, v) = v^H A u` for global coefficient vectors.
    pub fn form(&self, u: &DVector<Complex64>, v: &DVector<Complex64>) -> Complex64 {
        v.dotc(&self.matvec(u))
    }

    pub fn solve(&self, kind: SolverKind) -> Result<DgSolution> {
        solve_system(self, &self.rhs, kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Dense LU up to `DENSE_LIMIT` unknowns, sparse LU above.
    #[default]
    Auto,
    Sparse,
    Dense,
}

pub const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone)]
pub struct DgSolution {
    pub coeffs: DVector<Complex64>,
    pub offsets: Vec<usize>,
    /// `|| A x - b || / || b ||`.
    pub relative_residual: f64,
    pub nnz: usize,
    pub used: SolverKind,
}

impl DgSolution {
    pub fn element_coeffs(&self, k: usize) -> &[Complex64] {
        &self.coeffs.as_slice()[self.offsets[k]..self.offsets[k + 1]]
    }
}

fn solve_system(sys: &DgSystem, b: &DVector<Complex64>, kind: SolverKind) -> Result<DgSolution> {
    let n = sys.dim();
    let used = match kind {
        SolverKind::Auto if n <= DENSE_LIMIT => SolverKind::Dense,
        SolverKind::Auto => SolverKind::Sparse,
        k => k,
    };
    let x = match used {
        SolverKind::Dense => sys
            .to_dense()
            .lu()
            .solve(b)
            .ok_or_else(|| Error::SolverFailure("dense LU found an exactly singular pivot".into()))?,
        _ => sparse_solve(sys, b)?,
    };
    let bn = b.norm();
    let res = (sys.matvec(&x) - b).norm();
    let relative_residual = if bn > 0.0 { res / bn } else { res };
    if !relative_residual.is_finite() {
        return Err(Error::SolverFailure(format!(
            "non-finite residual after {used:?} factorization of a {n}x{n} system"
        )));
    }
    Ok(DgSolution {
        coeffs: x,
        offsets: sys.offsets.clone(),
        relative_residual,
        nnz: sys.nnz(),
        used,
    })
}

fn sparse_solve(sys: &DgSystem, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    use faer::sparse::{SparseColMat, Triplet};
    use faer::Col;

    // Single-threaded factorization keeps results independent of the thread count.
    faer::set_global_parallelism(faer::Par::Seq);
    let n = sys.dim();
    let trips: Vec<Triplet<usize, usize, faer::c64>> = sys
        .triplets()
        .into_iter()
        .map(|(r, c, v)| Triplet::new(r, c, faer::c64::new(v.re, v.im)))
        .collect();
    let a = SparseColMat::<usize, faer::c64>::try_new_from_triplets(n, n, &trips)
        .map_err(|e| Error::SolverFailure(format!("sparse matrix construction: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::SolverFailure(format!("sparse LU: {e:?}")))?;
    let rhs = Col::<faer::c64>::from_fn(n, |i| faer::c64::new(b[i].re, b[i].im));
    let x = faer::linalg::solvers::Solve::solve(&lu, &rhs);
    Ok(DVector::from_iterator(n, (0..n).map(|i| Complex64::new(x[i].re, x[i].im))))
}

/// `u_h = u1 + sum_j c_j phi_j` on element `k`.
pub fn eval_solution(
    spaces: &[GopwBasisSet],
    u1: Option<&[SpectralLocalSolution]>,
    sol: &DgSolution,
    k: usize,
    r: [f64; 2],
) -> Complex64 {
    let c = sol.element_coeffs(k);
    let mut v: Complex64 = spaces[k]
        .eval_all(r)
        .iter()
        .zip(c)
        .map(|(e, &ci)| e.value * ci)
        .sum();
    if let Some(u1) = u1 {
        v += u1[k].eval_u1(r);
    }
    v
}
