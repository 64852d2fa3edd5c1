//! One full solve: local particular solutions, GOPW spaces, DG system, error.

use std::time::Instant;

use gopw::basis::{default_dg_index, select_q, BasisCase, QMode, DEFAULT_C0};
use gopw::dg::{self, AssemblyOptions, DgParams, DgSolution, Impedance, SolverKind};
use gopw::local::{solve_local, LocalOptions, SpectralLocalSolution};
use gopw::quad::rect_rule;
use gopw::{Complex64, GopwBasisSet, MeshPartition};
use rayon::prelude::*;

use crate::experiments::{ExampleKind, Experiment};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub example: ExampleKind,
    pub case: BasisCase,
    pub omega: f64,
    pub nx: usize,
    pub p: usize,
    /// Overrides the automatic choice of the matching order.
    pub q: Option<usize>,
    pub m: usize,
    pub quad_points: Option<usize>,
    pub impedance: Impedance,
    pub solver: SolverKind,
    pub c0: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example: ExampleKind::Example1,
            case: BasisCase::Two,
            omega: 32.0,
            nx: 8,
            p: 5,
            q: None,
            m: 5,
            quad_points: None,
            impedance: Impedance::Wavenumber,
            solver: SolverKind::Auto,
            c0: DEFAULT_C0,
        }
    }
}

impl RunConfig {
    pub fn h(&self) -> f64 {
        1.0 / self.nx as f64
    }

    /// Matching order: the override, or the DG-mode rule with `n = (p - 1) / 2`.
    pub fn resolve_q(&self) -> gopw::Result<usize> {
        if let Some(q) = self.q {
            return Ok(q);
        }
        let n = (self.p.saturating_sub(1)) / 2;
        let s = default_dg_index(self.case, n, self.m);
        select_q(n, self.omega, self.h(), self.case, QMode::Dg { s }, self.c0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub omega: f64,
    pub h: f64,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub case: BasisCase,
    pub dofs: usize,
    pub err: f64,
    pub wall_time_s: f64,
    pub solver_residual: f64,
    pub nnz: usize,
}

/// Everything produced by a solve, for inspection beyond the error.
pub struct SolveState {
    pub mesh: MeshPartition,
    pub experiment: Experiment,
    pub spaces: Vec<GopwBasisSet>,
    pub u1: Vec<SpectralLocalSolution>,
    pub system: dg::DgSystem,
    pub solution: DgSolution,
    pub q: usize,
}

pub fn solve(cfg: &RunConfig) -> anyhow::Result<SolveState> {
    let mesh = MeshPartition::square(cfg.nx)?;
    let q = cfg.resolve_q()?;
    let exp = Experiment::new(cfg.example, cfg.omega, cfg.impedance);
    let field = exp.field().clone();

    let f = |r: [f64; 2]| exp.f(r);
    let u1: Vec<SpectralLocalSolution> = mesh
        .elements
        .par_iter()
        .map(|el| {
            let disc = mesh.fictitious_disc(el.id)?;
            if exp.has_source() {
                solve_local(field.as_ref(), &f, el.id, &disc, cfg.m, cfg.omega, &LocalOptions::default())
            } else {
                Ok(SpectralLocalSolution::zero(el.id, cfg.m, disc))
            }
        })
        .collect::<gopw::Result<_>>()?;

    let spaces: Vec<GopwBasisSet> = mesh
        .elements
        .par_iter()
        .map(|el| GopwBasisSet::build(field.as_ref(), el, cfg.p, q, cfg.case, cfg.omega))
        .collect::<gopw::Result<_>>()?;

    let opts = AssemblyOptions {
        params: DgParams {
            impedance: cfg.impedance,
            ..DgParams::default()
        },
        quad_points: cfg.quad_points,
        local_order: cfg.m,
        ..AssemblyOptions::default()
    };
    let mut system = dg::assemble(&mesh, &spaces, field.as_ref(), cfg.omega, &opts)?;
    let g = |r: [f64; 2], n: [f64; 2]| exp.g(r, n);
    system.rhs = dg::assemble_rhs(&mesh, &spaces, &u1, field.as_ref(), &f, &g, cfg.omega, &opts)?;
    let solution = system.solve(cfg.solver)?;
    Ok(SolveState {
        mesh,
        experiment: exp,
        spaces,
        u1,
        system,
        solution,
        q,
    })
}

impl SolveState {
    pub fn eval(&self, k: usize, r: [f64; 2]) -> Complex64 {
        dg::eval_solution(&self.spaces, Some(&self.u1), &self.solution, k, r)
    }

    /// `||u_ex - u_h||_L2 / ||u_ex||_L2` by element-wise Gauss quadrature.
    pub fn relative_l2_error(&self, n_1d: usize) -> f64 {
        relative_l2_error(&self.mesh, n_1d, |r| self.experiment.u(r), |k, r| self.eval(k, r))
    }
}

/// Relative L2 distance between `exact` and a piecewise field `approx(k, r)`.
pub fn relative_l2_error(
    mesh: &MeshPartition,
    n_1d: usize,
    exact: impl Fn([f64; 2]) -> Complex64 + Sync,
    approx: impl Fn(usize, [f64; 2]) -> Complex64 + Sync,
) -> f64 {
    let parts: Vec<(f64, f64)> = mesh
        .elements
        .par_iter()
        .map(|el| {
            let rule = rect_rule(el.lo, el.hi, n_1d);
            rule.iter().fold((0.0, 0.0), |(num, den), (r, w)| {
                let u = exact(r);
                (num + w * (u - approx(el.id, r)).norm_sqr(), den + w * u.norm_sqr())
            })
        })
        .collect();
    let (num, den) = parts.iter().fold((0.0, 0.0), |(a, b), (n, d)| (a + n, b + d));
    (num / den).sqrt()
}

pub fn run(cfg: &RunConfig) -> anyhow::Result<RunResult> {
    let start = Instant::now();
    let state = solve(cfg)?;
    let err = state.relative_l2_error(state.system.quad_points);
    Ok(RunResult {
        omega: cfg.omega,
        h: cfg.h(),
        p: cfg.p,
        q: state.q,
        m: cfg.m,
        case: cfg.case,
        dofs: state.system.dim(),
        err,
        wall_time_s: start.elapsed().as_secs_f64(),
        solver_residual: state.solution.relative_residual,
        nnz: state.solution.nnz,
    })
}
