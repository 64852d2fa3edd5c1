//! Acceptance report: one PASS/FAIL line per criterion with the measured values.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use gopw::basis::{select_q, QMode, DEFAULT_C0};
use gopw::dg::{DgParams, DgSystem, SolverKind};
use gopw::local::{solve_local, LocalOptions};
use gopw::mesh::square_element;
use gopw::phase::eikonal_residual;
use gopw::quad::{disc_rule, gauss_legendre, rect_rule};
use gopw::{
    build_phase, Axis, BasisCase, CoefficientField, Complex64, ConstantField, GaussianLensField, GopwBasisSet,
    GradientField, MeshPartition, RealPoly,
};
use gopw_bench::study::{fitted_slope, run_oracle_study};
use gopw_bench::{run_h_study, run_pollution_study, ExampleKind, Experiment, RunConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SWEEP: [f64; 4] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, start: Instant, detail: String) {
        if !ok {
            self.failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
    }
}

fn fields() -> [(&'static str, Box<dyn CoefficientField>); 2] {
    [
        ("gradient", Box::new(GradientField::default())),
        ("lens", Box::new(GaussianLensField::default())),
    ]
}

fn criterion_1(rep: &mut Report) {
    let t = Instant::now();
    let (xi, omega, p) = (1.3, 32.0, 5);
    let field = ConstantField::new(xi);
    let el = square_element([0.5, 0.5], 1.0 / 16.0);
    let r0 = el.barycenter();
    let (mut res, mut coef) = (0.0_f64, 0.0_f64);
    match GopwBasisSet::build(&field, &el, p, 1, BasisCase::Two, omega) {
        Ok(bs) => {
            for idx in 0..bs.dim() {
                res = res.max(bs.relative_residual(&field, idx, &el, 33).unwrap_or(f64::INFINITY));
                let th = 2.0 * PI * (idx / 2) as f64 / p as f64;
                let (d, dp) = ([th.cos(), th.sin()], [-th.sin(), th.cos()]);
                let member = bs.member(idx).unwrap();
                let mut tau = RealPoly::zero(r0, 1);
                tau.set_coeff(1, 0, xi.sqrt() * d[0]);
                tau.set_coeff(0, 1, xi.sqrt() * d[1]);
                let mut amp = RealPoly::constant(r0, 1.0);
                if idx % 2 == 1 {
                    amp = amp.with_degree(1);
                    amp.set_coeff(1, 0, dp[0]);
                    amp.set_coeff(0, 1, dp[1]);
                }
                let diff = |a: &[f64], b: &[f64]| {
                    (0..a.len().max(b.len()))
                        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
                        .fold(0.0, f64::max)
                };
                let a_re: Vec<f64> = member.amplitude().coeffs().iter().map(|c| c.re).collect();
                let a_im = member.amplitude().coeffs().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
                coef = coef.max(diff(member.phase().coeffs(), tau.coeffs())).max(diff(&a_re, amp.coeffs())).max(a_im);
            }
        }
        Err(e) => {
            rep.line("1 constant-coefficient exactness", false, t, format!("build failed: {e}"));
            return;
        }
    }
    let ok = res <= 1e-10 && coef <= 1e-12 && t.elapsed().as_secs_f64() < 1.0;
    rep.line(
        "1 constant-coefficient exactness",
        ok,
        t,
        format!("max relative residual {res:.2e} (<= 1e-10), max coefficient deviation {coef:.2e} (<= 1e-12)"),
    );
}

fn criterion_2(rep: &mut Report) {
    let t = Instant::now();
    let center = [0.3, 0.6];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in fields() {
        for q in 1..=2 {
            let res: Vec<f64> = SWEEP
                .iter()
                .map(|&h| match build_phase(f.as_ref(), center, 0.7, q) {
                    Ok(ph) => eikonal_residual(&ph, f.as_ref(), &square_element(center, h), 17),
                    Err(_) => f64::NAN,
                })
                .collect();
            let s = fitted_slope(&SWEEP, &res);
            ok &= s >= q as f64 + 1.7;
            parts.push(format!("{name} q={q} slope {s:.2}"));
        }
    }
    ok &= t.elapsed().as_secs_f64() < 10.0;
    rep.line("2 eikonal order (>= q+1.7)", ok, t, parts.join(", "));
}

fn criterion_3(rep: &mut Report) {
    let t = Instant::now();
    let center = [0.3, 0.6];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in fields() {
        for (case, q) in [(BasisCase::Two, 1), (BasisCase::Two, 2), (BasisCase::One, 2)] {
            let res: Vec<f64> = SWEEP
                .iter()
                .map(|&h| {
                    let el = square_element(center, h);
                    match GopwBasisSet::build(f.as_ref(), &el, 5, q, case, 1.0 / h) {
                        Ok(bs) => (0..bs.dim())
                            .map(|k| bs.relative_residual(f.as_ref(), k, &el, bs.default_samples()).unwrap())
                            .fold(0.0, f64::max),
                        Err(_) => f64::NAN,
                    }
                })
                .collect();
            let s = fitted_slope(&SWEEP, &res);
            ok &= s >= q as f64 - 0.3;
            parts.push(format!("{name} case {} q={q} slope {s:.2}", case.index()));
        }
    }
    ok &= t.elapsed().as_secs_f64() < 30.0;
    rep.line("3 Trefftz residual order (>= q-0.3, omega h = 1)", ok, t, parts.join(", "));
}

fn criterion_4(rep: &mut Report) {
    let t = Instant::now();
    let omegas = [8.0, 16.0, 32.0, 64.0];
    let mut ok = true;
    let mut parts = Vec::new();
    for (case, p, n) in [(BasisCase::Two, 5, 2), (BasisCase::One, 9, 4)] {
        let q = match select_q(n, omegas[0], 1.0 / omegas[0], case, QMode::Approximation, DEFAULT_C0) {
            Ok(q) => q,
            Err(e) => {
                ok = false;
                parts.push(format!("case {}: {e}", case.index()));
                continue;
            }
        };
        let base = RunConfig {
            example: ExampleKind::Example2,
            case,
            p,
            ..RunConfig::default()
        };
        let study = run_oracle_study(&base, &omegas, 1.0, q, |_| {});
        let errs: Vec<String> = study.rows.iter().map(|r| format!("{:.2e}", r.err.unwrap_or(f64::NAN))).collect();
        let order = study.fitted_h_order().unwrap_or(f64::NAN);
        ok &= order >= 4.5;
        parts.push(format!("case {} p={p} q={q} order {order:.2} errors [{}]", case.index(), errs.join(", ")));
    }
    ok &= t.elapsed().as_secs_f64() < 60.0;
    rep.line("4 single-element approximation order (>= 4.5)", ok, t, parts.join("; "));
}

fn criterion_5(rep: &mut Report) {
    let t = Instant::now();
    let omega = 16.0;
    let exp = Experiment::new(ExampleKind::Example1, omega, Default::default());
    let f = |r: [f64; 2]| exp.f(r);
    let opts = LocalOptions::default();
    let nxs = [4usize, 8, 16, 32];
    let errors: Vec<f64> = nxs
        .iter()
        .map(|&nx| {
            let mesh = MeshPartition::square(nx).unwrap();
            (0..mesh.num_elements())
                .map(|k| {
                    let d = mesh.fictitious_disc(k).unwrap();
                    let a = solve_local(exp.field().as_ref(), &f, k, &d, 4, omega, &opts);
                    let b = solve_local(exp.field().as_ref(), &f, k, &d, 8, omega, &opts);
                    match (a, b) {
                        (Ok(a), Ok(b)) => disc_rule(d.center, d.radius, 14, 30)
                            .iter()
                            .map(|(r, w)| w * (a.eval_u1(r) - b.eval_u1(r)).norm_sqr())
                            .sum::<f64>(),
                        _ => f64::NAN,
                    }
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let hs: Vec<f64> = nxs.iter().map(|&n| 1.0 / n as f64).collect();
    let order = fitted_slope(&hs, &errors);
    let ok = order >= 3.5 && t.elapsed().as_secs_f64() < 60.0;
    rep.line(
        "5 local solver h-order (m=4, >= 3.5)",
        ok,
        t,
        format!("order {order:.2}, errors {:?}", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()),
    );
}

fn convergence_config(example: ExampleKind) -> RunConfig {
    RunConfig {
        example,
        case: BasisCase::Two,
        omega: 32.0,
        p: 5,
        m: 5,
        q: Some(1),
        ..RunConfig::default()
    }
}

fn criterion_6(rep: &mut Report) {
    for example in [ExampleKind::Example1, ExampleKind::Example2] {
        let t = Instant::now();
        let study = run_h_study(&convergence_config(example), &[8, 16, 32], |_| {});
        let order = study.fitted_h_order().unwrap_or(f64::NAN);
        let errs: Vec<String> = study.rows.iter().map(|r| format!("{:.3e}", r.err.unwrap_or(f64::NAN))).collect();
        let ok = study.rows.iter().all(|r| r.failure.is_none()) && order >= 4.0 && t.elapsed().as_secs_f64() < 300.0;
        rep.line(
            &format!("6 h-convergence {example} (omega 32, >= 4.0)"),
            ok,
            t,
            format!("fitted order {order:.2}, errors [{}]", errs.join(", ")),
        );
    }
}

fn criterion_7(rep: &mut Report) {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for example in [ExampleKind::Example1, ExampleKind::Example2] {
        let base = RunConfig {
            example,
            ..convergence_config(example)
        };
        let base = RunConfig { q: None, ..base };
        let study = run_pollution_study(&base, &[16.0, 32.0, 64.0], 1.0, |_| {});
        let deltas: Vec<f64> = study.rows.iter().skip(1).map(|r| r.delta.unwrap_or(f64::NAN)).collect();
        let errs: Vec<String> = study.rows.iter().map(|r| format!("{:.3e}", r.err.unwrap_or(f64::NAN))).collect();
        ok &= deltas.iter().all(|d| d.abs() <= 0.2);
        parts.push(format!(
            "{example} delta [{}] errors [{}]",
            deltas.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>().join(", "),
            errs.join(", ")
        ));
    }
    ok &= t.elapsed().as_secs_f64() < 600.0;
    rep.line("7 pollution (omega h = 1, |delta| <= 0.2)", ok, t, parts.join("; "));
}

fn random_int_poly(rng: &mut ChaCha8Rng, center: [f64; 2], degree: usize) -> RealPoly {
    RealPoly::from_fn(center, degree, |_, _| rng.random_range(-5..=5) as f64)
}

fn criterion_8(rep: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut notes = Vec::new();

    let mut poly_ok = true;
    for _ in 0..50 {
        let c = [0.25, -0.5];
        let (a, b, d) = (random_int_poly(&mut rng, c, 3), random_int_poly(&mut rng, c, 4), random_int_poly(&mut rng, c, 2));
        poly_ok &= (&a * &b).coeffs() == (&b * &a).coeffs();
        poly_ok &= (&(&a * &b) * &d).coeffs() == (&a * &(&b * &d)).coeffs();
        poly_ok &= (&a * &(&b + &d)).coeffs() == (&(&a * &b) + &(&a * &d)).coeffs();
        let lhs = (&a * &b).differentiate(Axis::X);
        let rhs = &(&a.differentiate(Axis::X) * &b) + &(&a * &b.differentiate(Axis::X));
        poly_ok &= lhs.coeffs() == rhs.coeffs();
        let r = [rng.random::<f64>(), rng.random::<f64>()];
        let (pa, pb) = (a.evaluate(r), b.evaluate(r));
        poly_ok &= ((&a * &b).evaluate(r) - pa * pb).abs() <= 1e-12 * (1.0 + (pa * pb).abs());
    }
    notes.push(format!("poly {}", if poly_ok { "ok" } else { "violated" }));

    let mut quad_err = 0.0_f64;
    let sq = rect_rule([0.0, 0.0], [1.0, 1.0], 4);
    quad_err = quad_err.max((sq.integrate(|r: [f64; 2]| r[0] * r[0] * r[1] * r[1]) - 1.0 / 9.0).abs());
    let rect = rect_rule([0.0, 1.0], [2.0, 4.0], 6);
    quad_err = quad_err.max((rect.integrate(|r: [f64; 2]| r[0].powi(5) * r[1].powi(3)) - (64.0 / 6.0) * (255.0 / 4.0)).abs() / 680.0);
    let disc = disc_rule([0.2, 0.3], 0.5, 6, 12);
    quad_err = quad_err.max((disc.integrate(|_| 1.0f64) - PI * 0.25).abs());
    let rx2 = disc.integrate(|r: [f64; 2]| (r[0] - 0.2).powi(2));
    quad_err = quad_err.max((rx2 - PI * 0.5f64.powi(4) / 4.0).abs());
    let gl = gauss_legendre(7);
    let (x, w) = gl.on_interval(-1.0f64, 1.0);
    let m12: f64 = x.iter().zip(&w).map(|(x, w): (&f64, &f64)| w * x.powi(12)).sum();
    quad_err = quad_err.max((m12 - 2.0 / 13.0).abs());
    let quad_ok = quad_err <= 1e-13;
    notes.push(format!("quad max error {quad_err:.1e}"));

    let sys = shifted_block_system(48, 10, &mut rng);
    let solve_diff = match (sys.solve(SolverKind::Dense), sys.solve(SolverKind::Sparse)) {
        (Ok(a), Ok(b)) => (&a.coeffs - &b.coeffs).norm() / a.coeffs.norm(),
        _ => f64::INFINITY,
    };
    notes.push(format!("dense vs sparse {solve_diff:.1e}"));

    let consistency = experiment_consistency(&mut rng);
    notes.push(format!("experiment self-consistency {consistency:.1e}"));

    let ok = poly_ok && quad_ok && solve_diff <= 1e-10 && consistency <= 1e-8 && t.elapsed().as_secs_f64() < 30.0;
    rep.line("8 plumbing oracles", ok, t, notes.join(", "));
}

/// Block-tridiagonal random system with diagonally shifted blocks.
fn shifted_block_system(n_el: usize, block: usize, rng: &mut ChaCha8Rng) -> DgSystem {
    let mut c = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    let mut blocks = BTreeMap::new();
    for i in 0..n_el {
        for j in i.saturating_sub(1)..(i + 2).min(n_el) {
            let mut m = DMatrix::from_fn(block, block, |_, _| c());
            if i == j {
                m += DMatrix::<Complex64>::identity(block, block) * Complex64::new(3.0 * block as f64, 0.0);
            }
            blocks.insert((i, j), m);
        }
    }
    DgSystem {
        offsets: (0..=n_el).map(|k| k * block).collect(),
        blocks,
        rhs: DVector::from_fn(n_el * block, |_, _| c()),
        omega: 1.0,
        params: DgParams::default(),
        quad_points: 1,
    }
}

/// Largest mismatch of `f` and `g` against Richardson-extrapolated finite differences,
/// relative to `omega^k max |u|` over the samples.
fn experiment_consistency(rng: &mut ChaCha8Rng) -> f64 {
    let steps = [2e-2, 1e-2, 5e-3, 2.5e-3];
    let rich = |v: [Complex64; 4]| {
        let l1: Vec<Complex64> = v.windows(2).map(|w| (w[1] * 4.0 - w[0]) / 3.0).collect();
        let l2: Vec<Complex64> = l1.windows(2).map(|w| (w[1] * 16.0 - w[0]) / 15.0).collect();
        (l2[1] * 64.0 - l2[0]) / 63.0
    };
    let omega = 4.0;
    let mut worst = 0.0_f64;
    for kind in [ExampleKind::Example1, ExampleKind::Example2] {
        let e = Experiment::new(kind, omega, Default::default());
        let u = |r: [f64; 2]| e.u(r);
        let pts: Vec<[f64; 2]> = (0..100)
            .map(|_| [0.02 + 0.96 * rng.random::<f64>(), 0.02 + 0.96 * rng.random::<f64>()])
            .collect();
        let umax = pts.iter().map(|&r| u(r).norm()).fold(0.0, f64::max);
        for r in pts {
            let lap = rich(steps.map(|s| {
                (u([r[0] + s, r[1]]) + u([r[0] - s, r[1]]) + u([r[0], r[1] + s]) + u([r[0], r[1] - s]) - u(r) * 4.0) / (s * s)
            }));
            let dx = rich(steps.map(|s| (u([r[0] + s, r[1]]) - u([r[0] - s, r[1]])) / (2.0 * s)));
            let xi = e.field().value(r);
            let f_ref = -lap - u(r) * (omega * omega * xi);
            worst = worst.max((e.f(r) - f_ref).norm() / (omega * omega * umax));
            let eta = e.impedance.eta(e.field().as_ref(), omega, r);
            let g_ref = dx + Complex64::new(0.0, eta) * u(r);
            worst = worst.max((e.g(r, [1.0, 0.0]) - g_ref).norm() / (omega * umax));
        }
    }
    worst
}

fn criterion_9(rep: &mut Report) {
    let t = Instant::now();
    let run = |example: &str, threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_gopw"))
            .args([
                "h-study", "--example", example, "--case", "2", "--omega", "32", "--nx", "8,16,32", "--p", "5", "--m", "5",
                "--q", "1", "--threads", threads, "--no-timing",
            ])
            .output()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for example in ["1", "2"] {
        match (run(example, "1"), run(example, "3")) {
            (Ok(a), Ok(b)) => {
                let same = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
                ok &= same;
                parts.push(format!("example {example}: {} bytes, identical {same}", a.stdout.len()));
            }
            _ => {
                ok = false;
                parts.push(format!("example {example}: could not run the binary"));
            }
        }
    }
    rep.line("9 determinism (1 vs 3 threads)", ok, t, parts.join(", "));
}

/// The documented single-element residual example for the lens medium.
fn lens_residual_example(rep: &mut Report) {
    let t = Instant::now();
    let f = GaussianLensField::default();
    let h = 1.0 / 16.0;
    let el = square_element([0.3, 0.6], h);
    let c = match GopwBasisSet::build(&f, &el, 9, 2, BasisCase::One, 64.0) {
        Ok(bs) => (0..bs.dim())
            .map(|k| bs.relative_residual(&f, k, &el, 33).unwrap() / (h * h))
            .fold(0.0, f64::max),
        Err(_) => f64::NAN,
    };
    rep.line(
        "example lens residual constant (case 1, p=9, q=2, omega 64, h 1/16, C <= 10)",
        c <= 10.0,
        t,
        format!("max C {c:.3e}"),
    );
}

fn main() {
    let mut rep = Report { failed: 0 };
    criterion_1(&mut rep);
    criterion_2(&mut rep);
    criterion_3(&mut rep);
    criterion_4(&mut rep);
    criterion_5(&mut rep);
    criterion_6(&mut rep);
    criterion_7(&mut rep);
    criterion_8(&mut rep);
    criterion_9(&mut rep);
    lens_residual_example(&mut rep);
    println!("acceptance: {} failing line(s)", rep.failed);
}
