use gopw::local::{assemble_local, solve_local, solve_local_with_boundary, LocalOptions, SpectralLocalSolution};
use gopw::quad::disc_rule;
use gopw::{CoefficientField, Complex64, ConstantField, Disc, GaussianLensField, MeshPartition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn disc() -> Disc {
    Disc {
        center: [0.3, 0.4],
        radius: 0.0884,
    }
}

fn zero(_: [f64; 2]) -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Polynomial test solution `w` with its gradient and Laplacian.
fn w(r: [f64; 2]) -> (Complex64, [Complex64; 2], Complex64) {
    let (x, y) = (r[0] - 0.3, r[1] - 0.4);
    let c = |a: f64, b: f64| Complex64::new(a, b);
    let v = c(1.0, 0.5) + c(2.0, -1.0) * x + c(-0.5, 3.0) * y + c(4.0, 1.0) * x * y + c(1.5, 0.0) * x * x * x
        - c(0.0, 2.0) * y * y * y * y;
    let gx = c(2.0, -1.0) + c(4.0, 1.0) * y + c(4.5, 0.0) * x * x;
    let gy = c(-0.5, 3.0) + c(4.0, 1.0) * x - c(0.0, 8.0) * y * y * y;
    let lap = c(9.0, 0.0) * x - c(0.0, 24.0) * y * y;
    (v, [gx, gy], lap)
}

#[test]
fn zero_source_gives_zero() {
    let f = GaussianLensField::default();
    let s = solve_local(&f, &zero, 3, &disc(), 5, 16.0, &LocalOptions::default()).unwrap();
    assert!(s.coeffs.iter().all(|c| c.norm() == 0.0));
    assert_eq!(s.element_id, 3);
}

#[test]
fn manufactured_polynomial_is_recovered() {
    let d = disc();
    let (omega, xi0) = (12.0, 1.3);
    let field = ConstantField::new(xi0);
    let source = move |r: [f64; 2]| {
        let (v, _, lap) = w(r);
        -lap - omega * omega * xi0 * v
    };
    let data = move |r: [f64; 2]| {
        let (v, g, _) = w(r);
        let n = [(r[0] - d.center[0]) / d.radius, (r[1] - d.center[1]) / d.radius];
        g[0] * n[0] + g[1] * n[1] + Complex64::new(0.0, 1.0 / d.radius) * v
    };
    for m in 4..=7 {
        let s = solve_local_with_boundary(&field, &source, Some(&data), 0, &d, m, omega, &LocalOptions::default()).unwrap();
        assert!(s.relative_residual <= 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
        for _ in 0..20 {
            let t = std::f64::consts::TAU * rng.random::<f64>();
            let rho = d.radius * rng.random::<f64>().sqrt();
            let r = [d.center[0] + rho * t.cos(), d.center[1] + rho * t.sin()];
            let (v, g, lap) = w(r);
            let (u, gu, lu) = s.eval_all(r);
            assert!((u - v).norm() <= 1e-9 * v.norm(), "m {m}");
            assert!((gu[0] - g[0]).norm() + (gu[1] - g[1]).norm() <= 1e-8 * (g[0].norm() + g[1].norm()));
            assert!((lu - lap).norm() <= 1e-7 * (1.0 + lap.norm()));
        }
    }
}

#[test]
fn derivative_evaluation() {
    let f = GaussianLensField::default();
    let src = |r: [f64; 2]| Complex64::new(1.0 + r[0], r[1] * r[1]);
    let s = solve_local(&f, &src, 0, &disc(), 6, 20.0, &LocalOptions::default()).unwrap();
    let c = disc().center;
    assert_eq!(s.eval_u1(c), s.coeffs[0]);
    let step = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let r = [c[0] + 0.05 * (rng.random::<f64>() - 0.5), c[1] + 0.05 * (rng.random::<f64>() - 0.5)];
        let g = s.eval_grad_u1(r);
        let fx = (s.eval_u1([r[0] + step, r[1]]) - s.eval_u1([r[0] - step, r[1]])) / (2.0 * step);
        let fy = (s.eval_u1([r[0], r[1] + step]) - s.eval_u1([r[0], r[1] - step])) / (2.0 * step);
        let scale = g[0].norm() + g[1].norm();
        assert!((fx - g[0]).norm() + (fy - g[1]).norm() <= 1e-7 * scale);
    }
    let lin = SpectralLocalSolution::zero(0, 1, disc());
    assert_eq!(lin.eval_lap_u1([0.35, 0.41]).norm(), 0.0);
    let s1 = solve_local(&f, &src, 0, &disc(), 1, 20.0, &LocalOptions::default()).unwrap();
    assert_eq!(s1.eval_lap_u1([0.35, 0.41]), Complex64::new(0.0, 0.0));
}

#[test]
fn volume_part_is_complex_symmetric() {
    let f = GaussianLensField::default();
    let src = |r: [f64; 2]| Complex64::new(r[0], -r[1]);
    let sys = assemble_local(&f, &src, None, &disc(), 6, 24.0, &LocalOptions::default());
    assert!((&sys.volume - sys.volume.transpose()).norm() <= 1e-12 * sys.volume.norm());
    assert!(sys.boundary.iter().all(|z| z.re == 0.0));
    assert!((&sys.boundary - sys.boundary.transpose()).norm() <= 1e-12 * sys.boundary.norm());
}

fn plane_source(omega: f64) -> impl Fn([f64; 2]) -> Complex64 + Sync {
    let f = GaussianLensField::default();
    move |r: [f64; 2]| {
        let u = Complex64::new(0.0, omega * (0.6 * r[0] + 0.8 * r[1])).exp();
        omega * omega * (1.0 - f.value(r)) * u
    }
}

#[test]
fn solves_do_not_depend_on_order() {
    let f = GaussianLensField::default();
    let src = plane_source(16.0);
    let mesh = MeshPartition::square(4).unwrap();
    let solve = |k: usize| {
        let d = mesh.fictitious_disc(k).unwrap();
        solve_local(&f, &src, k, &d, 5, 16.0, &LocalOptions::default()).unwrap().coeffs
    };
    let forward: Vec<_> = (0..16).map(solve).collect();
    let mut backward: Vec<_> = (0..16).rev().map(solve).collect();
    backward.reverse();
    let parallel: Vec<_> = (0..16).into_par_iter().map(solve).collect();
    assert_eq!(forward, backward);
    assert_eq!(forward, parallel);
}

/// Absolute L2 distance, over the union of all discs, between order `m` and an order-8 reference.
fn local_error(nx: usize, m: usize, omega: f64) -> f64 {
    let f = GaussianLensField::default();
    let src = plane_source(omega);
    let mesh = MeshPartition::square(nx).unwrap();
    let opts = LocalOptions::default();
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|k| {
            let d = mesh.fictitious_disc(k).unwrap();
            let a = solve_local(&f, &src, k, &d, m, omega, &opts).unwrap();
            let b = solve_local(&f, &src, k, &d, 8, omega, &opts).unwrap();
            disc_rule(d.center, d.radius, 14, 30)
                .iter()
                .map(|(r, w)| w * (a.eval_u1(r) - b.eval_u1(r)).norm_sqr())
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

#[test]
fn particular_solution_h_order() {
    let nxs = [4usize, 8, 16, 32];
    let m = 4;
    let e: Vec<f64> = nxs.iter().map(|&nx| local_error(nx, m, 16.0)).collect();
    let lx: Vec<f64> = nxs.iter().map(|&n| (1.0 / n as f64).ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 4.0, ly.iter().sum::<f64>() / 4.0);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let order = sxy / sxx;
    assert!(order >= m as f64 - 0.5, "order {order}, errors {e:?}");
}
