use std::f64::consts::{FRAC_PI_2, PI};

use gopw::mesh::square_element;
use gopw::phase::{eikonal_residual, phase_degree};
use gopw::poly::triangle_len;
use gopw::{build_phase, CoefficientField, ConstantField, GaussianLensField, GradientField, RealPoly};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `xi = a + b x`, with an exact jet.
struct Affine {
    a: f64,
    b: f64,
}

impl CoefficientField for Affine {
    fn value(&self, r: [f64; 2]) -> f64 {
        self.a + self.b * r[0]
    }
    fn smoothness_order(&self) -> usize {
        usize::MAX
    }
    fn jet(&self, r0: [f64; 2], n: usize) -> gopw::Result<RealPoly> {
        let mut p = RealPoly::zero(r0, n);
        p.set_coeff(0, 0, self.value(r0));
        if n >= 1 {
            p.set_coeff(1, 0, self.b);
        }
        Ok(p)
    }
}

fn slope(h: &[f64], e: &[f64]) -> f64 {
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn residual_slope(field: &dyn CoefficientField, center: [f64; 2], theta: f64, q: usize) -> f64 {
    let hs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let res: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let el = square_element(center, h);
            let p = build_phase(field, center, theta, q).unwrap();
            eikonal_residual(&p, field, &el, 17)
        })
        .collect();
    slope(&hs, &res)
}

#[test]
fn constant_field_plane_phase() {
    let r0 = [0.3, 0.4];
    let p = build_phase(&ConstantField::new(1.0), r0, 0.0, 1).unwrap();
    assert_eq!(p.tau, RealPoly::monomial(r0, 1, 0, 1.0));
    assert_eq!(p.tau.constant_term(), 0.0);
}

#[test]
fn affine_field_level_two_by_hand() {
    let p = build_phase(&Affine { a: 1.0, b: 1.0 }, [0.0, 0.0], 0.0, 1).unwrap();
    assert_eq!(p.direction(), [1.0, 0.0]);
    assert!((p.tau.coeff(2, 0) - 0.25).abs() < 1e-15);
    assert!(p.tau.coeff(1, 1).abs() < 1e-15);
    assert!(p.tau.coeff(0, 2).abs() < 1e-15);
}

#[test]
fn vertical_direction_seeding() {
    for field in [&GradientField::default() as &dyn CoefficientField, &GaussianLensField::default()] {
        let r0 = [0.2, 0.7];
        let p = build_phase(field, r0, FRAC_PI_2, 1).unwrap();
        assert!(p.tau.coeff(1, 0).abs() < 1e-14);
        assert!((p.tau.coeff(0, 1) - field.value(r0).sqrt()).abs() < 1e-14);
    }
}

#[test]
fn degree_follows_matching_order() {
    for q in 1..=6 {
        let p = build_phase(&GradientField::default(), [0.5, 0.5], 0.3, q).unwrap();
        assert_eq!(p.m_tau, phase_degree(q));
        assert_eq!(p.tau.degree(), if q <= 2 { q + 2 } else { q + 3 });
    }
    assert!(build_phase(&GradientField::default(), [0.5, 0.5], 0.3, 0).is_err());
}

#[test]
fn constant_field_residual_vanishes() {
    let f = ConstantField::new(2.0);
    let el = square_element([0.4, 0.4], 0.25);
    for q in 1..=4 {
        for l in 0..7 {
            let p = build_phase(&f, [0.4, 0.4], 2.0 * PI * l as f64 / 7.0, q).unwrap();
            assert!(eikonal_residual(&p, &f, &el, 9) <= 1e-13);
        }
    }
}

#[test]
fn gradient_field_residual_order() {
    let s = residual_slope(&GradientField::default(), [0.3, 0.6], 0.7, 1);
    assert!(s >= 2.7, "slope {s}");
}

#[test]
fn lens_residual_order() {
    let s = residual_slope(&GaussianLensField::default(), [0.3, 0.6], 0.7, 2);
    assert!(s >= 3.7, "slope {s}");
}

#[test]
fn residual_orders_track_matching_order() {
    let fields: [&dyn CoefficientField; 2] = [&GradientField::default(), &GaussianLensField::default()];
    for f in fields {
        for q in 1..=2 {
            let s = residual_slope(f, [0.3, 0.6], 1.1, q);
            assert!((s - (q + 2) as f64).abs() <= 0.3, "q = {q}: slope {s}");
        }
    }
}

#[test]
fn matched_coefficients_agree_with_jet() {
    let fields: [&dyn CoefficientField; 2] = [&GradientField::default(), &GaussianLensField::default()];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for f in fields {
        for q in 1..=5 {
            let r0 = [rng.random::<f64>(), rng.random::<f64>()];
            let theta = 2.0 * PI * rng.random::<f64>();
            let p = build_phase(f, r0, theta, q).unwrap();
            let n = p.m_tau - 1;
            let jet = f.jet(r0, n).unwrap();
            let g = p.grad_norm_sq();
            let scale = jet.max_abs_coeff();
            for k in 0..triangle_len(n) {
                assert!((g.coeffs()[k] - jet.coeffs()[k]).abs() <= 1e-12 * scale, "q = {q}, k = {k}");
            }
        }
    }
}

proptest! {
    #[test]
    fn constant_field_phase_is_rotated_plane(theta in 0.0f64..(2.0 * PI), xi in 0.1f64..10.0, q in 1usize..6) {
        let r0 = [0.25, 0.75];
        let p = build_phase(&ConstantField::new(xi), r0, theta, q).unwrap();
        let s = xi.sqrt();
        let mut expected = RealPoly::zero(r0, p.m_tau);
        expected.set_coeff(1, 0, s * theta.cos());
        expected.set_coeff(0, 1, s * theta.sin());
        for (a, b) in p.tau.coeffs().iter().zip(expected.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-15 * s);
        }
    }
}
