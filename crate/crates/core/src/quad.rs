//! Gauss–Legendre rules on intervals, rectangles, segments and discs.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::{Float, FromPrimitive};

use crate::scalar::{RealScalar, Scalar};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, stored in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval<R: RealScalar>(&self, a: R, b: R) -> (Vec<R>, Vec<R>) {
        let half = (b - a) / cast::<R>(2.0);
        let mid = (a + b) / cast::<R>(2.0);
        let x = self.nodes.iter().map(|&t| mid + half * cast::<R>(t)).collect();
        let w = self.weights.iter().map(|&w| half * cast::<R>(w)).collect();
        (x, w)
    }
}

/// `(P_n(x), P_n'(x))` from the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn cache() -> &'static RwLock<HashMap<usize, Arc<GaussLegendre>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached `n`-point Gauss–Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    if let Some(rule) = cache().read().expect("quadrature cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(GaussLegendre::compute(n));
    cache()
        .write()
        .expect("quadrature cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

#[inline]
fn cast<R: RealScalar>(x: f64) -> R {
    <R as FromPrimitive>::from_f64(x).expect("representable")
}

/// Points and weights of a planar quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<R> {
    pub points: Vec<[R; 2]>,
    pub weights: Vec<R>,
}

impl<R: RealScalar> QuadRule<R> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([R; 2], R)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<T: Scalar<Real = R>>(&self, mut f: impl FnMut([R; 2]) -> T) -> T {
        self.iter().fold(T::zero(), |acc, (p, w)| acc + f(p).mul_real(w))
    }

    pub fn total_weight(&self) -> R {
        self.weights.iter().fold(R::zero(), |a, &w| a + w)
    }
}

/// Tensor rule on `[lo.x, hi.x] x [lo.y, hi.y]`, exact for per-axis degree `2 n - 1`.
pub fn rect_rule<R: RealScalar>(lo: [R; 2], hi: [R; 2], n_1d: usize) -> QuadRule<R> {
    let gl = gauss_legendre(n_1d);
    let (xs, wx) = gl.on_interval(lo[0], hi[0]);
    let (ys, wy) = gl.on_interval(lo[1], hi[1]);
    let mut points = Vec::with_capacity(n_1d * n_1d);
    let mut weights = Vec::with_capacity(n_1d * n_1d);
    for (&y, &v) in ys.iter().zip(&wy) {
        for (&x, &w) in xs.iter().zip(&wx) {
            points.push([x, y]);
            weights.push(w * v);
        }
    }
    QuadRule { points, weights }
}

/// Rule on the segment from `a` to `b`; weights carry the segment length.
pub fn segment_rule<R: RealScalar>(a: [R; 2], b: [R; 2], n: usize) -> QuadRule<R> {
    let gl = gauss_legendre(n);
    let len = Float::hypot(b[0] - a[0], b[1] - a[1]);
    let (ts, ws) = gl.on_interval(R::zero(), R::one());
    let points = ts
        .iter()
        .map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
        .collect();
    let weights = ws.iter().map(|&w| w * len).collect();
    QuadRule { points, weights }
}

/// Polar rule on the disc of radius `radius`: Gauss–Legendre in `r` with the
/// Jacobian folded into the weights, uniform in angle. Exact for total degree
/// up to `min(2 n_r - 2, n_theta - 1)`.
pub fn disc_rule<R: RealScalar>(center: [R; 2], radius: R, n_r: usize, n_theta: usize) -> QuadRule<R> {
    let gl = gauss_legendre(n_r);
    let (rs, wr) = gl.on_interval(R::zero(), radius);
    let two_pi = R::TAU();
    let dtheta = two_pi / cast::<R>(n_theta as f64);
    let mut points = Vec::with_capacity(n_r * n_theta);
    let mut weights = Vec::with_capacity(n_r * n_theta);
    for k in 0..n_theta {
        let th = dtheta * cast::<R>(k as f64);
        let (s, c) = th.sin_cos();
        for (&r, &w) in rs.iter().zip(&wr) {
            points.push([center[0] + r * c, center[1] + r * s]);
            weights.push(w * r * dtheta);
        }
    }
    QuadRule { points, weights }
}

/// Equispaced rule on the circle of radius `radius`; weights carry arc length.
pub fn circle_rule<R: RealScalar>(center: [R; 2], radius: R, n_theta: usize) -> QuadRule<R> {
    let dtheta = R::TAU() / cast::<R>(n_theta as f64);
    let w = dtheta * radius;
    let points = (0..n_theta)
        .map(|k| {
            let (s, c) = (dtheta * cast::<R>(k as f64)).sin_cos();
            [center[0] + radius * c, center[1] + radius * s]
        })
        .collect();
    QuadRule {
        points,
        weights: vec![w; n_theta],
    }
}

/// Default 1D point count for oscillatory element and face integrals.
pub fn default_points(omega_h: f64, q: usize, m: usize) -> usize {
    (omega_h / 2.0).ceil() as usize + q + m + 6
}
