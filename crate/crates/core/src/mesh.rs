//! Uniform rectangular partitions of the unit square.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub id: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Element {
    pub fn barycenter(&self) -> [f64; 2] {
        [(self.lo[0] + self.hi[0]) / 2.0, (self.lo[1] + self.hi[1]) / 2.0]
    }

    pub fn size(&self) -> [f64; 2] {
        [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]]
    }

    pub fn diameter(&self) -> f64 {
        let [w, h] = self.size();
        w.hypot(h)
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            self.lo,
            [self.hi[0], self.lo[1]],
            self.hi,
            [self.lo[0], self.hi[1]],
        ]
    }

    pub fn contains(&self, r: [f64; 2], tol: f64) -> bool {
        (0..2).all(|d| r[d] >= self.lo[d] - tol && r[d] <= self.hi[d] + tol)
    }

    /// Uniform `n x n` grid including the element edges, x running fastest.
    pub fn sample_grid(&self, n: usize) -> Vec<[f64; 2]> {
        let t = |i: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
        let [w, h] = self.size();
        let mut pts = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                pts.push([self.lo[0] + w * t(ix), self.lo[1] + h * t(iy)]);
            }
        }
        pts
    }
}

/// Square element of side `h` centered at `center`.
pub fn square_element(center: [f64; 2], h: f64) -> Element {
    Element {
        id: 0,
        lo: [center[0] - h / 2.0, center[1] - h / 2.0],
        hi: [center[0] + h / 2.0, center[1] + h / 2.0],
    }
}

/// Face shared by `left` and `right`; `normal` points from left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorFace {
    pub left: usize,
    pub right: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub normal: [f64; 2],
}

/// Face on the outer boundary with outward unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub element: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub normal: [f64; 2],
}

impl InteriorFace {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }
}

impl BoundaryFace {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disc {
    pub fn contains(&self, r: [f64; 2], tol: f64) -> bool {
        (r[0] - self.center[0]).hypot(r[1] - self.center[1]) <= self.radius + tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshPartition {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub elements: Vec<Element>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_faces: Vec<BoundaryFace>,
}

impl MeshPartition {
    /// `nx x ny` uniform rectangles on `[0,1]^2`; element `(ix, iy)` has id `iy * nx + ix`.
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter(format!(
                "mesh needs at least one element per direction, got {nx}x{ny}"
            )));
        }
        let dx = 1.0 / nx as f64;
        let dy = 1.0 / ny as f64;
        let xs: Vec<f64> = (0..=nx).map(|i| i as f64 / nx as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|j| j as f64 / ny as f64).collect();
        let id = |ix: usize, iy: usize| iy * nx + ix;

        let mut elements = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                elements.push(Element {
                    id: id(ix, iy),
                    lo: [xs[ix], ys[iy]],
                    hi: [xs[ix + 1], ys[iy + 1]],
                });
            }
        }

        let mut interior_faces = Vec::new();
        for iy in 0..ny {
            for ix in 1..nx {
                interior_faces.push(InteriorFace {
                    left: id(ix - 1, iy),
                    right: id(ix, iy),
                    a: [xs[ix], ys[iy]],
                    b: [xs[ix], ys[iy + 1]],
                    normal: [1.0, 0.0],
                });
            }
        }
        for iy in 1..ny {
            for ix in 0..nx {
                interior_faces.push(InteriorFace {
                    left: id(ix, iy - 1),
                    right: id(ix, iy),
                    a: [xs[ix], ys[iy]],
                    b: [xs[ix + 1], ys[iy]],
                    normal: [0.0, 1.0],
                });
            }
        }

        let mut boundary_faces = Vec::with_capacity(2 * (nx + ny));
        for ix in 0..nx {
            boundary_faces.push(BoundaryFace {
                element: id(ix, 0),
                a: [xs[ix], 0.0],
                b: [xs[ix + 1], 0.0],
                normal: [0.0, -1.0],
            });
            boundary_faces.push(BoundaryFace {
                element: id(ix, ny - 1),
                a: [xs[ix], 1.0],
                b: [xs[ix + 1], 1.0],
                normal: [0.0, 1.0],
            });
        }
        for iy in 0..ny {
            boundary_faces.push(BoundaryFace {
                element: id(0, iy),
                a: [0.0, ys[iy]],
                b: [0.0, ys[iy + 1]],
                normal: [-1.0, 0.0],
            });
            boundary_faces.push(BoundaryFace {
                element: id(nx - 1, iy),
                a: [1.0, ys[iy]],
                b: [1.0, ys[iy + 1]],
                normal: [1.0, 0.0],
            });
        }

        Ok(Self {
            nx,
            ny,
            h: dx.max(dy),
            elements,
            interior_faces,
            boundary_faces,
        })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, id: usize) -> Result<&Element> {
        self.elements.get(id).ok_or(Error::IndexOutOfRange {
            index: id,
            len: self.elements.len(),
        })
    }

    /// Smallest disc around the barycenter containing element `id`.
    pub fn fictitious_disc(&self, id: usize) -> Result<Disc> {
        let e = self.element(id)?;
        Ok(Disc {
            center: e.barycenter(),
            radius: e.diameter() / 2.0,
        })
    }

    /// Element containing `r`; points on shared edges go to the higher index.
    pub fn locate(&self, r: [f64; 2]) -> Option<usize> {
        if !(0.0..=1.0).contains(&r[0]) || !(0.0..=1.0).contains(&r[1]) {
            return None;
        }
        let ix = ((r[0] * self.nx as f64) as usize).min(self.nx - 1);
        let iy = ((r[1] * self.ny as f64) as usize).min(self.ny - 1);
        Some(iy * self.nx + ix)
    }

    pub fn skeleton_length(&self) -> f64 {
        self.interior_faces.iter().map(InteriorFace::length).sum::<f64>()
            + self.boundary_faces.iter().map(BoundaryFace::length).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two() {
        let m = MeshPartition::square(2).unwrap();
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.interior_faces.len(), 4);
        assert_eq!(m.boundary_faces.len(), 8);
        let d = m.fictitious_disc(0).unwrap();
        assert_eq!(d.center, [0.25, 0.25]);
    }

    #[test]
    fn eight_by_eight() {
        let m = MeshPartition::square(8).unwrap();
        assert_eq!(m.h, 0.125);
        assert_eq!(m.elements[0].barycenter(), [1.0 / 16.0, 1.0 / 16.0]);
        assert_relative_eq!(m.fictitious_disc(5).unwrap().radius, 0.125 * 2f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn rectangular_counts() {
        let m = MeshPartition::new(2, 4).unwrap();
        assert_eq!(m.h, 0.5);
        assert_eq!(m.interior_faces.len(), 4 + 6);
        assert_eq!(m.boundary_faces.len(), 12);
        assert_relative_eq!(m.skeleton_length(), 2.0 + 4.0 + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_empty() {
        assert!(MeshPartition::new(0, 3).is_err());
        assert!(MeshPartition::square(2).unwrap().fictitious_disc(4).is_err());
    }

    #[test]
    fn locate_points() {
        let m = MeshPartition::new(4, 2).unwrap();
        assert_eq!(m.locate([0.1, 0.1]), Some(0));
        assert_eq!(m.locate([0.9, 0.9]), Some(7));
        assert_eq!(m.locate([1.0, 1.0]), Some(7));
        assert_eq!(m.locate([1.1, 0.0]), None);
    }
}
