//! Small dense helpers: minimum-norm least squares and null spaces via SVD.

use nalgebra::{ComplexField, DMatrix, DVector};

/// Minimum-norm least-squares solution of `a x = b` and the numerical null space of `a`.
#[derive(Debug, Clone)]
pub struct MinNorm<T: ComplexField> {
    pub solution: DVector<T>,
    pub rank: usize,
    /// `|| a x - b ||_2`
    pub residual: f64,
    /// Orthonormal basis of the null space of `a`, one column per direction.
    pub null_space: Vec<DVector<T>>,
    pub singular_values: Vec<f64>,
}

/// Singular values below `rel_tol * sigma_max` are treated as zero.
pub fn min_norm_solve<T>(a: &DMatrix<T>, b: &DVector<T>, rel_tol: f64) -> MinNorm<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (rows, cols) = a.shape();
    assert!(cols > 0, "system without unknowns");
    // Zero-padding the rows up to `cols` makes the thin SVD return a full V.
    let n = rows.max(cols);
    let mut sq = DMatrix::<T>::zeros(n, cols);
    let mut rhs = DVector::<T>::zeros(n);
    sq.view_mut((0, 0), (rows, cols)).copy_from(a);
    rhs.rows_mut(0, rows).copy_from(b);

    let svd = sq.svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors");
    let v_t = svd.v_t.as_ref().expect("right singular vectors");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let thresh = rel_tol * smax;

    let mut x = DVector::<T>::zeros(cols);
    let mut null_space = Vec::new();
    let mut rank = 0;
    for (i, &s) in sigma.iter().enumerate() {
        let vi: DVector<T> = v_t.row(i).adjoint();
        if s > thresh && s > 0.0 {
            rank += 1;
            let coef = u.column(i).dotc(&rhs) / T::from_real(s);
            x += vi * coef;
        } else {
            null_space.push(vi);
        }
    }
    let residual = (a * &x - b).norm();
    MinNorm {
        solution: x,
        rank,
        residual,
        null_space,
        singular_values: sigma,
    }
}
