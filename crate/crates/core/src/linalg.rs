//! Small dense linear-algebra helpers shared by the filters and smoothers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::Scalar;

/// Replaces `m` with `(m + mᵀ)/2`.
pub(crate) fn symmetrize<T: Scalar>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half = crate::lit::<T>(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub(crate) fn cholesky<T: Scalar>(m: &DMatrix<T>) -> Option<Cholesky<T, Dyn>> {
    Cholesky::new(m.clone())
}

/// Solves `s x = b` for symmetric positive-definite `s`.
pub(crate) fn spd_solve<T: Scalar>(s: &DMatrix<T>, b: &DMatrix<T>) -> Option<DMatrix<T>> {
    cholesky(s).map(|c| c.solve(b))
}

pub(crate) fn is_symmetric<T: Scalar>(m: &DMatrix<T>, tol: T) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|i| {
            (0..i).all(|j| {
                let scale = T::one() + num_traits::Float::abs(m[(i, j)]);
                num_traits::Float::abs(m[(i, j)] - m[(j, i)]) <= tol * scale
            })
        })
}

/// Symmetric PSD square root `L` with `L Lᵀ = m`; negative eigenvalues from
/// rounding are clamped to zero.
pub(crate) fn psd_sqrt<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    if let Some(c) = cholesky(m) {
        return c.l();
    }
    let eig = SymmetricEigen::new(m.clone());
    let roots = eig
        .eigenvalues
        .map(|v| num_traits::Float::sqrt(num_traits::Float::max(v, T::zero())));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots)
}

pub(crate) fn min_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> T {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(<T as num_traits::Float>::max_value(), |a, b| num_traits::Float::min(a, b))
}

/// Diagonal of `c p cᵀ` without forming the full product.
pub(crate) fn quad_form_diag<T: Scalar>(c: &DMatrix<T>, p: &DMatrix<T>) -> DVector<T> {
    let cp = c * p;
    DVector::from_fn(c.nrows(), |i, _| cp.row(i).dot(&c.row(i)))
}
