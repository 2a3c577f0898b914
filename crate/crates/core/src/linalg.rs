//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Left-to-right dot product. Kept sequential so that results are bitwise
/// reproducible regardless of how nalgebra chooses to unroll its own `dot`.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `v / ‖v‖`, or `None` for a zero or non-finite vector.
pub fn normalized(v: &DVector<f64>) -> Option<DVector<f64>> {
    let n = norm(v.as_slice());
    if n > 0.0 && n.is_finite() {
        Some(v / n)
    } else {
        None
    }
}

/// Flips `v` so that its entry of largest magnitude is positive (first such
/// entry on ties).
pub fn orient(v: &mut DVector<f64>) {
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
/// Column `i` of the returned matrix is the eigenvector of eigenvalue `i`.
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Solves `k x = rhs` for symmetric positive (semi)definite `k`. When the
/// Cholesky factorization fails, a ridge of `1e-10 · trace(k)` is added to
/// the diagonal (a unit ridge when the trace is zero); LU is the last resort.
pub fn solve_spd(k: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = k.clone().cholesky() {
        let x = ch.solve(rhs);
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    let tr = k.trace().abs();
    let ridge = if tr > 0.0 { 1e-10 * tr } else { 1.0 };
    let mut kr = k.clone();
    for i in 0..kr.nrows() {
        kr[(i, i)] += ridge;
    }
    if let Some(ch) = kr.clone().cholesky() {
        let x = ch.solve(rhs);
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    kr.lu().solve(rhs).filter(|x| x.iter().all(|v| v.is_finite()))
}
