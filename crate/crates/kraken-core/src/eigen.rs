//! Hermitian eigendecomposition, the single dense numerical kernel.
//!
//! Wraps nalgebra's symmetric (Hermitian) eigensolver for complex and real
//! matrices, returns eigenvalues sorted ascending, and converts solver
//! breakdown into a numerical error instead of a panic. Rows that are
//! exactly zero (common for strongly localized states on wide grids, where
//! Gaussian tails underflow) are deflated to zero eigenpairs before calling
//! the solver, which otherwise chokes on them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const EIG_MAX_ITER: usize = 0; // 0 = nalgebra's unbounded iteration
const EIG_EPS: f64 = f64::EPSILON;

/// Rows whose largest element falls below this fraction of the matrix
/// maximum are deflated to zero eigenpairs. Perturbs eigenvalues by at most
/// the dropped row norms (Weyl), far below every tolerance in use. The cut
/// sits well above the range where squared norms underflow and derail the
/// tridiagonal QR iteration.
const DEFLATION_REL: f64 = 1e-50;

/// Eigendecomposition of a Hermitian complex matrix.
pub struct Eigh {
    /// Eigenvalues, ascending.
    pub values: DVector<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<Complex64>,
}

/// Eigendecomposition of a symmetric real matrix.
pub struct EighReal {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Decompose a Hermitian matrix. The input is assumed Hermitian; only its
/// Hermitian part contributes meaningfully.
pub fn eigh(m: &DMatrix<Complex64>) -> Result<Eigh> {
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = DEFLATION_REL * scale;
    let active = active_rows(n, |i, j| m[(i, j)].norm() > cut);
    let na = active.len();
    if na == 0 {
        return Ok(Eigh {
            values: DVector::zeros(n),
            vectors: DMatrix::identity(n, n),
        });
    }
    let mut sub = DMatrix::<Complex64>::zeros(na, na);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            sub[(r, c)] = m[(i, j)];
        }
    }
    let eig = sub.try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER).ok_or_else(|| {
        Error::Numerical(format!(
            "hermitian eigendecomposition failed to converge (n = {n})"
        ))
    })?;
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numerical(format!(
            "hermitian eigendecomposition produced non-finite eigenvalues (n = {n})"
        )));
    }
    // embed back, padding deflated rows with zero eigenpairs on basis vectors
    let mut values = vec![0.0; n];
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (c, &l) in eig.eigenvalues.iter().enumerate() {
        values[c] = l;
        for (r, &i) in active.iter().enumerate() {
            vectors[(i, c)] = eig.eigenvectors[(r, c)];
        }
    }
    let mut col = na;
    for i in 0..n {
        if !active.contains(&i) {
            vectors[(i, col)] = Complex64::new(1.0, 0.0);
            col += 1;
        }
    }
    let order = sort_order(&values)?;
    let sorted_values = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
    let mut sorted_vectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        sorted_vectors.set_column(c, &vectors.column(k));
    }
    Ok(Eigh { values: sorted_values, vectors: sorted_vectors })
}

/// Decompose a symmetric real matrix.
pub fn eigh_real(m: &DMatrix<f64>) -> Result<EighReal> {
    let n = m.nrows();
    let scale = m.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cut = DEFLATION_REL * scale;
    let active = active_rows(n, |i, j| m[(i, j)].abs() > cut);
    let na = active.len();
    if na == 0 {
        return Ok(EighReal { values: DVector::zeros(n), vectors: DMatrix::identity(n, n) });
    }
    let mut sub = DMatrix::<f64>::zeros(na, na);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            sub[(r, c)] = m[(i, j)];
        }
    }
    let eig = sub.try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER).ok_or_else(|| {
        Error::Numerical(format!(
            "symmetric eigendecomposition failed to converge (n = {n})"
        ))
    })?;
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::Numerical(format!(
            "symmetric eigendecomposition produced non-finite eigenvalues (n = {n})"
        )));
    }
    let mut values = vec![0.0; n];
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (c, &l) in eig.eigenvalues.iter().enumerate() {
        values[c] = l;
        for (r, &i) in active.iter().enumerate() {
            vectors[(i, c)] = eig.eigenvectors[(r, c)];
        }
    }
    let mut col = na;
    for i in 0..n {
        if !active.contains(&i) {
            vectors[(i, col)] = 1.0;
            col += 1;
        }
    }
    let order = sort_order(&values)?;
    let sorted_values = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
    let mut sorted_vectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        sorted_vectors.set_column(c, &vectors.column(k));
    }
    Ok(EighReal { values: sorted_values, vectors: sorted_vectors })
}

/// Positive-semidefinite square root of a symmetric real matrix: negative
/// eigenvalues are clipped to zero before taking the root.
pub fn sqrt_psd_real(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let EighReal { values, vectors } = eigh_real(m)?;
    let roots = DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| if l > 0.0 { l.sqrt() } else { 0.0 }),
    );
    let scaled = &vectors * DMatrix::from_diagonal(&roots);
    Ok(&scaled * vectors.transpose())
}

fn active_rows(n: usize, nonzero: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    (0..n)
        .filter(|&i| (0..n).any(|j| nonzero(i, j) || nonzero(j, i)))
        .collect()
}

fn sort_order(values: &[f64]) -> Result<Vec<usize>> {
    if values.iter().any(|l| l.is_nan()) {
        return Err(Error::Numerical("eigensolver produced NaN eigenvalues".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    Ok(order)
}
