//! Dense real matrices and the decompositions the rest of the crate builds on:
//! singular value decomposition (one-sided Jacobi), symmetric eigendecomposition
//! (cyclic Jacobi), polar decomposition, numerical rank, and a leading-block
//! singular-value interlacing check.
//!
//! Everything here is plain `f64` row-major storage, sized for desk-scale
//! problems (tens of rows/columns, not thousands).

use crate::error::{Error, Result};

/// Default relative tolerance for rank decisions: singular values at or below
/// `DEFAULT_RANK_TOL * sigma_1` are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Build from row-major data. Rejects length mismatches and non-finite
    /// entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from a slice of rows. Rejects ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidInput("matrix must have at least one entry".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Matrix::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0);
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Symmetric up to `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs().max(1.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// `|M^T M - I|_max <= tol` for square M.
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let gram = &self.transpose() * self;
        let mut residual = 0.0_f64;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((gram[(i, j)] - target).abs());
            }
        }
        residual <= tol
    }

    /// Top-left `l x l` block.
    pub fn leading_block(&self, l: usize) -> Matrix {
        assert!(l >= 1 && l <= self.rows && l <= self.cols);
        Matrix::from_fn(l, l, |i, j| self[(i, j)])
    }

    /// Sub-matrix picked out by (not necessarily contiguous) row/column index sets.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Matrix {
        assert!(row_idx.iter().all(|&i| i < self.rows));
        assert!(col_idx.iter().all(|&j| j < self.cols));
        Matrix::from_fn(row_idx.len(), col_idx.len(), |i, j| self[(row_idx[i], col_idx[j])])
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl std::ops::Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Result of [`svd`]: `left * diag(singular_values) * right^T` reconstructs the
/// input. `left` and `right` have `min(rows, cols)` orthonormal columns and the
/// singular values are sorted descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: Matrix,
    pub singular_values: Vec<f64>,
    pub right: Matrix,
}

impl SvdResult {
    /// `left * diag(sigma) * right^T`.
    pub fn reconstruct(&self) -> Matrix {
        let k = self.singular_values.len();
        let mut scaled = self.left.clone();
        for j in 0..k {
            for i in 0..scaled.rows() {
                scaled[(i, j)] *= self.singular_values[j];
            }
        }
        &scaled * &self.right.transpose()
    }
}

/// Singular value decomposition by one-sided Jacobi rotations.
///
/// Chosen for its simplicity and its accuracy on small matrices: singular
/// values are recovered as column norms after orthogonalization, so tiny
/// values are not squared away through a Gram matrix.
///
/// ```
/// use ccx_core::linalg::{svd, Matrix};
///
/// let m = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
/// let s = svd(&m).unwrap();
/// assert!((s.singular_values[0] - 3.0).abs() < 1e-12);
/// assert!((s.singular_values[1] - 1.0).abs() < 1e-12);
/// ```
pub fn svd(m: &Matrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("svd input must be finite".into()));
    }
    if m.rows() >= m.cols() {
        jacobi_svd_tall(m)
    } else {
        let flipped = jacobi_svd_tall(&m.transpose())?;
        Ok(SvdResult {
            left: flipped.right,
            singular_values: flipped.singular_values,
            right: flipped.left,
        })
    }
}

/// One-sided Jacobi on a tall (rows >= cols) matrix.
fn jacobi_svd_tall(m: &Matrix) -> Result<SvdResult> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut v = Matrix::identity(cols);
    // Well below the pairwise orthogonality achievable in f64, but loose
    // enough that sweeps terminate on stalled rotations.
    let tol = 4.0 * f64::EPSILON;
    // Columns whose norm falls to round-off level are true zero directions;
    // flushing them keeps noise columns from rotating indefinitely.
    let column_floor = 8.0 * f64::EPSILON * m.frobenius_norm();

    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        for j in 0..cols {
            let norm_sq: f64 = (0..rows).map(|i| a[(i, j)] * a[(i, j)]).sum();
            if norm_sq > 0.0 && norm_sq.sqrt() <= column_floor {
                for i in 0..rows {
                    a[(i, j)] = 0.0;
                }
            }
        }
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in (p + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..rows {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    a[(i, p)] = c * ap - s * aq;
                    a[(i, q)] = s * ap + c * aq;
                }
                for i in 0..cols {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure(format!(
            "one-sided Jacobi did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut sigma: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| sigma[y].partial_cmp(&sigma[x]).unwrap().then(x.cmp(&y)));

    let mut left = Matrix::zeros(rows, cols);
    let mut right = Matrix::zeros(cols, cols);
    let sorted_sigma: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..cols {
            right[(i, new_j)] = v[(i, old_j)];
        }
        if sigma[old_j] > 0.0 {
            for i in 0..rows {
                left[(i, new_j)] = a[(i, old_j)] / sigma[old_j];
            }
        }
    }
    sigma = sorted_sigma;

    // Columns with exactly zero norm (zero input columns) still need an
    // orthonormal direction in `left`.
    for (j, &s) in sigma.iter().enumerate() {
        if s == 0.0 {
            complete_column(&mut left, j);
        }
    }

    Ok(SvdResult { left, singular_values: sigma, right })
}

/// Replace the zero column `j` of `basis` with a unit vector orthogonal to all
/// other columns. Tries the standard basis vectors, orthogonalizing twice.
fn complete_column(basis: &mut Matrix, j: usize) {
    let rows = basis.rows();
    let cols = basis.cols();
    for seed in 0..rows {
        let mut cand = vec![0.0; rows];
        cand[seed] = 1.0;
        for _ in 0..2 {
            for k in 0..cols {
                if k == j {
                    continue;
                }
                let dot: f64 = (0..rows).map(|i| cand[i] * basis[(i, k)]).sum();
                for i in 0..rows {
                    cand[i] -= dot * basis[(i, k)];
                }
            }
        }
        let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            for i in 0..rows {
                basis[(i, j)] = cand[i] / norm;
            }
            return;
        }
    }
    unreachable!("orthonormal completion always succeeds for rows >= cols");
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues sorted descending and the matrix whose columns are the
/// matching orthonormal eigenvectors.
pub fn sym_eig(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !s.is_square() {
        return Err(Error::InvalidInput("sym_eig requires a square matrix".into()));
    }
    if !s.is_finite() {
        return Err(Error::InvalidInput("sym_eig input must be finite".into()));
    }
    if !s.is_symmetric(1e-12) {
        return Err(Error::InvalidInput("sym_eig input is not symmetric".into()));
    }
    let n = s.rows();
    // Symmetrize to kill the sub-tolerance asymmetry before rotating.
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = f64::EPSILON * scale;

    let mut converged = false;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol {
                    continue;
                }
                rotated = true;
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - sn * akq;
                        a[(p, k)] = a[(k, p)];
                        a[(k, q)] = sn * akp + c * akq;
                        a[(q, k)] = a[(k, q)];
                    }
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure(format!(
            "Jacobi eigensolver did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].partial_cmp(&a[(x, x)]).unwrap().then(x.cmp(&y)));
    let values: Vec<f64> = order.iter().map(|&j| a[(j, j)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Polar decomposition of a square matrix: `m = theta * r` with `theta`
/// orthogonal and `r` symmetric positive semi-definite
/// (`theta = U V^T`, `r = V S V^T` from the SVD `m = U S V^T`).
pub fn polar_decompose(m: &Matrix) -> Result<(Matrix, Matrix)> {
    if !m.is_square() {
        return Err(Error::InvalidInput("polar decomposition requires a square matrix".into()));
    }
    let s = svd(m)?;
    let theta = &s.left * &s.right.transpose();
    let scaled = {
        let mut r = s.right.clone();
        for j in 0..r.cols() {
            for i in 0..r.rows() {
                r[(i, j)] *= s.singular_values[j];
            }
        }
        r
    };
    let r = &scaled * &s.right.transpose();
    Ok((theta, r))
}

/// Number of singular values exceeding `tol * sigma_1`. Zero matrices have
/// rank 0.
pub fn numerical_rank(m: &Matrix, tol: f64) -> usize {
    assert!(tol > 0.0, "rank tolerance must be positive");
    let sigma = svd(m).expect("finite matrix").singular_values;
    let s1 = sigma[0];
    if s1 == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * s1).count()
}

/// True iff `sigma_i(m) >= sigma_i(top-left l x l block) - 1e-10` for all
/// `i <= l`. Holds for every matrix; exposed as a checkable property.
pub fn interlace_check(m: &Matrix, l: usize) -> bool {
    assert!(l >= 1 && l < m.rows().min(m.cols()), "block size out of range");
    let full = svd(m).expect("finite matrix").singular_values;
    let block = svd(&m.leading_block(l)).expect("finite matrix").singular_values;
    (0..l).all(|i| full[i] >= block[i] - 1e-10)
}
