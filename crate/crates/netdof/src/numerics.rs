//! Small dense complex-matrix kernel: SVD, log-determinants, norms and
//! subspace distances.
//!
//! Everything downstream (scheme simulation, rate evaluation, the
//! verification suite) goes through this module, so it is deliberately small and
//! self-contained. Matrices are row-major `Complex64` buffers; the SVD is a
//! one-sided Jacobi, which is robust on the tiny (≤ 64) dimensions we ever
//! see and computes small singular values to high relative accuracy.
//!
//! Determinant-shaped quantities are always evaluated through singular
//! values (`logdet_ipaa`), never as raw products, so rates stay finite for
//! transmit powers up to 2^60 and beyond.

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Maximum number of Jacobi sweeps before giving up.
const MAX_JACOBI_SWEEPS: usize = 100;
/// A column pair counts as orthogonal once |<wp,wq>| <= this times |wp||wq|.
const JACOBI_TOL: f64 = 1e-14;
/// Columns whose norm falls below this fraction of the largest column are
/// cancellation residue of an exact rank deficiency: their singular value
/// is reported as zero and they stop participating in rotations (the
/// rotation criterion is relative, so residue columns would otherwise spin
/// forever without converging).
const NOISE_FLOOR_REL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    #[error("entry count {len} does not match {rows}x{cols}")]
    LengthMismatch {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("SVD did not converge within {sweeps} Jacobi sweeps")]
    SvdNonConvergence { sweeps: usize },
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// mismatched lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, NumericsError> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::EmptyShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(NumericsError::LengthMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(NumericsError::NonFinite {
                    row: idx / cols,
                    col: idx % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from a closure over (row, col). Entries are assumed finite.
    pub fn from_fn<F: FnMut(usize, usize) -> C64>(rows: usize, cols: usize, mut f: F) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be nonempty");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Builds from explicit rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if r == 0 || c == 0 {
            return Err(NumericsError::EmptyShape { rows: r, cols: c });
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(NumericsError::LengthMismatch {
                    rows: r,
                    cols: c,
                    len: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` as an owned vector.
    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "shape mismatch in matrix product: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..self.cols {
                acc += self.get(i, k) * rhs.get(k, j);
            }
            acc
        })
    }

    /// Entrywise difference `self - rhs`.
    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "hcat requires equal row counts");
        Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                rhs.get(i, j - self.cols)
            }
        })
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Thin singular value decomposition `A = U diag(sigma) V*`.
///
/// `left` is rows x k, `right` is cols x k with k = min(rows, cols), and the
/// singular values are sorted nonincreasing. Columns of both factors are
/// orthonormal.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub right: ComplexMatrix,
}

impl SvdResult {
    /// Reconstructs `U diag(sigma) V*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        ComplexMatrix::from_fn(self.left.rows(), self.right.rows(), |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..k {
                acc += self.left.get(i, l) * self.singular_values[l] * self.right.get(j, l).conj();
            }
            acc
        })
    }
}

/// One-sided Jacobi SVD.
///
/// Orthogonalizes column pairs of a working copy of `a` with complex Jacobi
/// rotations and accumulates them into `V`; at convergence the column norms
/// are the singular values. Converges when every pair satisfies
/// |<wp,wq>| <= 1e-14 |wp||wq|, capped at 100 sweeps, after which a
/// non-convergence error is returned rather than a silent partial result.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult, NumericsError> {
    let m = a.rows();
    let n = a.cols();
    let k = m.min(n);
    assert!(k <= 64, "kernel is sized for small dense matrices");

    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);

    let mut converged = false;
    let mut sweeps_used = 0;
    for _ in 0..MAX_JACOBI_SWEEPS {
        sweeps_used += 1;
        let mut rotated = false;
        // per-sweep noise floor, squared column norms
        let colmax_sq = (0..n)
            .map(|j| (0..m).map(|i| w.get(i, j).norm_sqr()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let floor_sq = NOISE_FLOOR_REL * NOISE_FLOOR_REL * colmax_sq;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                // Gram entries of the column pair.
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = C64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let scale = (app * aqq).sqrt();
                if scale == 0.0 || app.min(aqq) <= floor_sq || apq.norm() <= JACOBI_TOL * scale {
                    continue;
                }
                rotated = true;

                let g = apq.norm();
                let phase = apq / g; // e^{i phi}
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let phase_conj = phase.conj();

                // [wp', wq'] = [wp, wq] * [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    w.set(i, p, wp * c - wq * phase_conj * s);
                    w.set(i, q, wp * s + wq * phase_conj * c);
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, vp * c - vq * phase_conj * s);
                    v.set(i, q, vp * s + vq * phase_conj * c);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericsError::SvdNonConvergence {
            sweeps: sweeps_used,
        });
    }

    // Column norms are the singular values; sort nonincreasing. Columns at
    // the noise floor are exact zeros up to cancellation residue: report
    // sigma = 0 and rebuild their left vectors by orthonormal completion.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w.get(i, j).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let floor = NOISE_FLOOR_REL * norms[order[0]];

    let singular_values: Vec<f64> = order
        .iter()
        .take(k)
        .map(|&j| if norms[j] <= floor { 0.0 } else { norms[j] })
        .collect();
    let right = ComplexMatrix::from_fn(n, k, |i, j| v.get(i, order[j]));

    let mut left = ComplexMatrix::zeros(m, k);
    let mut zero_cols = Vec::new();
    for j in 0..k {
        let src = order[j];
        if singular_values[j] > 0.0 {
            for i in 0..m {
                left.set(i, j, w.get(i, src) / singular_values[j]);
            }
        } else {
            zero_cols.push(j);
        }
    }
    if !zero_cols.is_empty() {
        fill_orthonormal(&mut left, &zero_cols);
    }

    Ok(SvdResult {
        left,
        singular_values,
        right,
    })
}

/// Replaces the listed columns of `mat` with unit vectors orthonormal to all
/// other columns. Each new column is the standard basis vector with the
/// largest residual after projecting out the columns already present; that
/// residual is at least 1/sqrt(rows) by a pigeonhole argument, so the
/// normalization is always well conditioned.
fn fill_orthonormal(mat: &mut ComplexMatrix, targets: &[usize]) {
    let m = mat.rows();
    let mut filled: Vec<usize> = (0..mat.cols()).filter(|j| !targets.contains(j)).collect();
    for &col in targets {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for basis_idx in 0..m {
            let mut cand: Vec<C64> = (0..m)
                .map(|i| {
                    if i == basis_idx {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            // Two projection passes keep the completion orthogonal to 1e-14.
            for _ in 0..2 {
                for &j in &filled {
                    let dot: C64 = (0..m).map(|i| mat.get(i, j).conj() * cand[i]).sum();
                    for (i, entry) in cand.iter_mut().enumerate() {
                        *entry -= dot * mat.get(i, j);
                    }
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(n, _)| norm > *n) {
                best = Some((norm, cand));
            }
        }
        let (norm, cand) = best.expect("matrix has at least one row");
        assert!(
            norm > 1e-8,
            "no basis vector has a usable residual; completion impossible"
        );
        for (i, entry) in cand.iter().enumerate() {
            mat.set(i, col, entry / norm);
        }
        filled.push(col);
    }
}

/// Extends the orthonormal columns of `basis` to a full orthonormal basis of
/// the ambient space, returning the `rows - cols` new columns.
pub fn orthonormal_complement(basis: &ComplexMatrix) -> ComplexMatrix {
    let m = basis.rows();
    let c = basis.cols();
    assert!(m > c, "basis already spans the space");
    let mut full = ComplexMatrix::from_fn(m, m, |i, j| {
        if j < c {
            basis.get(i, j)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let targets: Vec<usize> = (c..m).collect();
    fill_orthonormal(&mut full, &targets);
    ComplexMatrix::from_fn(m, m - c, |i, j| full.get(i, c + j))
}

/// log2 det(I + scale * A A*), evaluated as sum_i log2(1 + scale sigma_i^2).
///
/// Going through singular values keeps the result finite for arbitrarily
/// large `scale`.
pub fn logdet_ipaa(scale: f64, a: &ComplexMatrix) -> Result<f64, NumericsError> {
    assert!(scale > 0.0, "scale must be positive");
    let s = svd(a)?;
    Ok(s.singular_values
        .iter()
        .map(|&sv| (1.0 + scale * sv * sv).log2())
        .sum())
}

/// Frobenius norm of `a` (free function mirror of the method).
pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm()
}

/// Euclidean distance from row `row_index` to the span of all other rows,
/// via orthogonal projection (modified Gram-Schmidt with reorthogonalization).
pub fn row_subspace_distance(m: &ComplexMatrix, row_index: usize) -> f64 {
    assert!(m.rows() >= 2, "need at least two rows");
    assert!(row_index < m.rows(), "row index out of range");

    let n = m.cols();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m.rows() - 1);
    for r in 0..m.rows() {
        if r == row_index {
            continue;
        }
        let mut cand: Vec<C64> = m.row(r).to_vec();
        let orig_norm = vec_norm(&cand);
        if orig_norm == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for e in &basis {
                let dot = vec_dot(e, &cand);
                for i in 0..n {
                    cand[i] -= dot * e[i];
                }
            }
        }
        let norm = vec_norm(&cand);
        if norm > 1e-13 * orig_norm {
            for z in cand.iter_mut() {
                *z /= norm;
            }
            basis.push(cand);
        }
    }

    let mut resid: Vec<C64> = m.row(row_index).to_vec();
    for _ in 0..2 {
        for e in &basis {
            let dot = vec_dot(e, &resid);
            for i in 0..n {
                resid[i] -= dot * e[i];
            }
        }
    }
    vec_norm(&resid)
}

/// Evaluates log2 det(I + scale A A*) and log2 det(I + scale A* A); the two
/// must agree by Sylvester's identity. Exists for the identity checks in the
/// test suites.
pub fn det_commute_check(a: &ComplexMatrix, scale: f64) -> Result<(f64, f64), NumericsError> {
    let lhs = logdet_ipaa(scale, a)?;
    let rhs = logdet_ipaa(scale, &a.adjoint())?;
    Ok((lhs, rhs))
}

/// <x, y> = sum conj(x_i) y_i.
pub fn vec_dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha12Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        })
    }

    // Dense LU determinant oracle, independent of the SVD path: returns
    // log2 det(M) for a Hermitian positive-definite M via Gaussian
    // elimination with partial pivoting.
    fn lu_logdet2(m: &ComplexMatrix) -> f64 {
        let n = m.rows();
        assert_eq!(n, m.cols());
        let mut a = m.clone();
        let mut logdet = 0.0f64;
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if a.get(i, k).norm() > a.get(piv, k).norm() {
                    piv = i;
                }
            }
            if piv != k {
                for j in 0..n {
                    let tmp = a.get(k, j);
                    a.set(k, j, a.get(piv, j));
                    a.set(piv, j, tmp);
                }
            }
            let pivot = a.get(k, k);
            logdet += pivot.norm().log2();
            for i in (k + 1)..n {
                let f = a.get(i, k) / pivot;
                for j in k..n {
                    let val = a.get(i, j) - f * a.get(k, j);
                    a.set(i, j, val);
                }
            }
        }
        logdet
    }

    // log2 det(I + scale A A*) via the dense LU oracle.
    fn dense_logdet_ipaa(scale: f64, a: &ComplexMatrix) -> f64 {
        let aat = a.mul(&a.adjoint());
        let m = ComplexMatrix::from_fn(aat.rows(), aat.cols(), |i, j| {
            let base = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            base + aat.get(i, j) * scale
        });
        lu_logdet2(&m)
    }

    // Least-squares residual oracle via normal equations, solved by Gaussian
    // elimination.
    #[allow(clippy::needless_range_loop)]
    fn normal_equations_distance(m: &ComplexMatrix, row_index: usize) -> f64 {
        let n = m.cols();
        let others: Vec<&[C64]> = (0..m.rows())
            .filter(|&r| r != row_index)
            .map(|r| m.row(r))
            .collect();
        let k = others.len();
        // G c = g with G[j][l] = <b_j, b_l>, g[j] = <b_j, r>
        let mut g = vec![vec![C64::new(0.0, 0.0); k + 1]; k];
        for j in 0..k {
            for l in 0..k {
                g[j][l] = vec_dot(others[j], others[l]);
            }
            g[j][k] = vec_dot(others[j], m.row(row_index));
        }
        // forward elimination with partial pivoting
        for col in 0..k {
            let mut piv = col;
            for r in (col + 1)..k {
                if g[r][col].norm() > g[piv][col].norm() {
                    piv = r;
                }
            }
            g.swap(col, piv);
            let p = g[col][col];
            for r in (col + 1)..k {
                let f = g[r][col] / p;
                for c in col..=k {
                    let val = g[r][c] - f * g[col][c];
                    g[r][c] = val;
                }
            }
        }
        let mut coeff = vec![C64::new(0.0, 0.0); k];
        for r in (0..k).rev() {
            let mut acc = g[r][k];
            for c in (r + 1)..k {
                acc -= g[r][c] * coeff[c];
            }
            coeff[r] = acc / g[r][r];
        }
        let mut resid: Vec<C64> = m.row(row_index).to_vec();
        for j in 0..k {
            for i in 0..n {
                resid[i] -= coeff[j] * others[j][i];
            }
        }
        vec_norm(&resid)
    }

    #[test]
    fn svd_identity_2x2() {
        let s = svd(&ComplexMatrix::identity(2)).unwrap();
        assert!((s.singular_values[0] - 1.0).abs() < 1e-12);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-12);
        // U V* must reproduce the identity
        let recon = s.reconstruct();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((recon.get(i, j) - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_zero_3x2() {
        let s = svd(&ComplexMatrix::zeros(3, 2)).unwrap();
        assert_eq!(s.singular_values, vec![0.0, 0.0]);
        // completion still yields orthonormal left columns
        let utu = s.left.adjoint().mul(&s.left);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((utu.get(i, j) - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_two_unit_rows_at_angle() {
        // Rows (1, 0) and (cos t, sin t): sigma = sqrt(2) cos(t/2), sqrt(2) sin(t/2).
        // Cross-checked against a direct 2x2 eigendecomposition of A* A.
        let mut r = rng(7);
        for _ in 0..200 {
            let theta: f64 = r.gen::<f64>() * std::f64::consts::FRAC_PI_2;
            let a = ComplexMatrix::from_rows(&[
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                vec![C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)],
            ])
            .unwrap();
            let s = svd(&a).unwrap();
            let expect1 = std::f64::consts::SQRT_2 * (theta / 2.0).cos();
            let expect2 = std::f64::consts::SQRT_2 * (theta / 2.0).sin();
            assert!((s.singular_values[0] - expect1).abs() < 1e-12);
            assert!((s.singular_values[1] - expect2).abs() < 1e-12);

            // closed-form 2x2 oracle: eigenvalues of A* A from trace and det
            let g = a.adjoint().mul(&a);
            let tr = (g.get(0, 0) + g.get(1, 1)).re;
            let det = (g.get(0, 0) * g.get(1, 1) - g.get(0, 1) * g.get(1, 0)).re;
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            let l1 = ((tr + disc) / 2.0).max(0.0).sqrt();
            let l2 = ((tr - disc) / 2.0).max(0.0).sqrt();
            assert!((s.singular_values[0] - l1).abs() < 1e-10);
            assert!((s.singular_values[1] - l2).abs() < 1e-10);
        }
    }

    #[test]
    fn svd_reconstruction_and_orthogonality_random() {
        let mut r = rng(11);
        for trial in 0..1000 {
            let rows = 1 + (trial % 12);
            let cols = 1 + (trial / 7) % 12;
            let a = random_matrix(rows, cols, &mut r);
            let s = svd(&a).unwrap();

            let k = rows.min(cols);
            assert_eq!(s.singular_values.len(), k);
            for i in 1..k {
                assert!(s.singular_values[i - 1] >= s.singular_values[i]);
                assert!(s.singular_values[i] >= 0.0);
            }

            let resid = a.sub(&s.reconstruct()).frobenius_norm();
            assert!(
                resid <= 1e-10 * a.frobenius_norm().max(1.0),
                "reconstruction residual {resid} for {rows}x{cols}"
            );

            for (factor, dim) in [(&s.left, k), (&s.right, k)] {
                let gram = factor.adjoint().mul(factor);
                for i in 0..dim {
                    for j in 0..dim {
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!(
                            (gram.get(i, j) - C64::new(expect, 0.0)).norm() < 1e-10,
                            "factor not orthonormal at ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_matches_singular_values() {
        let mut r = rng(13);
        for _ in 0..300 {
            let a = random_matrix(4, 3, &mut r);
            let s = svd(&a).unwrap();
            let from_sv = s.singular_values.iter().map(|x| x * x).sum::<f64>().sqrt();
            let direct = a.frobenius_norm();
            assert!((from_sv - direct).abs() <= 1e-10 * direct.max(1.0));
        }
        assert!((ComplexMatrix::identity(5).frobenius_norm() - 5f64.sqrt()).abs() < 1e-14);
        assert_eq!(ComplexMatrix::zeros(3, 4).frobenius_norm(), 0.0);
    }

    #[test]
    fn logdet_ipaa_against_dense_oracle() {
        let mut r = rng(17);
        for _ in 0..200 {
            let a = random_matrix(3, 2, &mut r);
            let via_svd = logdet_ipaa(10.0, &a).unwrap();
            let via_lu = dense_logdet_ipaa(10.0, &a);
            assert!(
                (via_svd - via_lu).abs() <= 1e-9 * via_lu.abs().max(1.0),
                "{via_svd} vs {via_lu}"
            );
        }
    }

    #[test]
    fn logdet_ipaa_closed_cases() {
        // zero matrix: det(I) = 1 -> log 0
        assert_eq!(logdet_ipaa(5.0, &ComplexMatrix::zeros(2, 3)).unwrap(), 0.0);
        // diagonal singular values: log2 prod (1 + scale s_i^2)
        let a = ComplexMatrix::from_rows(&[
            vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.5, 0.0)],
        ])
        .unwrap();
        let p_half = 8.0f64;
        let expect = ((1.0 + p_half * 4.0) * (1.0 + p_half * 0.25)).log2();
        assert!((logdet_ipaa(p_half, &a).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn det_commute_identity_random() {
        let mut r = rng(19);
        for trial in 0..1000 {
            let rows = 1 + (trial % 12);
            let cols = 1 + (trial / 5) % 12;
            let a = random_matrix(rows, cols, &mut r);
            let (lhs, rhs) = det_commute_check(&a, 3.0).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                "det commute identity violated: {lhs} vs {rhs}"
            );
            // cross-check both sides against the dense oracle
            let lu_lhs = dense_logdet_ipaa(3.0, &a);
            let lu_rhs = dense_logdet_ipaa(3.0, &a.adjoint());
            assert!((lhs - lu_lhs).abs() <= 1e-9 * lu_lhs.abs().max(1.0));
            assert!((rhs - lu_rhs).abs() <= 1e-9 * lu_rhs.abs().max(1.0));
            // same corpus: squared Frobenius norm equals the sum of sigma^2
            let sv_sum: f64 = svd(&a).unwrap().singular_values.iter().map(|x| x * x).sum();
            let direct = a.frobenius_norm().powi(2);
            assert!((sv_sum - direct).abs() <= 1e-10 * direct.max(1.0));
        }
        let (z1, z2) = det_commute_check(&ComplexMatrix::zeros(3, 2), 1.0).unwrap();
        assert_eq!((z1, z2), (0.0, 0.0));
        let (i1, i2) = det_commute_check(&ComplexMatrix::identity(4), 1.0).unwrap();
        assert!((i1 - 4.0).abs() < 1e-12 && (i2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn row_distance_orthonormal_and_duplicate() {
        let eye = ComplexMatrix::identity(4);
        for i in 0..4 {
            assert!((row_subspace_distance(&eye, i) - 1.0).abs() < 1e-12);
        }
        let dup = ComplexMatrix::from_rows(&[
            vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)],
            vec![C64::new(3.0, 0.5), C64::new(1.0, 1.0)],
            vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)],
        ])
        .unwrap();
        assert!(row_subspace_distance(&dup, 0) < 1e-12);
    }

    #[test]
    fn row_distance_against_least_squares_oracle() {
        let mut r = rng(23);
        for _ in 0..300 {
            let a = random_matrix(4, 6, &mut r);
            for i in 0..4 {
                let mgs = row_subspace_distance(&a, i);
                let ne = normal_equations_distance(&a, i);
                assert!(
                    (mgs - ne).abs() <= 1e-9 * ne.max(1.0),
                    "row {i}: {mgs} vs {ne}"
                );
            }
        }
    }

    #[test]
    fn negative_second_moment_identity_square() {
        let mut r = rng(29);
        let mut checked = 0;
        while checked < 300 {
            let n = 2 + (checked % 11);
            let a = random_matrix(n, n, &mut r);
            let s = svd(&a).unwrap();
            let smax = s.singular_values[0];
            let smin = *s.singular_values.last().unwrap();
            if smin <= 0.0 || smax / smin > 1e8 {
                continue;
            }
            checked += 1;
            let lhs: f64 = s.singular_values.iter().map(|x| x.powi(-2)).sum();
            let rhs: f64 = (0..n).map(|i| row_subspace_distance(&a, i).powi(-2)).sum();
            assert!(
                (lhs - rhs).abs() <= 1e-8 * rhs,
                "negative second moment: {lhs} vs {rhs} (n = {n})"
            );
        }
    }

    #[test]
    fn weyl_perturbation_bound() {
        let mut r = rng(31);
        for trial in 0..500 {
            let rows = 2 + (trial % 8);
            let cols = 2 + (trial / 3) % 8;
            let a = random_matrix(rows, cols, &mut r);
            let mut e = random_matrix(rows, cols, &mut r);
            // shrink the perturbation so it is a genuine perturbation
            e = ComplexMatrix::from_fn(rows, cols, |i, j| e.get(i, j) * 0.05);
            let perturbed = ComplexMatrix::from_fn(rows, cols, |i, j| a.get(i, j) + e.get(i, j));
            let sa = svd(&a).unwrap().singular_values;
            let sp = svd(&perturbed).unwrap().singular_values;
            let bound = e.frobenius_norm() + 1e-12;
            for (x, y) in sa.iter().zip(&sp) {
                assert!(
                    (x - y).abs() <= bound,
                    "Weyl violated: |{x} - {y}| > {bound}"
                );
            }
        }
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::new(0, 3, vec![]),
            Err(NumericsError::EmptyShape { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![C64::new(1.0, 0.0); 3]),
            Err(NumericsError::LengthMismatch { .. })
        ));
        let mut data = vec![C64::new(1.0, 0.0); 4];
        data[2] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexMatrix::new(2, 2, data),
            Err(NumericsError::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn orthonormal_complement_spans_rest() {
        let mut r = rng(37);
        let a = random_matrix(5, 2, &mut r);
        let q = svd(&a).unwrap().left; // 5x2 orthonormal
        let comp = orthonormal_complement(&q);
        assert_eq!((comp.rows(), comp.cols()), (5, 3));
        let full = q.hcat(&comp);
        let gram = full.adjoint().mul(&full);
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram.get(i, j) - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }
}
