//! Small dense linear-algebra kernels shared by the other modules.
//!
//! Everything here targets desk-scale problems (dimensions in the tens),
//! so the implementations favor clarity and determinism over asymptotic
//! cleverness: row-major storage, partial-pivot elimination, modified
//! Gram-Schmidt with a re-orthogonalization pass, and a Jacobi sweep for
//! symmetric eigenvalues.

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(v, &mut out);
        out
    }

    /// `self * v` into a caller buffer (no allocation).
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for i in 0..self.rows {
            let mut acc = 0.0;
            let row = self.row(i);
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
    }

    /// `selfᵀ * v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tr_matvec_into(v, &mut out);
        out
    }

    /// `selfᵀ * v` into a caller buffer (no allocation).
    pub fn tr_matvec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, a) in row.iter().enumerate() {
                out[j] += a * v[i];
            }
        }
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_at(i, j, a * other.at(k, j));
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j));
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Rank by Gaussian elimination with partial pivoting. A pivot counts as
/// nonzero when it exceeds `rel_tol * max|entry|` of the input.
pub fn rank(m: &Mat, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let scale = a.max_abs();
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let (nr, nc) = (a.rows(), a.cols());
    let mut rank = 0;
    let mut row = 0;
    for col in 0..nc {
        if row >= nr {
            break;
        }
        let mut best = row;
        for r in row + 1..nr {
            if a.at(r, col).abs() > a.at(best, col).abs() {
                best = r;
            }
        }
        if a.at(best, col).abs() <= tol {
            continue;
        }
        if best != row {
            for c in 0..nc {
                let tmp = a.at(row, c);
                a.set(row, c, a.at(best, c));
                a.set(best, c, tmp);
            }
        }
        let piv = a.at(row, col);
        for r in row + 1..nr {
            let factor = a.at(r, col) / piv;
            if factor != 0.0 {
                for c in col..nc {
                    let v = a.at(r, c) - factor * a.at(row, c);
                    a.set(r, c, v);
                }
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

/// Solves a square `a x = b` by LU with partial pivoting. Returns `None`
/// when a pivot falls below `1e-13 * max|entry|`.
pub fn solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(a.rows(), a.cols());
    assert_eq!(b.len(), a.rows());
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let tol = 1e-13 * lu.max_abs().max(1e-300);
    for col in 0..n {
        let mut best = col;
        for r in col + 1..n {
            if lu.at(r, col).abs() > lu.at(best, col).abs() {
                best = r;
            }
        }
        if lu.at(best, col).abs() <= tol {
            return None;
        }
        if best != col {
            for c in 0..n {
                let tmp = lu.at(col, c);
                lu.set(col, c, lu.at(best, c));
                lu.set(best, c, tmp);
            }
            x.swap(col, best);
        }
        let piv = lu.at(col, col);
        for r in col + 1..n {
            let factor = lu.at(r, col) / piv;
            if factor != 0.0 {
                for c in col + 1..n {
                    let v = lu.at(r, c) - factor * lu.at(col, c);
                    lu.set(r, c, v);
                }
                x[r] -= factor * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        x[col] /= lu.at(col, col);
        for r in 0..col {
            x[r] -= lu.at(r, col) * x[col];
        }
    }
    Some(x)
}

/// Solves `a x = b` for symmetric positive-definite `a` by Cholesky.
/// Returns `None` when a diagonal pivot is not safely positive.
pub fn cholesky_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    let tol = 1e-14 * a.max_abs().max(1e-300);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if s <= tol {
                    return None;
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.at(j, j));
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l.at(i, k) * y[k];
        }
        y[i] /= l.at(i, i);
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l.at(k, i) * y[k];
        }
        y[i] /= l.at(i, i);
    }
    Some(y)
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors whose
/// residual norm drops below `tol` times their original norm are dropped.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let original = norm2(v);
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let residual = norm2(&w);
        if residual > tol * original {
            for wi in w.iter_mut() {
                *wi /= residual;
            }
            basis.push(w);
        }
    }
    basis
}

/// Extends an orthonormal `basis` of a subspace of `R^dim` to a full
/// orthonormal basis and returns the complementary vectors, produced
/// deterministically by sweeping the standard basis vectors in order.
pub fn orthonormal_complement(basis: &[Vec<f64>], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut complement: Vec<Vec<f64>> = Vec::new();
    for k in 0..dim {
        if basis.len() + complement.len() >= dim {
            break;
        }
        let mut w = vec![0.0; dim];
        w[k] = 1.0;
        for _ in 0..2 {
            for q in basis.iter().chain(complement.iter()) {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let residual = norm2(&w);
        if residual > tol {
            for wi in w.iter_mut() {
                *wi /= residual;
            }
            complement.push(w);
        }
    }
    complement
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Panics on non-square input; symmetry is the caller's
/// responsibility (the strictly lower triangle is ignored).
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    if n == 0 {
        return Vec::new();
    }
    let mut m = a.clone();
    // symmetrize the working copy so sweeps see consistent entries
    for i in 0..n {
        for j in 0..i {
            let v = m.at(j, i);
            m.set(i, j, v);
        }
    }
    let scale = m.max_abs().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(m.at(i, j).abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.at(k, p);
                    let akq = m.at(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.at(p, k);
                    let aqk = m.at(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.at(i, i)).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rank_detects_dependent_columns() {
        let m = Mat::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![0.0, 1.0, 1.0],
        ]);
        assert_eq!(rank(&m, 1e-9), 2);
        assert_eq!(rank(&Mat::identity(3), 1e-9), 3);
        assert_eq!(rank(&Mat::zeros(2, 2), 1e-9), 0);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = vec![1.5, -2.0];
        let b = a.matvec(&x);
        let got = solve(&a, &b).unwrap();
        assert_relative_eq!(got[0], x[0], max_relative = 1e-12);
        assert_relative_eq!(got[1], x[1], max_relative = 1e-12);

        let singular = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(solve(&singular, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn cholesky_matches_lu_on_spd() {
        let a = Mat::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let b = vec![1.0, 2.0];
        let x1 = cholesky_solve(&a, &b).unwrap();
        let x2 = solve(&a, &b).unwrap();
        assert_relative_eq!(x1[0], x2[0], max_relative = 1e-12);
        assert_relative_eq!(x1[1], x2[1], max_relative = 1e-12);
    }

    #[test]
    fn orthonormalize_produces_orthonormal_set() {
        let vs = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 1.0], // dependent on the first two
        ];
        let basis = orthonormalize(&vs, 1e-10);
        assert_eq!(basis.len(), 2);
        for (i, u) in basis.iter().enumerate() {
            assert_relative_eq!(norm2(u), 1.0, max_relative = 1e-12);
            for v in basis.iter().skip(i + 1) {
                assert!(dot(u, v).abs() < 1e-12);
            }
        }
        let comp = orthonormal_complement(&basis, 3, 1e-10);
        assert_eq!(comp.len(), 1);
        for u in &basis {
            assert!(dot(u, &comp[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let eig = symmetric_eigenvalues(&a);
        assert_relative_eq!(eig[0], 1.0, max_relative = 1e-10);
        assert_relative_eq!(eig[1], 3.0, max_relative = 1e-10);
    }
}
