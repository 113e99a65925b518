//! Small dense kernels plus the banded LU used for Newton steps.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::math::{dot, sqrt};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = if c == 0 { 0 } else { cols[0].len() };
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`.
    pub fn tmul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += self[(i, j)] * v[i];
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self += s · a bᵀ`.
    pub fn add_outer(&mut self, s: f64, a: &[f64], b: &[f64]) {
        for i in 0..self.rows {
            let si = s * a[i];
            for j in 0..self.cols {
                self[(i, j)] += si * b[j];
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorisation with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &Matrix) -> Option<Lu> {
        assert_eq!(a.rows, a.cols, "LU of non-square matrix");
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let m = lu[i * n + k] / d;
                lu[i * n + k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= m * lu[k * n + j];
                    }
                }
            }
        }
        Some(Lu { n, lu, piv, sign })
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }

    /// Ratio of smallest to largest pivot magnitude, a cheap conditioning proxy.
    pub fn pivot_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..self.n {
            let v = self.lu[i * self.n + i].abs();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }
}

pub fn det(a: &Matrix) -> f64 {
    if a.rows == 0 {
        return 1.0;
    }
    Lu::new(a).map_or(0.0, |lu| lu.det())
}

pub fn inverse(a: &Matrix) -> Option<Matrix> {
    Lu::new(a).map(|lu| lu.inverse())
}

pub fn solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    Lu::new(a).map(|lu| lu.solve(b))
}

/// Lower Cholesky factor, `None` unless the matrix is numerically positive definite.
/// Minimizes `|Ax − b|` by Householder QR on the column-equilibrated matrix. `None`
/// when a pivot of `R` falls below `rcond` (columns have unit norm after scaling).
pub fn least_squares(a: &Matrix, b: &[f64], rcond: f64) -> Option<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return None;
    }
    // equilibrate columns so that tiny monomials are not mistaken for rank loss
    let colscale: Vec<f64> = (0..n)
        .map(|j| {
            let s = sqrt((0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>());
            if s > 0.0 { 1.0 / s } else { 1.0 }
        })
        .collect();
    let mut r = a.clone();
    for i in 0..m {
        for j in 0..n {
            r[(i, j)] *= colscale[j];
        }
    }
    let mut y = b.to_vec();
    for j in 0..n {
        let mut s = 0.0;
        for i in j..m {
            s += r[(i, j)] * r[(i, j)];
        }
        let alpha = if r[(j, j)] > 0.0 { -sqrt(s) } else { sqrt(s) };
        if alpha.abs() <= rcond {
            return None;
        }
        let mut v: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for c in j..n {
            let d: f64 = (j..m).map(|i| v[i - j] * r[(i, c)]).sum::<f64>() * 2.0 / vv;
            for i in j..m {
                r[(i, c)] -= d * v[i - j];
            }
        }
        let d: f64 = (j..m).map(|i| v[i - j] * y[i]).sum::<f64>() * 2.0 / vv;
        for i in j..m {
            y[i] -= d * v[i - j];
        }
    }
    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let mut s = y[j];
        for c in j + 1..n {
            s -= r[(j, c)] * x[c];
        }
        x[j] = s / r[(j, j)];
    }
    Some(x.iter().zip(&colscale).map(|(v, c)| v * c).collect())
}

pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = sqrt(d);
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// `log det` of a symmetric positive definite matrix after Jacobi scaling,
/// so rows of very different magnitude do not spoil the factorisation.
pub fn log_det_spd(a: &Matrix) -> Option<f64> {
    let n = a.rows;
    let mut d = vec![0.0; n];
    for i in 0..n {
        let v = a[(i, i)];
        if !(v > 0.0) || !v.is_finite() {
            return None;
        }
        d[i] = 1.0 / sqrt(v);
    }
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = a[(i, j)] * d[i] * d[j];
        }
    }
    let l = cholesky(&s)?;
    let mut acc = 0.0;
    for i in 0..n {
        acc += 2.0 * crate::math::ln(l[(i, i)]) - 2.0 * crate::math::ln(d[i]);
    }
    Some(acc)
}

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
pub fn sym_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows;
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)] * m[(i, j)];
                total += v;
                if i != j {
                    off += v;
                }
            }
        }
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

pub fn min_eigenvalue(a: &Matrix) -> f64 {
    sym_eigenvalues(a).first().copied().unwrap_or(f64::NAN)
}

/// Orthonormal basis of the subspace spanned by `vectors` (Gram–Schmidt, in order).
pub fn orthonormal_span(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nv = crate::math::norm(&w);
        if nv > tol * crate::math::norm(v).max(1.0) {
            w.iter_mut().for_each(|x| *x /= nv);
            basis.push(w);
        }
    }
    basis
}

/// Orthonormal basis of `{x : r·x = 0 for all r in rows}` in dimension `n`,
/// built by projecting the standard basis in order.
pub fn orthonormal_complement(rows: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let range = orthonormal_span(rows, 1e-10);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        if range.len() + out.len() == n {
            break;
        }
        let mut w = vec![0.0; n];
        w[j] = 1.0;
        for _ in 0..2 {
            for b in range.iter().chain(out.iter()) {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nv = crate::math::norm(&w);
        if nv > 1e-8 {
            w.iter_mut().for_each(|x| *x /= nv);
            out.push(w);
        }
    }
    out
}

/// Dimension of the affine hull of the points.
pub fn affine_rank(points: &[&[f64]], tol: f64) -> usize {
    if points.is_empty() {
        return 0;
    }
    let base = points[0];
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in &diffs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nv = crate::math::norm(&w);
        if nv > tol {
            w.iter_mut().for_each(|x| *x /= nv);
            basis.push(w);
        }
    }
    basis.len()
}

/// Square banded matrix with lower bandwidth `kl` and upper bandwidth `ku`;
/// storage leaves `kl` extra superdiagonals for pivoting fill.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("banded system is singular at column {column}")]
pub struct SingularMatrix {
    pub column: usize,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Gaussian elimination with partial pivoting; `b` is overwritten by the solution.
    pub fn solve_in_place(mut self, b: &mut [f64]) -> Result<(), SingularMatrix> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 1e-300 + 1e-18 * scale) {
                return Err(SingularMatrix { column: k });
            }
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let c = self.idx(p, j);
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            let d = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let m = self.data[ik] / d;
                if m == 0.0 {
                    continue;
                }
                self.data[ik] = 0.0;
                for j in k + 1..=last_col {
                    let kj = self.data[self.idx(k, j)];
                    if kj != 0.0 {
                        let ij = self.idx(i, j);
                        self.data[ij] -= m * kj;
                    }
                }
                b[i] -= m * b[k];
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + kl + ku).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=last_col {
                s -= self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
        Ok(())
    }
}
