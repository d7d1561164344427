//! Dense complex matrices and the handful of factorizations the pipeline
//! needs: LU solves, Householder least squares, Hermitian Cholesky, Jacobi
//! eigenvalues for real symmetric matrices, and a matrix exponential.
//!
//! Matrix sizes here are small (≤ ~16), so everything is written directly
//! against row-major `Vec<Complex64>` storage. The residual norm used
//! throughout the crate is the max-absolute-entry norm.

use num_complex::Complex64;

use crate::{Result, UnitonError};

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = CMat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, z) in row.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        m
    }

    /// Diagonal matrix from real signs or entries.
    pub fn diag_f64(d: &[f64]) -> Self {
        let mut m = CMat::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(*x, 0.0);
        }
        m
    }

    pub fn diag_c(d: &[C64]) -> Self {
        let mut m = CMat::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = *x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, o: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> CMat {
        let data = self.data.iter().map(|a| -a).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> CMat {
        let data = self.data.iter().map(|a| a * s).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        assert_eq!(self.cols, o.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..o.cols {
                    out[(i, j)] += a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        let data = self.data.iter().map(|a| a.conj()).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn adjoint(&self) -> CMat {
        self.transpose().conj()
    }

    /// Max-absolute-entry norm (the residual norm used across the crate).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> CMat {
        let data = self.data.iter().map(|z| C64::new(z.re, 0.0)).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn commutator(&self, o: &CMat) -> CMat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    /// Solve `self * X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &CMat) -> Result<CMat> {
        assert!(self.is_square());
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let mut piv = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best < 1e-300 {
                return Err(UnitonError::SingularMatrix(format!("lu pivot {k}")));
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                for j in 0..b.cols {
                    b.data.swap(k * b.cols + j, piv * b.cols + j);
                }
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                a[(i, k)] = f;
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
                for j in 0..b.cols {
                    let bkj = b[(k, j)];
                    b[(i, j)] -= f * bkj;
                }
            }
        }
        // back substitution
        let mut x = CMat::zeros(n, b.cols);
        for j in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = b[(i, j)];
                for k2 in i + 1..n {
                    s -= a[(i, k2)] * x[(k2, j)];
                }
                x[(i, j)] = s / a[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMat> {
        self.solve(&CMat::identity(self.rows))
    }

    /// Least-squares solution of `self * X = rhs` via complex Householder QR.
    /// Requires rows ≥ cols and full column rank.
    pub fn lstsq(&self, rhs: &CMat) -> Result<CMat> {
        let m = self.rows;
        let n = self.cols;
        assert!(m >= n, "lstsq needs rows >= cols");
        assert_eq!(rhs.rows, m);
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            // Householder vector for column k
            let mut normx = 0.0;
            for i in k..m {
                normx += a[(i, k)].norm_sqr();
            }
            let normx = normx.sqrt();
            if normx < 1e-300 {
                return Err(UnitonError::SingularMatrix(format!("qr column {k}")));
            }
            let akk = a[(k, k)];
            let alpha = if akk.norm() == 0.0 {
                C64::new(-normx, 0.0)
            } else {
                -(akk / akk.norm()) * normx
            };
            let mut v: Vec<C64> = (k..m).map(|i| a[(i, k)]).collect();
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vnorm2 < 1e-300 {
                continue;
            }
            // apply H = I - 2 v v* / |v|^2 to A and b
            for j in k..n {
                let mut s = C64::new(0.0, 0.0);
                for i in k..m {
                    s += v[i - k].conj() * a[(i, j)];
                }
                s *= 2.0 / vnorm2;
                for i in k..m {
                    let vi = v[i - k];
                    a[(i, j)] -= s * vi;
                }
            }
            for j in 0..b.cols {
                let mut s = C64::new(0.0, 0.0);
                for i in k..m {
                    s += v[i - k].conj() * b[(i, j)];
                }
                s *= 2.0 / vnorm2;
                for i in k..m {
                    let vi = v[i - k];
                    b[(i, j)] -= s * vi;
                }
            }
            a[(k, k)] = alpha;
        }
        let mut x = CMat::zeros(n, b.cols);
        for j in 0..b.cols {
            for i in (0..n).rev() {
                let mut s = b[(i, j)];
                for k2 in i + 1..n {
                    s -= a[(i, k2)] * x[(k2, j)];
                }
                if a[(i, i)].norm() < 1e-300 {
                    return Err(UnitonError::SingularMatrix("qr back-substitution".into()));
                }
                x[(i, j)] = s / a[(i, i)];
            }
        }
        Ok(x)
    }

    /// Cholesky factor of a Hermitian positive-definite matrix: `self = L L*`
    /// with `L` lower triangular and positive real diagonal.
    pub fn cholesky(&self) -> Result<CMat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = CMat::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= 0.0 {
                return Err(UnitonError::Factorization(format!(
                    "cholesky pivot {j} not positive ({d:.3e})"
                )));
            }
            let dj = d.sqrt();
            l[(j, j)] = C64::new(dj, 0.0);
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / dj;
            }
        }
        Ok(l)
    }

    /// Inverse of a lower-triangular matrix.
    pub fn lower_tri_inverse(&self) -> Result<CMat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut inv = CMat::zeros(n, n);
        for j in 0..n {
            if self[(j, j)].norm() < 1e-300 {
                return Err(UnitonError::SingularMatrix("triangular diagonal".into()));
            }
            inv[(j, j)] = C64::new(1.0, 0.0) / self[(j, j)];
            for i in j + 1..n {
                let mut s = C64::new(0.0, 0.0);
                for k in j..i {
                    s += self[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -s / self[(i, i)];
            }
        }
        Ok(inv)
    }

    /// Matrix exponential by scaling and squaring with a Taylor series.
    pub fn expm(&self) -> CMat {
        assert!(self.is_square());
        let norm = self.max_abs() * self.rows as f64;
        let mut squarings = 0u32;
        let mut scale = 1.0;
        while norm * scale > 0.25 {
            scale *= 0.5;
            squarings += 1;
        }
        let a = self.scale(C64::new(scale, 0.0));
        let mut term = CMat::identity(self.rows);
        let mut sum = CMat::identity(self.rows);
        for k in 1..40 {
            term = term.mul(&a).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi.
    /// Inputs must have negligible imaginary parts and be symmetric.
    /// Returns (eigenvalues ascending, orthogonal matrix of column vectors).
    pub fn jacobi_eigh(&self) -> Result<(Vec<f64>, CMat)> {
        assert!(self.is_square());
        let n = self.rows;
        if self.max_imag() > 1e-9 {
            return Err(UnitonError::InvalidArgument(
                "jacobi_eigh expects a real matrix".into(),
            ));
        }
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)].re).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                if (a[i][j] - a[j][i]).abs() > 1e-8 * (1.0 + a[i][j].abs()) {
                    return Err(UnitonError::InvalidArgument(
                        "jacobi_eigh expects a symmetric matrix".into(),
                    ));
                }
            }
        }
        let mut v = vec![vec![0.0; n]; n];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        1.0 / (theta - (1.0 + theta * theta).sqrt())
                    };
                    let cth = 1.0 / (1.0 + t * t).sqrt();
                    let sth = t * cth;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = cth * akp - sth * akq;
                        a[k][q] = sth * akp + cth * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = cth * apk - sth * aqk;
                        a[q][k] = sth * apk + cth * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k][p];
                        let vkq = v[k][q];
                        v[k][p] = cth * vkp - sth * vkq;
                        v[k][q] = sth * vkp + cth * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap());
        let evals: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
        let mut vecs = CMat::zeros(n, n);
        for (newj, &oldj) in order.iter().enumerate() {
            for i in 0..n {
                vecs[(i, newj)] = C64::new(v[i][oldj], 0.0);
            }
        }
        Ok((evals, vecs))
    }

    /// Rank of the row span with relative threshold on pivot magnitude.
    pub fn row_rank(&self, rel_tol: f64) -> usize {
        let mut a = self.clone();
        let m = a.rows;
        let n = a.cols;
        let scale = a.max_abs().max(1e-300);
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            if row >= m {
                break;
            }
            let mut piv = row;
            let mut best = a[(piv, col)].norm();
            for i in row + 1..m {
                if a[(i, col)].norm() > best {
                    best = a[(i, col)].norm();
                    piv = i;
                }
            }
            if best < rel_tol * scale {
                continue;
            }
            if piv != row {
                for j in 0..n {
                    let t = a[(row, j)];
                    a[(row, j)] = a[(piv, j)];
                    a[(piv, j)] = t;
                }
            }
            let d = a[(row, col)];
            for i in row + 1..m {
                let f = a[(i, col)] / d;
                for j in col..n {
                    let arj = a[(row, j)];
                    a[(i, j)] -= f * arj;
                }
            }
            rank += 1;
            row += 1;
        }
        rank
    }
}

/// Flatten matrices into row vectors and compute the rank of their joint span.
pub fn span_rank(mats: &[&CMat], rel_tol: f64) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let dim = mats[0].rows() * mats[0].cols();
    let mut stack = CMat::zeros(mats.len(), dim);
    for (r, m) in mats.iter().enumerate() {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                stack[(r, i * m.cols() + j)] = m[(i, j)];
            }
        }
    }
    stack.row_rank(rel_tol)
}

/// True iff the spans of `a` and `b` coincide (same rank individually and
/// jointly).
pub fn spans_equal(a: &[&CMat], b: &[&CMat], rel_tol: f64) -> bool {
    let ra = span_rank(a, rel_tol);
    let rb = span_rank(b, rel_tol);
    if ra != rb {
        return false;
    }
    let joint: Vec<&CMat> = a.iter().chain(b.iter()).copied().collect();
    span_rank(&joint, rel_tol) == ra
}
