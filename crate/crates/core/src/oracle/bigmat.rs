//! Dense matrices of MPFR floats at a fixed binary precision.

use std::fmt;

use rug::{Assign, Float};

use crate::matrix::DenseMatrix;

#[derive(Clone, PartialEq)]
pub struct BigMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<Float>,
}

impl BigMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        BigMatrix {
            rows,
            cols,
            prec,
            data: vec![Float::new(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)].assign(1);
        }
        m
    }

    /// Exact conversion of a double-precision matrix.
    pub fn from_dense(m: &DenseMatrix, prec: u32) -> Self {
        BigMatrix {
            rows: m.rows(),
            cols: m.cols(),
            prec,
            data: m.as_slice().iter().map(|&x| Float::with_val(prec, x)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, prec: u32, mut f: impl FnMut(usize, usize) -> Float) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(Float::with_val(prec, f(i, j)));
            }
        }
        BigMatrix { rows, cols, prec, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Rounds every entry to the nearest double.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    pub fn transpose(&self) -> BigMatrix {
        BigMatrix::from_fn(self.cols, self.rows, self.prec, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, alpha: &Float) -> BigMatrix {
        BigMatrix {
            rows: self.rows,
            cols: self.cols,
            prec: self.prec,
            data: self
                .data
                .iter()
                .map(|x| Float::with_val(self.prec, x * alpha))
                .collect(),
        }
    }

    pub fn add(&self, other: &BigMatrix) -> BigMatrix {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &BigMatrix) -> BigMatrix {
        assert_eq!(self.shape(), other.shape(), "sub shape mismatch");
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        out
    }

    /// Product; zero entries on either side are skipped, which makes
    /// triangular operands proportionally cheaper.
    pub fn matmul(&self, other: &BigMatrix) -> BigMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let prec = self.prec.max(other.prec);
        let mut out = BigMatrix::zeros(self.rows, other.cols, prec);
        let mut tmp = Float::new(prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k * other.cols + j];
                    if b.is_zero() {
                        continue;
                    }
                    tmp.assign(a * b);
                    out.data[i * other.cols + j] += &tmp;
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> Float {
        let mut best = Float::new(self.prec);
        for j in 0..self.cols {
            let mut s = Float::new(self.prec);
            for i in 0..self.rows {
                s += &*self[(i, j)].as_abs();
            }
            if s > best {
                best = s;
            }
        }
        best
    }

    pub fn trace(&self) -> Float {
        let mut s = Float::new(self.prec);
        for i in 0..self.rows.min(self.cols) {
            s += &self[(i, i)];
        }
        s
    }

    /// (M + Mᵀ)/2.
    pub fn symmetrize(&self) -> BigMatrix {
        BigMatrix::from_fn(self.rows, self.cols, self.prec, |i, j| {
            Float::with_val(self.prec, &self[(i, j)] + &self[(j, i)]) / 2u32
        })
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> BigMatrix {
        BigMatrix::from_fn(rows, cols, self.prec, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Flips rows with a negative diagonal entry.
    pub fn normalize_row_signs(&mut self) {
        for i in 0..self.rows.min(self.cols) {
            if self[(i, i)].is_sign_negative() && !self[(i, i)].is_zero() {
                for j in 0..self.cols {
                    let x = -self[(i, j)].clone();
                    self[(i, j)] = x;
                }
            }
        }
    }

    /// Upper Cholesky factor of a symmetric positive semidefinite matrix.
    ///
    /// Pivots at or below `rel_tol·trace` are treated as zero and their row
    /// of the factor is set to zero, which handles rank-deficient input.
    pub fn cholesky_upper(&self, rel_tol: &Float) -> BigMatrix {
        assert_eq!(self.rows, self.cols, "cholesky of non-square matrix");
        let n = self.rows;
        let prec = self.prec;
        let tol = Float::with_val(prec, self.trace().abs() * rel_tol);
        let mut u = BigMatrix::zeros(n, n, prec);
        for k in 0..n {
            let mut d = self[(k, k)].clone();
            for i in 0..k {
                d -= Float::with_val(prec, u[(i, k)].square_ref());
            }
            if d <= tol {
                continue;
            }
            let pivot = d.sqrt();
            for j in k + 1..n {
                let mut s = self[(k, j)].clone();
                for i in 0..k {
                    s -= Float::with_val(prec, &u[(i, k)] * &u[(i, j)]);
                }
                u[(k, j)] = s / &pivot;
            }
            u[(k, k)] = pivot;
        }
        u
    }

    /// Eigenvalues of a symmetric matrix in ascending order, by cyclic
    /// Jacobi rotations.
    pub fn symmetric_eigenvalues(&self) -> Vec<Float> {
        assert_eq!(self.rows, self.cols, "eigenvalues of non-square matrix");
        let n = self.rows;
        let prec = self.prec;
        let mut a = self.clone();
        let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 4));
        for _sweep in 0..60 {
            let mut off = Float::new(prec);
            for p in 0..n {
                for q in p + 1..n {
                    off += Float::with_val(prec, a[(p, q)].square_ref());
                }
            }
            let mut diag = Float::new(prec);
            for p in 0..n {
                diag += Float::with_val(prec, a[(p, p)].square_ref());
            }
            if off <= Float::with_val(prec, &diag * &eps) * &eps {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[(p, q)].is_zero() {
                        continue;
                    }
                    let theta = Float::with_val(prec, &a[(q, q)] - &a[(p, p)])
                        / Float::with_val(prec, &a[(p, q)] * 2u32);
                    let root = (Float::with_val(prec, theta.square_ref()) + 1u32).sqrt();
                    let t = if theta.is_sign_negative() {
                        Float::with_val(prec, -1) / (Float::with_val(prec, theta.abs_ref()) + &root)
                    } else {
                        Float::with_val(prec, 1) / (Float::with_val(prec, &theta + &root))
                    };
                    let c = (Float::with_val(prec, t.square_ref()) + 1u32).sqrt().recip();
                    let s = Float::with_val(prec, &c * &t);
                    // A ← JᵀAJ on rows and columns p, q.
                    for k in 0..n {
                        let akp = a[(k, p)].clone();
                        let akq = a[(k, q)].clone();
                        a[(k, p)] = Float::with_val(prec, &c * &akp) - Float::with_val(prec, &s * &akq);
                        a[(k, q)] = Float::with_val(prec, &s * &akp) + Float::with_val(prec, &c * &akq);
                    }
                    for k in 0..n {
                        let apk = a[(p, k)].clone();
                        let aqk = a[(q, k)].clone();
                        a[(p, k)] = Float::with_val(prec, &c * &apk) - Float::with_val(prec, &s * &aqk);
                        a[(q, k)] = Float::with_val(prec, &s * &apk) + Float::with_val(prec, &c * &aqk);
                    }
                }
            }
        }
        let mut ev: Vec<Float> = (0..n).map(|i| a[(i, i)].clone()).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        ev
    }

    /// Singular values in descending order by one-sided Jacobi rotations.
    pub fn singular_values(&self) -> Vec<Float> {
        let prec = self.prec;
        // Work on columns of the taller orientation.
        let mut a = if self.rows >= self.cols {
            self.clone()
        } else {
            self.transpose()
        };
        let (m, n) = a.shape();
        let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 4));
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let mut alpha = Float::new(prec);
                    let mut beta = Float::new(prec);
                    let mut gamma = Float::new(prec);
                    for i in 0..m {
                        alpha += Float::with_val(prec, a[(i, p)].square_ref());
                        beta += Float::with_val(prec, a[(i, q)].square_ref());
                        gamma += Float::with_val(prec, &a[(i, p)] * &a[(i, q)]);
                    }
                    if gamma.is_zero() {
                        continue;
                    }
                    let scale = Float::with_val(prec, &alpha * &beta).sqrt() * &eps;
                    if Float::with_val(prec, gamma.abs_ref()) <= scale {
                        continue;
                    }
                    rotated = true;
                    let zeta = Float::with_val(prec, &beta - &alpha) / (Float::with_val(prec, &gamma * 2u32));
                    let root = (Float::with_val(prec, zeta.square_ref()) + 1u32).sqrt();
                    let t = if zeta.is_sign_negative() {
                        Float::with_val(prec, -1) / (Float::with_val(prec, zeta.abs_ref()) + &root)
                    } else {
                        Float::with_val(prec, 1) / (Float::with_val(prec, &zeta + &root))
                    };
                    let c = (Float::with_val(prec, t.square_ref()) + 1u32).sqrt().recip();
                    let s = Float::with_val(prec, &c * &t);
                    for i in 0..m {
                        let ap = a[(i, p)].clone();
                        let aq = a[(i, q)].clone();
                        a[(i, p)] = Float::with_val(prec, &c * &ap) - Float::with_val(prec, &s * &aq);
                        a[(i, q)] = Float::with_val(prec, &s * &ap) + Float::with_val(prec, &c * &aq);
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<Float> = (0..n)
            .map(|j| {
                let mut s = Float::new(prec);
                for i in 0..m {
                    s += Float::with_val(prec, a[(i, j)].square_ref());
                }
                s.sqrt()
            })
            .collect();
        sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
        sv
    }
}

impl std::ops::Index<(usize, usize)> for BigMatrix {
    type Output = Float;

    fn index(&self, (i, j): (usize, usize)) -> &Float {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for BigMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Float {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for BigMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BigMatrix {}x{} ({} bits) [", self.rows, self.cols, self.prec)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                write!(f, " {:.20e}", self[(i, j)].to_f64())?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// ‖approx − exact‖₁ / ‖exact‖₁, evaluated at the precision of `exact`.
/// Returns the absolute error when `exact` is zero.
pub fn relative_error(approx: &DenseMatrix, exact: &BigMatrix) -> f64 {
    assert_eq!(approx.shape(), exact.shape(), "relative_error shape mismatch");
    let diff = BigMatrix::from_dense(approx, exact.prec()).sub(exact);
    let num = diff.one_norm();
    let den = exact.one_norm();
    if den.is_zero() {
        num.to_f64()
    } else {
        (num / den).to_f64()
    }
}

/// Same as [`relative_error`] for two extended-precision matrices.
pub fn relative_error_big(approx: &BigMatrix, exact: &BigMatrix) -> Float {
    let num = approx.sub(exact).one_norm();
    let den = exact.one_norm();
    if den.is_zero() {
        num
    } else {
        num / den
    }
}
