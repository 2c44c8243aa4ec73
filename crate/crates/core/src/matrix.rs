//! Dense real matrices and the handful of factorizations the algorithm needs.
//!
//! Storage is row-major `f64`. Conventions are chosen so results are
//! deterministic and comparable across calls: QR factors are returned with a
//! nonnegative diagonal, and an LU factorization can be reused for any number
//! of right-hand sides.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Unit roundoff of IEEE double precision, 2^-53.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// A dense, row-major real matrix with at least one row and one column.
///
/// Constructors that accept external data reject non-finite entries. Results
/// of arithmetic are not re-validated; callers that care about overflow check
/// [`DenseMatrix::is_finite`].
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, validating shape and finiteness.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "from_row_major",
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged or non-finite input;
    /// intended for literals in tests and examples.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.as_ref().len()).unwrap_or(0);
        assert!(
            rows.iter().all(|x| x.as_ref().len() == c),
            "ragged matrix literal"
        );
        let data = rows.iter().flat_map(|x| x.as_ref().iter().copied()).collect();
        Self::from_row_major(r, c, data).expect("invalid matrix literal")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        DenseMatrix {
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

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Column vector with a single one in position `index`.
    pub fn unit_column(n: usize, index: usize) -> Self {
        let mut m = Self::zeros(n, 1);
        m[(index, 0)] = 1.0;
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i)).all(|j| self[(i, j)] == 0.0))
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += alpha * y;
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other, "add")?;
        let mut out = self.clone();
        out.axpy(1.0, other);
        Ok(out)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other, "sub")?;
        let mut out = self.clone();
        out.axpy(-1.0, other);
        Ok(out)
    }

    fn check_same_shape(&self, other: &DenseMatrix, context: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(())
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul",
                expected: (self.cols, other.cols),
                found: other.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "vstack",
                expected: (other.rows, self.cols),
                found: other.shape(),
            });
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                context: "hstack",
                expected: (self.rows, other.cols),
                found: other.shape(),
            });
        }
        Ok(DenseMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        }))
    }

    /// Pads with zero rows (or truncates) to exactly `rows` rows.
    pub fn resize_rows(&self, rows: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)]
            } else {
                0.0
            }
        })
    }

    /// Flips the sign of every row whose diagonal entry is negative.
    pub fn normalize_row_signs(&mut self) {
        for i in 0..self.rows.min(self.cols) {
            if self[(i, i)] < 0.0 {
                for x in &mut self.data[i * self.cols..(i + 1) * self.cols] {
                    *x = -*x;
                }
            }
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for x in self.row(i) {
                write!(f, "{x:>24.16e}")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Maximum absolute column sum.
pub fn one_norm(m: &DenseMatrix) -> f64 {
    (0..m.cols)
        .map(|j| (0..m.rows).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Upper triangular factor of a Householder QR decomposition.
///
/// For `m` of shape r×c the result is min(r,c)×c, upper trapezoidal, with a
/// nonnegative diagonal, and satisfies RᵀR = MᵀM up to rounding. No column
/// pivoting is performed; rank-deficient input yields zero diagonal entries.
pub fn qr_upper(m: &DenseMatrix) -> DenseMatrix {
    let (r, c) = m.shape();
    let k = r.min(c);
    let mut work = m.clone();
    let mut v = vec![0.0; r];

    for j in 0..k {
        // Scaled norm of the sub-column to avoid spurious overflow.
        let scale = (j..r).map(|i| work[(i, j)].abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        let mut sigma = 0.0;
        for i in j..r {
            let x = work[(i, j)] / scale;
            v[i] = x;
            sigma += x * x;
        }
        let norm = sigma.sqrt();
        let alpha = if v[j] >= 0.0 { -norm } else { norm };
        v[j] -= alpha;
        let vnorm2: f64 = v[j..r].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in j..c {
            let dot: f64 = (j..r).map(|i| v[i] * work[(i, col)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..r {
                work[(i, col)] -= f * v[i];
            }
        }
        work[(j, j)] = alpha * scale;
        for i in j + 1..r {
            work[(i, j)] = 0.0;
        }
    }

    let mut out = DenseMatrix::from_fn(k, c, |i, j| if j < i { 0.0 } else { work[(i, j)] });
    out.normalize_row_signs();
    out
}

/// LU factorization with partial pivoting, `P·M = L·U`.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    /// Unit-lower L (strict part) and U packed together.
    lu: DenseMatrix,
    /// Row permutation: row `i` of the factored matrix is row `perm[i]` of M.
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Solves `M·X = rhs`.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        lu_solve(self, rhs)
    }
}

/// Factors a square matrix. A pivot of magnitude at most `u·‖M‖₁·n` is
/// treated as singular.
pub fn lu_factor(m: &DenseMatrix) -> Result<LuFactorization> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let threshold = UNIT_ROUNDOFF * one_norm(m) * n as f64;
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= threshold || pivot == 0.0 {
            return Err(Error::Singular { pivot_col: k });
        }
        if p != k {
            for j in 0..n {
                lu.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / d;
            lu[(i, k)] = l;
            if l != 0.0 {
                for j in k + 1..n {
                    lu.data[i * n + j] -= l * lu.data[k * n + j];
                }
            }
        }
    }
    Ok(LuFactorization { n, lu, perm })
}

pub fn lu_solve(f: &LuFactorization, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    let n = f.n;
    if rhs.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "lu_solve",
            expected: (n, rhs.cols()),
            found: rhs.shape(),
        });
    }
    let m = rhs.cols();
    let mut x = DenseMatrix::from_fn(n, m, |i, j| rhs[(f.perm[i], j)]);
    // Forward substitution with unit-lower L.
    for i in 0..n {
        for k in 0..i {
            let l = f.lu[(i, k)];
            if l != 0.0 {
                for j in 0..m {
                    x.data[i * m + j] -= l * x.data[k * m + j];
                }
            }
        }
    }
    // Back substitution with U.
    for i in (0..n).rev() {
        for k in i + 1..n {
            let u = f.lu[(i, k)];
            if u != 0.0 {
                for j in 0..m {
                    x.data[i * m + j] -= u * x.data[k * m + j];
                }
            }
        }
        let d = f.lu[(i, i)];
        for j in 0..m {
            x.data[i * m + j] /= d;
        }
    }
    Ok(x)
}
