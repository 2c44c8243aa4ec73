//! Extended-precision and closed-form reference solutions.

mod bigmat;

use rug::{Assign, Float, Integer, Rational};

use crate::bounds::digits_to_bits;
use crate::error::{Error, Result};
use crate::expgram::Problem;
use crate::matrix::DenseMatrix;

pub use bigmat::{relative_error, relative_error_big, BigMatrix};

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionSpec {
    digits: u32,
}

impl PrecisionSpec {
    pub const MIN_DIGITS: u32 = 50;
    pub const DEFAULT_DIGITS: u32 = 60;

    pub fn new(digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidPrecision {
                min: Self::MIN_DIGITS,
                got: digits,
            });
        }
        Ok(PrecisionSpec { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision carried by results, with guard bits.
    pub fn bits(&self) -> u32 {
        digits_to_bits(self.digits)
    }

    /// 10^{−(digits−10)}, the agreement level expected between oracles.
    pub fn agreement_tolerance(&self) -> Float {
        let p = self.bits();
        Float::with_val(p, Float::u_pow_u(10, self.digits - 10)).recip()
    }
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        PrecisionSpec {
            digits: Self::DEFAULT_DIGITS,
        }
    }
}

/// e^A for a double-precision input.
pub fn expm_reference(a: &DenseMatrix, prec: PrecisionSpec) -> BigMatrix {
    expm_big(&BigMatrix::from_dense(a, prec.bits()))
}

/// e^A at the precision of `a`.
///
/// Scales by 2^k so that ‖A‖₁/2^k ≤ 1/2, sums the Taylor series by
/// Paterson–Stockmeyer until the term bound drops below the working
/// precision, then squares k times.
pub fn expm_big(a: &BigMatrix) -> BigMatrix {
    assert_eq!(a.rows(), a.cols(), "expm of non-square matrix");
    let n = a.rows();
    let out_prec = a.prec();
    let norm = a.one_norm();
    if norm.is_zero() {
        return BigMatrix::identity(n, out_prec);
    }

    // log2 ‖A‖₁ + 1 ≤ k.
    let log2_norm = norm.clone().log2().to_f64();
    let k = (log2_norm + 1.0).ceil().max(0.0) as u32;
    let prec = out_prec + 4 * k + 16;

    let a = BigMatrix::from_fn(n, n, prec, |i, j| a[(i, j)].clone());
    let x = a.scale(&Float::with_val(prec, Float::i_exp(1, -(k as i32))));
    let x_norm = (log2_norm - k as f64).exp2();

    // Smallest m with ‖X‖^{m+1}/(m+1)! below 2^{-(prec+10)}; the tail is
    // bounded by twice that since ‖X‖ ≤ 1/2.
    let target = -(prec as f64 + 10.0);
    let mut m = 1usize;
    let mut log2_term = x_norm.log2();
    loop {
        let j = (m + 1) as f64;
        log2_term += x_norm.log2() - j.log2();
        if log2_term < target {
            break;
        }
        m += 1;
    }

    let mut coeffs = Vec::with_capacity(m + 1);
    let mut c = Float::with_val(prec, 1);
    coeffs.push(c.clone());
    for j in 1..=m {
        c /= j as u32;
        coeffs.push(c.clone());
    }

    let mut e = paterson_stockmeyer(&x, &coeffs);
    for _ in 0..k {
        e = e.matmul(&e);
    }
    BigMatrix::from_fn(n, n, out_prec, |i, j| e[(i, j)].clone())
}

fn paterson_stockmeyer(x: &BigMatrix, coeffs: &[Float]) -> BigMatrix {
    let n = x.rows();
    let prec = x.prec();
    let deg = coeffs.len() - 1;
    let block = ((deg + 1) as f64).sqrt().ceil().max(1.0) as usize;

    let mut powers = vec![BigMatrix::identity(n, prec), x.clone()];
    while powers.len() <= block {
        let next = powers.last().expect("nonempty").matmul(x);
        powers.push(next);
    }

    let chunk = |start: usize| -> BigMatrix {
        let mut acc = BigMatrix::zeros(n, n, prec);
        for (j, c) in coeffs[start..].iter().take(block).enumerate() {
            acc = acc.add(&powers[j].scale(c));
        }
        acc
    };

    let blocks = deg / block;
    let mut r = chunk(blocks * block);
    for i in (0..blocks).rev() {
        r = r.matmul(&powers[block]).add(&chunk(i * block));
    }
    r
}

fn check_pair(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "oracle B",
            expected: (a.rows(), b.cols()),
            found: b.shape(),
        });
    }
    Ok(())
}

/// Gramian over [0, 1] from the exponential of [[A, BBᵀ], [0, −Aᵀ]].
pub fn gramian_mfd(a: &DenseMatrix, b: &DenseMatrix, prec: PrecisionSpec) -> Result<BigMatrix> {
    check_pair(a, b)?;
    let n = a.rows();
    let bits = prec.bits();
    let ab = BigMatrix::from_dense(a, bits);
    let bb = BigMatrix::from_dense(b, bits);
    let bbt = bb.matmul(&bb.transpose());

    let mut h = BigMatrix::zeros(2 * n, 2 * n, bits);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)].assign(&ab[(i, j)]);
            h[(i, n + j)].assign(&bbt[(i, j)]);
            h[(n + i, n + j)].assign(-&ab[(j, i)]);
        }
    }
    let m = expm_big(&h);
    let m12 = m.submatrix(0, n, n, n);
    let g = m12.matmul(&expm_big(&ab.transpose()));
    Ok(g.symmetrize())
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(nodes: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    assert!(nodes >= 1, "at least one node");
    let work = prec + 32;
    let mut xs = Vec::with_capacity(nodes);
    let mut ws = Vec::with_capacity(nodes);
    let tol = Float::with_val(work, Float::i_exp(1, -(prec as i32) - 8));
    for i in 0..nodes {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (nodes as f64 + 0.5)).cos();
        let mut x = Float::with_val(work, guess);
        let mut dp = Float::new(work);
        for _ in 0..200 {
            let (p, d) = legendre_with_derivative(nodes, &x);
            let dx = Float::with_val(work, &p / &d);
            x -= &dx;
            dp = d;
            if dx.abs() < tol {
                let (_, d) = legendre_with_derivative(nodes, &x);
                dp = d;
                break;
            }
        }
        let one_minus = Float::with_val(work, 1u32 - Float::with_val(work, x.square_ref()));
        let w = Float::with_val(work, 2u32) / (one_minus * Float::with_val(work, dp.square_ref()));
        // Map [−1, 1] → [0, 1].
        xs.push(Float::with_val(prec, (Float::with_val(work, 1u32 + &x)) / 2u32));
        ws.push(Float::with_val(prec, w / 2u32));
    }
    (xs, ws)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = x.clone();
    if n == 0 {
        return (p0, Float::new(prec));
    }
    for k in 2..=n {
        let kf = k as u32;
        let t = Float::with_val(prec, x * &p1) * (2 * kf - 1) - Float::with_val(prec, &p0 * (kf - 1));
        p0 = p1;
        p1 = t / kf;
    }
    let denom = Float::with_val(prec, x.square_ref()) - 1u32;
    let d = (Float::with_val(prec, x * &p1) - &p0) * n as u32 / denom;
    (p1, d)
}

/// Gramian over [0, 1] by Gauss–Legendre quadrature of e^{Aτ}BBᵀe^{Aᵀτ}.
pub fn gramian_quadrature(
    a: &DenseMatrix,
    b: &DenseMatrix,
    prec: PrecisionSpec,
    nodes: usize,
) -> Result<BigMatrix> {
    check_pair(a, b)?;
    if nodes < 1 {
        return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
    }
    let n = a.rows();
    let bits = prec.bits();
    let ab = BigMatrix::from_dense(a, bits);
    let bb = BigMatrix::from_dense(b, bits);
    let (ts, ws) = gauss_legendre(nodes, bits);
    let mut g = BigMatrix::zeros(n, n, bits);
    for (t, w) in ts.iter().zip(&ws) {
        let f = expm_big(&ab.scale(t)).matmul(&bb);
        let term = f.matmul(&f.transpose()).scale(w);
        g = g.add(&term);
    }
    Ok(g.symmetrize())
}

/// Lower shift matrix with B = e₁.
pub fn integrator_pair(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let a = DenseMatrix::from_fn(n, n, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
    Problem::new(a, DenseMatrix::unit_column(n, 0))
}

/// Exact Gramian and Cholesky factor of the integrator chain.
#[derive(Clone, Debug)]
pub struct IntegratorClosedForm {
    n: usize,
    gramian: Vec<Rational>,
    // Row k holds the shifted-Legendre coefficients of t^j/j!, before the
    // 1/√(2k+1) normalization.
    legendre: Vec<Rational>,
}

impl IntegratorClosedForm {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// G_{ij} as an exact rational, zero-based.
    pub fn gramian_entry(&self, i: usize, j: usize) -> &Rational {
        &self.gramian[i * self.n + j]
    }

    pub fn gramian(&self, prec: PrecisionSpec) -> BigMatrix {
        let bits = prec.bits();
        BigMatrix::from_fn(self.n, self.n, bits, |i, j| {
            Float::with_val(bits, self.gramian_entry(i, j))
        })
    }

    /// Upper triangular factor with UᵀU = G and positive diagonal.
    pub fn factor(&self, prec: PrecisionSpec) -> BigMatrix {
        let bits = prec.bits();
        let coeffs = BigMatrix::from_fn(self.n, self.n, bits, |k, j| {
            Float::with_val(bits, &self.legendre[k * self.n + j])
        });
        let mut u = BigMatrix::from_fn(self.n, self.n, bits, |k, j| {
            let w = Float::with_val(bits, 2 * k as u32 + 1).sqrt();
            Float::with_val(bits, &coeffs[(k, j)] / w)
        });
        u.normalize_row_signs();
        u
    }

    /// Checks Σ_k c_{ki}c_{kj}/(2k+1) = G_{ij} in rational arithmetic.
    pub fn verify_exact(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut s = Rational::new();
                for k in 0..n {
                    let prod = Rational::from(&self.legendre[k * n + i] * &self.legendre[k * n + j]);
                    s += prod / Rational::from(2 * k as u32 + 1);
                }
                if &s != self.gramian_entry(i, j) {
                    return false;
                }
            }
        }
        true
    }
}

fn factorial(k: usize) -> Integer {
    Integer::from(Integer::factorial(k as u32))
}

pub fn integrator_closed_form(n: usize) -> Result<IntegratorClosedForm> {
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut gramian = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let den = factorial(i) * factorial(j) * Integer::from(i + j + 1);
            gramian.push(Rational::from((Integer::from(1), den)));
        }
    }
    // t^j = Σ_{k≤j} (2k+1)·j!²/((j−k)!(j+k+1)!) P̃_k(t).
    let mut legendre = vec![Rational::new(); n * n];
    for k in 0..n {
        for j in k..n {
            let num = factorial(j) * Integer::from(2 * k + 1);
            let den = factorial(j - k) * factorial(j + k + 1);
            legendre[k * n + j] = Rational::from((num, den));
        }
    }
    Ok(IntegratorClosedForm { n, gramian, legendre })
}

/// Laguerre network: −λ on the diagonal, −2λ below, B = √(2λ)·1.
pub fn laguerre_pair(n: usize, lambda: f64) -> Result<Problem> {
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let a = DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => -lambda,
        std::cmp::Ordering::Greater => -2.0 * lambda,
        std::cmp::Ordering::Less => 0.0,
    });
    let b = DenseMatrix::from_fn(n, 1, |_, _| (2.0 * lambda).sqrt());
    Problem::new(a, b)
}

/// I − e^A e^{Aᵀ}, valid when A + Aᵀ + BBᵀ = 0.
pub fn laguerre_reference(a: &DenseMatrix, prec: PrecisionSpec) -> Result<BigMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let e = expm_reference(a, prec);
    let n = a.rows();
    Ok(BigMatrix::identity(n, prec.bits()).sub(&e.matmul(&e.transpose())))
}

/// [B | AB | … | A^{n−1}B].
pub fn controllability_matrix(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    check_pair(a, b)?;
    let mut block = b.clone();
    let mut out = b.clone();
    for _ in 1..a.rows() {
        block = a.matmul(&block)?;
        out = out.hstack(&block)?;
    }
    Ok(out)
}

/// Singular values in descending order, computed in extended precision.
pub fn singular_values(m: &DenseMatrix, prec: PrecisionSpec) -> Vec<Float> {
    BigMatrix::from_dense(m, prec.bits()).singular_values()
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &DenseMatrix, rel_tol: f64, prec: PrecisionSpec) -> usize {
    let sv = singular_values(m, prec);
    let Some(top) = sv.first() else { return 0 };
    if top.is_zero() {
        return 0;
    }
    let cut = Float::with_val(top.prec(), top * rel_tol);
    sv.iter().filter(|s| **s > cut).count()
}
