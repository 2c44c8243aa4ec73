//! Scaling and squaring for the pair (e^A, U) with UᵀU the controllability
//! Gramian G(A, B) = ∫₀¹ e^{Aτ} B Bᵀ e^{Aᵀτ} dτ.
//!
//! The pipeline is
//!
//! 1. compress B to at most n columns,
//! 2. pick a Padé order q and a number of doublings s so that ‖A‖₁/2^s ≤ η_q,
//! 3. build Φ₀ = r_q(A_s) and the initial factor U₀ from the Legendre
//!    coefficients of exp(A_s·t), with A_s = A/2^s and B_s = B/√(2^s),
//! 4. apply the doubling Φ ← Φ², U ← R([U·Φᵀ; U]) s times.

use crate::bounds::eta;
use crate::coefficients::{self, eval_pade_pair, even_powers, legendre_block_row, CoefficientSet};
use crate::error::{Error, Result};
use crate::matrix::{lu_factor, one_norm, qr_upper, DenseMatrix};

/// Orders tried before falling back to q = 13, smallest first.
const CANDIDATE_ORDERS: [usize; 4] = [3, 5, 7, 9];
const FALLBACK_ORDER: usize = 13;

/// Input pair (A, B) over the horizon [0, t].
#[derive(Clone, Debug)]
pub struct Problem {
    a: DenseMatrix,
    b: DenseMatrix,
    horizon: f64,
}

impl Problem {
    /// Unit-horizon problem.
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        Self::with_horizon(a, b, 1.0)
    }

    pub fn with_horizon(a: DenseMatrix, b: DenseMatrix, horizon: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if b.rows() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "problem B",
                expected: (a.rows(), b.cols()),
                found: b.shape(),
            });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidHorizon(horizon));
        }
        for m in [&a, &b] {
            if let Some(pos) = m.as_slice().iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    row: pos / m.cols(),
                    col: pos % m.cols(),
                });
            }
        }
        Ok(Problem { a, b, horizon })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }
}

/// Padé order and number of doublings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderScaling {
    pub q: usize,
    pub s: u32,
}

#[derive(Clone, Debug)]
pub struct ExpGramResult {
    /// Approximation of e^{tA}.
    pub phi: DenseMatrix,
    /// n×n upper triangular factor with nonnegative diagonal; uᵀu approximates
    /// the Gramian.
    pub u: DenseMatrix,
    pub order_scaling: OrderScaling,
}

impl ExpGramResult {
    /// The Gramian uᵀu.
    pub fn gramian(&self) -> DenseMatrix {
        self.u
            .transpose()
            .matmul(&self.u)
            .expect("u is square")
    }
}

/// Replaces B by an n×n factor with the same BBᵀ when it has more columns
/// than rows.
pub fn preprocess_b(b: &DenseMatrix) -> DenseMatrix {
    if b.cols() <= b.rows() {
        return b.clone();
    }
    // Bᵀ = Q·R with R n×n, so B Bᵀ = Rᵀ R.
    qr_upper(&b.transpose()).transpose()
}

/// Chooses (q, s) for ‖tA‖₁ = `a_norm` and state dimension `n`.
pub fn select_order_scaling(a_norm: f64, n: usize) -> Result<OrderScaling> {
    if !(a_norm.is_finite() && a_norm >= 0.0) {
        return Err(Error::InvalidNorm(a_norm));
    }
    for q in CANDIDATE_ORDERS {
        if a_norm <= eta(q) && n <= q + 1 {
            return Ok(OrderScaling { q, s: 0 });
        }
    }
    let q = FALLBACK_ORDER;
    let eta_q = eta(q);
    let ratio = (a_norm / eta_q).max(n.saturating_sub(1) as f64 / q as f64);
    let mut s = if ratio <= 1.0 {
        0
    } else {
        ratio.log2().ceil() as u32
    };
    // Guard against log2 rounding just below an integer.
    while a_norm / 2f64.powi(s as i32) > eta_q {
        s += 1;
    }
    Ok(OrderScaling { q, s })
}

/// Initial approximations Φ₀ = D̃_q(A_s)⁻¹Ñ_q(A_s) and U₀ = R(S·D̃_q(A_s)⁻ᵀ),
/// where S stacks (L̃_k(A_s)B_s)ᵀ/√(2k+1). U₀ has min((q+1)m, n) rows.
pub fn initial_approx(
    a_s: &DenseMatrix,
    b_s: &DenseMatrix,
    coeffs: &CoefficientSet,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let even = even_powers(coeffs, a_s)?;
    let (num, den) = eval_pade_pair(coeffs, a_s, &even)?;
    let lu = lu_factor(&den)?;
    let phi0 = lu.solve(&num)?;
    let block_row = legendre_block_row(coeffs, a_s, &even, b_s)?;
    let u0 = qr_upper(&lu.solve(&block_row)?.transpose());
    Ok((phi0, u0))
}

/// One doubling step: Φ₂ = Φ², U₂ = R([U·Φᵀ; U]).
pub fn double_once(phi: &DenseMatrix, u: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    if !phi.is_square() {
        return Err(Error::NotSquare {
            rows: phi.rows(),
            cols: phi.cols(),
        });
    }
    if u.cols() != phi.rows() {
        return Err(Error::DimensionMismatch {
            context: "double_once",
            expected: (u.rows(), phi.rows()),
            found: u.shape(),
        });
    }
    let phi2 = phi.matmul(phi)?;
    let stacked = u.matmul(&phi.transpose())?.vstack(u)?;
    Ok((phi2, qr_upper(&stacked)))
}

/// Computes e^{tA} and an upper triangular U with UᵀU ≈ G(tA, √t·B).
pub fn exp_and_gram(problem: &Problem) -> Result<ExpGramResult> {
    let t = problem.horizon;
    let n = problem.dim();
    let a = problem.a.scale(t);
    let b = preprocess_b(&problem.b.scale(t.sqrt()));

    let order_scaling = select_order_scaling(one_norm(&a), n)?;
    let OrderScaling { q, s } = order_scaling;
    let coeffs = coefficients::load(q)?;

    let a_s = a.scale(0.5f64.powi(s as i32));
    let b_s = b.scale(0.5f64.powi(s as i32).sqrt());
    let (mut phi, mut u) = initial_approx(&a_s, &b_s, &coeffs)?;
    for _ in 0..s {
        (phi, u) = double_once(&phi, &u)?;
    }
    if u.rows() != n {
        u = u.resize_rows(n);
    }
    if !phi.is_finite() || !u.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(ExpGramResult {
        phi,
        u,
        order_scaling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn preprocess_examples() {
        let b = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        assert_eq!(preprocess_b(&b), b);

        let bt = preprocess_b(&DenseMatrix::from_rows(&[[1.0, 1.0]]));
        assert_eq!(bt.shape(), (1, 1));
        assert!(close(bt[(0, 0)], 2f64.sqrt(), 1e-15));

        assert_eq!(preprocess_b(&DenseMatrix::zeros(1, 3)), DenseMatrix::zeros(1, 1));
    }

    #[test]
    fn preprocess_preserves_outer_product() {
        let b = DenseMatrix::from_fn(3, 7, |i, j| ((i * 7 + j) as f64 * 0.37).sin());
        let bt = preprocess_b(&b);
        assert_eq!(bt.shape(), (3, 3));
        let lhs = b.matmul(&b.transpose()).unwrap();
        let rhs = bt.matmul(&bt.transpose()).unwrap();
        assert!(one_norm(&lhs.sub(&rhs).unwrap()) < 1e-14 * one_norm(&lhs));
    }

    #[test]
    fn order_selection_examples() {
        assert_eq!(select_order_scaling(0.01, 4).unwrap(), OrderScaling { q: 5, s: 0 });
        assert_eq!(select_order_scaling(10.0, 20).unwrap(), OrderScaling { q: 13, s: 3 });
        assert_eq!(select_order_scaling(0.0, 10).unwrap(), OrderScaling { q: 9, s: 0 });
        assert_eq!(select_order_scaling(0.0, 1).unwrap(), OrderScaling { q: 3, s: 0 });
        // Rank term binds: 29/13 > 1 while ‖A‖ ≤ η₁₃.
        assert_eq!(select_order_scaling(1.0, 30).unwrap(), OrderScaling { q: 13, s: 2 });
        // Exactly at a threshold.
        assert_eq!(select_order_scaling(eta(13) * 4.0, 3).unwrap(), OrderScaling { q: 13, s: 2 });
        assert!(select_order_scaling(f64::NAN, 3).is_err());
        assert!(select_order_scaling(f64::INFINITY, 3).is_err());
        assert!(select_order_scaling(-1.0, 3).is_err());
    }

    #[test]
    fn initial_approx_zero_matrix() {
        let c = coefficients::load(3).unwrap();
        let (phi, u) =
            initial_approx(&DenseMatrix::zeros(2, 2), &DenseMatrix::unit_column(2, 0), &c).unwrap();
        assert_eq!(phi, DenseMatrix::identity(2));
        assert_eq!(u, DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]));

        let (phi, u) = initial_approx(
            &DenseMatrix::from_rows(&[[0.0]]),
            &DenseMatrix::from_rows(&[[2.0]]),
            &c,
        )
        .unwrap();
        assert_eq!(phi, DenseMatrix::from_rows(&[[1.0]]));
        assert_eq!(u, DenseMatrix::from_rows(&[[2.0]]));
    }

    #[test]
    fn initial_approx_scalar_gramian() {
        let c = coefficients::load(3).unwrap();
        let a = 0.01;
        let (_, u) = initial_approx(
            &DenseMatrix::from_rows(&[[a]]),
            &DenseMatrix::from_rows(&[[1.0]]),
            &c,
        )
        .unwrap();
        // (e^{2a} − 1)/(2a) via expm1 to avoid cancellation.
        let exact = (2.0 * a).exp_m1() / (2.0 * a);
        let rel = (u[(0, 0)].powi(2) - exact).abs() / exact;
        assert!(rel <= 2f64.powi(-50), "rel={rel}");
    }

    #[test]
    fn double_once_examples() {
        let one = DenseMatrix::from_rows(&[[1.0]]);
        let (phi2, u2) = double_once(&one, &one).unwrap();
        assert_eq!(phi2, one);
        assert!(close(u2[(0, 0)], 2f64.sqrt(), 1e-15));

        let phi = DenseMatrix::from_rows(&[[1.0, 0.5], [0.0, 2.0]]);
        let (phi2, u2) = double_once(&phi, &DenseMatrix::zeros(1, 2)).unwrap();
        assert_eq!(phi2, phi.matmul(&phi).unwrap());
        assert_eq!(u2, DenseMatrix::zeros(2, 2));

        assert!(double_once(&phi, &DenseMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn double_once_scalar_closed_form() {
        // Half interval: Φ = e^{a/2}, G = (e^{a} − 1)/(2a)·... for G(a/2, 1/√2).
        let a: f64 = 1.0;
        let gram = |x: f64, b2: f64| b2 * (2.0 * x).exp_m1() / (2.0 * x);
        let phi = DenseMatrix::from_rows(&[[(a / 2.0).exp()]]);
        let u = DenseMatrix::from_rows(&[[gram(a / 2.0, 0.5).sqrt()]]);
        let (_, u2) = double_once(&phi, &u).unwrap();
        let full = gram(a, 1.0).sqrt();
        assert!((u2[(0, 0)] - full).abs() <= 1e-15 * full);
    }

    #[test]
    fn exp_and_gram_examples() {
        let r = exp_and_gram(&Problem::new(DenseMatrix::zeros(2, 2), DenseMatrix::identity(2)).unwrap())
            .unwrap();
        assert_eq!(r.phi, DenseMatrix::identity(2));
        assert_eq!(r.u, DenseMatrix::identity(2));

        let r = exp_and_gram(
            &Problem::new(DenseMatrix::from_rows(&[[1.0]]), DenseMatrix::from_rows(&[[1.0]])).unwrap(),
        )
        .unwrap();
        assert!(close(r.phi[(0, 0)], std::f64::consts::E, 4.0 * f64::EPSILON));
        assert!(close(r.u[(0, 0)].powi(2), 3.194528049465325, 8.0 * f64::EPSILON));

        let a = DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]);
        let r = exp_and_gram(&Problem::new(a, DenseMatrix::unit_column(2, 0)).unwrap()).unwrap();
        let expected = DenseMatrix::from_rows(&[[1.0, 0.5], [0.0, 1.0 / 12f64.sqrt()]]);
        assert!(one_norm(&r.u.sub(&expected).unwrap()) < 1e-15);
        assert!(r.u.is_upper_triangular());
    }

    #[test]
    fn exp_and_gram_rejects_bad_problems() {
        let a = DenseMatrix::identity(2);
        let b = DenseMatrix::identity(2);
        assert_eq!(
            Problem::with_horizon(a.clone(), b.clone(), -1.0).unwrap_err(),
            Error::InvalidHorizon(-1.0)
        );
        assert!(Problem::with_horizon(a.clone(), b, f64::NAN).is_err());
        assert!(Problem::new(a.clone(), DenseMatrix::identity(3)).is_err());
        assert!(Problem::new(DenseMatrix::zeros(2, 3), DenseMatrix::identity(2)).is_err());
    }

    #[test]
    fn wide_b_is_compressed() {
        let a = DenseMatrix::from_rows(&[[-0.5, 0.2], [0.1, -0.3]]);
        let b = DenseMatrix::from_fn(2, 5, |i, j| (i + 2 * j) as f64 * 0.1 - 0.3);
        let r = exp_and_gram(&Problem::new(a.clone(), b.clone()).unwrap()).unwrap();
        let r2 = exp_and_gram(&Problem::new(a, preprocess_b(&b)).unwrap()).unwrap();
        let g = r.gramian();
        assert!(one_norm(&g.sub(&r2.gramian()).unwrap()) < 1e-15 * one_norm(&g));
        assert_eq!(r.u.shape(), (2, 2));
    }
}
