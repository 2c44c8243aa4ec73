//! Integer coefficient tables for the Legendre-expansion initial values and
//! their diagonal Padé numerator, plus evaluation at matrix arguments.
//!
//! For an order `q` the tables hold
//!
//! * `pade_num`: coefficients of Ñ_q in ascending degree; the denominator is
//!   D̃_q(z) = Ñ_q(−z),
//! * `leg_nums`: row `k` holds the coefficients of L̃_k in ascending degree,
//!   so that the k-th Legendre coefficient of exp(A·t) on [0, 1] is
//!   C_k = D̃_q(A)⁻¹ L̃_k(A),
//! * `sqr_norms`: 2k+1, the reciprocal squared norms of the shifted Legendre
//!   polynomials.
//!
//! Evaluation splits every polynomial into its even and odd parts and works
//! with the even powers I, A², A⁴, ... only, mirroring the conventional Padé
//! evaluation for the matrix exponential.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::matrix::{lu_factor, DenseMatrix};

/// Orders with transcribed tables, in ascending order.
pub const SUPPORTED_ORDERS: [usize; 5] = [3, 5, 7, 9, 13];

const PADE_NUM_3: [i64; 4] = [120, 60, 12, 1];
const LEG_NUMS_3: [[i64; 4]; 4] = [
    [120, 0, 2, 0],
    [0, 60, 0, 0],
    [0, 0, 10, 0],
    [0, 0, 0, 1],
];

const PADE_NUM_5: [i64; 6] = [30240, 15120, 3360, 420, 30, 1];
const LEG_NUMS_5: [[i64; 6]; 6] = [
    [30240, 0, 840, 0, 2, 0],
    [0, 15120, 0, 168, 0, 0],
    [0, 0, 2520, 0, 10, 0],
    [0, 0, 0, 252, 0, 0],
    [0, 0, 0, 0, 18, 0],
    [0, 0, 0, 0, 0, 1],
];

const PADE_NUM_7: [i64; 8] = [17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1];
const LEG_NUMS_7: [[i64; 8]; 8] = [
    [17297280, 0, 554400, 0, 3024, 0, 2, 0],
    [0, 8648640, 0, 133056, 0, 324, 0, 0],
    [0, 0, 1441440, 0, 11880, 0, 10, 0],
    [0, 0, 0, 144144, 0, 616, 0, 0],
    [0, 0, 0, 0, 10296, 0, 18, 0],
    [0, 0, 0, 0, 0, 572, 0, 0],
    [0, 0, 0, 0, 0, 0, 26, 0],
    [0, 0, 0, 0, 0, 0, 0, 1],
];

const PADE_NUM_9: [i64; 10] = [
    17643225600,
    8821612800,
    2075673600,
    302702400,
    30270240,
    2162160,
    110880,
    3960,
    90,
    1,
];
const LEG_NUMS_9: [[i64; 10]; 10] = [
    [17643225600, 0, 605404800, 0, 4324320, 0, 7920, 0, 2, 0],
    [0, 8821612800, 0, 155675520, 0, 617760, 0, 528, 0, 0],
    [0, 0, 1470268800, 0, 15444000, 0, 34320, 0, 10, 0],
    [0, 0, 0, 147026880, 0, 960960, 0, 1092, 0, 0],
    [0, 0, 0, 0, 10501920, 0, 42120, 0, 18, 0],
    [0, 0, 0, 0, 0, 583440, 0, 1320, 0, 0],
    [0, 0, 0, 0, 0, 0, 26520, 0, 26, 0],
    [0, 0, 0, 0, 0, 0, 0, 1020, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 34, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
];

const PADE_NUM_13: [i64; 14] = [
    64764752532480000,
    32382376266240000,
    7771770303897600,
    1187353796428800,
    129060195264000,
    10559470521600,
    670442572800,
    33522128640,
    1323241920,
    40840800,
    960960,
    16380,
    182,
    1,
];
#[rustfmt::skip]
const LEG_NUMS_13: [[i64; 14]; 14] = [
    [64764752532480000, 0, 2374707592857600, 0, 21118941043200, 0, 67044257280, 0, 81681600, 0, 32760, 0, 2, 0],
    [0, 32382376266240000, 0, 647647525324800, 0, 3620389893120, 0, 7449361920, 0, 5569200, 0, 1080, 0, 0],
    [0, 0, 5397062711040000, 0, 69390806284800, 0, 260727667200, 0, 352716000, 0, 153000, 0, 10, 0],
    [0, 0, 0, 539706271104000, 0, 4797389076480, 0, 12443820480, 0, 10852800, 0, 2380, 0, 0],
    [0, 0, 0, 0, 38550447936000, 0, 245321032320, 0, 439538400, 0, 232560, 0, 18, 0],
    [0, 0, 0, 0, 0, 2141691552000, 0, 9884730240, 0, 11938080, 0, 3344, 0, 0],
    [0, 0, 0, 0, 0, 0, 97349616000, 0, 324498720, 0, 248976, 0, 26, 0],
    [0, 0, 0, 0, 0, 0, 0, 3744216000, 0, 8809920, 0, 3780, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 124807200, 0, 197064, 0, 34, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 3670800, 0, 3496, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 96600, 0, 42, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2300, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 50, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
];

/// Coefficient tables for one order q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSet {
    q: usize,
    pade_num: Vec<i64>,
    leg_nums: Vec<Vec<i64>>,
    sqr_norms: Vec<i64>,
}

fn rows_of<const N: usize>(t: &[[i64; N]; N]) -> Vec<Vec<i64>> {
    t.iter().map(|r| r.to_vec()).collect()
}

/// Loads the transcribed tables for `q ∈ {3, 5, 7, 9, 13}`.
pub fn load(q: usize) -> Result<CoefficientSet> {
    let (pade_num, leg_nums) = match q {
        3 => (PADE_NUM_3.to_vec(), rows_of(&LEG_NUMS_3)),
        5 => (PADE_NUM_5.to_vec(), rows_of(&LEG_NUMS_5)),
        7 => (PADE_NUM_7.to_vec(), rows_of(&LEG_NUMS_7)),
        9 => (PADE_NUM_9.to_vec(), rows_of(&LEG_NUMS_9)),
        13 => (PADE_NUM_13.to_vec(), rows_of(&LEG_NUMS_13)),
        _ => return Err(Error::UnsupportedOrder(q)),
    };
    let sqr_norms = (0..=q as i64).map(|k| 2 * k + 1).collect();
    Ok(CoefficientSet {
        q,
        pade_num,
        leg_nums,
        sqr_norms,
    })
}

impl CoefficientSet {
    pub fn order(&self) -> usize {
        self.q
    }

    pub fn pade_num(&self) -> &[i64] {
        &self.pade_num
    }

    /// Coefficients of D̃_q(z) = Ñ_q(−z).
    pub fn pade_den(&self) -> Vec<i64> {
        self.pade_num
            .iter()
            .enumerate()
            .map(|(j, &c)| if j % 2 == 0 { c } else { -c })
            .collect()
    }

    pub fn leg_nums(&self) -> &[Vec<i64>] {
        &self.leg_nums
    }

    pub fn sqr_norms(&self) -> &[i64] {
        &self.sqr_norms
    }

    /// Number of even powers beyond the identity that evaluation needs:
    /// A², …, A^{2p}.
    pub fn even_power_count(&self) -> usize {
        if self.q == 13 {
            3
        } else {
            self.q / 2
        }
    }

    /// Checks the tables against the exact block tridiagonal system.
    pub fn verify(&self) -> bool {
        verify_set(self)
    }
}

/// [I, A², A⁴, …, A^{2p}] with p given by [`CoefficientSet::even_power_count`].
pub fn even_powers(coeffs: &CoefficientSet, a: &DenseMatrix) -> Result<Vec<DenseMatrix>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let mut powers = vec![DenseMatrix::identity(a.rows())];
    let p = coeffs.even_power_count();
    if p > 0 {
        powers.push(a.matmul(a)?);
    }
    for j in 2..=p {
        let next = powers[j - 1].matmul(&powers[1])?;
        powers.push(next);
    }
    Ok(powers)
}

/// Splits ascending coefficients into the even-indexed and odd-indexed
/// sequences, i.e. polynomials in y = z².
fn split_parity(coeffs: &[i64]) -> (Vec<f64>, Vec<f64>) {
    let even = coeffs.iter().step_by(2).map(|&c| c as f64).collect();
    let odd = coeffs.iter().skip(1).step_by(2).map(|&c| c as f64).collect();
    (even, odd)
}

/// Evaluates Σ_j c_j·A^{2j}·X given `terms[j] = A^{2j}·X` for j ≤ p and
/// `top = A^{2p}`. Degrees up to 2p are handled by one extra product with
/// `top`.
fn even_poly_apply(c: &[f64], terms: &[DenseMatrix], top: &DenseMatrix) -> Result<DenseMatrix> {
    let p = terms.len() - 1;
    let degree = c.iter().rposition(|&x| x != 0.0).unwrap_or(0);
    assert!(
        degree <= 2 * p,
        "polynomial degree {degree} exceeds the supplied even powers"
    );
    let mut low = DenseMatrix::zeros(terms[0].rows(), terms[0].cols());
    for (j, &cj) in c.iter().enumerate().take(p + 1) {
        if cj != 0.0 {
            low.axpy(cj, &terms[j]);
        }
    }
    if degree > p {
        let mut high = DenseMatrix::zeros(terms[0].rows(), terms[0].cols());
        for j in 1..=degree - p {
            if c[p + j] != 0.0 {
                high.axpy(c[p + j], &terms[j]);
            }
        }
        low.axpy(1.0, &top.matmul(&high)?);
    }
    Ok(low)
}

fn check_even_powers(coeffs: &CoefficientSet, a: &DenseMatrix, even: &[DenseMatrix]) -> Result<()> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let want = coeffs.even_power_count() + 1;
    if even.len() != want {
        return Err(Error::DimensionMismatch {
            context: "even powers",
            expected: (want, n),
            found: (even.len(), n),
        });
    }
    if let Some(bad) = even.iter().find(|m| m.shape() != (n, n)) {
        return Err(Error::DimensionMismatch {
            context: "even powers",
            expected: (n, n),
            found: bad.shape(),
        });
    }
    Ok(())
}

/// Returns (Ñ_q(A), D̃_q(A)) assembled as V ± A·W from the even powers.
pub fn eval_pade_pair(
    coeffs: &CoefficientSet,
    a: &DenseMatrix,
    even: &[DenseMatrix],
) -> Result<(DenseMatrix, DenseMatrix)> {
    check_even_powers(coeffs, a, even)?;
    let top = even.last().expect("at least the identity");
    let (c_even, c_odd) = split_parity(&coeffs.pade_num);
    let v = even_poly_apply(&c_even, even, top)?;
    let w = a.matmul(&even_poly_apply(&c_odd, even, top)?)?;
    Ok((v.add(&w)?, v.sub(&w)?))
}

/// Block row [L̃_0(A)B, L̃_1(A)B/√3, …, L̃_q(A)B/√(2q+1)], n × (q+1)m.
pub(crate) fn legendre_block_row(
    coeffs: &CoefficientSet,
    a: &DenseMatrix,
    even: &[DenseMatrix],
    b: &DenseMatrix,
) -> Result<DenseMatrix> {
    check_even_powers(coeffs, a, even)?;
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "legendre stack",
            expected: (a.rows(), b.cols()),
            found: b.shape(),
        });
    }
    let (n, m) = b.shape();
    let top = even.last().expect("at least the identity");
    let mut terms = vec![b.clone()];
    for power in &even[1..] {
        terms.push(power.matmul(b)?);
    }

    let mut out = DenseMatrix::zeros(n, (coeffs.q + 1) * m);
    for (k, row) in coeffs.leg_nums.iter().enumerate() {
        let (c_even, c_odd) = split_parity(row);
        let block = if k % 2 == 0 {
            even_poly_apply(&c_even, &terms, top)?
        } else {
            a.matmul(&even_poly_apply(&c_odd, &terms, top)?)?
        };
        let weight = 1.0 / (coeffs.sqr_norms[k] as f64).sqrt();
        for i in 0..n {
            for j in 0..m {
                out[(i, k * m + j)] = weight * block[(i, j)];
            }
        }
    }
    Ok(out)
}

/// The stacked matrix whose row block k is (L̃_k(A)B)ᵀ/√(2k+1).
pub fn eval_legendre_stack(
    coeffs: &CoefficientSet,
    a: &DenseMatrix,
    even: &[DenseMatrix],
    b: &DenseMatrix,
) -> Result<DenseMatrix> {
    Ok(legendre_block_row(coeffs, a, even, b)?.transpose())
}

/// Scalar ratio Ñ_q(x)/D̃_q(x), evaluated by the same matrix code path.
pub fn pade_ratio_scalar(coeffs: &CoefficientSet, x: f64) -> Result<f64> {
    let a = DenseMatrix::from_rows(&[[x]]);
    let even = even_powers(coeffs, &a)?;
    let (num, den) = eval_pade_pair(coeffs, &a, &even)?;
    Ok(lu_factor(&den)?.solve(&num)?[(0, 0)])
}

// ---------------------------------------------------------------------------
// Exact verification.

fn poly_trim(mut p: Vec<Integer>) -> Vec<Integer> {
    while p.len() > 1 && p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    p
}

fn poly_add_shifted(acc: &mut Vec<Integer>, p: &[Integer], shift: usize, factor: i64) {
    if acc.len() < p.len() + shift {
        acc.resize(p.len() + shift, Integer::new());
    }
    for (j, c) in p.iter().enumerate() {
        acc[j + shift] += Integer::from(c * factor);
    }
}

/// Solves the Petrov–Galerkin block tridiagonal system for a scalar
/// indeterminate z. Returns the numerators (2k+1)·z^k·p_k(z) of
/// C_k = num_k/Δ together with the common denominator Δ.
///
/// The system reads, with C̃_k = C_k/(2k+1),
///
/// ```text
/// Σ_k (−1)^k (2k+1) C̃_k            = 1
/// −z C̃_{k−1} + (4k+2) C̃_k + z C̃_{k+1} = 0,   1 ≤ k ≤ q−2
/// −z C̃_{k−1} + (4k+2) C̃_k             = 0,   k ∈ {q−1, q}
/// ```
///
/// Back substitution from C̃_q = K z^q gives C̃_k = K z^k p_k(z) with
/// integer polynomials p_q = 1 and
/// p_{k−1} = (4k+2) p_k + [k ≤ q−2] z² p_{k+1}.
fn solve_tridiagonal_system(q: usize) -> (Vec<Vec<Integer>>, Vec<Integer>) {
    let mut p: Vec<Vec<Integer>> = vec![Vec::new(); q + 1];
    p[q] = vec![Integer::from(1)];
    for k in (1..=q).rev() {
        let mut next = Vec::new();
        poly_add_shifted(&mut next, &p[k].clone(), 0, 4 * k as i64 + 2);
        if k + 2 <= q {
            poly_add_shifted(&mut next, &p[k + 1].clone(), 2, 1);
        }
        p[k - 1] = next;
    }
    let mut nums = Vec::with_capacity(q + 1);
    let mut delta = Vec::new();
    for (k, pk) in p.iter().enumerate() {
        let w = 2 * k as i64 + 1;
        let mut num = Vec::new();
        poly_add_shifted(&mut num, pk, k, w);
        poly_add_shifted(&mut delta, pk, k, if k % 2 == 0 { w } else { -w });
        nums.push(poly_trim(num));
    }
    (nums, poly_trim(delta))
}

/// Exact diagonal Padé numerator coefficients of e^z, normalized so the
/// constant term is one: c_j = (2q−j)!·q! / ((2q)!·j!·(q−j)!).
pub fn pade_numerator_exact(q: usize) -> Vec<Rational> {
    let fact = |k: usize| Integer::from(Integer::factorial(k as u32));
    (0..=q)
        .map(|j| {
            Rational::from((
                fact(2 * q - j) * fact(q),
                fact(2 * q) * fact(j) * fact(q - j),
            ))
        })
        .collect()
}

fn verify_set(set: &CoefficientSet) -> bool {
    let q = set.q;
    if set.pade_num.len() != q + 1
        || set.leg_nums.len() != q + 1
        || set.leg_nums.iter().any(|r| r.len() != q + 1)
    {
        return false;
    }
    if set
        .sqr_norms
        .iter()
        .enumerate()
        .any(|(k, &s)| s != 2 * k as i64 + 1)
    {
        return false;
    }

    let (nums, delta) = solve_tridiagonal_system(q);
    let den = set.pade_den();
    // Rescale the exact solution to the tables' integer normalization.
    let scale = Rational::from((delta[0].clone(), Integer::from(den[0])));
    let coeff = |p: &[Integer], j: usize| -> Rational {
        p.get(j).map_or(Rational::new(), |c| Rational::from(c.clone()) / &scale)
    };

    let den_ok = delta.len() <= q + 1 && (0..=q).all(|j| coeff(&delta, j) == den[j]);
    let legs_ok = nums.iter().zip(&set.leg_nums).all(|(num, row)| {
        num.len() <= q + 1 && (0..=q).all(|j| coeff(num, j) == row[j])
    });
    let sums_ok = (0..=q).all(|j| {
        set.leg_nums.iter().map(|r| Integer::from(r[j])).sum::<Integer>() == set.pade_num[j]
    });
    let exact = pade_numerator_exact(q);
    let pade_ok = (0..=q).all(|j| {
        set.pade_num[j] == exact[j].clone() * Integer::from(set.pade_num[0])
    });
    den_ok && legs_ok && sums_ok && pade_ok
}

/// Verifies the transcribed tables for order `q` in exact arithmetic.
pub fn verify_tables(q: usize) -> bool {
    load(q).map(|s| s.verify()).unwrap_or(false)
}
