//! Norm thresholds for the scaling parameter and the tool that re-derives
//! the Gramian thresholds η_q.
//!
//! For an order q the backward error of the initial Legendre approximation
//! is controlled by V_t(A_s) = ∫₀ᵗ ψ(τ, A_s) P_q(τ) dτ with
//!
//! ```text
//! ψ(t, η) = q!/(2q)! · (−η)^{q+1} · D_q(η)⁻¹ · e^{−ηt} = Σ_{n>q} ψ_n(t) ηⁿ,
//! ```
//!
//! P_q the shifted Legendre polynomial on [0, 1] and D_q the normalized Padé
//! denominator. Bounding term by term gives
//! β(η) = sup_t Σ_n |∫₀ᵗ ψ_n P_q| ηⁿ, which is maximized over a grid built
//! from the zeros of P_q. η_q is the largest η with β̂(η) ≤ 2⁻⁵³.
//!
//! Everything here runs in arbitrary precision and is far too slow for the
//! hot path; the runtime uses the tabulated values in [`BOUND_TABLE`].

use rug::ops::Pow;
use rug::{Float, Integer};

use crate::coefficients::pade_numerator_exact;
use crate::error::{Error, Result};

/// One row of the threshold table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub q: usize,
    /// Largest ‖A_s‖ with exponential backward error ≤ 2⁻⁵³.
    pub theta: f64,
    /// Largest ‖A_s‖ with Gramian backward error ≤ 2⁻⁵³.
    pub eta: f64,
    /// Smallest modulus of a zero of the Padé denominator.
    pub nu: f64,
    /// Bound on ‖D_q(A)⁻¹‖ for ‖A‖ ≤ θ_q.
    pub xi: f64,
}

/// Thresholds for q = 1..=21, two significant digits, η_q rounded down.
/// The η column can be regenerated with `expgram derive-eta`.
#[derive(Clone, Copy, Debug)]
pub struct BoundTable {
    rows: [BoundRow; 21],
}

macro_rules! rows {
    ($(($q:expr, $t:expr, $e:expr, $n:expr, $x:expr)),* $(,)?) => {
        [$(BoundRow { q: $q, theta: $t, eta: $e, nu: $n, xi: $x }),*]
    };
}

pub const BOUND_TABLE: BoundTable = BoundTable {
    rows: rows![
        (1, 3.7e-8, 1.8e-8, 2.0e0, 1.0e0),
        (2, 5.3e-4, 2.4e-5, 3.5e0, 1.0e0),
        (3, 1.5e-2, 6.7e-4, 4.6e0, 1.0e0),
        (4, 8.5e-2, 5.3e-3, 6.0e0, 1.0e0),
        (5, 2.5e-1, 2.1e-2, 7.3e0, 1.1e0),
        (6, 5.4e-1, 6.0e-2, 8.7e0, 1.3e0),
        (7, 9.5e-1, 1.3e-1, 9.9e0, 1.6e0),
        (8, 1.5e0, 2.4e-1, 1.1e1, 2.1e0),
        (9, 2.1e0, 4.1e-1, 1.3e1, 3.0e0),
        (10, 2.8e0, 6.2e-1, 1.4e1, 4.3e0),
        (11, 3.6e0, 8.9e-1, 1.5e1, 6.6e0),
        (12, 4.5e0, 1.2e0, 1.7e1, 1.0e1),
        (13, 5.4e0, 1.5e0, 1.8e1, 1.7e1),
        (14, 6.3e0, 1.9e0, 1.9e1, 3.0e1),
        (15, 7.3e0, 2.4e0, 2.1e1, 5.3e1),
        (16, 8.4e0, 2.9e0, 2.2e1, 9.8e1),
        (17, 9.4e0, 3.4e0, 2.3e1, 1.9e2),
        (18, 1.1e1, 4.0e0, 2.5e1, 3.8e2),
        (19, 1.2e1, 4.6e0, 2.6e1, 8.3e2),
        (20, 1.3e1, 5.2e0, 2.7e1, 2.0e3),
        (21, 1.4e1, 5.8e0, 2.8e1, 6.2e3),
    ],
};

impl BoundTable {
    pub fn get(&self, q: usize) -> Option<&BoundRow> {
        self.rows.get(q.wrapping_sub(1))
    }

    pub fn rows(&self) -> &[BoundRow] {
        &self.rows
    }
}

/// Tabulated η_q. Panics for q outside 1..=21.
pub fn eta(q: usize) -> f64 {
    BOUND_TABLE.get(q).expect("order outside 1..=21").eta
}

/// Default truncation order of the ψ series.
pub const DEFAULT_SERIES_ORDER: usize = 150;
/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 120;
/// Default points per grid interval.
pub const DEFAULT_POINTS_PER_INTERVAL: usize = 2;

const MAX_ORDER: usize = 21;

pub(crate) fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

fn check_order(q: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&q) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(q))
    }
}

/// Coefficients of the shifted Legendre polynomial P_q(2t − 1), ascending:
/// (−1)^{q+k} C(q, k) C(q+k, k).
pub fn shifted_legendre(q: usize) -> Vec<Integer> {
    (0..=q)
        .map(|k| {
            let c = Integer::from(Integer::binomial_u(q as u32, k as u32))
                * Integer::from(Integer::binomial_u((q + k) as u32, k as u32));
            if (q + k) % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect()
}

fn horner(coeffs: &[Float], t: &Float) -> Float {
    let mut acc = Float::with_val(t.prec(), 0);
    for c in coeffs.iter().rev() {
        acc *= t;
        acc += c;
    }
    acc
}

/// Power series of ψ in η, truncated at order `max_order`, with each
/// coefficient ψ_n(t) stored as a polynomial in t.
#[derive(Clone, Debug)]
pub struct PsiSeries {
    q: usize,
    max_order: usize,
    prec: u32,
    /// `coeff_polys[n − (q+1)]` holds ψ_n, ascending in t.
    coeff_polys: Vec<Vec<Float>>,
}

impl PsiSeries {
    pub fn order(&self) -> usize {
        self.q
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// ψ_n as a polynomial in t; empty for n ≤ q, where ψ_n ≡ 0.
    pub fn coefficient(&self, n: usize) -> &[Float] {
        if n <= self.q || n > self.max_order {
            &[]
        } else {
            &self.coeff_polys[n - self.q - 1]
        }
    }
}

/// Coefficients of 1/D_q(η) up to η^`len−1`, with D_q(η) = N_q(−η) and
/// N_q normalized to N_q(0) = 1.
pub fn inverse_denominator_series(q: usize, len: usize, prec: u32) -> Vec<Float> {
    let den: Vec<Float> = pade_numerator_exact(q)
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let c = Float::with_val(prec, &c);
            if j % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect();
    let mut inv: Vec<Float> = Vec::with_capacity(len);
    for k in 0..len {
        if k == 0 {
            inv.push(Float::with_val(prec, 1));
            continue;
        }
        let mut s = Float::with_val(prec, 0);
        for j in 1..=k.min(q) {
            s += Float::with_val(prec, &den[j] * &inv[k - j]);
        }
        inv.push(-s);
    }
    inv
}

/// Expands ψ(t, η) in η up to order `max_order`.
pub fn psi_series(q: usize, max_order: usize, digits: u32) -> Result<PsiSeries> {
    check_order(q)?;
    if max_order < q + 1 {
        return Err(Error::UnsupportedOrder(max_order));
    }
    let prec = digits_to_bits(digits);
    let inv = inverse_denominator_series(q, max_order - q, prec);

    // q!/(2q)! · (−1)^{q+1}
    let mut prefactor = Float::with_val(prec, Integer::from(Integer::factorial(q as u32)))
        / Float::with_val(prec, Integer::from(Integer::factorial(2 * q as u32)));
    if (q + 1) % 2 == 1 {
        prefactor = -prefactor;
    }
    // (−1)^j / j!
    let mut exp_neg = Vec::with_capacity(max_order - q);
    let mut term = Float::with_val(prec, 1);
    for j in 0..max_order - q {
        if j > 0 {
            term /= j as u32;
            term = -term;
        }
        exp_neg.push(term.clone());
    }

    let coeff_polys = (q + 1..=max_order)
        .map(|n| {
            let m = n - q - 1;
            (0..=m)
                .map(|j| Float::with_val(prec, &inv[m - j] * &exp_neg[j]) * &prefactor)
                .collect()
        })
        .collect();
    Ok(PsiSeries {
        q,
        max_order,
        prec,
        coeff_polys,
    })
}

/// Zeros of P_q(2t − 1) in (0, 1), ascending, by Newton iteration.
pub fn legendre_zeros(q: usize, prec: u32) -> Vec<Float> {
    let poly: Vec<Float> = shifted_legendre(q)
        .iter()
        .map(|c| Float::with_val(prec, c))
        .collect();
    let deriv: Vec<Float> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| Float::with_val(prec, c * k as u32))
        .collect();
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
    let mut zeros: Vec<Float> = (1..=q)
        .map(|i| {
            // Standard guess for the i-th zero of P_q on [−1, 1], mapped to [0, 1].
            let x = (std::f64::consts::PI * (i as f64 - 0.25) / (q as f64 + 0.5)).cos();
            let mut t = Float::with_val(prec, (1.0 - x) / 2.0);
            for _ in 0..200 {
                let step = horner(&poly, &t) / horner(&deriv, &t);
                t -= &step;
                if step.abs() <= tol {
                    break;
                }
            }
            t
        })
        .collect();
    zeros.sort_by(|a, b| a.partial_cmp(b).expect("finite zeros"));
    zeros
}

/// Evaluation grid on [0, 1]: the zeros z₁..z_q of P_q together with 0 and 1
/// split [0, 1] into q+1 intervals, each receiving `p` uniformly spaced
/// points including its endpoints.
#[derive(Clone, Debug)]
pub struct GridSpec {
    q: usize,
    p: usize,
    points: Vec<Float>,
}

impl GridSpec {
    pub fn new(q: usize, p: usize, prec: u32) -> Result<Self> {
        check_order(q)?;
        if p < 2 {
            return Err(Error::UnsupportedOrder(p));
        }
        let mut knots = vec![Float::with_val(prec, 0)];
        knots.extend(legendre_zeros(q, prec));
        knots.push(Float::with_val(prec, 1));

        let mut points = Vec::with_capacity((q + 1) * p);
        for w in knots.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let width = Float::with_val(prec, b - a);
            for j in 0..p {
                points.push(match j {
                    0 => a.clone(),
                    j if j == p - 1 => b.clone(),
                    j => Float::with_val(prec, &width * j as u32) / (p - 1) as u32 + a,
                });
            }
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        points.dedup();
        Ok(GridSpec { q, p, points })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn points_per_interval(&self) -> usize {
        self.p
    }

    pub fn points(&self) -> &[Float] {
        &self.points
    }
}

/// Table of V̄_n(t_i) = |∫₀^{t_i} ψ_n(τ) P_q(τ) dτ|.
#[derive(Clone, Debug)]
pub struct VbarTable {
    q: usize,
    max_order: usize,
    /// `values[n − (q+1)][i]`.
    values: Vec<Vec<Float>>,
}

impl VbarTable {
    /// V̄_n at every grid point; all zeros for n ≤ q.
    pub fn row(&self, n: usize) -> Option<&[Float]> {
        if n <= self.q || n > self.max_order {
            None
        } else {
            Some(&self.values[n - self.q - 1])
        }
    }

    /// β̂(η) = max_i Σ_n V̄_n(t_i) ηⁿ.
    pub fn beta_hat(&self, eta: &Float) -> Float {
        let prec = eta.prec().max(self.values[0][0].prec());
        let npts = self.values[0].len();
        let mut powers = Vec::with_capacity(self.values.len());
        let mut pw = Float::with_val(prec, eta.pow(self.q as u32 + 1));
        for _ in 0..self.values.len() {
            powers.push(pw.clone());
            pw *= eta;
        }
        let mut best = Float::with_val(prec, 0);
        for i in 0..npts {
            let mut sum = Float::with_val(prec, 0);
            for (row, p) in self.values.iter().zip(&powers) {
                sum += Float::with_val(prec, &row[i] * p);
            }
            if sum > best {
                best = sum;
            }
        }
        best
    }
}

/// Integrates each ψ_n·P_q exactly and tabulates |·| at the grid points.
pub fn vbar(series: &PsiSeries, grid: &GridSpec) -> Result<VbarTable> {
    if series.q != grid.q {
        return Err(Error::UnsupportedOrder(grid.q));
    }
    let prec = series.prec;
    let legendre: Vec<Float> = shifted_legendre(series.q)
        .iter()
        .map(|c| Float::with_val(prec, c))
        .collect();
    let values = series
        .coeff_polys
        .iter()
        .map(|psi| {
            let mut product = vec![Float::with_val(prec, 0); psi.len() + legendre.len() - 1];
            for (i, a) in psi.iter().enumerate() {
                for (j, b) in legendre.iter().enumerate() {
                    product[i + j] += Float::with_val(prec, a * b);
                }
            }
            // Antiderivative vanishing at zero, as t·Σ c_k t^k/(k+1).
            let integral: Vec<Float> = product
                .into_iter()
                .enumerate()
                .map(|(k, c)| c / (k as u32 + 1))
                .collect();
            grid.points
                .iter()
                .map(|t| (horner(&integral, t) * t).abs())
                .collect()
        })
        .collect();
    Ok(VbarTable {
        q: series.q,
        max_order: series.max_order,
        values,
    })
}

/// β̂(η) for a series and grid.
pub fn beta_hat(series: &PsiSeries, grid: &GridSpec, eta: &Float) -> Result<Float> {
    Ok(vbar(series, grid)?.beta_hat(eta))
}

/// Largest η in (0, ν_q) with β̂(η) ≤ 2⁻⁵³, to relative width 10⁻⁶.
pub fn find_eta(q: usize, digits: u32, max_order: usize, p: usize) -> Result<f64> {
    let series = psi_series(q, max_order, digits)?;
    let prec = series.prec;
    let table = vbar(&series, &GridSpec::new(q, p, prec)?)?;
    let target = Float::with_val(prec, Float::i_exp(1, -53));
    let ok = |x: &Float| table.beta_hat(x) <= target;

    let nu = BOUND_TABLE.get(q).expect("checked order").nu;
    let mut hi = Float::with_val(prec, nu);
    if ok(&hi) {
        return Ok(nu);
    }
    let mut lo = Float::with_val(prec, &hi / 2u32);
    while !ok(&lo) {
        hi = lo.clone();
        lo /= 2u32;
    }
    let width = Float::with_val(prec, 1e-6);
    loop {
        let gap = Float::with_val(prec, &hi - &lo);
        if gap <= Float::with_val(prec, &width * &hi) {
            break;
        }
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if ok(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.to_f64())
}

/// Truncates a positive value to `digits` significant decimal digits.
pub fn truncate_significant(x: f64, digits: i32) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return x;
    }
    let exponent = x.log10().floor() as i32 - (digits - 1);
    let scale = 10f64.powi(exponent);
    let mut m = (x / scale).floor();
    // Correct for x/scale landing a hair below an integer.
    if (m + 1.0) * scale <= x * (1.0 + 1e-12) {
        m += 1.0;
    }
    m * scale
}

/// Whether a derived η agrees with the tabulated value, which is rounded
/// down to two significant digits.
pub fn matches_table(q: usize, derived: f64) -> bool {
    BOUND_TABLE.get(q).is_some_and(|row| {
        let t = truncate_significant(derived, 2);
        (t - row.eta).abs() <= 1e-9 * row.eta
    })
}
