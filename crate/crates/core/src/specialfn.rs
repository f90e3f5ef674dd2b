//! Special functions for the closed-form SINR laws and ergodic rates.
//!
//! Everything here works on real, positive arguments and integer orders:
//! the generalized exponential integral `E_n`, the upper incomplete gamma
//! function for integer order, Tricomi's confluent hypergeometric function
//! `U(a, b; z)` (written `Psi` in much of the communications literature and
//! sometimes loosely called "regularized hypergeometric"), and the
//! combinatorial coefficient tables of the MRC and MMSE SINR distributions.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate_segments, Segment, Tolerance};
use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_4;
const MAX_ITER: usize = 10_000;
const FACTORIAL_TABLE: usize = 4096;

/// Absolute/relative tolerance used by every quadrature in this module.
pub const QUAD_TOL: Tolerance = Tolerance::new(1e-300, 1e-13);

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for i in 1..FACTORIAL_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < FACTORIAL_TABLE {
        return ln_factorial_table()[n];
    }
    // Stirling series; far beyond any order used here.
    let x = n as f64 + 1.0;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
}

/// `ln C(n, k)`, with `C(-1, 0) = 1` and `-inf` for the vanishing cases.
pub fn ln_binomial(n: i64, k: usize) -> f64 {
    if n < 0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let n = n as usize;
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn check_en_domain(n: usize, z: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain(format!("E_n needs n >= 1 (got {n})")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("E_n needs z > 0 (got {z})")));
    }
    Ok(())
}

/// Generalized exponential integral `E_n(z) = ∫_1^∞ e^{-zt} t^{-n} dt`.
pub fn exp_integral_en(n: usize, z: f64) -> Result<f64> {
    check_en_domain(n, z)?;
    if z <= 1.0 {
        Ok(en_series(n, z))
    } else {
        Ok(en_continued_fraction(n, z) * (-z).exp())
    }
}

/// `e^z E_n(z)`, finite for arbitrarily large `z`.
pub fn exp_integral_en_scaled(n: usize, z: f64) -> Result<f64> {
    check_en_domain(n, z)?;
    if z <= 1.0 {
        Ok(en_series(n, z) * z.exp())
    } else {
        Ok(en_continued_fraction(n, z))
    }
}

/// `e^z E_n(z)` for `n = 1..=n_max`.
///
/// Uses the upward recurrence `E_{n+1} = (e^{-z} - z E_n) / n` while it is
/// stable (`z <= n`, errors are damped by `z / n`) and direct evaluation
/// otherwise.
pub fn exp_integral_en_scaled_sequence(n_max: usize, z: f64) -> Result<Vec<f64>> {
    check_en_domain(n_max.max(1), z)?;
    let mut out = Vec::with_capacity(n_max);
    if n_max == 0 {
        return Ok(out);
    }
    out.push(exp_integral_en_scaled(1, z)?);
    for n in 1..n_max {
        let next = if z <= n as f64 {
            (1.0 - z * out[n - 1]) / n as f64
        } else {
            exp_integral_en_scaled(n + 1, z)?
        };
        out.push(next);
    }
    Ok(out)
}

// Power series, valid and accurate for 0 < z <= 1.
fn en_series(n: usize, z: f64) -> f64 {
    let nm1 = n as i64 - 1;
    let mut ans = if nm1 != 0 { 1.0 / nm1 as f64 } else { -z.ln() - EULER_GAMMA };
    let mut fact = 1.0;
    for i in 1..MAX_ITER as i64 {
        fact *= -z / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|j| 1.0 / j as f64).sum::<f64>();
            fact * (-z.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * f64::EPSILON * 0.5 {
            break;
        }
    }
    ans
}

// Modified Lentz evaluation of the continued fraction for e^z E_n(z), z > 1.
fn en_continued_fraction(n: usize, z: f64) -> f64 {
    let tiny = 1e-300;
    let n = n as f64;
    let mut b = z + n;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = i as f64;
        let an = -i * (n - 1.0 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    h
}

/// Upper incomplete gamma `Γ(n, z)` for integer `n >= 1`:
/// `(n-1)! e^{-z} Σ_{m<n} z^m / m!`.
pub fn upper_incomplete_gamma(n: usize, z: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain(format!("incomplete gamma needs n >= 1 (got {n})")));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma needs z >= 0 (got {z})")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..n {
        term *= z / m as f64;
        sum += term;
    }
    Ok((ln_factorial(n - 1) - z).exp() * sum)
}

fn check_u_domain(a: usize, z: f64) -> Result<()> {
    if a < 1 {
        return Err(Error::Domain(format!("Tricomi U needs a >= 1 (got {a})")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Tricomi U needs z > 0 (got {z})")));
    }
    Ok(())
}

/// Tricomi's confluent hypergeometric function of the second kind,
/// `U(a, b; z) = Γ(a)^{-1} ∫_0^∞ e^{-zt} t^{a-1} (1+t)^{b-a-1} dt`,
/// for integer `a >= 1`, any integer `b` and `z > 0`.
pub fn tricomi_u(a: usize, b: i64, z: f64) -> Result<f64> {
    Ok(ln_tricomi_u(a, b, z)?.exp())
}

/// `ln U(a, b; z)`.
///
/// After `s = z t` the integral becomes
/// `z^{-a} Γ(a)^{-1} ∫_0^∞ e^{-s} s^{a-1} (1 + s/z)^{b-a-1} ds`, whose
/// integrand is evaluated in log form and integrated adaptively; the Kummer
/// series are never used because they degenerate at integer `b`.
pub fn ln_tricomi_u(a: usize, b: i64, z: f64) -> Result<f64> {
    check_u_domain(a, z)?;
    let af = a as f64;
    let expo = (b - a as i64 - 1) as f64;
    let ln_gamma_a = ln_factorial(a - 1);

    // Location of the integrand's bulk: the gamma kernel peaks near a - 1,
    // the algebraic factor switches behaviour around s = z. Geometric
    // breakpoints between the two keep every piece within reach of the
    // refinement limit even when z is many decades below the bulk.
    let bulk = (af - 1.0).max(expo + af - 1.0).max(1.0);
    let split = bulk + 4.0 * bulk.sqrt() + 4.0;
    let mut points = vec![0.0];
    let mut p = 0.25 * z;
    while p < split {
        points.push(p);
        p *= 4.0;
    }
    points.push(split);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let ln_integrand = |s: f64| -> f64 { -s + (af - 1.0) * s.ln() + expo * (s / z).ln_1p() - ln_gamma_a };
    // Shift by the largest sampled log value so tiny results do not underflow.
    let shift = points
        .windows(2)
        .flat_map(|w| [w[1], 0.5 * (w[0] + w[1])])
        .chain([bulk.max(f64::MIN_POSITIVE)])
        .map(ln_integrand)
        .fold(f64::NEG_INFINITY, f64::max);
    let integrand = |s: f64| -> f64 {
        if s <= 0.0 {
            return if a == 1 { (-ln_gamma_a - shift).exp() } else { 0.0 };
        }
        (ln_integrand(s) - shift).exp()
    };
    let mut segs: Vec<Segment> = points.windows(2).map(|w| Segment::Finite(w[0], w[1])).collect();
    segs.push(Segment::Tail(split));
    let est = integrate_segments(integrand, &segs, QUAD_TOL)?;
    if !(est.value > 0.0) {
        return Err(Error::Accuracy(format!("U({a}, {b}; {z}) integral underflowed")));
    }
    Ok(est.value.ln() + shift - af * z.ln())
}

/// Coefficients of the MRC (`alpha`) and MMSE (`beta`) SINR distributions.
///
/// `alpha[p][k] = C(Nt+p-2, p) ((1+δ²)/c0)^p / (k-p)!` for `0 <= p <= k < Nr` and
/// `beta[k] = Σ_{p=max(0,k-Nt+1)}^{k} C(Nt-1, k-p) (c0/(1+δ²))^{p-k} / p!`.
///
/// Entries are stored as natural logarithms: for large `Nr` and small `c0`
/// the linear values exceed the double range even though every term they
/// multiply in the CDF is tiny. An exactly-zero coefficient (possible for
/// `Nt = 1`) is stored as `-inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub nt: usize,
    pub nr: usize,
    pub c0: f64,
    pub delta: f64,
    ln_alpha: Vec<Vec<f64>>,
    ln_beta: Vec<f64>,
}

impl CoefficientTable {
    /// `ln alpha_{p,k}`; requires `p <= k < nr`.
    pub fn ln_alpha(&self, p: usize, k: usize) -> f64 {
        self.ln_alpha[k][p]
    }

    pub fn ln_beta(&self, k: usize) -> f64 {
        self.ln_beta[k]
    }

    /// Linear `alpha_{p,k}` (may overflow to `inf` for extreme parameters).
    pub fn alpha(&self, p: usize, k: usize) -> f64 {
        self.ln_alpha(p, k).exp()
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.ln_beta(k).exp()
    }
}

pub fn build_coefficients(nt: usize, nr: usize, c0: f64, delta: f64) -> Result<CoefficientTable> {
    if nt < 1 || nr < 1 {
        return Err(Error::Domain(format!("coefficient table needs nt, nr >= 1 (got {nt}, {nr})")));
    }
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::Domain(format!("coefficient table needs c0 > 0 (got {c0})")));
    }
    let ln_ratio = (1.0 + delta * delta).ln() - c0.ln();

    let ln_alpha = (0..nr)
        .map(|k| {
            (0..=k)
                .map(|p| {
                    let lb = ln_binomial(nt as i64 + p as i64 - 2, p);
                    if lb == f64::NEG_INFINITY {
                        lb
                    } else {
                        lb + p as f64 * ln_ratio - ln_factorial(k - p)
                    }
                })
                .collect()
        })
        .collect();

    let ln_beta = (0..nr)
        .map(|k| {
            let lo = (k + 1).saturating_sub(nt);
            let terms: Vec<f64> = (lo..=k)
                .map(|p| ln_binomial(nt as i64 - 1, k - p) + (k - p) as f64 * ln_ratio - ln_factorial(p))
                .collect();
            log_sum_exp(&terms)
        })
        .collect();

    Ok(CoefficientTable { nt, nr, c0, delta, ln_alpha, ln_beta })
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
