//! Large-system deterministic equivalents and random-matrix identity checks.
//!
//! As `Nr, Nt → ∞` with `β = Nr/Nt` fixed, the per-stream SINRs converge to
//!
//! - ZF: `(β-1) / (δ²(β-1) + c1)`
//! - MRC: `β / (1 + δ² + c1 + δ² β)`
//! - MMSE: `m / (1 + δ² + δ² m)` where `m` is the positive root of
//!   `c' m² + d m - β = 0`, `c' = c1/(1+δ²)` and `d = c' + 1 - β`.
//!
//! The MMSE root solves the fixed point `m = (β-1)/c' + 1/(c'(1+m))` obtained
//! from the Marchenko–Pastur resolvent; [`mmse_fixed_point`] iterates it
//! directly as an independent check of the closed root.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matrix::{hermitian_inverse, random_cn};
use crate::{ConfigTemplate, Error, RandomStream, ReceiverKind, Result, SystemConfig};

/// Large-system parameters of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub beta: f64,
    pub c1: f64,
    pub epsilon_bar: f64,
    /// `c1/(1+δ²) + 1 - β` for the `δ` the parameters were built with.
    pub d: f64,
}

impl AsymptoticParams {
    pub fn new(beta: f64, c1: f64, epsilon_bar: f64, delta: f64) -> Self {
        let d = c1 / (1.0 + delta * delta) + 1.0 - beta;
        Self { beta, c1, epsilon_bar, d }
    }

    pub fn from_config(cfg: &SystemConfig) -> Self {
        let p = cfg.derive();
        Self { beta: p.beta, c1: p.c1, epsilon_bar: p.epsilon_bar, d: p.d }
    }

    /// Parameters for `(nt, nr, tp, rho, delta)` without the `tp < t` restriction.
    pub fn from_parts(nt: usize, nr: usize, tp: usize, rho: f64, delta: f64) -> Self {
        let d2 = delta * delta;
        let epsilon_bar = tp as f64 * rho / (nt as f64 * (rho * d2 + 1.0));
        let c1 = (rho + rho * d2 + 1.0 + epsilon_bar) / (rho * epsilon_bar);
        Self::new(nr as f64 / nt as f64, c1, epsilon_bar, delta)
    }
}

/// Deterministic-equivalent SINR of one stream.
pub fn det_sinr(receiver: ReceiverKind, ap: &AsymptoticParams, delta: f64) -> Result<f64> {
    let d2 = delta * delta;
    let (beta, c1) = (ap.beta, ap.c1);
    match receiver {
        ReceiverKind::Zf => {
            if !(beta > 1.0) {
                return Err(Error::ZfBetaOne(beta));
            }
            Ok((beta - 1.0) / (d2 * (beta - 1.0) + c1))
        }
        ReceiverKind::Mrc => Ok(beta / (1.0 + d2 + c1 + d2 * beta)),
        ReceiverKind::Mmse => {
            let m = mmse_root(ap, delta);
            Ok(m / (1.0 + d2 + d2 * m))
        }
    }
}

/// Positive root of `c' m² + d m - β = 0`, written to avoid cancellation when `d > 0`.
fn mmse_root(ap: &AsymptoticParams, delta: f64) -> f64 {
    let cp = ap.c1 / (1.0 + delta * delta);
    let d = ap.d;
    let disc = (d * d + 4.0 * ap.beta * cp).sqrt();
    if d <= 0.0 {
        (disc - d) / (2.0 * cp)
    } else {
        2.0 * ap.beta / (d + disc)
    }
}

/// Iterates `m ← (β-1)/c' + 1/(c'(1+m))` to the MMSE root.
pub fn mmse_fixed_point(ap: &AsymptoticParams, delta: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let cp = ap.c1 / (1.0 + delta * delta);
    let mut m = ap.beta / cp;
    for _ in 0..max_iter {
        // Averaging keeps the map contractive when c' is small.
        let next = 0.5 * (m + (ap.beta - 1.0) / cp + 1.0 / (cp * (1.0 + m)));
        if (next - m).abs() <= tol * next.abs() {
            return Ok(next);
        }
        m = next;
    }
    Err(Error::Accuracy(format!("MMSE fixed point did not converge in {max_iter} iterations")))
}

/// Common limit `1/δ²` of all three SINRs as `β → ∞`.
pub fn det_sinr_limit(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("the large-array SINR limit is infinite for delta = {delta}")));
    }
    Ok(1.0 / (delta * delta))
}

/// `(1 - Tp/T) Nt log2(1 + γ̄)`.
pub fn det_rate(receiver: ReceiverKind, cfg: &SystemConfig) -> Result<f64> {
    det_rate_at(receiver, &cfg.template(), cfg.tp())
}

/// [`det_rate`] for training length `tp`, allowing the degenerate `tp = T`
/// (no data phase, zero rate).
pub fn det_rate_at(receiver: ReceiverKind, tpl: &ConfigTemplate, tp: usize) -> Result<f64> {
    if tp < tpl.nt || tp > tpl.t {
        return Err(Error::InvalidConfig(format!("tp = {tp} outside [{}, {}]", tpl.nt, tpl.t)));
    }
    let ap = AsymptoticParams::from_parts(tpl.nt, tpl.nr, tp, tpl.rho, tpl.delta);
    let gamma = det_sinr(receiver, &ap, tpl.delta)?;
    let fraction = 1.0 - tp as f64 / tpl.t as f64;
    Ok(fraction * tpl.nt as f64 * gamma.ln_1p() / std::f64::consts::LN_2)
}

/// Random-matrix identities used by the large-system analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// `xᴴ(A + τxxᴴ)⁻¹ = xᴴA⁻¹ / (1 + τ xᴴA⁻¹x)`.
    Inversion,
    /// `xᴴAx - tr(A)/N → 0` for `x ~ CN(0, I/N)` and bounded `‖A‖`.
    Trace,
    /// `|tr(((B - zI)⁻¹ - (B + vvᴴ - zI)⁻¹) A)| <= ‖A‖₂ / |z|` for `z < 0`.
    Rank1,
    /// `(n/N) m_{AᴴA}(z) = m_{AAᴴ}(z) + ((N-n)/N)(1/z)`.
    Stieltjes,
}

impl Lemma {
    pub const ALL: [Lemma; 4] = [Lemma::Inversion, Lemma::Trace, Lemma::Rank1, Lemma::Stieltjes];

    fn default_draws(self) -> usize {
        match self {
            Lemma::Inversion | Lemma::Stieltjes => 10,
            Lemma::Trace => 100,
            Lemma::Rank1 => 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub n: usize,
    pub draws: usize,
    /// Identities: largest relative (inversion) or absolute deviation.
    /// Rank-1 bound: largest `lhs - rhs` (non-positive when the bound holds).
    pub max_deviation: f64,
    /// Draws in which the rank-1 bound failed; always 0 for the identities.
    pub violations: usize,
}

/// Largest deviation between the two sides of `lemma` at size `n` over the
/// default number of draws.
pub fn rmt_lemma_check(lemma: Lemma, n: usize, rs: RandomStream) -> Result<f64> {
    Ok(rmt_lemma_report(lemma, n, lemma.default_draws(), rs)?.max_deviation)
}

pub fn rmt_lemma_report(lemma: Lemma, n: usize, draws: usize, rs: RandomStream) -> Result<LemmaReport> {
    if n < 2 {
        return Err(Error::Domain(format!("lemma checks need n >= 2 (got {n})")));
    }
    let mut rng = rs.rng();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..draws {
        let dev = match lemma {
            Lemma::Inversion => {
                let x = random_cn(n, n, 1.0, &mut rng);
                let mut a = x.ad_mul(&x) / Complex64::from(n as f64);
                for i in 0..n {
                    a[(i, i)] += 0.5;
                }
                let v = random_cn(n, 1, 1.0, &mut rng);
                let tau: f64 = 0.1 + rand::Rng::random::<f64>(&mut rng);
                let a_inv = hermitian_inverse(&a)?;
                let pert = &a + &v * v.adjoint() * Complex64::from(tau);
                let lhs = v.adjoint() * hermitian_inverse(&pert)?;
                let quad = (v.adjoint() * &a_inv * &v)[(0, 0)];
                let rhs = v.adjoint() * &a_inv / (Complex64::from(1.0) + quad * tau);
                (lhs - &rhs).norm() / rhs.norm()
            }
            Lemma::Trace => {
                let x = random_cn(n, n, 1.0, &mut rng);
                // Wishart scaled so that its spectral norm tends to 1.
                let a = &x * x.adjoint() / Complex64::from(4.0 * n as f64);
                let v = random_cn(n, 1, 1.0 / n as f64, &mut rng);
                let quad = (v.adjoint() * &a * &v)[(0, 0)];
                (quad - a.trace() / Complex64::from(n as f64)).norm()
            }
            Lemma::Rank1 => {
                let z = -1.0;
                let x = random_cn(n, n, 1.0, &mut rng);
                let b = &x * x.adjoint() / Complex64::from(n as f64);
                let v = random_cn(n, 1, 1.0, &mut rng);
                let a = random_cn(n, n, 1.0 / n as f64, &mut rng);
                let shift = |m: DMatrix<Complex64>| {
                    let mut m = m;
                    for i in 0..n {
                        m[(i, i)] -= z;
                    }
                    m
                };
                let r0 = hermitian_inverse(&shift(b.clone()))?;
                let r1 = hermitian_inverse(&shift(&b + &v * v.adjoint()))?;
                let lhs = ((r0 - r1) * &a).trace().norm();
                let norm_a = a.singular_values().max();
                let rhs = norm_a / z.abs();
                if lhs > rhs {
                    violations += 1;
                }
                lhs - rhs
            }
            Lemma::Stieltjes => {
                let big = 2 * n;
                let z = Complex64::new(-1.0, 0.5);
                let a = random_cn(big, n, 1.0 / n as f64, &mut rng);
                let resolvent_trace = |g: DMatrix<Complex64>| -> Result<Complex64> {
                    let mut g = g;
                    let dim = g.nrows();
                    for i in 0..dim {
                        g[(i, i)] -= z;
                    }
                    let inv = g
                        .try_inverse()
                        .ok_or_else(|| Error::SingularMatrix("resolvent".into()))?;
                    Ok(inv.trace())
                };
                let m_small = resolvent_trace(a.ad_mul(&a))? / Complex64::from(n as f64);
                let m_big = resolvent_trace(&a * a.adjoint())? / Complex64::from(big as f64);
                let ratio = n as f64 / big as f64;
                let gap = (big - n) as f64 / big as f64;
                (m_small * ratio - m_big - Complex64::from(gap) / z).norm()
            }
        };
        worst = worst.max(dev);
    }
    Ok(LemmaReport { lemma, n, draws, max_deviation: worst, violations })
}
