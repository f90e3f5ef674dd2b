//! Closed-form SINR distributions, outage and ergodic rates.
//!
//! All three receivers share one change of variables. With
//! `x = c0 γ / (1 - δ² γ)` (which maps the admissible range `[0, 1/δ²)` onto
//! `[0, ∞)`) and `u = 1 + (1+δ²) x / c0`, the SINR survival functions are
//!
//! - ZF: `e^{-x} Σ_{k=0}^{Nr-Nt} x^k / k!`
//! - MRC: `e^{-x} Σ_{k<Nr} Σ_{p≤k} α_{p,k} x^k u^{-(p+Nt-1)}`
//! - MMSE: `e^{-x} u^{-(Nt-1)} Σ_{k<Nr} β_k x^k`
//!
//! and every term is positive, so they are evaluated as log-sum-exp.
//!
//! The ergodic rate `R = Td Nt / (T ln 2) ∫ (1 - F(γ)) / (1 + γ) dγ` becomes
//! `R = K ∫_0^∞ S(x) [1/(x+a) - 1/(x+b)] dx` with `a = c0/(1+δ²)`, `b = c0/δ²`
//! and `K = Td Nt / (T ln 2)`. Integrating the survival terms against the two
//! poles with `∫ e^{-x} x^k (x+c)^{-m} dx = k! U(m, m-k; c)` yields the closed
//! forms in [`rate_closed_form`]; the same integral evaluated numerically is
//! [`rate_quadrature`].

use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate_segments, Segment, Tolerance};
use crate::specialfn::{build_coefficients, exp_integral_en_scaled_sequence, ln_factorial, ln_tricomi_u, log_sum_exp, CoefficientTable};
use crate::{Error, ReceiverKind, Result, SystemConfig};

/// Relative cancellation `Σ|t| / |Σ t|` above which the closed form is replaced by quadrature.
pub const CANCELLATION_LIMIT: f64 = 1e6;

const RATE_TOL: Tolerance = Tolerance::new(1e-300, 1e-11);

/// SINR law of one receiver for fixed `(Nt, Nr, c0, δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrDistribution {
    receiver: ReceiverKind,
    nt: usize,
    nr: usize,
    c0: f64,
    delta: f64,
    table: Option<CoefficientTable>,
}

impl SinrDistribution {
    pub fn new(receiver: ReceiverKind, cfg: &SystemConfig) -> Result<Self> {
        Self::with_c0(receiver, cfg.nt(), cfg.nr(), cfg.derive().c0, cfg.delta())
    }

    /// Law with an explicit noise factor, e.g. the high-SNR limit `c0_bar`.
    pub fn with_c0(receiver: ReceiverKind, nt: usize, nr: usize, c0: f64, delta: f64) -> Result<Self> {
        receiver.check_dimensions(nt, nr)?;
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(Error::Domain(format!("c0 must be positive and finite (got {c0})")));
        }
        if !(delta >= 0.0) {
            return Err(Error::Domain(format!("delta must be non-negative (got {delta})")));
        }
        let table = match receiver {
            ReceiverKind::Zf => None,
            _ => Some(build_coefficients(nt, nr, c0, delta)?),
        };
        Ok(Self { receiver, nt, nr, c0, delta, table })
    }

    pub fn receiver(&self) -> ReceiverKind {
        self.receiver
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Upper end of the support, `1/δ²` (infinite without impairments).
    pub fn wall(&self) -> f64 {
        if self.delta > 0.0 {
            1.0 / (self.delta * self.delta)
        } else {
            f64::INFINITY
        }
    }

    /// Maps an SINR below the wall to `x = c0 γ / (1 - δ² γ)`.
    pub fn x_of_gamma(&self, gamma: f64) -> f64 {
        self.c0 * gamma / (1.0 - self.delta * self.delta * gamma)
    }

    /// `ln S` as a function of the mapped variable `x >= 0`.
    pub fn ln_survival_x(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        let ln_x = x.ln();
        let pow = |k: usize| if k == 0 { 0.0 } else { k as f64 * ln_x };
        match self.receiver {
            ReceiverKind::Zf => {
                let terms: Vec<f64> = (0..=self.nr - self.nt).map(|k| pow(k) - ln_factorial(k)).collect();
                -x + log_sum_exp(&terms)
            }
            ReceiverKind::Mrc => {
                let t = self.table.as_ref().expect("mrc table");
                let ln_u = ((1.0 + self.delta * self.delta) * x / self.c0).ln_1p();
                let mut terms = Vec::with_capacity(self.nr * (self.nr + 1) / 2);
                for k in 0..self.nr {
                    for p in 0..=k {
                        let la = t.ln_alpha(p, k);
                        if la == f64::NEG_INFINITY {
                            continue;
                        }
                        terms.push(la + pow(k) - (p + self.nt - 1) as f64 * ln_u);
                    }
                }
                -x + log_sum_exp(&terms)
            }
            ReceiverKind::Mmse => {
                let t = self.table.as_ref().expect("mmse table");
                let ln_u = ((1.0 + self.delta * self.delta) * x / self.c0).ln_1p();
                let terms: Vec<f64> = (0..self.nr).map(|k| t.ln_beta(k) + pow(k)).collect();
                -x - (self.nt - 1) as f64 * ln_u + log_sum_exp(&terms)
            }
        }
    }

    /// `Pr{Γ > γ}`.
    pub fn survival(&self, gamma: f64) -> Result<f64> {
        Ok(1.0 - self.cdf(gamma)?)
    }

    /// `Pr{Γ <= γ}`: exactly 1 at and beyond the wall, clamped to `[0, 1]`.
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::Domain(format!("SINR threshold must be non-negative (got {gamma})")));
        }
        if gamma >= self.wall() {
            return Ok(1.0);
        }
        let s = self.ln_survival_x(self.x_of_gamma(gamma)).exp();
        Ok((1.0 - s).clamp(0.0, 1.0))
    }
}

/// SINR CDF (outage probability) of `receiver` at threshold `gamma`.
pub fn sinr_cdf(receiver: ReceiverKind, cfg: &SystemConfig, gamma: f64) -> Result<f64> {
    SinrDistribution::new(receiver, cfg)?.cdf(gamma)
}

/// Outage probability `Pr{γ <= threshold}`; same as [`sinr_cdf`].
pub fn outage(receiver: ReceiverKind, cfg: &SystemConfig, threshold: f64) -> Result<f64> {
    sinr_cdf(receiver, cfg, threshold)
}

/// How a rate value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEvaluation {
    pub rate: f64,
    pub method: RateMethod,
    /// Set when the closed form was attempted and rejected.
    pub fallback: bool,
    /// `Σ|terms| / |Σ terms|` of the closed-form series (1 for quadrature).
    pub cancellation: f64,
}

fn prefactor(cfg: &SystemConfig) -> f64 {
    cfg.data_fraction() * cfg.nt() as f64 / std::f64::consts::LN_2
}

/// Ergodic rate by adaptive quadrature of the survival function.
pub fn rate_quadrature(receiver: ReceiverKind, cfg: &SystemConfig) -> Result<f64> {
    let dist = SinrDistribution::new(receiver, cfg)?;
    Ok(prefactor(cfg) * survival_integral(&dist)?)
}

/// `∫_0^∞ S(x) c0 / ((c0 + δ² x)(c0 + (1+δ²) x)) dx`, i.e. `∫ S / (1+γ) dγ`.
fn survival_integral(dist: &SinrDistribution) -> Result<f64> {
    let c0 = dist.c0;
    let d2 = dist.delta * dist.delta;
    let f = |x: f64| {
        let kernel = c0 / ((c0 + d2 * x) * (c0 + (1.0 + d2) * x));
        kernel * dist.ln_survival_x(x).exp()
    };
    // The kernel changes scale near x = a; the survival function lives on
    // x up to a few Nr.
    let a = c0 / (1.0 + d2);
    let nr = dist.nr as f64;
    let split = nr + 8.0 * nr.sqrt() + 16.0;
    let mut points = vec![0.0];
    let mut p = 0.25 * a.min(1.0);
    while p < split {
        points.push(p);
        p *= 4.0;
    }
    points.push(split);
    let mut segs: Vec<Segment> = points.windows(2).map(|w| Segment::Finite(w[0], w[1])).collect();
    segs.push(Segment::Tail(split));
    Ok(integrate_segments(f, &segs, RATE_TOL)?.value)
}

/// Sign and log-magnitude of one closed-form term.
#[derive(Debug, Clone, Copy)]
struct Term {
    sign: f64,
    ln_mag: f64,
}

/// Compensated sum of sign/log-magnitude terms; returns
/// `(sum, Σ|t| / |sum|, largest ln |t|)`.
fn assemble(terms: &[Term]) -> (f64, f64, f64) {
    let max = terms.iter().map(|t| t.ln_mag).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (0.0, 1.0, max);
    }
    let (mut sum, mut comp, mut abs) = (0.0f64, 0.0f64, 0.0f64);
    for t in terms {
        let v = t.sign * (t.ln_mag - max).exp();
        let s = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - s) + v } else { (v - s) + sum };
        sum = s;
        abs += v.abs();
    }
    let total = sum + comp;
    let kappa = if total == 0.0 { f64::INFINITY } else { abs / total.abs() };
    (total * max.exp(), kappa, max)
}

/// Closed-form value of `∫ S / (1+γ) dγ` as `(value, cancellation, largest ln term)`.
fn closed_form_integral(dist: &SinrDistribution) -> Result<(f64, f64, f64)> {
    let c0 = dist.c0;
    let d2 = dist.delta * dist.delta;
    let a = c0 / (1.0 + d2);
    let b = c0 / d2;
    let (nt, nr) = (dist.nt, dist.nr);
    let mut terms = Vec::new();
    match dist.receiver {
        ReceiverKind::Zf => {
            let m = nr - nt + 1;
            let ea = exp_integral_en_scaled_sequence(m, a)?;
            let eb = exp_integral_en_scaled_sequence(m, b)?;
            for k in 0..m {
                terms.push(Term { sign: 1.0, ln_mag: ea[k].ln() });
                terms.push(Term { sign: -1.0, ln_mag: eb[k].ln() });
            }
        }
        ReceiverKind::Mrc | ReceiverKind::Mmse => {
            let t = dist.table.as_ref().expect("coefficient table");
            let ln_a = a.ln();
            let ln_d2 = d2.ln();
            // ln U(j, j-k; a) for 1 <= j <= n_max and ln U(1, 1-k; b).
            let n_max = if dist.receiver == ReceiverKind::Mrc { nr + nt - 1 } else { nt };
            let mut ua = vec![vec![f64::NAN; nr]; n_max + 1];
            for (j, row) in ua.iter_mut().enumerate().skip(1) {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = ln_tricomi_u(j, j as i64 - k as i64, a)?;
                }
            }
            let ub: Vec<f64> = exp_integral_en_scaled_sequence(nr, b)?.iter().map(|v| v.ln()).collect();

            let mut push_block = |ln_coef: f64, n: usize, k: usize| {
                let base = ln_coef + ln_factorial(k);
                for j in 1..=n {
                    let e = n - j;
                    terms.push(Term {
                        sign: if e % 2 == 0 { 1.0 } else { -1.0 },
                        ln_mag: base + e as f64 * ln_d2 + (j - 1) as f64 * ln_a + ua[j][k],
                    });
                }
                let e = n - 1;
                terms.push(Term {
                    sign: if e % 2 == 0 { -1.0 } else { 1.0 },
                    ln_mag: base + e as f64 * ln_d2 + ub[k],
                });
            };
            if dist.receiver == ReceiverKind::Mrc {
                for k in 0..nr {
                    for p in 0..=k {
                        let la = t.ln_alpha(p, k);
                        if la > f64::NEG_INFINITY {
                            push_block(la, p + nt, k);
                        }
                    }
                }
            } else {
                for k in 0..nr {
                    push_block(t.ln_beta(k), nt, k);
                }
            }
        }
    }
    Ok(assemble(&terms))
}

/// Ergodic rate from the closed-form special-function series, with the
/// quadrature route as fallback. Without impairments (`δ = 0`) the series
/// degenerate and the quadrature route is used directly.
pub fn rate_closed_form(receiver: ReceiverKind, cfg: &SystemConfig) -> Result<f64> {
    Ok(rate_closed_form_detailed(receiver, cfg)?.rate)
}

pub fn rate_closed_form_detailed(receiver: ReceiverKind, cfg: &SystemConfig) -> Result<RateEvaluation> {
    let dist = SinrDistribution::new(receiver, cfg)?;
    evaluate_rate(&dist, prefactor(cfg))
}

fn evaluate_rate(dist: &SinrDistribution, k: f64) -> Result<RateEvaluation> {
    if dist.delta == 0.0 {
        return Ok(RateEvaluation {
            rate: k * survival_integral(dist)?,
            method: RateMethod::Quadrature,
            fallback: false,
            cancellation: 1.0,
        });
    }
    let attempt = closed_form_integral(dist);
    let (reason, kappa) = match attempt {
        Ok((v, kappa, _)) if v.is_finite() && v > 0.0 && kappa <= CANCELLATION_LIMIT => {
            return Ok(RateEvaluation { rate: k * v, method: RateMethod::ClosedForm, fallback: false, cancellation: kappa });
        }
        Ok((v, kappa, ln_max)) => (
            format!("value {v:e}, cancellation {kappa:e}, largest term e^{ln_max:.3}"),
            kappa,
        ),
        Err(e) => (e.to_string(), f64::NAN),
    };
    log::warn!(
        "closed-form {} rate rejected (nt = {}, nr = {}, c0 = {:e}, delta = {}): {reason}; using quadrature",
        dist.receiver,
        dist.nt,
        dist.nr,
        dist.c0,
        dist.delta
    );
    Ok(RateEvaluation {
        rate: k * survival_integral(dist)?,
        method: RateMethod::Quadrature,
        fallback: true,
        cancellation: kappa,
    })
}

/// Low-SNR approximation: `Tp Td (Nr-Nt+1) ρ² / (T Nt ln 2)` for ZF and
/// `Tp Td Nr ρ² / (T Nt ln 2)` for MRC and MMSE.
pub fn rate_low_snr(receiver: ReceiverKind, cfg: &SystemConfig) -> f64 {
    let (nt, nr) = (cfg.nt() as f64, cfg.nr() as f64);
    let gain = match receiver {
        ReceiverKind::Zf => nr - nt + 1.0,
        _ => nr,
    };
    cfg.tp() as f64 * cfg.td() as f64 * gain * cfg.rho() * cfg.rho()
        / (std::f64::consts::LN_2 * cfg.t() as f64 * nt)
}

/// High-SNR rate ceiling: the ergodic rate with `c0` replaced by its limit
/// `c0_bar = δ²(1+δ²) Nt² / Tp`.
pub fn rate_ceiling(receiver: ReceiverKind, cfg: &SystemConfig) -> Result<f64> {
    if cfg.delta() == 0.0 {
        return Err(Error::Domain("no rate ceiling without impairments (delta = 0)".into()));
    }
    let p = cfg.derive();
    let dist = SinrDistribution::with_c0(receiver, cfg.nt(), cfg.nr(), p.c0_bar, cfg.delta())?;
    Ok(evaluate_rate(&dist, prefactor(cfg))?.rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveAxis {
    SnrDb,
    Tp,
    Antennas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Quadrature,
    Simulated,
    Asymptotic,
}

/// Rate samples along one axis, sorted by `x` without duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub axis: CurveAxis,
    pub provenance: Provenance,
    pub receiver: ReceiverKind,
    pub cfg: SystemConfig,
    points: Vec<(f64, f64)>,
}

impl RateCurve {
    pub fn new(axis: CurveAxis, provenance: Provenance, receiver: ReceiverKind, cfg: SystemConfig) -> Self {
        Self { axis, provenance, receiver, cfg, points: Vec::new() }
    }

    /// Inserts a point, keeping the order; rejects duplicate `x` and negative rates.
    pub fn insert(&mut self, x: f64, rate: f64) -> Result<()> {
        if !(rate >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("bad curve point ({x}, {rate})")));
        }
        match self.points.binary_search_by(|p| p.0.total_cmp(&x)) {
            Ok(_) => Err(Error::Domain(format!("duplicate curve abscissa {x}"))),
            Err(i) => {
                self.points.insert(i, (x, rate));
                Ok(())
            }
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}
