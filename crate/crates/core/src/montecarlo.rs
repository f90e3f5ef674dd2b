//! Monte Carlo link simulator: training, LMMSE estimation and linear combining.
//!
//! Two simulation paths exist. [`simulate_training`] and [`lmmse_estimate`]
//! follow the signal model literally (full `Nr x Tp` pilot observation, general
//! LMMSE filter). The bulk samplers draw only the sufficient statistic
//! `Yp Spᴴ`: with orthogonal pilots `Δp Spᴴ` and `Vp Spᴴ` are again i.i.d.
//! Gaussian (variances `δ² Tp` and `Tp`), so
//! `Yp Spᴴ = √(ρ/Nt) H (Tp I + Δ') + V'` has exactly the same law while costing
//! `O(Nr Nt)` draws per trial instead of `O(Nr Tp)`.
//!
//! Trials are processed in batches of [`BATCH_SIZE`]; batch `b` draws from
//! `rs.rng_for_batch(b)` and batch results are combined in batch order, so the
//! output does not depend on the number of worker threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::{hermitian_inverse, random_cn};
use crate::{ComplexMatrix, Error, RandomStream, ReceiverKind, Result, SystemConfig};

pub const BATCH_SIZE: usize = 4096;

/// Per-stream SINR realizations for one receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrSampleSet {
    pub receiver: ReceiverKind,
    /// Trial-major: `samples[trial * nt + k]` is stream `k` of `trial`.
    pub samples: Vec<f64>,
    pub cfg: SystemConfig,
    pub trials: usize,
    pub seed: u64,
    pub stream_id: u64,
}

impl SinrSampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// `(Td/T) Nt mean(log2(1 + γ))`.
    pub fn rate(&self) -> f64 {
        let mean_log = self.samples.iter().map(|g| g.ln_1p()).sum::<f64>() / self.samples.len() as f64;
        self.cfg.data_fraction() * self.cfg.nt() as f64 * mean_log / std::f64::consts::LN_2
    }

    /// Samples in increasing order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Orthogonal pilots: the first `nt` rows of the `tp`-point DFT matrix, so that
/// every entry has unit modulus and `Sp Spᴴ = tp I`.
pub fn gen_pilot_matrix(nt: usize, tp: usize) -> Result<ComplexMatrix> {
    if tp < nt || nt == 0 {
        return Err(Error::InfeasiblePilot { nt, tp });
    }
    let w = -2.0 * std::f64::consts::PI / tp as f64;
    Ok(ComplexMatrix::from_fn(nt, tp, |i, j| {
        // Reduce the exponent modulo tp before scaling to keep the phase exact.
        let e = (i * j) % tp;
        Complex64::from_polar(1.0, w * e as f64)
    }))
}

/// Everything drawn for one training phase.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDraw {
    pub h: ComplexMatrix,
    pub sp: ComplexMatrix,
    pub distortion: ComplexMatrix,
    pub noise: ComplexMatrix,
    pub yp: ComplexMatrix,
}

/// Switches for degenerate training phases used in tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainingHooks {
    pub zero_noise: bool,
    pub zero_distortion: bool,
}

/// Draws `H` and the pilot observation `Yp = √(ρ/Nt) H (Sp + Δp) + Vp`.
pub fn simulate_training(cfg: &SystemConfig, rs: RandomStream) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let d = simulate_training_with(cfg, rs, TrainingHooks::default())?;
    Ok((d.h, d.yp))
}

pub fn simulate_training_with(cfg: &SystemConfig, rs: RandomStream, hooks: TrainingHooks) -> Result<TrainingDraw> {
    let mut rng = rs.rng();
    draw_training(cfg, &mut rng, hooks)
}

fn draw_training(cfg: &SystemConfig, rng: &mut ChaCha8Rng, hooks: TrainingHooks) -> Result<TrainingDraw> {
    let (nt, nr, tp) = (cfg.nt(), cfg.nr(), cfg.tp());
    let sp = gen_pilot_matrix(nt, tp)?;
    let h = random_cn(nr, nt, 1.0, rng);
    let dvar = if hooks.zero_distortion { 0.0 } else { cfg.delta() * cfg.delta() };
    let distortion = random_cn(nt, tp, dvar, rng);
    let noise = random_cn(nr, tp, if hooks.zero_noise { 0.0 } else { 1.0 }, rng);
    let a = (cfg.rho() / nt as f64).sqrt();
    let yp = (&h * (sp.as_inner() + &distortion)) * Complex64::from(a) + &noise;
    Ok(TrainingDraw {
        h: ComplexMatrix::from_inner(h),
        sp,
        distortion: ComplexMatrix::from_inner(distortion),
        noise: ComplexMatrix::from_inner(noise),
        yp: ComplexMatrix::from_inner(yp),
    })
}

/// `Ĥ = √(ρ/Nt) Yp ((ρ/Nt) Spᴴ Sp + (δ²ρ + 1) I)⁻¹ Spᴴ`, for any pilot matrix.
pub fn lmmse_estimate(yp: &ComplexMatrix, sp: &ComplexMatrix, cfg: &SystemConfig) -> Result<ComplexMatrix> {
    let (nt, nr, tp) = (cfg.nt(), cfg.nr(), cfg.tp());
    if sp.rows() != nt || sp.cols() != tp || yp.rows() != nr || yp.cols() != tp {
        return Err(Error::Domain(format!(
            "lmmse_estimate: yp is {}x{}, sp is {}x{}, expected {nr}x{tp} and {nt}x{tp}",
            yp.rows(),
            yp.cols(),
            sp.rows(),
            sp.cols()
        )));
    }
    let ratio = cfg.rho() / nt as f64;
    let reg = cfg.delta() * cfg.delta() * cfg.rho() + 1.0;
    let s = sp.as_inner();
    let mut a = s.ad_mul(s) * Complex64::from(ratio);
    for i in 0..tp {
        a[(i, i)] += reg;
    }
    let a_inv = hermitian_inverse(&a)?;
    let est = yp.as_inner() * a_inv * s.adjoint() * Complex64::from(ratio.sqrt());
    Ok(ComplexMatrix::from_inner(est))
}

/// Fast-path draw of one trial.
struct TrialKernel {
    nt: usize,
    nr: usize,
    tp: f64,
    amp: f64,
    gain: f64,
    inv_sigma: f64,
    dist_var: f64,
}

impl TrialKernel {
    fn new(cfg: &SystemConfig) -> Self {
        let p = cfg.derive();
        let nt = cfg.nt();
        let ratio = cfg.rho() / nt as f64;
        let d2 = cfg.delta() * cfg.delta();
        let tp = cfg.tp() as f64;
        Self {
            nt,
            nr: cfg.nr(),
            tp,
            amp: ratio.sqrt(),
            gain: ratio.sqrt() / (ratio * tp + d2 * cfg.rho() + 1.0),
            inv_sigma: 1.0 / p.sigma2_est.sqrt(),
            dist_var: d2 * tp,
        }
    }

    /// Returns `(H, Ĥ)`.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let h = random_cn(self.nr, self.nt, 1.0, rng);
        let mut mix = random_cn(self.nt, self.nt, self.dist_var, rng);
        for i in 0..self.nt {
            mix[(i, i)] += self.tp;
        }
        let v = random_cn(self.nr, self.nt, self.tp, rng);
        let stat = &h * mix * Complex64::from(self.amp) + v;
        let est = stat * Complex64::from(self.gain);
        (h, est)
    }

    fn draw_normalized(&self, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let (_, est) = self.draw(rng);
        est * Complex64::from(self.inv_sigma)
    }
}

/// Per-stream SINRs of one receiver from the normalized estimate `H̄`.
pub(crate) fn sinr_from_hbar(
    hbar: &DMatrix<Complex64>,
    receiver: ReceiverKind,
    c0: f64,
    delta: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    let gram = hbar.ad_mul(hbar);
    sinr_from_gram(&gram, receiver, c0, delta, out)
}

fn sinr_from_gram(gram: &DMatrix<Complex64>, receiver: ReceiverKind, c0: f64, delta: f64, out: &mut Vec<f64>) -> Result<()> {
    let nt = gram.nrows();
    let d2 = delta * delta;
    match receiver {
        ReceiverKind::Zf => {
            let inv = hermitian_inverse(gram)?;
            out.extend((0..nt).map(|k| 1.0 / (d2 + c0 * inv[(k, k)].re)));
        }
        ReceiverKind::Mrc => {
            for k in 0..nt {
                let gkk = gram[(k, k)].re;
                let off: f64 = (0..nt).filter(|&i| i != k).map(|i| gram[(k, i)].norm_sqr()).sum();
                let num = gkk * gkk;
                out.push(num / (off + d2 * (num + off) + c0 * gkk));
            }
        }
        ReceiverKind::Mmse => {
            let r = (1.0 + d2) / c0;
            let mut m = gram * Complex64::from(r);
            for i in 0..nt {
                m[(i, i)] += 1.0;
            }
            let m_inv = hermitian_inverse(&m)?;
            let p = &m_inv * gram;
            for k in 0..nt {
                let dk = m_inv[(k, k)].re;
                let one_minus = r * p[(k, k)].re;
                out.push(one_minus / (d2 + dk));
            }
        }
    }
    Ok(())
}

fn run_batches<T, F>(trials: usize, rs: RandomStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Result<T> + Sync,
{
    let batches = trials.div_ceil(BATCH_SIZE);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH_SIZE.min(trials - b * BATCH_SIZE);
            let mut rng = rs.rng_for_batch(b as u64);
            f(&mut rng, n)
        })
        .collect()
}

fn check_sampling(cfg: &SystemConfig, receivers: &[ReceiverKind], trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    for r in receivers {
        r.check_dimensions(cfg.nt(), cfg.nr())?;
    }
    Ok(())
}

/// `Nt * trials` per-stream SINR samples for one receiver.
pub fn sample_sinr(cfg: &SystemConfig, receiver: ReceiverKind, trials: usize, rs: RandomStream) -> Result<SinrSampleSet> {
    Ok(sample_sinr_multi(cfg, &[receiver], trials, rs)?.remove(0))
}

/// Samples several receivers on the same channel and estimate draws.
///
/// For a given `(cfg, trials, rs)` the samples of a receiver do not depend on
/// which other receivers are requested.
pub fn sample_sinr_multi(
    cfg: &SystemConfig,
    receivers: &[ReceiverKind],
    trials: usize,
    rs: RandomStream,
) -> Result<Vec<SinrSampleSet>> {
    check_sampling(cfg, receivers, trials)?;
    let kernel = TrialKernel::new(cfg);
    let c0 = cfg.derive().c0;
    let delta = cfg.delta();
    let nt = cfg.nt();
    let nrx = receivers.len();

    let batches = run_batches(trials, rs, |rng, n| {
        let mut out: Vec<Vec<f64>> = (0..nrx).map(|_| Vec::with_capacity(n * nt)).collect();
        for _ in 0..n {
            let hbar = kernel.draw_normalized(rng);
            let gram = hbar.ad_mul(&hbar);
            for (r, buf) in receivers.iter().zip(out.iter_mut()) {
                sinr_from_gram(&gram, *r, c0, delta, buf)?;
            }
        }
        Ok(out)
    })?;

    let mut sets: Vec<SinrSampleSet> = receivers
        .iter()
        .map(|&receiver| SinrSampleSet {
            receiver,
            samples: Vec::with_capacity(trials * nt),
            cfg: *cfg,
            trials,
            seed: rs.seed,
            stream_id: rs.stream_id,
        })
        .collect();
    for batch in batches {
        for (set, part) in sets.iter_mut().zip(batch) {
            set.samples.extend(part);
        }
    }
    Ok(sets)
}

/// Maximum relative deviation between the closed SINR expressions and the
/// SINR computed from explicit combining weights and the effective noise
/// covariance, over all trials and streams. Uses the literal training path.
pub fn validate_sinr_end_to_end(
    cfg: &SystemConfig,
    receiver: ReceiverKind,
    trials: usize,
    rs: RandomStream,
) -> Result<f64> {
    check_sampling(cfg, &[receiver], trials)?;
    let p = cfg.derive();
    let (nt, nr) = (cfg.nt(), cfg.nr());
    let rho_nt = cfg.rho() / nt as f64;
    let d2 = cfg.delta() * cfg.delta();
    let noise_level = (cfg.rho() + cfg.rho() * d2 + 1.0 + p.epsilon) / (1.0 + p.epsilon);

    let maxima = run_batches(trials, rs, |rng, n| {
        let mut worst = 0.0f64;
        let mut closed = Vec::with_capacity(nt);
        for _ in 0..n {
            let draw = draw_training(cfg, rng, TrainingHooks::default())?;
            let est = lmmse_estimate(&draw.yp, &draw.sp, cfg)?.into_inner();
            let hbar = &est * Complex64::from(1.0 / p.sigma2_est.sqrt());
            closed.clear();
            sinr_from_hbar(&hbar, receiver, p.c0, cfg.delta(), &mut closed)?;

            let full = est.clone() * est.adjoint();
            let pinv = if receiver == ReceiverKind::Zf {
                Some(&est * hermitian_inverse(&est.ad_mul(&est))?)
            } else {
                None
            };
            for k in 0..nt {
                let hk = est.column(k).into_owned();
                let mut rz = (&full - &hk * hk.adjoint()) * Complex64::from(rho_nt) + &full * Complex64::from(rho_nt * d2);
                for i in 0..nr {
                    rz[(i, i)] += noise_level;
                }
                let w = match receiver {
                    ReceiverKind::Zf => pinv.as_ref().expect("zf weights").column(k).into_owned(),
                    ReceiverKind::Mrc => hk.clone(),
                    ReceiverKind::Mmse => hermitian_inverse(&rz)? * &hk,
                };
                let signal = rho_nt * w.dotc(&hk).norm_sqr();
                let interference = w.dotc(&(&rz * &w)).re;
                let gamma = signal / interference;
                worst = worst.max(((gamma - closed[k]) / gamma).abs());
            }
        }
        Ok(worst)
    })?;
    Ok(maxima.into_iter().fold(0.0, f64::max))
}

/// Mean of `‖H - Ĥ‖²_F / (Nr Nt)`.
pub fn empirical_nmse(cfg: &SystemConfig, trials: usize, rs: RandomStream) -> Result<f64> {
    check_sampling(cfg, &[], trials)?;
    let kernel = TrialKernel::new(cfg);
    let sums = run_batches(trials, rs, |rng, n| {
        let mut s = 0.0;
        for _ in 0..n {
            let (h, est) = kernel.draw(rng);
            s += (h - est).norm_squared();
        }
        Ok(s)
    })?;
    let total: f64 = sums.iter().sum();
    Ok(total / (trials * cfg.nr() * cfg.nt()) as f64)
}

/// `(Td/T) Nt mean(log2(1 + γ))` over `Nt * trials` samples.
pub fn empirical_rate(cfg: &SystemConfig, receiver: ReceiverKind, trials: usize, rs: RandomStream) -> Result<f64> {
    Ok(empirical_rates(cfg, &[receiver], trials, rs)?[0])
}

/// [`empirical_rate`] for several receivers on common draws, without
/// keeping the samples.
pub fn empirical_rates(cfg: &SystemConfig, receivers: &[ReceiverKind], trials: usize, rs: RandomStream) -> Result<Vec<f64>> {
    check_sampling(cfg, receivers, trials)?;
    let kernel = TrialKernel::new(cfg);
    let c0 = cfg.derive().c0;
    let delta = cfg.delta();
    let nrx = receivers.len();
    let sums = run_batches(trials, rs, |rng, n| {
        let mut acc = vec![0.0; nrx];
        let mut buf = Vec::with_capacity(cfg.nt());
        for _ in 0..n {
            let hbar = kernel.draw_normalized(rng);
            let gram = hbar.ad_mul(&hbar);
            for (r, a) in receivers.iter().zip(acc.iter_mut()) {
                buf.clear();
                sinr_from_gram(&gram, *r, c0, delta, &mut buf)?;
                *a += buf.iter().map(|g| g.ln_1p()).sum::<f64>();
            }
        }
        Ok(acc)
    })?;
    let count = (trials * cfg.nt()) as f64;
    let scale = cfg.data_fraction() * cfg.nt() as f64 / std::f64::consts::LN_2;
    Ok((0..nrx)
        .map(|i| scale * sums.iter().map(|s| s[i]).sum::<f64>() / count)
        .collect())
}

/// Fraction of samples at or below `threshold`.
pub fn empirical_outage(samples: &SinrSampleSet, threshold: f64) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::Domain(format!("outage threshold must be non-negative (got {threshold})")));
    }
    let hits = samples.samples.iter().filter(|&&g| g <= threshold).count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> Result<f64>>(samples: &[f64], cdf: F) -> Result<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}
