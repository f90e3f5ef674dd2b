//! System configuration and the scalar quantities derived from it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Linear receiver family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Zf,
    Mrc,
    Mmse,
}

impl ReceiverKind {
    pub const ALL: [ReceiverKind; 3] = [ReceiverKind::Zf, ReceiverKind::Mrc, ReceiverKind::Mmse];

    pub fn as_str(self) -> &'static str {
        match self {
            ReceiverKind::Zf => "zf",
            ReceiverKind::Mrc => "mrc",
            ReceiverKind::Mmse => "mmse",
        }
    }

    /// ZF needs at least as many receive as transmit antennas.
    pub fn check_dimensions(self, nt: usize, nr: usize) -> Result<()> {
        if self == ReceiverKind::Zf && nr < nt {
            return Err(Error::ZfRequiresTallChannel { nt, nr });
        }
        Ok(())
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zf" => Ok(ReceiverKind::Zf),
            "mrc" => Ok(ReceiverKind::Mrc),
            "mmse" => Ok(ReceiverKind::Mmse),
            other => Err(Error::InvalidConfig(format!("unknown receiver '{other}'"))),
        }
    }
}

/// The full parameter tuple of a training-based link.
///
/// `rho` is the linear average SNR per receive antenna and `delta` the
/// transmit EVM. Construction enforces `nt <= tp < t`, `rho > 0` and
/// `delta >= 0`. Practical EVMs sit in `[0.08, 0.175]`; that range is not
/// enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    nt: usize,
    nr: usize,
    t: usize,
    tp: usize,
    rho: f64,
    delta: f64,
}

impl SystemConfig {
    pub fn new(nt: usize, nr: usize, t: usize, tp: usize, rho: f64, delta: f64) -> Result<Self> {
        if nt == 0 || nr == 0 {
            return Err(Error::InvalidConfig(format!(
                "antenna counts must be positive (nt = {nt}, nr = {nr})"
            )));
        }
        if tp < nt {
            return Err(Error::InvalidConfig(format!("tp = {tp} must be at least nt = {nt}")));
        }
        if tp >= t {
            return Err(Error::InvalidConfig(format!("tp = {tp} must be below t = {t}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidConfig(format!("rho must be positive and finite (got {rho})")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("delta must be non-negative (got {delta})")));
        }
        Ok(Self { nt, nr, t, tp, rho, delta })
    }

    /// Same as [`SystemConfig::new`] with the SNR given in dB.
    pub fn from_db(nt: usize, nr: usize, t: usize, tp: usize, snr_db: f64, delta: f64) -> Result<Self> {
        Self::new(nt, nr, t, tp, db_to_linear(snr_db), delta)
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn tp(&self) -> usize {
        self.tp
    }

    /// Data length `T - Tp`.
    pub fn td(&self) -> usize {
        self.t - self.tp
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.rho)
    }

    /// Fraction of the block carrying data.
    pub fn data_fraction(&self) -> f64 {
        self.td() as f64 / self.t as f64
    }

    pub fn with_tp(&self, tp: usize) -> Result<Self> {
        Self::new(self.nt, self.nr, self.t, tp, self.rho, self.delta)
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.nt, self.nr, self.t, self.tp, rho, self.delta)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.nt, self.nr, self.t, self.tp, self.rho, delta)
    }

    pub fn template(&self) -> ConfigTemplate {
        ConfigTemplate { nt: self.nt, nr: self.nr, t: self.t, rho: self.rho, delta: self.delta }
    }

    pub fn derive(&self) -> DerivedParams {
        DerivedParams::new(self)
    }
}

/// A configuration with the training length left open, as consumed by the
/// pilot-length optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigTemplate {
    pub nt: usize,
    pub nr: usize,
    pub t: usize,
    pub rho: f64,
    pub delta: f64,
}

impl ConfigTemplate {
    pub fn new(nt: usize, nr: usize, t: usize, rho: f64, delta: f64) -> Result<Self> {
        if nt >= t {
            return Err(Error::InvalidConfig(format!("need nt < t (nt = {nt}, t = {t})")));
        }
        // Validate everything else through the smallest feasible training length.
        SystemConfig::new(nt, nr, t, nt, rho, delta)?;
        Ok(Self { nt, nr, t, rho, delta })
    }

    pub fn with_tp(&self, tp: usize) -> Result<SystemConfig> {
        SystemConfig::new(self.nt, self.nr, self.t, tp, self.rho, self.delta)
    }

    /// Feasible training lengths `nt..t`.
    pub fn tp_range(&self) -> std::ops::Range<usize> {
        self.nt..self.t
    }
}

/// Scalars derived from a [`SystemConfig`].
///
/// With `k = rho * delta^2 + 1`:
/// `epsilon = rho * Tp / (Nt * k)`, NMSE `1 / (1 + epsilon)`, estimate variance
/// `epsilon / (1 + epsilon)`, `c0 = Nt (rho + rho delta^2 + 1 + epsilon) / (rho epsilon)`
/// and its high-SNR limit `c0_bar = delta^2 (1 + delta^2) Nt^2 / Tp`. The
/// large-system factors use the per-stream normalisation `c1 = c0 / Nt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub epsilon: f64,
    pub sigma2_err: f64,
    pub sigma2_est: f64,
    pub c0: f64,
    pub c0_bar: f64,
    pub c1: f64,
    pub epsilon_bar: f64,
    pub beta: f64,
    pub d: f64,
}

impl DerivedParams {
    fn new(cfg: &SystemConfig) -> Self {
        let nt = cfg.nt as f64;
        let tp = cfg.tp as f64;
        let rho = cfg.rho;
        let d2 = cfg.delta * cfg.delta;

        let epsilon = rho * tp / (nt * (rho * d2 + 1.0));
        let sigma2_err = 1.0 / (1.0 + epsilon);
        let sigma2_est = epsilon / (1.0 + epsilon);
        let c0 = nt * (rho + rho * d2 + 1.0 + epsilon) / (rho * epsilon);
        let c0_bar = d2 * (1.0 + d2) * nt * nt / tp;

        let epsilon_bar = tp * rho / (nt * (rho * d2 + 1.0));
        let c1 = (rho + rho * d2 + 1.0 + epsilon_bar) / (rho * epsilon_bar);
        let beta = cfg.nr as f64 / nt;
        let d = c1 / (1.0 + d2) + 1.0 - beta;

        Self { epsilon, sigma2_err, sigma2_est, c0, c0_bar, c1, epsilon_bar, beta, d }
    }

    /// High-SNR limit of the normalized estimation error, `1 / (1 + Tp / (Nt delta^2))`.
    pub fn nmse_floor(cfg: &SystemConfig) -> f64 {
        let d2 = cfg.delta * cfg.delta;
        if d2 == 0.0 {
            return 0.0;
        }
        1.0 / (1.0 + cfg.tp as f64 / (cfg.nt as f64 * d2))
    }
}

/// Convenience wrapper around [`SystemConfig::derive`].
pub fn derive_params(cfg: &SystemConfig) -> DerivedParams {
    cfg.derive()
}
