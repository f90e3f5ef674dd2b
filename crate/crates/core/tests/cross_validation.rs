//! Closed forms against the link simulator.

use rtri::analytic::{outage, rate_ceiling, rate_closed_form, rate_low_snr, sinr_cdf};
use rtri::asymptotic::{det_rate, det_sinr, AsymptoticParams};
use rtri::montecarlo::{
    empirical_nmse, empirical_outage, empirical_rate, sample_sinr, validate_sinr_end_to_end,
};
use rtri::{DerivedParams, RandomStream, ReceiverKind, SystemConfig};

const TRIALS: usize = 100_000;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn nmse_matches_estimation_error_and_floor() {
    let cfg = SystemConfig::new(4, 4, 200, 4, 10.0, 0.0).unwrap();
    let nmse = empirical_nmse(&cfg, TRIALS, RandomStream::new(11, 0)).unwrap();
    assert!(rel(nmse, 1.0 / 11.0) <= 0.01, "{nmse}");

    let cfg = SystemConfig::new(4, 4, 200, 4, 1e6, 0.1).unwrap();
    let nmse = empirical_nmse(&cfg, TRIALS, RandomStream::new(11, 1)).unwrap();
    assert!(rel(nmse, 1.0 / 101.0) <= 0.02, "{nmse}");
    assert!(rel(DerivedParams::nmse_floor(&cfg), 1.0 / 101.0) < 1e-12);
}

#[test]
fn nmse_decreases_with_training() {
    let mut prev = f64::INFINITY;
    for tp in 4..=16 {
        let cfg = SystemConfig::new(4, 4, 200, tp, 10.0, 0.1).unwrap();
        let nmse = empirical_nmse(&cfg, TRIALS, RandomStream::new(12, tp as u64)).unwrap();
        // Per-entry error variance is ~σ²; its mean over 1.6e6 entries has sd ≈ σ²/1265.
        let margin = 3.0 * nmse / (TRIALS as f64 * 16.0).sqrt();
        assert!(nmse < prev + margin, "tp {tp}: {nmse} vs {prev}");
        prev = nmse;
    }
}

#[test]
fn zf_cdf_at_inverse_c0() {
    let cfg = SystemConfig::new(5, 5, 200, 5, 1e3, 0.0).unwrap();
    let c0 = cfg.derive().c0;
    let s = sample_sinr(&cfg, ReceiverKind::Zf, TRIALS, RandomStream::new(13, 0)).unwrap();
    let emp = empirical_outage(&s, 1.0 / c0).unwrap();
    assert!((emp - (1.0 - (-1f64).exp())).abs() <= 0.01, "{emp}");
}

#[test]
fn outage_thresholds_match_simulation() {
    let cfg = SystemConfig::new(5, 5, 200, 5, 1e3, 0.1).unwrap();
    for (r, th) in [(ReceiverKind::Zf, 50.0), (ReceiverKind::Mmse, 30.0), (ReceiverKind::Mrc, 5.0)] {
        let s = sample_sinr(&cfg, r, TRIALS, RandomStream::new(14, r as u64)).unwrap();
        let emp = empirical_outage(&s, th).unwrap();
        let ana = outage(r, &cfg, th).unwrap();
        assert!((emp - ana).abs() <= 0.01, "{r}: {emp} vs {ana}");
        assert_eq!(empirical_outage(&s, 100.0).unwrap(), 1.0);
        assert_eq!(sinr_cdf(r, &cfg, 100.0).unwrap(), 1.0);
    }
}

#[test]
fn mmse_rate_matches_simulation() {
    let cfg = SystemConfig::new(4, 4, 200, 4, 10.0, 0.05).unwrap();
    let emp = empirical_rate(&cfg, ReceiverKind::Mmse, TRIALS, RandomStream::new(15, 0)).unwrap();
    let ana = rate_closed_form(ReceiverKind::Mmse, &cfg).unwrap();
    assert!(rel(ana, emp) <= 0.02, "{ana} vs {emp}");
}

#[test]
fn low_snr_rates_scale_with_rho_squared() {
    let cfg = SystemConfig::from_db(4, 4, 200, 4, -20.0, 0.1).unwrap();
    for r in ReceiverKind::ALL {
        let emp = empirical_rate(&cfg, r, TRIALS, RandomStream::new(16, r as u64)).unwrap();
        let lim = rate_low_snr(r, &cfg);
        assert!(rel(emp, lim) <= 0.1, "{r}: {emp} vs {lim}");
    }
    // ρ² scaling of the limit itself, and its independence of δ.
    let a = rate_low_snr(ReceiverKind::Mrc, &cfg);
    let b = rate_low_snr(ReceiverKind::Mrc, &cfg.with_rho(cfg.rho() / 2.0).unwrap().with_delta(0.0).unwrap());
    assert!(rel(a / 4.0, b) < 1e-14);
}

#[test]
fn small_impairments_are_continuous() {
    for db in [0.0, 10.0, 20.0] {
        let cfg = SystemConfig::from_db(4, 6, 200, 8, db, 0.0).unwrap();
        for r in ReceiverKind::ALL {
            let ideal = rate_closed_form(r, &cfg).unwrap();
            let near = rate_closed_form(r, &cfg.with_delta(1e-4).unwrap()).unwrap();
            assert!(rel(near, ideal) <= 0.005, "{r} {db}: {near} vs {ideal}");
        }
    }
}

#[test]
fn ceilings() {
    for tp in [4, 8, 16] {
        let cfg = SystemConfig::new(4, 4, 200, tp, 1e6, 0.1).unwrap();
        for r in ReceiverKind::ALL {
            let c = rate_ceiling(r, &cfg).unwrap();
            let hi = rate_closed_form(r, &cfg).unwrap();
            assert!(rel(hi, c) <= 0.01, "{r} tp {tp}");
            assert!(rel(rate_closed_form(r, &cfg.with_rho(1e8).unwrap()).unwrap(), c) <= 1e-3);
            assert_eq!(c, rate_ceiling(r, &cfg.with_rho(3.0).unwrap()).unwrap());
        }
    }
    // Per-stream ceiling grows with Tp once the data-fraction factor is removed.
    for r in ReceiverKind::ALL {
        let per_use = |tp| {
            let cfg = SystemConfig::new(4, 4, 200, tp, 1e6, 0.1).unwrap();
            rate_ceiling(r, &cfg).unwrap() / cfg.data_fraction()
        };
        assert!(per_use(4) < per_use(8) && per_use(8) < per_use(16), "{r}");
    }
    assert!(rate_ceiling(ReceiverKind::Zf, &SystemConfig::new(4, 4, 200, 4, 10.0, 0.0).unwrap()).is_err());
}

#[test]
fn end_to_end_sinr_identities() {
    let cases = [
        (SystemConfig::new(4, 6, 100, 6, 10.0, 0.1).unwrap(), ReceiverKind::Mmse, 1e-8),
        (SystemConfig::new(2, 2, 100, 2, 10.0, 0.0).unwrap(), ReceiverKind::Zf, 1e-8),
        (SystemConfig::new(1, 3, 100, 2, 10.0, 0.1).unwrap(), ReceiverKind::Mrc, 1e-10),
    ];
    for (cfg, r, tol) in cases {
        let dev = validate_sinr_end_to_end(&cfg, r, 200, RandomStream::new(17, 0)).unwrap();
        assert!(dev <= tol, "{r}: {dev}");
    }
}

#[test]
fn mean_sinr_converges_to_deterministic_equivalent() {
    for delta in [0.0, 0.1] {
        let mut prev = f64::INFINITY;
        for (nt, nr) in [(8, 16), (16, 32), (32, 64)] {
            let cfg = SystemConfig::new(nt, nr, 500, nt, 10.0, delta).unwrap();
            let s = sample_sinr(&cfg, ReceiverKind::Mmse, 4000, RandomStream::new(18, nt as u64)).unwrap();
            let det = det_sinr(ReceiverKind::Mmse, &AsymptoticParams::from_config(&cfg), delta).unwrap();
            let dev = rel(s.mean(), det);
            assert!(dev < prev, "δ {delta} ({nt},{nr}): {dev} after {prev}");
            prev = dev;
        }
        assert!(prev <= 0.03);
    }
}

#[test]
fn det_rate_example_against_simulation() {
    let cfg = SystemConfig::new(32, 64, 500, 32, 10.0, 0.0).unwrap();
    let det = det_rate(ReceiverKind::Zf, &cfg).unwrap();
    assert!((det - 75.67).abs() < 0.01, "{det}");
    let emp = empirical_rate(&cfg, ReceiverKind::Zf, 2000, RandomStream::new(19, 0)).unwrap();
    assert!(rel(det, emp) <= 0.03, "{det} vs {emp}");
}
