//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! Intervals are bisected in order of decreasing error estimate until the
//! combined estimate meets `max(abs, rel * |I|)`. An interval may be bisected
//! at most [`MAX_LEVEL`] times; hitting that limit, or producing a non-finite
//! integrand value, is reported as an accuracy error rather than returning a
//! degraded value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

pub const MAX_LEVEL: u32 = 20;
const MAX_INTERVALS: usize = 20_000;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_983_287_565,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// A piece of the integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Finite(f64, f64),
    /// `[a, inf)`, mapped onto `[0, 1)` through `x = a + t / (1 - t)`.
    Tail(f64),
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_segments(f, &[Segment::Finite(a, b)], tol)
}

pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_segments(f, &[Segment::Tail(a)], tol)
}

/// Integrates over `[points[0], points[last]]` (or to infinity when `tail`),
/// using every point as an initial breakpoint.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tail: bool,
    tol: Tolerance,
) -> Result<Estimate> {
    let mut segs: Vec<Segment> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Segment::Finite(w[0], w[1]))
        .collect();
    if tail {
        let last = *points.last().ok_or_else(|| Error::Domain("no breakpoints".into()))?;
        segs.push(Segment::Tail(last));
    }
    integrate_segments(f, &segs, tol)
}

struct Piece {
    tail_origin: Option<f64>,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    level: u32,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

pub fn integrate_segments<F: Fn(f64) -> f64>(f: F, segments: &[Segment], tol: Tolerance) -> Result<Estimate> {
    let eval = |origin: Option<f64>, t: f64| -> f64 {
        match origin {
            None => f(t),
            Some(a) => {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            }
        }
    };
    let rule = |origin: Option<f64>, lo: f64, hi: f64, level: u32| -> Result<Piece> {
        let (value, error) = kronrod21(|t| eval(origin, t), lo, hi);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Accuracy(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        Ok(Piece { tail_origin: origin, lo, hi, value, error, level })
    };

    let mut heap = BinaryHeap::new();
    for seg in segments {
        let piece = match *seg {
            Segment::Finite(a, b) => rule(None, a, b, 0)?,
            Segment::Tail(a) => rule(Some(a), 0.0, 1.0, 0)?,
        };
        heap.push(piece);
    }

    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Estimate { value, error, intervals: heap.len() });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Accuracy(format!(
                "quadrature hit {MAX_INTERVALS} intervals (value {value:e}, error {error:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.level >= MAX_LEVEL {
            return Err(Error::Accuracy(format!(
                "quadrature did not converge after {MAX_LEVEL} refinement levels on [{}, {}] (value {value:e}, error {error:e})",
                worst.lo, worst.hi
            )));
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        heap.push(rule(worst.tail_origin, worst.lo, mid, worst.level + 1)?);
        heap.push(rule(worst.tail_origin, mid, worst.hi, worst.level + 1)?);
    }
}

/// One 21-point Kronrod evaluation with the QUADPACK error heuristic.
fn kronrod21<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_is_exact_for_degree_31() {
        let (v, _) = kronrod21(|x| x.powi(30) + x.powi(31), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_finite_integral() {
        let est = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, Tolerance::default()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_integral() {
        let est = integrate_to_infinity(|x| (-x).exp() * x * x, 0.0, Tolerance::default()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
        let est = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, Tolerance::default()).unwrap();
        assert!((est.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let est = integrate(|x| x.sqrt(), 0.0, 1.0, Tolerance::new(1e-9, 1e-9)).unwrap();
        assert!((est.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn breakpoints_and_tail() {
        let pts = [0.0, 0.01, 1.0, 10.0];
        let est = integrate_with_breakpoints(|x| (-x).exp(), &pts, true, Tolerance::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn non_convergence_is_an_error() {
        let r = integrate(|x| (1.0 / x).sin() / x, 1e-300, 1.0, Tolerance::new(1e-14, 1e-14));
        assert!(matches!(r, Err(Error::Accuracy(_))));
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, Tolerance::default());
        assert!(matches!(r, Err(Error::Accuracy(_))));
    }
}
