//! Training-length optimization over the coherence block.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::rate_closed_form;
use crate::asymptotic::det_rate_at;
use crate::{ConfigTemplate, Error, ReceiverKind, Result};

/// Coherence lengths from which the asymptotic search switches to the concave search.
pub const CONCAVE_SEARCH_MIN_T: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Exhaustive,
    ConcaveSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpSearchResult {
    pub tp_star: usize,
    pub rate_at_star: f64,
    /// Every evaluated `(tp, rate)`, sorted by `tp`.
    pub trace: Vec<(usize, f64)>,
    pub method: SearchMethod,
}

/// Largest rate, smallest `tp` among ties.
fn best(trace: &[(usize, f64)]) -> Result<(usize, f64)> {
    let mut out: Option<(usize, f64)> = None;
    for &(tp, r) in trace {
        if !r.is_finite() {
            return Err(Error::Accuracy(format!("non-finite rate at tp = {tp}")));
        }
        match out {
            Some((_, br)) if r <= br => {}
            _ => out = Some((tp, r)),
        }
    }
    out.ok_or_else(|| Error::Domain("empty training-length range".into()))
}

fn scan<F>(range: std::ops::RangeInclusive<usize>, f: F) -> Result<Vec<(usize, f64)>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let tps: Vec<usize> = range.collect();
    tps.par_iter().map(|&tp| Ok((tp, f(tp)?))).collect()
}

fn exhaustive<F>(tpl: &ConfigTemplate, f: F) -> Result<TpSearchResult>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    let trace = scan(tpl.nt..=tpl.t - 1, f)?;
    let (tp_star, rate_at_star) = best(&trace)?;
    Ok(TpSearchResult { tp_star, rate_at_star, trace, method: SearchMethod::Exhaustive })
}

/// Maximizes the exact ergodic rate over every `tp ∈ [Nt, T-1]`.
pub fn optimize_tp_exact(tpl: &ConfigTemplate, receiver: ReceiverKind) -> Result<TpSearchResult> {
    receiver.check_dimensions(tpl.nt, tpl.nr)?;
    exhaustive(tpl, |tp| rate_closed_form(receiver, &tpl.with_tp(tp)?))
}

/// Maximizes the deterministic-equivalent rate; uses the concave search
/// for `T >= CONCAVE_SEARCH_MIN_T` and an exhaustive scan otherwise.
pub fn optimize_tp_asymptotic(tpl: &ConfigTemplate, receiver: ReceiverKind) -> Result<TpSearchResult> {
    let method = if tpl.t >= CONCAVE_SEARCH_MIN_T { SearchMethod::ConcaveSearch } else { SearchMethod::Exhaustive };
    optimize_tp_asymptotic_with(tpl, receiver, method)
}

pub fn optimize_tp_asymptotic_with(
    tpl: &ConfigTemplate,
    receiver: ReceiverKind,
    method: SearchMethod,
) -> Result<TpSearchResult> {
    let f = |tp: usize| det_rate_at(receiver, tpl, tp);
    // Surface configuration errors (e.g. ZF at beta = 1) before searching.
    f(tpl.nt)?;
    match method {
        SearchMethod::Exhaustive => exhaustive(tpl, f),
        SearchMethod::ConcaveSearch => concave_search(tpl, f),
    }
}

/// Ternary search on the integer grid; valid for strictly concave objectives.
fn concave_search<F: Fn(usize) -> Result<f64>>(tpl: &ConfigTemplate, f: F) -> Result<TpSearchResult> {
    let mut trace = Vec::new();
    let eval = |tp: usize, trace: &mut Vec<(usize, f64)>| -> Result<f64> {
        let r = f(tp)?;
        trace.push((tp, r));
        Ok(r)
    };
    let (mut lo, mut hi) = (tpl.nt, tpl.t - 1);
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        if eval(m1, &mut trace)? < eval(m2, &mut trace)? {
            lo = m1 + 1;
        } else {
            hi = m2 - 1;
        }
    }
    for tp in lo..=hi {
        eval(tp, &mut trace)?;
    }
    trace.sort_by_key(|p| p.0);
    trace.dedup_by_key(|p| p.0);
    let (tp_star, rate_at_star) = best(&trace)?;
    Ok(TpSearchResult { tp_star, rate_at_star, trace, method: SearchMethod::ConcaveSearch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ties_break_to_smallest_tp() {
        let trace = vec![(4, 1.0), (5, 2.0), (6, 2.0), (7, 1.5)];
        assert_eq!(best(&trace).unwrap(), (5, 2.0));
        assert!(best(&[(4, f64::NAN)]).is_err());
    }

    #[test]
    fn concave_search_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let nt = rng.random_range(1..=16usize);
            let nr = nt + rng.random_range(1..=200usize);
            let t = rng.random_range(nt + 3..=3000usize);
            let snr_db: f64 = rng.random_range(-20.0..40.0);
            let delta: f64 = rng.random_range(0.0..0.2);
            let tpl = ConfigTemplate::new(nt, nr, t, crate::db_to_linear(snr_db), delta).unwrap();
            for r in ReceiverKind::ALL {
                let ex = optimize_tp_asymptotic_with(&tpl, r, SearchMethod::Exhaustive).unwrap();
                let cs = optimize_tp_asymptotic_with(&tpl, r, SearchMethod::ConcaveSearch).unwrap();
                assert_eq!(ex.tp_star, cs.tp_star, "{r} {tpl:?}");
                assert!(cs.trace.len() < ex.trace.len() || t < 40);
            }
        }
    }

    #[test]
    fn exact_optimum_replays() {
        let tpl = ConfigTemplate::new(2, 4, 30, 10.0, 0.1).unwrap();
        let res = optimize_tp_exact(&tpl, ReceiverKind::Mmse).unwrap();
        assert_eq!(res.trace.len(), 28);
        let max = res.trace.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(res.rate_at_star, max);
        assert_eq!(res.trace.iter().find(|p| p.1 == max).unwrap().0, res.tp_star);
    }

    #[test]
    fn massive_arrays_train_minimally() {
        // With impairments every SINR tends to 1/δ² whatever Tp is.
        let tpl = ConfigTemplate::new(4, 4_000_000, 500, 100.0, 0.1).unwrap();
        for r in ReceiverKind::ALL {
            assert_eq!(optimize_tp_asymptotic(&tpl, r).unwrap().tp_star, 4, "{r}");
        }
    }

    #[test]
    fn large_t_uses_concave_search() {
        let tpl = ConfigTemplate::new(8, 64, 20_000, 10.0, 0.1).unwrap();
        let res = optimize_tp_asymptotic(&tpl, ReceiverKind::Mmse).unwrap();
        assert_eq!(res.method, SearchMethod::ConcaveSearch);
        assert!(res.trace.len() < 200);
    }
}
