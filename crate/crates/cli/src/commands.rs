//! Sweep drivers: each turns a [`RunSpec`] into one or more tables.

use rayon::prelude::*;

use rtri::analytic::{outage, rate_ceiling, rate_closed_form};
use rtri::asymptotic::det_rate;
use rtri::montecarlo::{empirical_nmse, empirical_outage, empirical_rates, sample_sinr};
use rtri::optimizer::{optimize_tp_asymptotic, optimize_tp_exact};
use rtri::{db_to_linear, linear_to_db, ConfigTemplate, DerivedParams, RandomStream, ReceiverKind, SystemConfig};

use crate::cli::Part;
use crate::error::CliError;
use crate::spec::{CommandKind, RunSpec};
use crate::table::{Cell, Table};

type Rows = Result<Vec<Vec<Cell>>, CliError>;

pub fn run(spec: &RunSpec) -> Result<Vec<Table>, CliError> {
    match spec.command {
        CommandKind::Nmse => nmse(spec).map(|t| vec![t]),
        CommandKind::Outage => outage_curves(spec).map(|t| vec![t]),
        CommandKind::Rates => rates(spec).map(|t| vec![t]),
        CommandKind::OptTp => opt_tp(spec).map(|t| vec![t]),
        CommandKind::Asymptotic => asymptotic(spec),
    }
}

/// Receivers usable on an `nt x nr` link; ZF is dropped for wide channels.
fn receivers_for(spec: &RunSpec, nt: usize, nr: usize) -> Vec<ReceiverKind> {
    spec.receivers
        .iter()
        .copied()
        .filter(|r| {
            let ok = r.check_dimensions(nt, nr).is_ok();
            if !ok {
                log::warn!("skipping {r} for nt = {nt}, nr = {nr}");
            }
            ok
        })
        .collect()
}

/// Evaluates `jobs` on the worker pool, keeping their order; job `i` draws
/// from stream `i` of the run seed.
fn sweep<J: Sync, F>(seed: u64, jobs: &[J], f: F) -> Rows
where
    F: Fn(&J, RandomStream) -> Rows + Sync,
{
    let parts: Vec<Vec<Vec<Cell>>> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, j)| f(j, RandomStream::new(seed, i as u64)))
        .collect::<Result<_, _>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn nmse(spec: &RunSpec) -> Result<Table, CliError> {
    let (nt, nr) = spec.antennas[0];
    let tp = spec.tp.unwrap_or(nt);
    let jobs: Vec<(f64, f64)> =
        spec.deltas.iter().flat_map(|&d| spec.snr_db.points().into_iter().map(move |s| (d, s))).collect();
    let mut table = Table::new(&spec.name, &["snr_db", "delta", "nmse_analytic", "nmse_floor", "nmse_empirical"]);
    table.rows = sweep(spec.seed, &jobs, |&(delta, snr), rs| {
        let cfg = SystemConfig::from_db(nt, nr, spec.t, tp, snr, delta)?;
        let emp = if spec.trials > 0 { Some(empirical_nmse(&cfg, spec.trials, rs)?) } else { None };
        Ok(vec![vec![
            snr.into(),
            delta.into(),
            cfg.derive().sigma2_err.into(),
            DerivedParams::nmse_floor(&cfg).into(),
            emp.into(),
        ]])
    })?;
    Ok(table)
}

fn outage_curves(spec: &RunSpec) -> Result<Table, CliError> {
    let snr = spec.snr_db.points();
    let grid = spec.thresholds_db.expect("outage thresholds").points();
    let mut jobs = Vec::new();
    for &(nt, nr) in &spec.antennas {
        for &s in &snr {
            for &d in &spec.deltas {
                for r in receivers_for(spec, nt, nr) {
                    jobs.push((nt, nr, s, d, r));
                }
            }
        }
    }
    let mut table = Table::new(
        &spec.name,
        &["nt", "nr", "snr_db", "receiver", "delta", "threshold_db", "threshold", "outage_analytic", "outage_empirical"],
    );
    table.rows = sweep(spec.seed, &jobs, |&(nt, nr, snr, delta, r), rs| {
        let tp = spec.tp.unwrap_or(nt);
        let cfg = SystemConfig::from_db(nt, nr, spec.t, tp, snr, delta)?;
        // The grid plus the wall itself, where the analytic CDF reaches 1.
        let mut thresholds: Vec<f64> = grid.iter().map(|&db| db_to_linear(db)).collect();
        if delta > 0.0 {
            let wall = 1.0 / (delta * delta);
            if !thresholds.contains(&wall) {
                thresholds.push(wall);
                thresholds.sort_by(f64::total_cmp);
            }
        }
        let samples = if spec.trials > 0 { Some(sample_sinr(&cfg, r, spec.trials, rs)?) } else { None };
        thresholds
            .into_iter()
            .map(|x| {
                let emp = samples.as_ref().map(|s| empirical_outage(s, x)).transpose()?;
                Ok(vec![
                    nt.into(),
                    nr.into(),
                    snr.into(),
                    r.as_str().into(),
                    delta.into(),
                    linear_to_db(x).into(),
                    x.into(),
                    outage(r, &cfg, x)?.into(),
                    emp.into(),
                ])
            })
            .collect()
    })?;
    Ok(table)
}

fn rates(spec: &RunSpec) -> Result<Table, CliError> {
    let (nt, nr) = spec.antennas[0];
    let receivers = receivers_for(spec, nt, nr);
    let mut jobs = Vec::new();
    for &d in &spec.deltas {
        for r in &receivers {
            for s in spec.snr_db.points() {
                jobs.push((d, *r, s));
            }
        }
    }
    let mut table = Table::new(
        &spec.name,
        &["snr_db", "receiver", "delta", "tp_star", "rate_analytic", "rate_empirical", "rate_ceiling"],
    );
    table.rows = sweep(spec.seed, &jobs, |&(delta, r, snr), rs| {
        let tpl = ConfigTemplate::new(nt, nr, spec.t, db_to_linear(snr), delta)?;
        let (tp, cfg) = match spec.tp {
            Some(tp) => (tp, tpl.with_tp(tp)?),
            None => {
                let best = optimize_tp_exact(&tpl, r)?;
                (best.tp_star, tpl.with_tp(best.tp_star)?)
            }
        };
        let analytic = rate_closed_form(r, &cfg)?;
        let emp = if spec.trials > 0 {
            Some(empirical_rates(&cfg, &[r], spec.trials, rs)?[0])
        } else {
            None
        };
        let ceiling = if delta > 0.0 { Some(rate_ceiling(r, &cfg)?) } else { None };
        Ok(vec![vec![snr.into(), r.as_str().into(), delta.into(), tp.into(), analytic.into(), emp.into(), ceiling.into()]])
    })?;
    Ok(table)
}

fn opt_tp(spec: &RunSpec) -> Result<Table, CliError> {
    let (nt, nr) = spec.antennas[0];
    let receivers = receivers_for(spec, nt, nr);
    let mut jobs = Vec::new();
    for &d in &spec.deltas {
        for r in &receivers {
            for s in spec.snr_db.points() {
                jobs.push((d, *r, s));
            }
        }
    }
    let mut table = Table::new(&spec.name, &["snr_db", "receiver", "delta", "tp_star", "rate_at_star"]);
    table.rows = sweep(spec.seed, &jobs, |&(delta, r, snr), _| {
        let tpl = ConfigTemplate::new(nt, nr, spec.t, db_to_linear(snr), delta)?;
        let best = optimize_tp_exact(&tpl, r)?;
        Ok(vec![vec![snr.into(), r.as_str().into(), delta.into(), best.tp_star.into(), best.rate_at_star.into()]])
    })?;
    Ok(table)
}

fn asymptotic(spec: &RunSpec) -> Result<Vec<Table>, CliError> {
    let mut out = Vec::new();
    if matches!(spec.part, Part::Deviation | Part::Both) {
        out.push(asymptotic_deviation(spec)?);
    }
    if matches!(spec.part, Part::Training | Part::Both) {
        out.push(asymptotic_training(spec)?);
    }
    Ok(out)
}

fn part_name(spec: &RunSpec, part: &str) -> String {
    match spec.part {
        Part::Both => format!("{}_{part}", spec.name),
        _ => spec.name.clone(),
    }
}

fn asymptotic_deviation(spec: &RunSpec) -> Result<Table, CliError> {
    let mut jobs = Vec::new();
    for &(nt, nr) in &spec.antennas {
        for &d in &spec.deltas {
            for &s in &spec.deviation_snr_db {
                jobs.push((nt, nr, d, s));
            }
        }
    }
    let mut table = Table::new(
        part_name(spec, "deviation"),
        &[
            "nt",
            "nr",
            "snr_db",
            "receiver",
            "delta",
            "tp",
            "det_rate",
            "rate_analytic",
            "rate_empirical",
            "deviation_analytic",
            "deviation_empirical",
        ],
    );
    table.rows = sweep(spec.seed, &jobs, |&(nt, nr, delta, snr), rs| {
        let tp = spec.tp.unwrap_or(nt).max(nt);
        let cfg = SystemConfig::from_db(nt, nr, spec.t, tp, snr, delta)?;
        // Deterministic equivalents need nr > nt for ZF.
        let receivers: Vec<ReceiverKind> =
            receivers_for(spec, nt, nr).into_iter().filter(|&r| r != ReceiverKind::Zf || nr > nt).collect();
        let emp = if spec.trials > 0 {
            Some(empirical_rates(&cfg, &receivers, spec.trials, rs)?)
        } else {
            None
        };
        receivers
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let det = det_rate(r, &cfg)?;
                let ana = rate_closed_form(r, &cfg)?;
                let e = emp.as_ref().map(|v| v[i]);
                Ok(vec![
                    nt.into(),
                    nr.into(),
                    snr.into(),
                    r.as_str().into(),
                    delta.into(),
                    tp.into(),
                    det.into(),
                    ana.into(),
                    e.into(),
                    ((det - ana).abs() / ana).into(),
                    e.map(|e| (det - e).abs() / e).into(),
                ])
            })
            .collect()
    })?;
    Ok(table)
}

fn asymptotic_training(spec: &RunSpec) -> Result<Table, CliError> {
    let mut jobs = Vec::new();
    for &(nt, nr) in &spec.training_antennas {
        for &d in &spec.deltas {
            for r in receivers_for(spec, nt, nr) {
                if r == ReceiverKind::Zf && nr <= nt {
                    continue;
                }
                for s in spec.snr_db.points() {
                    jobs.push((nt, nr, d, r, s));
                }
            }
        }
    }
    let mut table =
        Table::new(part_name(spec, "training"), &["nt", "nr", "snr_db", "receiver", "delta", "tp_star", "det_rate_at_star"]);
    table.rows = sweep(spec.seed, &jobs, |&(nt, nr, delta, r, snr), _| {
        let tpl = ConfigTemplate::new(nt, nr, spec.t, db_to_linear(snr), delta)?;
        let best = optimize_tp_asymptotic(&tpl, r)?;
        Ok(vec![vec![
            nt.into(),
            nr.into(),
            snr.into(),
            r.as_str().into(),
            delta.into(),
            best.tp_star.into(),
            best.rate_at_star.into(),
        ]])
    })?;
    Ok(table)
}
