//! Resolution of command-line flags and presets into a fully explicit run.

use serde::{Deserialize, Serialize};

use rtri::ReceiverKind;

use crate::cli::{AsymptoticArgs, Common, Format, Part, Preset, ReceiverArg, ThresholdArgs};
use crate::error::CliError;

pub const DEFAULT_TRIALS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Nmse,
    Outage,
    Rates,
    OptTp,
    Asymptotic,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Nmse => "nmse",
            CommandKind::Outage => "outage",
            CommandKind::Rates => "rates",
            CommandKind::OptTp => "opt-tp",
            CommandKind::Asymptotic => "asymptotic",
        }
    }
}

/// Inclusive dB grid `min, min + step, …, <= max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, CliError> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(CliError::Usage(format!("bad grid bounds [{min}, {max}]")));
        }
        if !(step > 0.0) {
            return Err(CliError::Usage(format!("grid step must be positive (got {step})")));
        }
        Ok(Self { min, max, step })
    }

    /// Points are `min + i·step`, not accumulated, so they are exact on round grids.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// Everything a run depends on; stored in the manifest so `verify` can replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub command: CommandKind,
    pub preset: Option<Preset>,
    /// File stem of the outputs.
    pub name: String,
    pub t: usize,
    pub tp: Option<usize>,
    /// `(nt, nr)` pairs swept by the command.
    pub antennas: Vec<(usize, usize)>,
    /// Second antenna set (large-array training table).
    pub training_antennas: Vec<(usize, usize)>,
    pub deltas: Vec<f64>,
    pub snr_db: Grid,
    pub thresholds_db: Option<Grid>,
    pub deviation_snr_db: Vec<f64>,
    pub part: Part,
    pub trials: usize,
    pub seed: u64,
    pub receivers: Vec<ReceiverKind>,
    pub format: Format,
    pub plot_script: bool,
}

fn preset_command(p: Preset) -> CommandKind {
    match p {
        Preset::Fig1 => CommandKind::Nmse,
        Preset::Fig2 => CommandKind::Outage,
        Preset::Fig3 => CommandKind::Rates,
        Preset::Fig4 => CommandKind::OptTp,
        Preset::Fig5 | Preset::Fig6 => CommandKind::Asymptotic,
    }
}

fn preset_name(p: Preset) -> &'static str {
    match p {
        Preset::Fig1 => "fig1",
        Preset::Fig2 => "fig2",
        Preset::Fig3 => "fig3",
        Preset::Fig4 => "fig4",
        Preset::Fig5 => "fig5",
        Preset::Fig6 => "fig6",
    }
}

/// Defaults of each command. Presets only add a name and,
/// for the asymptotic command, pick the part.
fn defaults(command: CommandKind) -> RunSpec {
    let base = RunSpec {
        command,
        preset: None,
        name: command.as_str().to_string(),
        t: 200,
        tp: None,
        antennas: vec![(4, 4)],
        training_antennas: Vec::new(),
        deltas: vec![0.0, 0.05, 0.15],
        snr_db: Grid { min: -10.0, max: 40.0, step: 2.0 },
        thresholds_db: None,
        deviation_snr_db: Vec::new(),
        part: Part::Both,
        trials: DEFAULT_TRIALS,
        seed: 1,
        receivers: ReceiverKind::ALL.to_vec(),
        format: Format::Csv,
        plot_script: false,
    };
    match command {
        CommandKind::Nmse => RunSpec {
            t: 100,
            tp: Some(4),
            deltas: vec![0.0, 0.05, 0.1, 0.15],
            snr_db: Grid { min: -10.0, max: 60.0, step: 2.0 },
            ..base
        },
        CommandKind::Outage => RunSpec {
            antennas: vec![(5, 5), (5, 30)],
            deltas: vec![0.0, 0.1, 0.15],
            snr_db: Grid { min: 30.0, max: 30.0, step: 2.0 },
            thresholds_db: Some(Grid { min: -10.0, max: 30.0, step: 2.0 }),
            ..base
        },
        CommandKind::Rates => base,
        CommandKind::OptTp => RunSpec { snr_db: Grid { min: -30.0, max: 40.0, step: 2.0 }, ..base },
        CommandKind::Asymptotic => RunSpec {
            t: 500,
            antennas: vec![(4, 8), (8, 16), (16, 32), (32, 64)],
            training_antennas: vec![(8, 32), (8, 256)],
            deltas: vec![0.0, 0.15],
            deviation_snr_db: vec![0.0, 10.0, 20.0, 30.0],
            trials: 10_000,
            ..base
        },
    }
}

pub fn resolve(
    command: CommandKind,
    c: &Common,
    thresholds: Option<&ThresholdArgs>,
    asym: Option<&AsymptoticArgs>,
) -> Result<RunSpec, CliError> {
    let mut s = defaults(command);
    if let Some(p) = c.preset {
        if preset_command(p) != command {
            return Err(CliError::Usage(format!(
                "preset {} belongs to the {} command",
                preset_name(p),
                preset_command(p).as_str()
            )));
        }
        s.preset = Some(p);
        s.name = preset_name(p).to_string();
        match p {
            Preset::Fig5 => s.part = Part::Deviation,
            Preset::Fig6 => s.part = Part::Training,
            _ => {}
        }
    }

    if let Some(t) = c.t {
        s.t = t;
    }
    if c.tp.is_some() {
        s.tp = c.tp;
    }
    if c.nt.is_some() || c.nr.is_some() {
        let (nt0, nr0) = s.antennas[0];
        let pair = (c.nt.unwrap_or(nt0), c.nr.unwrap_or(nr0));
        s.antennas = vec![pair];
        if !s.training_antennas.is_empty() {
            s.training_antennas = vec![pair];
        }
    }
    if !c.deltas.is_empty() {
        s.deltas = c.deltas.clone();
    }
    s.snr_db = Grid::new(
        c.snr_db_min.unwrap_or(s.snr_db.min),
        c.snr_db_max.unwrap_or(s.snr_db.max),
        c.snr_db_step.unwrap_or(s.snr_db.step),
    )?;
    if let (Some(th), Some(g)) = (thresholds, s.thresholds_db) {
        s.thresholds_db = Some(Grid::new(th.min.unwrap_or(g.min), th.max.unwrap_or(g.max), th.step.unwrap_or(g.step))?);
    }
    if let Some(a) = asym {
        if let Some(beta) = a.beta {
            if beta < 1 {
                return Err(CliError::Usage("--beta must be at least 1".into()));
            }
            s.antennas = s.antennas.iter().map(|&(nt, _)| (nt, beta * nt)).collect();
        }
        if !a.deviation_snr_db.is_empty() {
            s.deviation_snr_db = a.deviation_snr_db.clone();
        }
        if let Some(p) = a.part {
            s.part = p;
        }
    }
    if let Some(n) = c.trials {
        s.trials = n;
    }
    s.seed = c.seed;
    s.receivers = match c.receiver {
        ReceiverArg::Zf => vec![ReceiverKind::Zf],
        ReceiverArg::Mrc => vec![ReceiverKind::Mrc],
        ReceiverArg::Mmse => vec![ReceiverKind::Mmse],
        ReceiverArg::All => ReceiverKind::ALL.to_vec(),
    };
    s.format = c.format;
    s.plot_script = c.plot_script;
    validate(&s)?;
    Ok(s)
}

fn validate(s: &RunSpec) -> Result<(), CliError> {
    for &d in &s.deltas {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(CliError::Usage(format!("--delta must be finite and non-negative (got {d})")));
        }
    }
    for &(nt, nr) in s.antennas.iter().chain(&s.training_antennas) {
        if nt == 0 || nr == 0 {
            return Err(CliError::Usage("antenna counts must be positive".into()));
        }
        if nt >= s.t {
            return Err(CliError::Usage(format!("need nt < t (nt = {nt}, t = {})", s.t)));
        }
        if let Some(tp) = s.tp {
            if tp < nt || tp >= s.t {
                return Err(CliError::Usage(format!("need nt <= tp < t (nt = {nt}, tp = {tp}, t = {})", s.t)));
            }
        }
        if s.receivers == [ReceiverKind::Zf] && nr < nt {
            return Err(CliError::Usage(format!("zero-forcing needs nr >= nt (got nt = {nt}, nr = {nr})")));
        }
    }
    Ok(())
}
