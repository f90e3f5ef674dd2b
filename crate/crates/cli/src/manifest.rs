use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands;
use crate::error::CliError;
use crate::plot;
use crate::spec::RunSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub seed: u64,
    pub trials: usize,
    pub params: RunSpec,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
    /// SHA-256 of every numeric output file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn file_name(spec: &RunSpec) -> String {
        format!("{}.manifest.json", spec.name)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read(path)?;
        serde_json::from_slice(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `spec`, writes its tables (and optional plot script) into `out` and
/// the manifest next to them. Returns the manifest path.
pub fn execute(spec: &RunSpec, out: &Path) -> Result<PathBuf, CliError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let tables = commands::run(spec)?;
    fs::create_dir_all(out)?;
    let mut outputs = BTreeMap::new();
    for t in &tables {
        let bytes = t.render(spec.format)?;
        let name = t.file_name(spec.format);
        fs::write(out.join(&name), &bytes)?;
        log::info!("wrote {} ({} rows)", out.join(&name).display(), t.rows.len());
        outputs.insert(name, sha256_hex(&bytes));
        if spec.plot_script && spec.format == crate::cli::Format::Csv {
            let script = plot::script(spec, t);
            fs::write(out.join(format!("{}.plot.py", t.name)), script)?;
        }
    }
    let manifest = RunManifest {
        subcommand: spec.command.as_str().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        trials: spec.trials,
        params: spec.clone(),
        started_unix_s: started,
        wall_clock_s: clock.elapsed().as_secs_f64(),
        outputs,
    };
    let path = out.join(RunManifest::file_name(spec));
    fs::write(&path, serde_json::to_vec_pretty(&manifest)?)?;
    Ok(path)
}

/// Re-runs the manifest in a scratch directory and compares digests. When
/// the original outputs sit next to the manifest, the first differing line
/// of each mismatching file is reported.
pub fn verify(path: &Path) -> Result<(), CliError> {
    let manifest = RunManifest::load(path)?;
    let mut spec = manifest.params.clone();
    spec.plot_script = false;
    let scratch = tempfile::tempdir()?;
    execute(&spec, scratch.path())?;
    let here = path.parent().unwrap_or(Path::new("."));
    let mut problems = Vec::new();
    for (name, digest) in &manifest.outputs {
        let fresh = fs::read(scratch.path().join(name))?;
        if &sha256_hex(&fresh) == digest {
            println!("ok       {name}");
            continue;
        }
        let detail = match fs::read(here.join(name)) {
            Ok(old) => first_difference(&old, &fresh),
            Err(_) => "original file not found".to_string(),
        };
        println!("MISMATCH {name}: {detail}");
        problems.push(name.clone());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(problems.join(", ")))
    }
}

fn first_difference(a: &[u8], b: &[u8]) -> String {
    let (a, b) = (String::from_utf8_lossy(a), String::from_utf8_lossy(b));
    for (i, (x, y)) in a.lines().zip(b.lines()).enumerate() {
        if x != y {
            return format!("line {}: recorded `{x}`, re-run `{y}`", i + 1);
        }
    }
    format!("line counts differ ({} vs {})", a.lines().count(), b.lines().count())
}
