use std::fs;
use std::path::{Path, PathBuf};

use microlocal::spacetime::Region;

use crate::config::{CliError, ExperimentConfig};
use crate::envelope::{Envelope, SCHEMA_VERSION};
use crate::experiments::{find, Ctx};

/// Seed used when neither the command line nor the config gives one.
pub const DEFAULT_SEED: u64 = 20_161_017;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's seed.
    pub seed: Option<u64>,
}

pub struct Outcome {
    pub envelope: Envelope,
    pub regions: Vec<(String, Region)>,
    pub attachments: Vec<(String, Vec<u8>)>,
}

/// Runs one experiment. `source` is the config text as read from disk, kept
/// verbatim in the envelope; without it the canonical TOML is recorded.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    source: Option<&str>,
    opts: &RunOptions,
) -> Result<Outcome, CliError> {
    let spec = find(&cfg.experiment)
        .ok_or_else(|| CliError::Usage(format!("unknown experiment `{}`", cfg.experiment)))?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let ctx = Ctx {
        params: &cfg.params,
        seed,
    };
    let report = (spec.run)(&ctx)?;
    let pass = !report.checks.is_empty() && report.checks.iter().all(|c| c.pass);
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION.into(),
        experiment: spec.id.into(),
        group: spec.group.name().into(),
        criterion: spec.criterion,
        title: spec.title.into(),
        config: source.map_or_else(|| cfg.to_toml(), str::to_string),
        params: report.params,
        seed,
        tolerances: report.tolerances,
        tables: report.tables,
        checks: report.checks,
        notes: report.notes,
        pass,
    };
    Ok(Outcome {
        envelope,
        regions: report.regions,
        attachments: report.attachments,
    })
}

/// Writes `<id>.json`, one CSV per table and attachment, and PNG masks when
/// asked. Returns the paths written.
pub fn write_outputs(o: &Outcome, dir: &Path, png: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let id = &o.envelope.experiment;
    let mut written = Vec::new();
    let json = dir.join(format!("{id}.json"));
    fs::write(&json, o.envelope.to_json())?;
    written.push(json);
    for (name, table) in &o.envelope.tables {
        let path = dir.join(format!("{id}.{name}.csv"));
        let file = fs::File::create(&path)?;
        table
            .write_csv(file)
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        written.push(path);
    }
    for (name, bytes) in &o.attachments {
        let path = dir.join(format!("{id}.{name}.csv"));
        fs::write(&path, bytes)?;
        written.push(path);
    }
    if png {
        for (name, region) in &o.regions {
            let path = dir.join(format!("{id}.{name}.png"));
            let file = std::io::BufWriter::new(fs::File::create(&path)?);
            region.write_png(file)?;
            written.push(path);
        }
    }
    Ok(written)
}
