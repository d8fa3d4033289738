use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use microlocal_cli::{
    find, in_group, run_experiment, write_outputs, CliError, ExperimentConfig, Group, RunOptions,
    Spec, REGISTRY,
};

/// Reproduces the microlocal experiments: each one writes a JSON envelope
/// with its verdicts plus CSV tables (and PNG masks with --png).
#[derive(Parser)]
#[command(name = "microlocal", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// TOML experiment config; must name an experiment of the subcommand's group.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `out`, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for intra-experiment parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Random seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write PNG masks.
    #[arg(long, global = true)]
    png: bool,
}

#[derive(Args)]
struct Target {
    /// Run only this experiment id.
    experiment: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// fbi-isometry, fbi-reconstruct, fbi-radial
    Fbi(Target),
    /// zero-energy, bump-lemma
    Microsupport(Target),
    /// wfa-truth-table, counterexample-g
    Wfa(Target),
    /// product-rule, pullback
    Calculus(Target),
    /// causal-geometry, envelope-diamond, tube-sweep
    Envelope(Target),
    /// spectral-class
    Spectral(Target),
    /// qm-identity, correlator-cone
    Qm(Target),
    /// commutator-support
    Commutator(Target),
    /// Every experiment
    All(Target),
}

impl Cmd {
    fn split(&self) -> (Option<Group>, &Target) {
        match self {
            Cmd::Fbi(t) => (Some(Group::Fbi), t),
            Cmd::Microsupport(t) => (Some(Group::Microsupport), t),
            Cmd::Wfa(t) => (Some(Group::Wfa), t),
            Cmd::Calculus(t) => (Some(Group::Calculus), t),
            Cmd::Envelope(t) => (Some(Group::Envelope), t),
            Cmd::Spectral(t) => (Some(Group::Spectral), t),
            Cmd::Qm(t) => (Some(Group::Qm), t),
            Cmd::Commutator(t) => (Some(Group::Commutator), t),
            Cmd::All(t) => (None, t),
        }
    }
}

fn lookup(id: &str, group: Option<Group>) -> Result<&'static Spec, CliError> {
    let spec = find(id).ok_or_else(|| {
        let known: Vec<&str> = REGISTRY.iter().map(|s| s.id).collect();
        CliError::Usage(format!(
            "unknown experiment `{id}`; known: {}",
            known.join(", ")
        ))
    })?;
    if let Some(g) = group {
        if spec.group != g {
            return Err(CliError::Usage(format!(
                "`{id}` belongs to `{}`, not `{}`",
                spec.group.name(),
                g.name()
            )));
        }
    }
    Ok(spec)
}

/// Configs to run, each with its verbatim source when read from disk.
fn plan(cli: &Cli) -> Result<Vec<(ExperimentConfig, Option<String>)>, CliError> {
    let (group, target) = cli.cmd.split();
    if let Some(path) = &cli.config {
        let (cfg, text) = ExperimentConfig::load(path)?;
        lookup(&cfg.experiment, group)?;
        if let Some(id) = &target.experiment {
            if id != &cfg.experiment {
                return Err(CliError::Usage(format!(
                    "config names `{}` but `{id}` was requested",
                    cfg.experiment
                )));
            }
        }
        return Ok(vec![(cfg, Some(text))]);
    }
    if let Some(id) = &target.experiment {
        let spec = lookup(id, group)?;
        return Ok(vec![(ExperimentConfig::new(spec.id), None)]);
    }
    let specs: Vec<&Spec> = match group {
        Some(g) => in_group(g).collect(),
        None => REGISTRY.iter().collect(),
    };
    Ok(specs
        .into_iter()
        .map(|s| (ExperimentConfig::new(s.id), None))
        .collect())
}

fn run(cli: &Cli) -> Result<Vec<serde_json::Value>, CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Run(e.to_string()))?;
    }
    let opts = RunOptions { seed: cli.seed };
    let mut failures = Vec::new();
    for (cfg, source) in plan(cli)? {
        let dir = cli
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let start = Instant::now();
        let outcome = run_experiment(&cfg, source.as_deref(), &opts)?;
        log::info!("{} finished in {:.2?}", cfg.experiment, start.elapsed());
        for path in write_outputs(&outcome, &dir, cli.png)? {
            log::debug!("wrote {}", path.display());
        }
        let env = &outcome.envelope;
        println!(
            "{} criterion {:>2} {}",
            if env.pass { "PASS" } else { "FAIL" },
            env.criterion,
            env.experiment
        );
        for c in env.failures() {
            failures.push(serde_json::json!({
                "experiment": env.experiment,
                "criterion": env.criterion,
                "check": c.name,
                "detail": c.detail,
            }));
        }
    }
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(&cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            let list = serde_json::json!({ "failures": failures });
            println!("{}", serde_json::to_string_pretty(&list).expect("json"));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
