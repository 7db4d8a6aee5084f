//! Command-line front end.
//!
//! Settings are layered: config file, then `--set key=value`, then the
//! dedicated flags, each overriding the one before.

pub mod config;
pub mod ingest;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::procedures::{run_stream, ProcedureConfig, ProcedureKind};
use crate::reference::{compare, random_evidence, Divergence};
use crate::simulation::{default_checkpoints, evaluate, replicate_procedures};
use config::{build, is_known_key, parse_entries, Calibrator, Entry, Mode, RunConfig};

pub const THREADS_ENV: &str = "SCORE_FDR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "score-fdr", version, about = "Online FDR control with overshoot-refund e-value procedures")]
pub struct Cli {
    /// Worker threads for replicate runs (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Monte-Carlo FDR/power curves on a synthetic process.
    Simulate(SimulateArgs),
    /// Run procedures over an evidence CSV.
    Ingest(IngestArgs),
    /// Compare every procedure against the brute-force oracle on random streams.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override one config key, e.g. `--set alpha=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ProcedureArgs {
    /// Comma-separated procedure names.
    #[arg(long)]
    pub procedure: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// LOND-type schedule, e.g. `geometric(0.5)`.
    #[arg(long)]
    pub gamma: Option<String>,
    /// LORD/SAFFRON-type schedule, e.g. `0.05` or `rai(0.05,0.5,0.5)`.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub procedure: ProcedureArgs,
    #[arg(long)]
    pub dgp: Option<String>,
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub pi1: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub mu_set: Option<String>,
    #[arg(long)]
    pub phi0: Option<String>,
    #[arg(long)]
    pub phi1: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub replicates: Option<String>,
    /// AR(1) p-values fed to p-value procedures: conditional or marginal.
    #[arg(long)]
    pub pvalues: Option<String>,
    #[arg(long)]
    pub checkpoints: Option<String>,
    #[arg(long)]
    pub checkpoint_stride: Option<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub procedure: ProcedureArgs,
    /// Evidence CSV with a `p`, `e` or `score` column.
    #[arg(long)]
    pub input: Option<String>,
    /// none, vovk or conformal.
    #[arg(long)]
    pub calibrator: Option<String>,
    /// Calibration CSV with a `score` column (conformal only).
    #[arg(long)]
    pub calibration: Option<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Comma-separated procedure names (default: all eleven).
    #[arg(long)]
    pub procedure: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1000)]
    pub streams: usize,
    #[arg(long, default_value_t = 200)]
    pub length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

fn push(out: &mut Vec<(String, String)>, key: &str, v: &Option<String>) {
    if let Some(v) = v {
        out.push((key.to_string(), v.clone()));
    }
}

impl ProcedureArgs {
    fn overrides(&self, out: &mut Vec<(String, String)>) {
        push(out, "procedure", &self.procedure);
        push(out, "alpha", &self.alpha);
        push(out, "gamma", &self.gamma);
        push(out, "omega", &self.omega);
        push(out, "lambda", &self.lambda);
        push(out, "output_dir", &self.output_dir);
    }
}

impl SimulateArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.procedure.overrides(&mut out);
        push(&mut out, "dgp", &self.dgp);
        push(&mut out, "horizon", &self.horizon);
        push(&mut out, "pi1", &self.pi1);
        push(&mut out, "rho", &self.rho);
        push(&mut out, "mu_set", &self.mu_set);
        push(&mut out, "phi0", &self.phi0);
        push(&mut out, "phi1", &self.phi1);
        push(&mut out, "seed", &self.seed);
        push(&mut out, "replicates", &self.replicates);
        push(&mut out, "pvalues", &self.pvalues);
        push(&mut out, "checkpoints", &self.checkpoints);
        push(&mut out, "checkpoint_stride", &self.checkpoint_stride);
        out
    }
}

impl IngestArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.procedure.overrides(&mut out);
        push(&mut out, "input", &self.input);
        push(&mut out, "calibrator", &self.calibrator);
        push(&mut out, "calibration", &self.calibration);
        out
    }
}

fn overrides_error(message: String) -> Error {
    Error::Config { line: 0, message }
}

/// Merges the config file, `--set` pairs and flags into one validated config.
pub fn resolve_config(args: &ConfigArgs, flags: Vec<(String, String)>, mode: Mode) -> Result<RunConfig> {
    let mut entries: BTreeMap<String, Entry> = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            parse_entries(&text)?
        }
        None => BTreeMap::new(),
    };
    let mut pairs = Vec::new();
    for s in &args.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| overrides_error(format!("--set expects KEY=VALUE, got `{s}`")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    pairs.extend(flags);
    for (k, v) in pairs {
        if !is_known_key(&k) {
            return Err(overrides_error(format!("unknown key `{k}` on the command line")));
        }
        entries.insert(k, Entry { line: 0, value: v });
    }
    build(entries, Some(mode))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Runs a simulation config; returns the summary lines printed to stdout.
pub fn run_simulate(cfg: &RunConfig) -> Result<Vec<String>> {
    let procs = cfg.procedure_configs()?;
    let checkpoints = match &cfg.checkpoints {
        Some(c) => c.clone(),
        None => default_checkpoints(cfg.dgp.horizon, cfg.checkpoint_stride),
    };
    log::info!(
        "simulating {} on {} (T = {}, {} replicates)",
        cfg.procedures.iter().map(|p| p.name()).collect::<Vec<_>>().join(", "),
        cfg.dgp.dgp,
        cfg.dgp.horizon,
        cfg.replicates
    );
    let reports = replicate_procedures(&cfg.dgp, &procs, cfg.replicates, cfg.dgp.seed, &checkpoints)?;
    ensure_dir(&cfg.output_dir)?;
    let mut lines = Vec::new();
    for r in &reports {
        let path = cfg.output_dir.join(format!("metrics_{}.csv", r.procedure.kind));
        report::write_metrics(r, &path)?;
        lines.push(report::metrics_summary_line(r));
    }
    Ok(lines)
}

/// Runs an ingest config; returns the summary lines printed to stdout.
pub fn run_ingest(cfg: &RunConfig) -> Result<Vec<String>> {
    let input = cfg.input.as_deref().expect("validated by build");
    let raw = ingest::read_stream(input)?;
    let cal = match (&cfg.calibrator, &cfg.calibration) {
        (Calibrator::Conformal, Some(p)) => Some(ingest::read_calibration(p)?),
        _ => None,
    };
    ensure_dir(&cfg.output_dir)?;
    let mut lines = Vec::new();
    for p in cfg.procedure_configs()? {
        let obs = raw.observations(p.kind.evidence_kind(), cfg.calibrator, cal.as_ref())?;
        let tr = run_stream(&p, &obs)?;
        report::write_decisions(&tr, &cfg.output_dir.join(format!("decisions_{}.csv", p.kind)))?;
        if raw.truth.is_some() {
            let c = evaluate(&tr)?;
            let t: Vec<u64> = (1..=c.fdp.len() as u64).collect();
            let zeros = vec![0.0; t.len()];
            report::write_metric_rows(
                &cfg.output_dir.join(format!("metrics_{}.csv", p.kind)),
                &t,
                &c.fdp,
                &zeros,
                &c.power,
                &zeros,
            )?;
        }
        lines.push(report::summary_line(&tr));
    }
    Ok(lines)
}

/// Oracle comparison over random streams; `Ok(lines)` only when every
/// procedure agrees within the tolerance.
pub fn run_oracle_check(args: &OracleArgs) -> Result<Vec<String>> {
    let kinds: Vec<ProcedureKind> = match &args.procedure {
        Some(s) => s.split(',').map(|p| p.trim().parse()).collect::<Result<_>>()?,
        None => ProcedureKind::ALL.to_vec(),
    };
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for kind in kinds {
        let cfg = ProcedureConfig::new(kind, args.alpha)?;
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut worst = Divergence::default();
        for _ in 0..args.streams {
            let xs = random_evidence(kind.evidence_kind(), args.length, &mut rng);
            worst = worst.merge(compare(&cfg, &xs)?);
        }
        let ok = worst.within(args.tolerance);
        lines.push(format!(
            "{kind}: {} max |diff| = {:.3e} (alpha {:.1e}, cost {:.1e}, wealth {:.1e}), decision mismatches = {}",
            if ok { "ok" } else { "DIVERGED" },
            worst.max_abs(),
            worst.alpha,
            worst.cost,
            worst.wealth,
            worst.decision_mismatches
        ));
        if !ok {
            failed.push(kind.name());
        }
    }
    if failed.is_empty() {
        Ok(lines)
    } else {
        for l in &lines {
            println!("{l}");
        }
        Err(Error::invalid("oracle-check", failed.join(","), "incremental and oracle traces diverge"))
    }
}

pub fn run(cli: &Cli) -> Result<Vec<String>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::invalid("threads", n, "must be at least 1"));
        }
        // a pool already built (by an earlier call in the same process) is kept
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::warn!("thread pool already initialised; --threads ignored");
        }
    }
    match &cli.command {
        Command::Simulate(a) => run_simulate(&resolve_config(&a.config, a.overrides(), Mode::Simulate)?),
        Command::Ingest(a) => run_ingest(&resolve_config(&a.config, a.overrides(), Mode::Ingest)?),
        Command::OracleCheck(a) => run_oracle_check(a),
    }
}
