//! Subcommand dispatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use coded_delay::codec::{self, CodeSpec, CodecError, ContentFile};

use crate::config::{parse_config_with_overrides, ConfigError, ExperimentConfig, Mode};
use crate::output::{emit_cdf, write_cdf, write_csv, write_rows, OutputError};
use crate::sweep::{run_sweep, run_sweep_with_summaries};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Output(#[from] OutputError),
    #[error("codec: {0}")]
    Codec(#[from] CodecError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Output(_) | CliError::Codec(_) => 2,
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Output(OutputError {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "coded-delay",
    version,
    about = "Latency models for coded distributed storage"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fork-join lower and upper bounds.
    Bounds(ExperimentArgs),
    /// Fountain-code access model, closed form or simulated.
    Fountain {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Also simulate and compare against the closed form.
        #[arg(long)]
        simulate: bool,
    },
    /// Fork-join simulation with bounds.
    Simulate(ExperimentArgs),
    /// Run the mode named in the config (or by --mode).
    Sweep {
        #[command(flatten)]
        args: ExperimentArgs,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Fork-join response-time ECDF as `t,fraction` CSV.
    Cdf(ExperimentArgs),
    /// MDS shard encoding and decoding.
    #[command(subcommand)]
    Codec(CodecCommand),
}

/// Flags mirror config keys and override the config file. Values use the
/// config syntax, so `--k 1..10` and `--lambda {1,2}` are accepted.
#[derive(Debug, Args, Default)]
pub struct ExperimentArgs {
    /// Config file in `key = value` format.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, short)]
    pub n: Option<String>,
    #[arg(long, short)]
    pub k: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    /// Delivery time D.
    #[arg(long, short = 'D')]
    pub delivery: Option<String>,
    #[arg(long)]
    pub wait_scale: Option<String>,
    #[arg(long)]
    pub requests: Option<String>,
    #[arg(long)]
    pub warmup: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub replications: Option<String>,
    #[arg(long)]
    pub ecdf_points: Option<String>,
    /// `preempt` or `queued-only`.
    #[arg(long)]
    pub cancel: Option<String>,
    #[arg(long)]
    pub expansion: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<String>,
}

impl ExperimentArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("name", &self.name),
            ("n", &self.n),
            ("k", &self.k),
            ("lambda", &self.lambda),
            ("mu", &self.mu),
            ("delivery", &self.delivery),
            ("wait_scale", &self.wait_scale),
            ("requests", &self.requests),
            ("warmup", &self.warmup),
            ("seed", &self.seed),
            ("replications", &self.replications),
            ("ecdf_points", &self.ecdf_points),
            ("cancel", &self.cancel),
            ("expansion", &self.expansion),
            ("output", &self.output),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    fn load(&self, mode: Option<Mode>) -> Result<ExperimentConfig, CliError> {
        let text = match &self.config {
            Some(p) => fs::read_to_string(p).map_err(|e| io_err(p, e))?,
            None => String::new(),
        };
        let mut ov = self.overrides();
        if let Some(m) = mode {
            ov.push(("mode".into(), m.as_str().into()));
        }
        Ok(parse_config_with_overrides(&text, &ov)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum CodecCommand {
    /// Split a file into n shard files, any k of which recover it.
    Encode {
        #[arg(long, short)]
        n: usize,
        #[arg(long, short)]
        k: usize,
        #[arg(long, short)]
        input: PathBuf,
        /// Directory receiving `shard-<index>.cdsh` files.
        #[arg(long, short)]
        out_dir: PathBuf,
    },
    /// Rebuild the original file from at least k shard files.
    Decode {
        #[arg(required = true)]
        shards: Vec<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
}

/// Runs a parsed command line. Tabular output without a configured path
/// goes to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds(a) => rows(&a.load(Some(Mode::Bounds))?, stdout),
        Command::Fountain { args, simulate } => {
            let mode = if simulate {
                Mode::FountainSim
            } else {
                Mode::FountainAnalytic
            };
            rows(&args.load(Some(mode))?, stdout)
        }
        Command::Simulate(a) => rows(&a.load(Some(Mode::ForkJoinSim))?, stdout),
        Command::Sweep { args, mode } => {
            let mode = mode.map(|m| m.parse::<Mode>()).transpose().map_err(CliError::Usage)?;
            let cfg = args.load(mode)?;
            if cfg.mode == Mode::Cdf {
                cdf(&cfg, stdout)
            } else {
                rows(&cfg, stdout)
            }
        }
        Command::Cdf(a) => cdf(&a.load(Some(Mode::Cdf))?, stdout),
        Command::Codec(c) => codec_cmd(c),
    }
}

fn rows(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = run_sweep(cfg);
    match &cfg.output {
        Some(p) => write_csv(&rows, p)?,
        None => write_rows(&rows, stdout).map_err(|e| io_err(Path::new("<stdout>"), e))?,
    }
    Ok(())
}

/// Path for one point's ECDF when a grid has several points.
fn point_path(base: &Path, n: usize, k: usize) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_n{n}_k{k}{ext}"))
}

fn cdf(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let results = run_sweep_with_summaries(cfg);
    if results.len() > 1 && cfg.output.is_none() {
        return Err(ConfigError::Range {
            key: "output".into(),
            reason: "a multi-point cdf run needs an output path".into(),
        }
        .into());
    }
    let single = results.len() == 1;
    for (row, summary) in &results {
        let Some(s) = summary else {
            eprintln!(
                "skipping n={} k={}: {}",
                row.n,
                row.k,
                row.note.as_deref().unwrap_or("no samples")
            );
            continue;
        };
        match &cfg.output {
            Some(p) if single => emit_cdf(s, p)?,
            Some(p) => emit_cdf(s, &point_path(p, row.n, row.k))?,
            None => write_cdf(s, &mut *stdout).map_err(|e| io_err(Path::new("<stdout>"), e))?,
        }
    }
    Ok(())
}

fn shard_name(index: usize) -> String {
    format!("shard-{index:03}.cdsh")
}

fn codec_cmd(c: CodecCommand) -> Result<(), CliError> {
    match c {
        CodecCommand::Encode { n, k, input, out_dir } => {
            let spec = CodeSpec::new(n, k)?;
            let bytes = fs::read(&input).map_err(|e| io_err(&input, e))?;
            let shards = codec::encode(&spec, &ContentFile::new(bytes))?;
            fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
            for s in &shards {
                let path = out_dir.join(shard_name(s.index));
                fs::write(&path, codec::serialize_shard(s)).map_err(|e| io_err(&path, e))?;
            }
            Ok(())
        }
        CodecCommand::Decode { shards, output } => {
            let mut parsed = Vec::with_capacity(shards.len());
            for p in &shards {
                let bytes = fs::read(p).map_err(|e| io_err(p, e))?;
                parsed.push(codec::parse_shard(&bytes)?);
            }
            let first = &parsed[0];
            let spec = CodeSpec::new(first.n, first.k)?;
            let content = codec::decode(&spec, &parsed)?;
            fs::write(&output, content.bytes()).map_err(|e| io_err(&output, e))?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_paths_keep_extension() {
        assert_eq!(
            point_path(Path::new("out/cdf.csv"), 10, 5),
            PathBuf::from("out/cdf_n10_k5.csv")
        );
        assert_eq!(point_path(Path::new("cdf"), 2, 1), PathBuf::from("cdf_n2_k1"));
    }

    #[test]
    fn exit_codes() {
        let cfg = CliError::Config(ConfigError::Range {
            key: "k".into(),
            reason: "x".into(),
        });
        assert_eq!(cfg.exit_code(), 1);
        let io = io_err(Path::new("x"), std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 2);
    }
}
