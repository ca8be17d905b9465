//! Command-line driver: one subcommand per computation, JSON config in, CSV/JSON out.
//!
//! Exit codes: 0 success, 1 internal or I/O error, 2 dynamically unstable,
//! 3 non-unique steady state, 4 invalid configuration.

mod config;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::info;

use config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Stability,
    Steady,
    Entanglement,
    Disorder,
    Spectrum,
    Gap,
    EpScan,
}

#[derive(Debug, Parser)]
#[command(name = "dissipair", version, about = "Quadratic bosonic lattices with a dissipative pairing jump")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid and ensemble parallelism.
    #[arg(long, env = "DISSIPAIR_THREADS")]
    threads: Option<usize>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// For `steady`: record an instability in `steady_error.json` and exit 0.
    #[arg(long)]
    expect_unstable: bool,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Model(dissipair::Error),
    Io(String),
}

impl From<dissipair::Error> for Failure {
    fn from(e: dissipair::Error) -> Self {
        Failure::Model(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use dissipair::Error as E;
        match self {
            Failure::Config(_) => 4,
            Failure::Io(_) => 1,
            Failure::Model(e) if e.is_unstable() => 2,
            Failure::Model(E::NonUnique(_)) => 3,
            Failure::Model(
                E::InvalidParameter(_) | E::DimensionMismatch(_) | E::MixedSublattice(..) | E::NotChiral(..),
            ) => 4,
            Failure::Model(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(s) => write!(f, "configuration error: {s}"),
            Failure::Model(e) => write!(f, "{e}"),
            Failure::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

/// A finished output file, held in memory until every file of the run is ready.
pub struct Artifact {
    pub name: String,
    pub content: Vec<u8>,
}

fn version() -> String {
    match option_env!("DISSIPAIR_GIT_DESCRIBE") {
        Some(d) => d.to_string(),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_all(dir: &Path, command: Command, cfg: &RunConfig, seed: u64, artifacts: &[Artifact]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let cfg_value = serde_json::to_value(cfg).map_err(|e| Failure::Io(e.to_string()))?;
    let command_name = command.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.content).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let meta = serde_json::json!({
            "command": command_name,
            "config": cfg_value,
            "file": a.name,
            "seed": seed,
            "version": version(),
        });
        let mut text = serde_json::to_string_pretty(&meta).map_err(|e| Failure::Io(e.to_string()))?;
        text.push('\n');
        let meta_path = dir.join(format!("{}.meta.json", a.name));
        std::fs::write(&meta_path, text).map_err(|e| Failure::Io(format!("{}: {e}", meta_path.display())))?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli.config)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.as_ref()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let artifacts = match tasks::execute(cli.command, &cfg, seed) {
        Err(Failure::Model(e)) if cli.expect_unstable && cli.command == Command::Steady && e.is_unstable() => {
            let mut text = serde_json::to_string_pretty(&serde_json::json!({"error": e.to_string(), "kind": "unstable"}))
                .map_err(|e| Failure::Io(e.to_string()))?;
            text.push('\n');
            vec![Artifact { name: "steady_error.json".into(), content: text.into_bytes() }]
        }
        other => other?,
    };
    write_all(&dir, cli.command, &cfg, seed, &artifacts)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    faer::set_global_parallelism(faer::Parallelism::None);
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dissipair: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
