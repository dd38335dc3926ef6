use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use omnicell::selection::Strategy;
use omnicell::Architecture;
use omnicell_cli::{cmd_cost, cmd_geometry, cmd_pattern, cmd_sumrate, Config, Overrides, SnrGrid};

#[derive(Parser)]
#[command(
    name = "omnicell",
    version,
    about = "Omnicell RAA versus cell-sectoring experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Element positions and derived array parameters.
    Geometry(Common),
    /// Per-branch response patterns over the angle grid.
    Pattern(Common),
    /// Monte Carlo sum-rate comparison.
    Sumrate(Common),
    /// Hardware cost of the RAA against the sectored ULA.
    Cost(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated architectures: raa, ula, uca.
    #[arg(long, value_delimiter = ',')]
    arch: Option<Vec<String>>,
    /// exhaustive, greedy or min_angle.
    #[arg(long)]
    strategy: Option<String>,
    /// SNR sweep in dB as lo:hi:step.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
}

impl Common {
    fn load(&self) -> Result<Config> {
        let mut cfg = Config::load(&self.config)?;
        let architectures = self
            .arch
            .as_ref()
            .map(|list| {
                list.iter()
                    .map(|a| a.parse::<Architecture>().context("--arch"))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let strategy = self
            .strategy
            .as_deref()
            .map(|s| s.parse::<Strategy>().context("--strategy"))
            .transpose()?;
        let snr_db = self.snr.as_deref().map(str::parse::<SnrGrid>).transpose()?;
        cfg.apply(&Overrides {
            seed: self.seed,
            out_dir: self.out.clone(),
            architectures,
            strategy,
            snr_db,
        })?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let (common, cmd): (&Common, fn(&Config) -> Result<omnicell_cli::CommandOutput>) = match &cli.command {
        Command::Geometry(c) => (c, cmd_geometry),
        Command::Pattern(c) => (c, cmd_pattern),
        Command::Sumrate(c) => (c, cmd_sumrate),
        Command::Cost(c) => (c, cmd_cost),
    };
    let cfg = common.load()?;
    let out = cmd(&cfg)?;
    print!("{}", out.summary);
    println!("outputs in {}", cfg.run.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
