use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qpq_core::attacks::{AttackKind, SimMode};
use qpq_core::harness::{self, ConfigFile, ExperimentConfig, OutputFormat};
use qpq_core::Error;

#[derive(Parser)]
#[command(
    version,
    about = "Leakage analysis of the J-protocol quantum private query"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-round information per final key bit for HbC/honest and MED/UD.
    Tables(TablesArgs),
    /// Monte Carlo multi-round attack simulation.
    Simulate(SimulateArgs),
    /// Exact multi-round curves for MED, UD and the honest user.
    Curves(CurvesArgs),
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value_t = 3)]
    k_min: u32,
    #[arg(long, default_value_t = 8)]
    k_max: u32,
    /// Machine-readable output instead of the text tables.
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML file with any of the flag names as keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<u32>,
    /// Database size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    /// hbc, ud or med.
    #[arg(long)]
    attack: Option<AttackKind>,
    /// 1 (no defense), 2 or 3 key segments.
    #[arg(long)]
    defense_segments: Option<usize>,
    /// faithful or paper-literal.
    #[arg(long)]
    sim_mode: Option<SimMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, default_value_t = 6)]
    k: u32,
    #[arg(long, default_value_t = 32_000)]
    n: usize,
    /// Largest round count.
    #[arg(long, default_value_t = 10_000)]
    rounds: u32,
    /// Repeatable; ud and/or med. Defaults to both.
    #[arg(long)]
    attack: Vec<AttackKind>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimulateArgs {
    fn into_config(self) -> Result<ExperimentConfig, Error> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?.apply(ExperimentConfig::default()),
            None => ExperimentConfig::default(),
        };
        let flags = ConfigFile {
            k: self.k,
            n: self.n,
            rounds: self.rounds,
            trials: self.trials,
            attack: self.attack,
            defense_segments: self.defense_segments,
            sim_mode: self.sim_mode,
            seed: self.seed,
            format: self.format,
            out: self.out,
        };
        Ok(flags.apply(base))
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Tables(args) => {
            let columns = harness::analytic_tables(args.k_min, args.k_max)?;
            let mut out = open_output(args.out.as_ref())?;
            match args.format {
                None => out.write_all(harness::render_tables(&columns).as_bytes())?,
                Some(OutputFormat::Json) => {
                    serde_json::to_writer_pretty(&mut out, &columns).map_err(io::Error::other)?;
                    writeln!(out)?;
                }
                Some(OutputFormat::Csv) => {
                    writeln!(out, "k,hbc,honest,hbc_honest_ratio,med,ud,med_ud_ratio")?;
                    for c in &columns {
                        let f = |x| harness::format_sig(x, harness::SIGNIFICANT_DIGITS);
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{}",
                            c.k,
                            f(c.hbc),
                            f(c.honest),
                            f(c.hbc_honest_ratio),
                            f(c.med),
                            f(c.ud),
                            f(c.med_ud_ratio)
                        )?;
                    }
                }
            }
            out.flush()?;
        }
        Command::Simulate(args) => {
            let config = args.into_config()?;
            config.validate()?;
            // Open the output before the run so a bad path fails fast.
            let mut out = open_output(config.out.as_ref())?;
            let rows = harness::simulate(&config)?;
            harness::write_rows(&rows, config.format, &mut out)?;
            out.flush()?;
        }
        Command::Curves(args) => {
            let attacks = if args.attack.is_empty() {
                vec![AttackKind::Med, AttackKind::Ud]
            } else {
                args.attack
            };
            let rows = harness::analytic_curves(args.k, args.rounds, args.n, &attacks)?;
            let mut out = open_output(args.out.as_ref())?;
            harness::write_rows(&rows, args.format, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
