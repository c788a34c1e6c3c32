use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bsrelay::bench::{
    run_case_study, run_fig2, run_fig3_fig4, run_outage, run_simulate, write_csv, ExperimentConfig,
};
use bsrelay::{Error, Result};

/// Backscatter relaying experiments. Results are written as CSV (or text for
/// `case-study`) to `--out`, the config's `output_path`, or stdout.
#[derive(Debug, Parser)]
#[command(name = "bsrelay", version)]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed, overriding the configuration.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Output file.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Use the full Monte Carlo and outage volumes (2000 x 1000 symbols, 5000 periods).
    #[arg(long, global = true)]
    paper_scale: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// BER vs budget for every threshold kind, analytic and Monte Carlo.
    Fig2,
    /// Optimal DF power split vs budget, and per-link BER vs split.
    Fig34,
    /// Outage probability vs budget for the configured variants.
    Outage,
    /// Relay vs direct path link budget.
    CaseStudy,
    /// Per-symbol statistics and decisions at one configuration.
    Simulate,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if cli.paper_scale {
        cfg.apply_full_scale();
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let out_path = cli.out.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
    let mut sink: Box<dyn Write> = match &out_path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.command {
        Command::CaseStudy => sink.write_all(run_case_study(&cfg)?.as_bytes())?,
        Command::Fig2 => write_csv(&mut sink, &run_fig2(&cfg)?)?,
        Command::Fig34 => write_csv(&mut sink, &run_fig3_fig4(&cfg)?)?,
        Command::Outage => write_csv(&mut sink, &run_outage(&cfg)?)?,
        Command::Simulate => write_csv(&mut sink, &run_simulate(&cfg)?)?,
    }
    sink.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bsrelay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
