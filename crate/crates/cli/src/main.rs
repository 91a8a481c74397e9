use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lsilab::properties;
use lsilab::FormulaId;
use lsilab_cli::{all_pass, emit, emit_to_path, report, resolve_workers, run, CliError, ExperimentConfig, Format, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "lsilab", version, about = "Sweeps over mixture functional-inequality constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Write here instead of the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<Format>,
    },
    /// Print the formula catalog.
    ListFormulas,
    /// Run the finite-space property suites.
    Selfcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = properties::DEFAULT_INSTANCES)]
        instances: usize,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        _ => Err(format!("unknown format `{s}` (json or csv)")),
    }
}

fn run_command(config: PathBuf, output: Option<PathBuf>, format: Option<Format>) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(o) = output {
        cfg.format = Format::for_path(Some(&o));
        cfg.output = Some(o);
    }
    if let Some(f) = format {
        cfg.format = f;
    }
    let env = std::env::var(WORKERS_ENV).ok();
    let workers = resolve_workers(&cfg, env.as_deref())?;
    let rows = run(&cfg, workers)?;
    match &cfg.output {
        Some(path) => emit_to_path(&rows, cfg.format, path)?,
        None => emit(&rows, cfg.format, std::io::stdout().lock())?,
    }
    if let Some(path) = &cfg.plot {
        let file = std::fs::File::create(path)?;
        report::write_plot_csv(&rows, std::io::BufWriter::new(file))?;
    }
    let failed = rows.iter().filter(|r| r.pass == Some(false)).count();
    eprintln!("{} rows, {failed} failed", rows.len());
    Ok(all_pass(&rows))
}

fn list_formulas() {
    for id in FormulaId::ALL {
        println!("{:<18} {}", id.as_str(), id.expression());
    }
}

fn selfcheck(seed: u64, instances: usize) -> Result<bool, CliError> {
    let outcomes = properties::run_all(seed, instances).map_err(|e| CliError::Config(e.to_string()))?;
    for o in &outcomes {
        println!(
            "{:<32} {:>6} instances  worst {:>10.3e}  {}",
            o.check.as_str(),
            o.instances,
            o.worst,
            if o.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(outcomes.iter().all(|o| o.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output, format } => run_command(config, output, format),
        Command::ListFormulas => {
            list_formulas();
            Ok(true)
        }
        Command::Selfcheck { seed, instances } => selfcheck(seed, instances),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
