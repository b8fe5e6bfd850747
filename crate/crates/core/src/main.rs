use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use nucleatrace::ambient::exponent_serde;
use nucleatrace::experiment::{run, ExperimentConfig, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Seeded audits of trace formulas, Lorentz-space inequalities and
/// finite-rank approximation on l_p^n.
#[derive(Debug, Parser)]
#[command(name = "nucleatrace", version)]
struct Cli {
    /// Experiment to run; overrides the config file's subcommand.
    #[arg(value_enum)]
    subcommand: Option<Subcommand>,
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated dimensions, e.g. 4,8,16.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Comma-separated exponents; `inf` allowed.
    #[arg(long, value_delimiter = ',', value_parser = parse_exponent)]
    exponents: Option<Vec<f64>>,
    /// Pass tolerance for every trial.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_exponent(text: &str) -> Result<f64, String> {
    exponent_serde::parse(text).ok_or_else(|| format!("not an exponent: {text:?}"))
}

fn load(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut config = match (&cli.config, cli.subcommand) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        (None, Some(sub)) => ExperimentConfig::new(sub),
        (None, None) => return Err("give a subcommand or --config".into()),
    };
    if let Some(sub) = cli.subcommand {
        config.subcommand = sub;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    if let Some(dims) = &cli.dims {
        config.dims = Some(dims.clone());
    }
    if let Some(exps) = &cli.exponents {
        config.exponents = Some(exps.clone());
    }
    if let Some(t) = cli.tolerance {
        config.tolerance = Some(t);
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load(&cli).and_then(|config| {
        let report = run(&config).map_err(|e| e.to_string())?;
        let text = match cli.format {
            Format::Json => report.to_json(),
            Format::Csv => report.to_csv(),
        }
        .map_err(|e| e.to_string())?;
        match &cli.out {
            Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
            None => println!("{text}"),
        }
        let agg = &report.aggregate;
        eprintln!("{}: {} / {} records passed", config.subcommand.name(), agg.pass_count, agg.records);
        Ok(report.all_pass())
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
