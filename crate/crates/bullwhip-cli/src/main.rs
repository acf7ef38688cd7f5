//! `bullwhip` — simulate order-up-to dynamics on supply networks, analyze
//! bullwhip amplification along three routes, and run the validation and
//! reproduction experiments.
//!
//! Exit codes: 0 when every check passes, 1 when a validator check fails,
//! 2 for usage or configuration errors.

mod commands;
mod output;
mod svg;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bullwhip::error::Error;
use bullwhip::experiments::{
    reproduce_fig2, reproduce_fig3, reproduce_fig4, reproduce_fig5, reproduce_table1,
    validate_prop1, validate_prop2, validate_prop3, validate_prop4, validate_prop5,
    ExperimentConfig,
};
use bullwhip::topology::{generate_structure, SupplyNetwork};
use bullwhip::Result;

#[derive(Parser)]
#[command(
    name = "bullwhip",
    version,
    about = "Bullwhip-effect simulation and analysis on supply networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration JSON (defaults match the benchmark setup)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Root RNG seed override
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Replication count override
    #[arg(long, global = true, value_name = "N")]
    reps: Option<usize>,

    /// Directory for tables, reports, traces, and plots
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Table output format; the JSON report always embeds the tables
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Tolerance overrides, comma separated: name=value,name=value
    #[arg(long, global = true, value_name = "NAME=VALUE,...")]
    tolerance_overrides: Option<String>,

    /// Network JSON file to load instead of generating the configured
    /// structure (simulate, analyze, and export)
    #[arg(long, global = true, value_name = "PATH")]
    network: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; prints the layer BWE chain, writes trace CSVs
    Simulate,
    /// Produce spectra, amplification gains, and the full BWE report
    Analyze,
    /// Run one proposition validator and print its checks
    Validate {
        #[arg(value_enum)]
        target: PropTarget,
    },
    /// Regenerate a benchmark table or figure
    Reproduce {
        #[arg(value_enum)]
        target: ReproTarget,
    },
    /// Write the network, demand, and normalized config files
    Export,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PropTarget {
    Prop1,
    Prop2,
    Prop3,
    Prop4,
    Prop5,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ReproTarget {
    Table1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    // Restore default SIGPIPE handling so `bullwhip ... | head` terminates the
    // process quietly (exit 141) instead of panicking on a closed stdout.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Simulate => {
            let net = resolve_net(cli, &config)?;
            commands::run_simulate(&config, &net, cli.out_dir.as_deref())?;
            Ok(true)
        }
        Command::Analyze => {
            let net = resolve_net(cli, &config)?;
            commands::run_analyze(
                &config,
                &net,
                &structure_label(cli, &config),
                cli.out_dir.as_deref(),
                cli.format,
            )?;
            Ok(true)
        }
        Command::Validate { target } => {
            let report = match target {
                PropTarget::Prop1 => validate_prop1(&config)?,
                PropTarget::Prop2 => validate_prop2(&config)?,
                PropTarget::Prop3 => validate_prop3(&config)?,
                PropTarget::Prop4 => validate_prop4(&config)?,
                PropTarget::Prop5 => validate_prop5(&config)?,
            };
            let ok = output::print_report(&report);
            if let Some(dir) = &cli.out_dir {
                output::announce(&output::write_report_artifacts(&report, dir, cli.format)?);
            }
            Ok(ok)
        }
        Command::Reproduce { target } => {
            let report = match target {
                ReproTarget::Table1 => reproduce_table1(&config)?,
                ReproTarget::Fig2 => reproduce_fig2(&config)?,
                ReproTarget::Fig3 => reproduce_fig3(&config)?,
                ReproTarget::Fig4 => reproduce_fig4(&config)?,
                ReproTarget::Fig5 => reproduce_fig5(&config)?,
            };
            let ok = output::print_report(&report);
            if let Some(dir) = &cli.out_dir {
                output::announce(&output::write_report_artifacts(&report, dir, cli.format)?);
            }
            Ok(ok)
        }
        Command::Export => {
            let dir = cli
                .out_dir
                .as_deref()
                .ok_or_else(|| Error::Config("export needs --out-dir".into()))?;
            let net = resolve_net(cli, &config)?;
            commands::run_export(&config, &net, dir)?;
            Ok(true)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load_json(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(reps) = cli.reps {
        config.replications = reps;
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = Some(dir.clone());
    }
    if let Some(spec) = &cli.tolerance_overrides {
        let overrides = parse_overrides(spec)?;
        config.tolerances.apply_overrides(&overrides)?;
    }
    config.validate()?;
    Ok(config)
}

fn parse_overrides(spec: &str) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, value) = part.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "tolerance override {part:?} must look like name=value"
            ))
        })?;
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!(
                "tolerance override {part:?} has a non-numeric value"
            ))
        })?;
        map.insert(name.trim().to_string(), value);
    }
    Ok(map)
}

fn resolve_net(cli: &Cli, config: &ExperimentConfig) -> Result<SupplyNetwork> {
    match &cli.network {
        Some(path) => SupplyNetwork::load_json(path),
        None => generate_structure(&config.structure, config.lead_time, config.window),
    }
}

fn structure_label(cli: &Cli, config: &ExperimentConfig) -> String {
    match &cli.network {
        Some(path) => format!("custom({})", path.display()),
        None => format!(
            "{:?} widths {:?} rho {}",
            config.structure.kind, config.structure.layer_widths, config.structure.rho
        ),
    }
}
