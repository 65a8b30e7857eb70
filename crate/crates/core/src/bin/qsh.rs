// Copyright 2026 The qsh-core Contributors
// SPDX-License-Identifier: Apache-2.0

//! `qsh`: run one configured task and write its tables plus a manifest.
//!
//! Exit codes: 0 success, 2 configuration error, 3 computation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsh_core::io::{parse_config_for, run, Format, RunOptions};
use qsh_core::Error;

#[derive(Parser)]
#[command(name = "qsh", version, about = "Spin Hall flux lattice on a circuit QED array")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bulk bands on a periodic k grid.
    Bands(Common),
    /// Ribbon spectrum with edge weights.
    Ribbon(Common),
    /// Metal/topological/trivial classification over (beta, lambda).
    PhaseDiagram(Common),
    /// Open-lattice states near the Fermi energy and their site densities.
    EdgeStates(Common),
    /// Coupler tone plan of the device plaquette.
    Tones(Common),
    /// Full driven circuit against the rotating-wave lattice model.
    RwaCheck(Common),
    /// Edge-detection decay scan with the master equation.
    Lindblad(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (default: the config's output.dir, else ./qsh-out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: the config's value, else all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Recompute even if a cached result exists.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Bands(c) => ("bands", c),
            Command::Ribbon(c) => ("ribbon", c),
            Command::PhaseDiagram(c) => ("phase_diagram", c),
            Command::EdgeStates(c) => ("edge_states", c),
            Command::Tones(c) => ("tones", c),
            Command::RwaCheck(c) => ("rwa_check", c),
            Command::Lindblad(c) => ("lindblad", c),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (task, args) = cli.command.split();

    let mut config = match parse_config_for(&args.config, Some(task)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qsh: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(f) = args.format {
        config.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if args.threads.is_some() {
        config.threads = args.threads.map(usize::from);
    }
    let out_dir = args.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("qsh-out"));
    let opts = RunOptions { out_dir, force: args.force, cache_dir: None };

    match run(&config, &opts) {
        Ok(report) => {
            for e in &report.errors {
                log::warn!("{e}");
            }
            println!(
                "{}: {} file(s) in {} ({}, {:.2} s)",
                task,
                report.files.len(),
                opts.out_dir.display(),
                if report.cache_hit { "cached" } else { "computed" },
                report.elapsed_s
            );
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("qsh: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("qsh: {e}");
            ExitCode::from(3)
        }
    }
}
