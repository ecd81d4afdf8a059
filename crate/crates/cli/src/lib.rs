//! Command-line experiment runner: scenario files, subcommands and outputs.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod output;
pub mod scenario;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{Ctx, RunError};
use crate::output::{config_hash, OutputDir, RunManifest};
use crate::scenario::Scenario;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sixdma", version, about = "Six-dimensional movable antenna experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Monte Carlo realizations for rate evaluation.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Override a scenario value, e.g. `--set users.xi=0.2` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads (outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Channel and capacity tables for the fixed layout.
    Simulate,
    /// Fixed, rotation-only and full pose optimization over the ξ sweep.
    OptimizeContinuous,
    /// Offline and sample-mean discrete selection over the power sweep.
    OptimizeDiscrete,
    /// Statistical and instantaneous channel estimation sweeps.
    Estimate,
    /// Sensing CRB of optimized and random layouts over the power sweep.
    Sense,
    /// Rotatable-array communication/sensing trade-off over ω.
    Isac,
    /// Antenna movement assignment.
    Pathplan,
    /// Checks the scenario without running anything.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::OptimizeContinuous => "optimize-continuous",
            Command::OptimizeDiscrete => "optimize-discrete",
            Command::Estimate => "estimate",
            Command::Sense => "sense",
            Command::Isac => "isac",
            Command::Pathplan => "pathplan",
            Command::Validate => "validate",
        }
    }
}

/// Loads the scenario with flag overrides applied. Returns it with the
/// effective override list (flags first, then `--set` entries).
pub fn load(cli: &Cli) -> Result<(Scenario, Vec<String>), String> {
    let text = match &cli.scenario {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(t) = cli.trials {
        overrides.push(format!("trials={t}"));
    }
    overrides.extend(cli.overrides.iter().cloned());
    let s = scenario::parse(&text, &overrides)?;
    Ok((s, overrides))
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (scenario, overrides) = match load(cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let seed = scenario.seed;
    if cli.command == Command::Validate {
        let violations = commands::validate(&scenario, seed);
        if violations.is_empty() {
            println!("ok: scenario `{}` passes all checks", scenario.name);
            return 0;
        }
        for v in &violations {
            println!("violation: {v}");
        }
        return EXIT_VALIDATION;
    }
    let mut out = match OutputDir::create(&cli.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", cli.out.display());
            return EXIT_RUNTIME;
        }
    };
    let result = {
        let mut ctx = Ctx { scenario: &scenario, seed, out: &mut out };
        match cli.command {
            Command::Simulate => commands::simulate(&mut ctx),
            Command::OptimizeContinuous => commands::optimize_continuous(&mut ctx),
            Command::OptimizeDiscrete => commands::optimize_discrete(&mut ctx),
            Command::Estimate => commands::estimate(&mut ctx),
            Command::Sense => commands::sense(&mut ctx),
            Command::Isac => commands::isac(&mut ctx),
            Command::Pathplan => commands::pathplan(&mut ctx),
            Command::Validate => unreachable!("handled above"),
        }
    };
    let result = result.and_then(|()| {
        let manifest = RunManifest {
            subcommand: cli.command.name().to_string(),
            scenario: scenario.name.clone(),
            config_hash: config_hash(&scenario.canonical()),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            overrides: overrides.clone(),
            outputs: out.files().to_vec(),
        };
        let text = toml::to_string(&manifest).expect("manifest serializes");
        out.write("manifest.toml", &text).map_err(RunError::from)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            out.discard();
            match e {
                RunError::Validation(m) => {
                    eprintln!("validation error: {m}");
                    EXIT_VALIDATION
                }
                RunError::Runtime(m) => {
                    eprintln!("error: {m}");
                    EXIT_RUNTIME
                }
            }
        }
    }
}
