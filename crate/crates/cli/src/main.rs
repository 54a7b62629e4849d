//! `conewave` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error (including refused spaces
//! and unknown subcommands), 3 numerical acceptance failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::{Failure, Outcome, Output};

#[derive(Debug, Parser)]
#[command(
    name = "conewave",
    version,
    about = "Conic cut-off multipliers, divergence witnesses and wave front estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "conewave-out")]
    out: PathBuf,

    /// Also write a plain-text gnuplot script next to the CSV.
    #[arg(long, global = true)]
    emit_plot: bool,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Single-threaded, sequential evaluation.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(subcommand)]
    Cone(ConeCmd),
    #[command(subcommand)]
    Profile(ProfileCmd),
    #[command(subcommand)]
    Witness(WitnessCmd),
    #[command(subcommand)]
    Multiplier(MultiplierCmd),
    #[command(subcommand)]
    Wavefront(WavefrontCmd),
}

#[derive(Debug, Subcommand)]
enum ConeCmd {
    /// Dual cone of the configured cone.
    Dual,
    /// kappa_0 of the negative support and optionally kappa_V.
    Kappa,
}

#[derive(Debug, Subcommand)]
enum ProfileCmd {
    /// Evaluates the divergence condition for a profile.
    Check,
}

#[derive(Debug, Subcommand)]
enum WitnessCmd {
    /// One-dimensional principal value pairing.
    Pv1d {
        #[arg(long, num_args = 1.., default_values_t = [4u32])]
        k: Vec<u32>,
    },
    /// Pairing `I(l)` against its logarithmic lower bound.
    Lemma,
    /// Cross-check of the expanded pairing.
    Expansion,
}

#[derive(Debug, Subcommand)]
enum MultiplierCmd {
    Apply,
    Commute,
    Blowup,
}

#[derive(Debug, Subcommand)]
enum WavefrontCmd {
    Estimate,
    Check,
}

fn configure_threads(deterministic: bool) -> Result<(), Failure> {
    let threads =
        if deterministic {
            Some(1)
        } else {
            match std::env::var("CONEWAVE_THREADS") {
                Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| {
                    Failure::Config(format!("CONEWAVE_THREADS must be a positive integer, got {v:?}"))
                })?),
                Err(_) => None,
            }
        };
    if let Some(n) = threads {
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    configure_threads(cli.deterministic)?;
    let out = Output::new(cli.out.clone(), cli.emit_plot);
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Cone(ConeCmd::Dual) => commands::cone_dual(&out, cfg),
        Command::Cone(ConeCmd::Kappa) => commands::cone_kappa(&out, cfg),
        Command::Profile(ProfileCmd::Check) => commands::profile_check(&out, cfg),
        Command::Witness(WitnessCmd::Pv1d { k }) => commands::witness_pv1d(&out, k),
        Command::Witness(WitnessCmd::Lemma) => commands::witness_lemma(&out, cfg),
        Command::Witness(WitnessCmd::Expansion) => commands::witness_expansion(&out, cfg, cli.seed),
        Command::Multiplier(MultiplierCmd::Apply) => commands::multiplier_apply(&out, cfg),
        Command::Multiplier(MultiplierCmd::Commute) => commands::multiplier_commute(&out, cfg),
        Command::Multiplier(MultiplierCmd::Blowup) => commands::multiplier_blowup(&out, cfg),
        Command::Wavefront(WavefrontCmd::Estimate) => commands::wavefront_estimate(&out, cfg),
        Command::Wavefront(WavefrontCmd::Check) => commands::wavefront_check(&out, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).expect("summary serializes"));
            if outcome.accepted {
                ExitCode::SUCCESS
            } else {
                eprintln!("conewave: acceptance failed (see summary)");
                ExitCode::from(3)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("conewave: configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("conewave: numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
