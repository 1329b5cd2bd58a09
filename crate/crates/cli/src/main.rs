//! `egmtl`: annotation processing, model fitting and evaluation protocols.
//!
//! Every command writes its artifacts, a `resolved_config.json` and a
//! `manifest.json` into `--out`. Passing the resolved config back with
//! `--config` reproduces the artifacts. Settings resolve as
//! flag > config file > default.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod commands;
mod config;
mod error;
mod output;

use clap::{error::ErrorKind, ArgAction, Parser, Subcommand};
use egmtl::par::Jobs;

use commands::{annotate, experiment, fit, synth};

#[derive(Debug, Parser)]
#[command(name = "egmtl", version, about = "Expert-guided multi-task learning on affect annotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for independent fits; 0 uses every core. Results do
    /// not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split traces into accepted and rejected sets by quality rules.
    Filter(annotate::FilterArgs),
    /// Kendall's W of the raters of each clip over the final window.
    Concordance(annotate::ConcordanceArgs),
    /// Median-fuse the final window of each clip's raters.
    Fuse(annotate::FuseArgs),
    /// Fit one model and write its weights.
    Fit(Box<fit::FitArgs>),
    /// Generate planted synthetic data and matching experiment configs.
    Synth(synth::SynthArgs),
    /// Snippet regression protocol: RMSE per model.
    P1(experiment::P1Args),
    /// Transfer classification protocol: accuracy per model.
    P2(experiment::P2Args),
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    init_logging(cli.verbose);
    let jobs = Jobs(cli.jobs);
    let result = match cli.command {
        Command::Filter(a) => annotate::filter(a),
        Command::Concordance(a) => annotate::concordance(a),
        Command::Fuse(a) => annotate::fuse(a),
        Command::Fit(a) => fit::run(*a),
        Command::Synth(a) => synth::run(a),
        Command::P1(a) => experiment::p1(a, jobs),
        Command::P2(a) => experiment::p2(a, jobs),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
