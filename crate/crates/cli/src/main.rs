//! `tamperlab`: command-line front end for the tamper-detection experiments.
//!
//! Every subcommand prints a JSON report (or CSV with `--format csv`) that
//! carries the seed and full configuration. Exit status is 0 on success, 1
//! when a check fails, and 2 on bad arguments or unreadable input.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tamperlab_core::experiments::{ExperimentReport, Verdict};

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "tamperlab", version, about = "Tamper-detection experiments for Haar-random quantum encodings")]
struct Cli {
    /// Write `<command>.<format>` into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a channel family against a constraint profile.
    AuditFamily(commands::AuditArgs),
    /// Estimate moments of the tampered overlap over Haar encoders.
    Moments(commands::MomentsArgs),
    /// Sweep encoders and record the worst undetected-tampering probability.
    Soundness(commands::SoundnessArgs),
    /// Compare overlaps of Haar-random states with the Beta(1, d-1) law.
    BetaCheck(commands::BetaArgs),
    /// Verify the permutation identities and the swap trick.
    CombinatoricsSelftest(commands::CombinatoricsArgs),
    /// Break classical tamper-detection codes with a constant-overwrite attack.
    BreakClassical(commands::BreakArgs),
    /// Constant tampering against the Hadamard-basis code.
    HadamardDemo(commands::HadamardArgs),
    /// Build a delta-net over pure states.
    Net(commands::NetArgs),
    /// Check the trace-distance continuity of the tampering probability.
    ContinuityCheck(commands::ContinuityArgs),
    /// Validate a channel file.
    ValidateChannel(commands::ValidateArgs),
}

fn run(command: &Command) -> anyhow::Result<ExperimentReport> {
    match command {
        Command::AuditFamily(a) => commands::audit(a),
        Command::Moments(a) => commands::moments(a),
        Command::Soundness(a) => commands::soundness(a),
        Command::BetaCheck(a) => commands::beta(a),
        Command::CombinatoricsSelftest(a) => commands::combinatorics(a),
        Command::BreakClassical(a) => commands::break_classical(a),
        Command::HadamardDemo(a) => commands::hadamard(a),
        Command::Net(a) => commands::net(a),
        Command::ContinuityCheck(a) => commands::continuity(a),
        Command::ValidateChannel(a) => commands::validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let report = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match output::emit(&report, cli.out.as_deref(), cli.format) {
        Ok(Some(path)) => eprintln!("{}: {:?} -> {}", report.command, report.verdict, path.display()),
        Ok(None) => eprintln!("{}: {:?}", report.command, report.verdict),
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    }
    if report.verdict == Verdict::Fail {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
