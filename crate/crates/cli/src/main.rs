use clap::Parser;
use mclass_cli::args::{Cli, Command};
use mclass_cli::commands;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Classify(a) => commands::run_classify(&a),
        Command::Report(a) => commands::run_report(&a),
        Command::Simulate(a) => commands::run_simulate(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("mclass: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
