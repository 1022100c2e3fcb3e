use std::fs;
use std::process::ExitCode;

use clap::Parser;
use qexpander_cli::{run, Cli, EXIT_USAGE, EXIT_VERIFICATION_FAILED};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&args);
    let echo = args[1..].join(" ");
    let report = match run(&cli, &echo) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    print!("{}", report.to_table());
    if let Some(path) = &cli.report {
        if let Err(e) = fs::write(path, report.to_json()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFICATION_FAILED)
    }
}
