use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kgframe_cli::{files, run, Cli, EXIT_INPUT, EXIT_OK};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let outcome = match run(&cli, argv) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let written = match &outcome.destination {
        Some(path) => files::write_json(&outcome.report, path).map_err(|e| e.to_string()),
        None => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("serializable report");
            writeln!(std::io::stdout(), "{text}").map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
