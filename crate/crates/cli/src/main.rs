use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dynledger_cli::cli::Cli;
use dynledger_cli::commands::{error_json, execute, exit_code, Output};

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", error_json(kind, message));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim(), 2),
    };
    let outcome = match execute(&cli.global, &cli.command) {
        Ok(o) => o,
        Err(e) => return fail(e.kind(), &e.to_string(), exit_code(&e) as u8),
    };
    let bytes = match &outcome.output {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
            s.push('\n');
            s.into_bytes()
        }
        Output::Text(s) => s.clone().into_bytes(),
        Output::Bytes(b) => b.clone(),
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        return fail("io", &msg, 2);
    }
    for (path, text) in &outcome.side_files {
        if let Err(e) = std::fs::write(path, text) {
            return fail("io", &format!("{}: {e}", path.display()), 2);
        }
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
