use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ndsym_cli::{execute, exit, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok((cfg, outcome)) => {
            for d in &outcome.diagnostics {
                eprintln!("{d}");
            }
            let text = if cfg.json.unwrap_or(false) { &outcome.json } else { &outcome.markdown };
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(exit::USAGE);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
