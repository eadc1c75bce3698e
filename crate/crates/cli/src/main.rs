use std::process::ExitCode;

use clap::Parser;
use csitq_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("CSITQ_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("csitq: {e}");
                }
            }
            _ => {
                eprintln!("csitq: CSITQ_THREADS must be a positive integer, got `{n}`");
                return ExitCode::from(2);
            }
        }
    }
    match csitq_cli::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("csitq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
