use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = stmas_cli::run(std::env::args_os());
    // Ignore broken pipes; the exit code still reports the outcome.
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.exit_code as u8)
}
