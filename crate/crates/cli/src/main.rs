use std::process::ExitCode;

fn main() -> ExitCode {
    match std::panic::catch_unwind(|| diversample_cli::run(std::env::args_os())) {
        Ok(code) => code,
        Err(_) => ExitCode::from(diversample_cli::EXIT_INTERNAL),
    }
}
