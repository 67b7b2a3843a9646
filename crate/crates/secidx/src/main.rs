use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(secidx::cli::run())
}
