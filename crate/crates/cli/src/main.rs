use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(finsler_cli::run(std::env::args_os()))
}
