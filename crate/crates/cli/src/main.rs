use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(corner_sinr_cli::run(std::env::args_os()))
}
