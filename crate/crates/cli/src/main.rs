use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qiedge_cli::run(std::env::args_os()))
}
