use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pseudophase::cli::run(std::env::args_os()) as u8)
}
