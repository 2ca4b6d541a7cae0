use std::process::ExitCode;

fn main() -> ExitCode {
    pairlab::cli::run(std::env::args_os())
}
