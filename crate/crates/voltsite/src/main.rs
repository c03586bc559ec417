use std::process::ExitCode;

fn main() -> ExitCode {
    voltsite::cli::main_with(std::env::args_os())
}
