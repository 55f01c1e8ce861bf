use std::process::ExitCode;

fn main() -> ExitCode {
    cpbench::run(std::env::args_os())
}
