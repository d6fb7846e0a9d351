use std::process::ExitCode;

fn main() -> ExitCode {
    enmi_cli::main_with(std::env::args_os())
}
