use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ppvl_cli::run(std::env::args_os()))
}
