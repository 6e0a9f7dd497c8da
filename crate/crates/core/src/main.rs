use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = thermal_dj::cli::main_with_args(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
