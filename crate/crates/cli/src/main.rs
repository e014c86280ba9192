use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, text) = diskarm_cli::run_command(std::env::args_os());
    let _ = if code == diskarm_cli::EXIT_OK {
        std::io::stdout().write_all(text.as_bytes())
    } else {
        std::io::stderr().write_all(text.as_bytes())
    };
    ExitCode::from(code as u8)
}
