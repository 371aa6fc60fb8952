use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = mahler_cli::run(std::env::args_os());
    eprint!("{}", out.stderr);
    let written = match &out.output {
        Some(path) => std::fs::write(path, &out.report),
        None => std::io::stdout().write_all(out.report.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(mahler_cli::EXIT_INPUT as u8);
    }
    ExitCode::from(out.code as u8)
}
