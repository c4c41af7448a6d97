use std::process::ExitCode;

use ladder_cli::error::CliError;

fn main() -> ExitCode {
    let args: Result<Vec<String>, _> = std::env::args_os().map(|a| a.into_string()).collect();
    let result = match args {
        Ok(args) => ladder_cli::run(&args),
        Err(bad) => Err(CliError::invalid(
            "usage",
            format!("argument is not valid UTF-8: {}", bad.to_string_lossy()),
        )),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code())
        }
    }
}
