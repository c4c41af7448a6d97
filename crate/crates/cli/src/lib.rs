pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::fs;
use std::io::{self, Write};

use args::Format;
use error::CliError;

/// Parses `args` (program name first), runs the command and writes its report.
pub fn run(args: &[String]) -> Result<(), CliError> {
    let Some(cli) = config::parse(args)? else {
        return Ok(());
    };
    let report = commands::execute(&cli.command)?;
    let common = cli.command.common();
    let json_path = common
        .output
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")));
    let format = common
        .format
        .unwrap_or(if json_path { Format::Json } else { Format::Csv });
    let text = match format {
        Format::Csv => report.to_csv()?,
        Format::Json => report.to_json()?,
    };
    match &common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::invalid("io", format!("cannot write {}: {e}", path.display()))),
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(CliError::invalid("io", format!("cannot write output: {e}")))
            }
            _ => Ok(()),
        },
    }
}
