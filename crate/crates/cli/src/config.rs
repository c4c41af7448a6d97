//! Layers presets, `key = value` files and command-line flags. Presets and
//! files are rewritten into flag tokens placed before the user's own flags;
//! with self-overriding arguments the last occurrence wins.

use std::fs;
use std::path::Path;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use crate::args::Cli;
use crate::error::CliError;

pub struct Preset {
    pub name: &'static str,
    pub commands: &'static [&'static str],
    pub entries: &'static [(&'static str, &'static str)],
}

const SWEEPS: &[&str] = &["sweep", "eps"];

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2c",
        commands: &["bands"],
        entries: &[("topology", "circular"), ("n", "20"), ("overlay", "true")],
    },
    Preset {
        name: "fig2d",
        commands: &["bands"],
        entries: &[("topology", "moebius"), ("n", "20"), ("overlay", "true")],
    },
    Preset {
        name: "fig3a",
        commands: SWEEPS,
        entries: &[("topology", "circular"), ("n", "100"), ("parameter", "delta"), ("start", "0"), ("end", "2"), ("steps", "401")],
    },
    Preset {
        name: "fig3b",
        commands: SWEEPS,
        entries: &[("topology", "moebius"), ("n", "100"), ("parameter", "delta"), ("start", "0"), ("end", "2"), ("steps", "401")],
    },
    Preset {
        name: "fig3c",
        commands: SWEEPS,
        entries: &[("model", "moebius4x4"), ("beta", "1"), ("xi", "0"), ("start", "-3"), ("end", "3"), ("steps", "601")],
    },
    Preset {
        name: "fig3d",
        commands: SWEEPS,
        entries: &[("topology", "circular"), ("n", "100"), ("parameter", "gamma"), ("start", "0"), ("end", "1"), ("steps", "401")],
    },
    Preset {
        name: "fig3e",
        commands: SWEEPS,
        entries: &[("topology", "moebius"), ("n", "100"), ("parameter", "gamma"), ("start", "0"), ("end", "1"), ("steps", "401")],
    },
    Preset {
        name: "fig3f",
        commands: SWEEPS,
        entries: &[("model", "moebius4x4"), ("beta", "1"), ("xi", "2"), ("start", "-3"), ("end", "3"), ("steps", "601")],
    },
    Preset {
        name: "fig3g",
        commands: SWEEPS,
        entries: &[("topology", "circular"), ("n", "100"), ("delta", "0.5"), ("parameter", "gamma"), ("start", "0"), ("end", "1"), ("steps", "401")],
    },
    Preset {
        name: "fig3h",
        commands: SWEEPS,
        entries: &[("topology", "moebius"), ("n", "100"), ("delta", "0.5"), ("parameter", "gamma"), ("start", "0"), ("end", "1"), ("steps", "401")],
    },
    Preset {
        name: "fig3i",
        commands: SWEEPS,
        entries: &[("model", "moebius4x4"), ("beta", "1"), ("xi", "2"), ("alpha-im", "0.3"), ("start", "-3"), ("end", "3"), ("steps", "601")],
    },
    Preset {
        name: "fig6-hermitian",
        commands: &["scaling"],
        entries: &[("family", "hermitian"), ("sizes", "50,100,200")],
    },
    Preset {
        name: "fig6-pt",
        commands: &["scaling"],
        entries: &[("family", "pt"), ("sizes", "50,100,200")],
    },
];

fn command() -> clap::Command {
    Cli::command().mut_subcommands(|s| s.args_override_self(true).allow_negative_numbers(true))
}

fn usage(e: clap::Error) -> CliError {
    let rendered = e.to_string();
    let first = rendered.lines().next().unwrap_or_default();
    CliError::invalid("usage", first.trim_start_matches("error: ").to_string())
}

/// `None` when help or version text was printed instead.
fn parse_tokens(tokens: &[String]) -> Result<Option<Cli>, CliError> {
    match command().try_get_matches_from(tokens) {
        Ok(m) => Cli::from_arg_matches(&m).map(Some).map_err(usage),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            // Nothing sensible to do if stdout is gone.
            let _ = e.print();
            Ok(None)
        }
        Err(e) => Err(usage(e)),
    }
}

/// Parses the process arguments with presets and config files applied.
pub fn parse(args: &[String]) -> Result<Option<Cli>, CliError> {
    let Some(cli) = parse_tokens(args)? else {
        return Ok(None);
    };
    let name = cli.command.name();
    let common = cli.command.common();
    if common.preset.is_none() && common.config.is_none() {
        return Ok(Some(cli));
    }
    let mut layered: Vec<(String, String)> = Vec::new();
    if let Some(preset) = &common.preset {
        let p = PRESETS.iter().find(|p| p.name == preset).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            CliError::invalid("unknown-preset", format!("unknown preset `{preset}`; valid: {}", names.join(", ")))
        })?;
        if !p.commands.contains(&name) {
            return Err(CliError::invalid(
                "invalid-config",
                format!("preset `{preset}` applies to: {}", p.commands.join(", ")),
            ));
        }
        layered.extend(p.entries.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    }
    if let Some(path) = &common.config {
        layered.extend(read_config(path)?);
    }
    let known = long_flags(name);
    let mut tokens = vec![args[0].clone(), name.to_string()];
    for (key, value) in layered {
        if !known.contains(&key) || key == "config" || key == "preset" {
            return Err(CliError::invalid(
                "invalid-config",
                format!("unknown key `{key}` for `{name}`"),
            ));
        }
        tokens.push(format!("--{key}"));
        tokens.extend(value.split_whitespace().map(str::to_string));
    }
    let at = args.iter().position(|a| a == name).map_or(args.len(), |i| i + 1);
    tokens.extend(args[at..].iter().cloned());
    parse_tokens(&tokens)
}

fn long_flags(subcommand: &str) -> Vec<String> {
    command()
        .find_subcommand(subcommand)
        .map(|s| s.get_arguments().filter_map(|a| a.get_long()).map(str::to_string).collect())
        .unwrap_or_default()
}

/// `key = value` pairs; `#` starts a comment line, `_` and `-` in keys are
/// interchangeable.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid("invalid-config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|(line, msg)| {
        CliError::invalid("invalid-config", format!("{}:{line}: {msg}", path.display()))
    })
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, (usize, String)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| (i + 1, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err((i + 1, format!("empty key or value in `{line}`")));
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}
