//! Config files and argument merging.
//!
//! A config file holds one `key = value` pair per line, where `key` is the
//! long name of a flag of the chosen subcommand. Blank lines and lines
//! starting with `#` are ignored. A flag given on the command line wins over
//! the same key in the file.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};

use crate::args::Cli;
use crate::CliError;

/// Keys describing where output goes rather than what is computed; they are
/// left out of the metadata header so equal runs give equal bytes.
const IO_KEYS: [&str; 7] = ["config", "out", "format", "summary", "step-log", "replay", "help"];

pub struct Parsed {
    pub cli: Cli,
    /// Effective `(flag, value)` pairs of the subcommand, in declaration order.
    pub effective: Vec<(String, String)>,
}

pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Validation(format!(
                "config line {}: expected key = value, got {raw:?}",
                i + 1
            )));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        if out.iter().any(|(seen, _): &(String, String)| *seen == key) {
            return Err(CliError::Validation(format!("config line {}: duplicate key {key}", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn usage(e: clap::Error) -> CliError {
    CliError::Usage(e)
}

pub fn parse<I, T>(argv: I) -> Result<Parsed, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    // required flags may come from the config file, so the first pass only
    // looks for --config
    let first = Cli::command()
        .ignore_errors(true)
        .try_get_matches_from(&argv)
        .map_err(usage)?;
    if let Some((name, sub)) = first.subcommand() {
        if let Ok(Some(path)) = sub.try_get_one::<std::path::PathBuf>("config") {
            let extra = config_args(name, sub, path)?;
            argv.extend(extra);
        }
    }
    let matches = Cli::command().try_get_matches_from(&argv).map_err(usage)?;
    let cli = Cli::from_arg_matches(&matches).map_err(usage)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    Ok(Parsed {
        cli,
        effective: effective(name, sub),
    })
}

fn config_args(name: &str, sub: &ArgMatches, path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let cmd = Cli::command();
    let sub_cmd = cmd.find_subcommand(name).expect("known subcommand");
    let mut extra = Vec::new();
    for (key, value) in parse_file(&text)? {
        let arg = sub_cmd
            .get_arguments()
            .find(|a| {
                a.get_long() == Some(key.as_str())
                    || a.get_all_aliases().is_some_and(|al| al.contains(&key.as_str()))
            })
            .filter(|a| !matches!(a.get_long(), Some("config" | "help")));
        let Some(arg) = arg else {
            return Err(CliError::Validation(format!(
                "{}: unknown key {key:?} for `moran {name}`",
                path.display()
            )));
        };
        if sub.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        let long = format!("--{}", arg.get_long().expect("all flags are long"));
        if arg.get_action().takes_values() {
            extra.push(long.into());
            extra.push(value.into());
        } else {
            match value.as_str() {
                "true" => extra.push(long.into()),
                "false" => {}
                _ => {
                    return Err(CliError::Validation(format!(
                        "{}: key {key} expects true or false, got {value:?}",
                        path.display()
                    )))
                }
            }
        }
    }
    Ok(extra)
}

fn effective(name: &str, sub: &ArgMatches) -> Vec<(String, String)> {
    let cmd = Cli::command();
    let sub_cmd = cmd.find_subcommand(name).expect("known subcommand");
    let mut out = vec![("command".to_string(), name.to_string())];
    for arg in sub_cmd.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        if IO_KEYS.contains(&long) {
            continue;
        }
        let id = arg.get_id().as_str();
        if let Ok(Some(raw)) = sub.try_get_raw(id) {
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            out.push((long.to_string(), vals.join(",")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax() {
        let kv = parse_file("# comment\n\ns = 10\n--reps=3\n").unwrap();
        assert_eq!(kv, vec![("s".into(), "10".into()), ("reps".into(), "3".into())]);
        assert!(parse_file("s 10").is_err());
        assert!(parse_file("s = 1\ns = 2").is_err());
    }

    #[test]
    fn effective_lists_defaults_and_values() {
        let p = parse(["moran", "sweep", "--N", "1000", "--s", "1", "--a-grid", "0.01,0.1", "--reps", "10", "--seed", "7"])
            .unwrap();
        let get = |k: &str| p.effective.iter().find(|(key, _)| key == k).map(|(_, v)| v.clone());
        assert_eq!(get("command").as_deref(), Some("sweep"));
        assert_eq!(get("a-grid").as_deref(), Some("0.01,0.1"));
        assert_eq!(get("seed").as_deref(), Some("7"));
        assert_eq!(get("steps").as_deref(), Some("40000"));
        assert_eq!(get("out"), None);
    }
}
