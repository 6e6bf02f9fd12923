//! `key = value` config files. Entries become `--key=value` arguments placed in
//! front of the command-line flags, so flags win and unknown keys are rejected.

use clap::{ArgAction, Command};

use crate::error::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::BadValue(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(CliError::BadValue(format!("config line {}: empty key or value", i + 1)));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Turns entries into arguments for `cmd`, checking every key against its options.
pub fn to_args(entries: &[(String, String)], cmd: &Command) -> Result<Vec<String>, CliError> {
    let mut args = Vec::new();
    for (key, value) in entries {
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| CliError::BadValue(format!("config: unknown key '{key}' for {}", cmd.get_name())))?;
        match arg.get_action() {
            ArgAction::SetTrue => {
                let on: bool = value
                    .parse()
                    .map_err(|_| CliError::BadValue(format!("config: {key} = {value} is not true/false")))?;
                if on {
                    args.push(format!("--{key}"));
                }
            }
            _ => args.push(format!("--{key}={value}")),
        }
    }
    Ok(args)
}
