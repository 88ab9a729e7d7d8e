//! `--config` files use the flag names as keys. Top-level keys apply to every
//! command; a table named after a subcommand (`[evolve]`,
//! `[classical.portrait]`) applies when that subcommand runs. The file is
//! turned into extra flags, so anything given on the command line wins.

use std::fs;

use toml::{Table, Value};

use crate::error::CliError;

/// Returns `argv` with the flags from the config file appended.
pub fn expand_args(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Validation(format!("config {path}: {e}")))?;
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("config {path}: {e}")))?;
    let mut extra = Vec::new();
    collect(&table, &argv, &mut extra)?;
    let mut out = argv;
    out.extend(extra);
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn given(argv: &[String], flag: &str) -> bool {
    argv.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}

fn collect(table: &Table, argv: &[String], extra: &mut Vec<String>) -> Result<(), CliError> {
    for (key, value) in table {
        if let Value::Table(sub) = value {
            // only tables of the subcommand being run
            if argv.iter().skip(1).any(|a| a == key) {
                collect(sub, argv, extra)?;
            }
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || given(argv, &flag) {
            continue;
        }
        match value {
            Value::Boolean(true) => extra.push(flag),
            Value::Boolean(false) => {}
            other => {
                // `--flag=value` keeps negative numbers from reading as flags
                let v = scalar(other).ok_or_else(|| CliError::Validation(format!("config key '{key}' has an unsupported value")))?;
                extra.push(format!("{flag}={v}"));
            }
        }
    }
    Ok(())
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Integer(i) => Some(i.to_string()),
        Value::Float(f) => Some(f.to_string()),
        Value::Array(items) => items.iter().map(scalar).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
        _ => None,
    }
}
