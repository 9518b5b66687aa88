//! `--config <file>` support: a flat `key = value` file whose entries become
//! flags of the chosen subcommand unless the command line already sets them.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};

/// Parses `key = value` lines. `#` starts a comment; keys may use `_` or `-`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got {raw:?}", no + 1);
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", no + 1);
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn flag_present(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == long || a.starts_with(&with_eq)
    })
}

/// Rewrites `args` so that entries of the config file named by `--config`
/// are inserted right after the subcommand. Explicit flags win. Values
/// `true`/`false` toggle switches.
pub fn merge_config_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let pos = args.iter().position(|a| {
        let a = a.to_string_lossy();
        a == "--config" || a.starts_with("--config=")
    });
    let Some(pos) = pos else {
        return Ok(args);
    };
    let flag = args[pos].to_string_lossy().into_owned();
    let (path, consumed) = match flag.strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => match args.get(pos + 1) {
            Some(p) => (p.to_string_lossy().into_owned(), 2),
            None => bail!("--config needs a file path"),
        },
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let entries = parse_config(&text)?;

    let mut rest: Vec<OsString> = args[..pos].to_vec();
    rest.extend_from_slice(&args[pos + consumed..]);
    // first non-flag argument after the binary name is the subcommand
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 1)
        .context("--config must be used with a subcommand")?;

    let mut injected = Vec::new();
    for (key, value) in entries {
        if flag_present(&rest, &key) {
            continue;
        }
        match value.as_str() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    let mut out: Vec<OsString> = rest[..=sub].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[sub + 1..]);
    Ok(out)
}
