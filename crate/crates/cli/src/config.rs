//! Key-value config files merged into the command line, and value parsers.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Command;

/// Parses `key = value` lines. `#` starts a comment; `key: value` also works.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=').or_else(|| line.split_once(':')) else {
            bail!("config line {}: expected key = value, got {raw:?}", n + 1);
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", n + 1);
        }
        out.push((key, v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

/// Finds `--config <path>` or `--config=<path>` in raw arguments.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
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

/// Splices config entries into the arguments of the chosen subcommand.
/// Keys the user also passed as flags are dropped so the flags win.
pub fn merge_config(cmd: &Command, args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let entries = parse_config(&text)?;
    let Some(pos) = args
        .iter()
        .enumerate()
        .skip(1)
        .position(|(_, a)| cmd.find_subcommand(a).is_some())
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let sub = cmd.find_subcommand(&args[pos]).expect("found above");
    let explicit: Vec<&str> = args[pos + 1..]
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();
    let mut injected = Vec::new();
    for (key, value) in entries {
        if key == "config" || explicit.contains(&key.as_str()) {
            continue;
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            bail!("config key '{key}' is not an option of '{}'", sub.get_name());
        };
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}"));
            injected.push(value);
        } else {
            match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" | "" => injected.push(format!("--{key}")),
                "false" | "no" | "0" | "off" => {}
                other => bail!("config key '{key}' expects a boolean, got '{other}'"),
            }
        }
    }
    let mut merged = args[..=pos].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

/// Parses `a:b:step` (inclusive) or a comma-separated list of numbers.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("grid value {p:?}")))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            bail!("range grid must be start:stop:step, got {s:?}");
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("range grid needs step > 0 and stop >= start, got {s:?}");
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            bail!("range grid {s:?} has too many points");
        }
        return Ok((0..=n).map(|k| start + k as f64 * step).collect());
    }
    let v: Vec<f64> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("grid value {p:?}")))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        bail!("empty grid");
    }
    Ok(v)
}
