//! `key = value` config files, spliced into the argument list ahead of the
//! user's own flags so that explicit flags win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

#[derive(Args, Debug, Clone)]
pub struct ConfigArg {
    /// Read defaults for this command's flags from FILE (`key = value` lines, `#` comments).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Flag-value pairs from a config file, keys given as long flag names.
/// Underscores in keys read as dashes. `true` and `false` toggle switches.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find(" #") {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected 'key = value'", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            bail!("line {}: invalid key '{}'", i + 1, k.trim());
        }
        if key == "config" {
            bail!("line {}: config files cannot include other config files", i + 1);
        }
        let v = v.trim();
        let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
        out.push((key, v.to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Result<Option<PathBuf>> {
    let mut found = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(s) = a.to_str() else { continue };
        if s == "--" {
            break;
        }
        if s == "--config" {
            let v = it.next().context("--config needs a file")?;
            found = Some(PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    Ok(found)
}

fn flags_for(entries: Vec<(String, String)>) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    out
}

pub fn load_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config {}", path.display()))
}

/// `mavo <cmd> ... --config f ...` becomes `mavo <cmd> <flags from f> ...`.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    if args.len() < 2 || args[1].to_str().is_none_or(|s| s.starts_with('-')) {
        return Ok(args);
    }
    let Some(path) = config_path(&args[2..])? else {
        return Ok(args);
    };
    let mut out = args[..2].to_vec();
    out.extend(flags_for(load_config(&path)?));
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[OsString]) -> Vec<&str> {
        v.iter().map(|s| s.to_str().unwrap()).collect()
    }

    #[test]
    fn parses_lines_and_comments() {
        let c = parse_config("# heading\nnum_frames = 30\n\n camera-path = \"arc:0.2,1\" # comment\nverbose = true\n")
            .unwrap();
        assert_eq!(
            c,
            vec![
                ("num-frames".into(), "30".into()),
                ("camera-path".into(), "arc:0.2,1".into()),
                ("verbose".into(), "true".into()),
            ]
        );
        assert!(parse_config("just words").is_err());
        assert!(parse_config("config = other.cfg").is_err());
        assert!(parse_config("bad key = 1").is_err());
    }

    #[test]
    fn file_flags_precede_command_line_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "seed = 4\nquiet = true\nloud = false\n").unwrap();
        let args: Vec<OsString> = ["mavo", "synth", "--config", cfg.to_str().unwrap(), "--seed", "9"]
            .iter()
            .map(|s| s.into())
            .collect();
        let out = expand_args(args).unwrap();
        assert_eq!(strs(&out)[..5], ["mavo", "synth", "--seed", "4", "--quiet"]);
        assert_eq!(strs(&out)[7..], ["--seed", "9"]);

        let plain: Vec<OsString> = ["mavo", "--help"].iter().map(|s| s.into()).collect();
        assert_eq!(expand_args(plain.clone()).unwrap(), plain);
        let missing: Vec<OsString> = ["mavo", "track", "--config", "/nonexistent.cfg"]
            .iter()
            .map(|s| s.into())
            .collect();
        assert!(expand_args(missing).is_err());
    }
}
