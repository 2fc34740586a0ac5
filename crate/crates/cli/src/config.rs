//! Merging a TOML config file into the command line.
//!
//! Keys are long flag names (`min_s_tokens` or `min-s-tokens`). Top-level
//! scalars apply to every command; a table named after the subcommand applies
//! to that subcommand only. Config values are spliced in ahead of the user's
//! own flags, so anything typed on the command line wins.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use toml::Value;

use crate::args::SUBCOMMANDS;

const VALUE_FLAGS: [&str; 3] = ["--seed", "--jobs", "--config"];

/// Position of the subcommand token in `argv`, skipping global flags.
pub fn subcommand_position(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_string_lossy();
        if VALUE_FLAGS.contains(&arg.as_ref()) {
            i += 2;
            continue;
        }
        if SUBCOMMANDS.contains(&arg.as_ref()) {
            return Some(i);
        }
        if !arg.starts_with('-') {
            return None;
        }
        i += 1;
    }
    None
}

/// The `--config` value, if given.
pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

fn flag_args(key: &str, value: &Value) -> Result<Vec<String>> {
    let flag = format!("--{}", key.replace('_', "-"));
    Ok(match value {
        Value::Boolean(true) => vec![flag],
        Value::Boolean(false) => vec![],
        Value::String(s) => vec![flag, s.clone()],
        Value::Integer(i) => vec![flag, i.to_string()],
        Value::Float(f) => vec![flag, f.to_string()],
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s.clone()),
                    Value::Integer(i) => Ok(i.to_string()),
                    Value::Float(f) => Ok(f.to_string()),
                    other => bail!("config key {key}: unsupported list element {other}"),
                })
                .collect::<Result<Vec<_>>>()?;
            vec![flag, parts.join(",")]
        }
        other => bail!("config key {key}: unsupported value {other}"),
    })
}

/// Flags contributed by the config file for `subcommand`.
pub fn config_args(path: &Path, subcommand: &str) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("parsing config {}", path.display()))?;
    let mut out = Vec::new();
    for (key, value) in &table {
        if key == "config" {
            bail!("config file cannot name another config file");
        }
        if value.is_table() {
            continue;
        }
        out.extend(flag_args(key, value)?);
    }
    if let Some(section) = table.get(subcommand) {
        let section = section
            .as_table()
            .with_context(|| format!("config key {subcommand} must be a table"))?;
        for (key, value) in section {
            out.extend(flag_args(key, value)?);
        }
    }
    Ok(out)
}

/// `argv` with config flags inserted right after the subcommand and the
/// user's pre-subcommand globals moved behind them.
pub fn merge(argv: &[OsString], sub_pos: usize, extra: Vec<String>) -> Vec<OsString> {
    let mut out = vec![argv[0].clone(), argv[sub_pos].clone()];
    out.extend(extra.into_iter().map(OsString::from));
    out.extend(argv[1..sub_pos].iter().cloned());
    out.extend(argv[sub_pos + 1..].iter().cloned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn finds_subcommand_after_globals() {
        assert_eq!(subcommand_position(&os(&["uptake", "--seed", "3", "score"])), Some(3));
        assert_eq!(subcommand_position(&os(&["uptake", "-v", "selftest"])), Some(2));
        assert_eq!(subcommand_position(&os(&["uptake", "bogus"])), None);
    }

    #[test]
    fn config_flags_come_before_user_flags() {
        let argv = os(&["uptake", "--seed", "3", "nuc-build", "--k", "5"]);
        let merged = merge(&argv, 3, vec!["--seed".into(), "9".into(), "--k".into(), "2".into()]);
        let merged: Vec<String> = merged.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(
            merged,
            [
                "uptake",
                "nuc-build",
                "--seed",
                "9",
                "--k",
                "2",
                "--seed",
                "3",
                "--k",
                "5"
            ]
        );
    }

    #[test]
    fn toml_values_become_flags() {
        let dir = std::env::temp_dir().join(format!("uptake-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.toml");
        std::fs::write(
            &path,
            "seed = 7\n[score]\nmetrics = [\"jaccard\", \"bleu@PS\"]\n[nuc-train]\nl2 = 0.5\nholdout = 0.2\n",
        )
        .unwrap();
        assert_eq!(
            config_args(&path, "score").unwrap(),
            ["--seed", "7", "--metrics", "jaccard,bleu@PS"]
        );
        assert_eq!(
            config_args(&path, "nuc-train").unwrap(),
            ["--seed", "7", "--holdout", "0.2", "--l2", "0.5"]
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
