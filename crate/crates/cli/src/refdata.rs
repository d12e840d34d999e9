//! Bundled reference inputs addressed as `ref:<name>`.
//!
//! When `BREAKCURVE_DATA` is set, names resolve to files under that
//! directory (`conditions/<name>.json`, `curves/<name>.csv`,
//! `correlations/<name>.json`); otherwise the built-in copies are used.

use std::path::PathBuf;

use breakcurve_core::curve::write_curve_csv;
use breakcurve_core::reference;

use crate::error::{CliError, CliResult};

pub const DATA_ENV: &str = "BREAKCURVE_DATA";
pub const REF_PREFIX: &str = "ref:";

/// Number of samples in the bundled synthetic curves.
pub const SYNTHETIC_POINTS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefKind {
    Conditions,
    Curve,
    Correlation,
}

impl RefKind {
    fn dir(self) -> &'static str {
        match self {
            Self::Conditions => "conditions",
            Self::Curve => "curves",
            Self::Correlation => "correlations",
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Self::Curve => "csv",
            _ => "json",
        }
    }
}

/// A loaded input: where it came from and its text.
#[derive(Debug, Clone)]
pub struct Input {
    pub source: String,
    pub stem: String,
    pub text: String,
}

fn experiment_id(name: &str) -> Option<u8> {
    name.strip_prefix("exp")?.parse().ok()
}

/// Built-in text for `name`, if there is one.
pub fn builtin(kind: RefKind, name: &str) -> Option<String> {
    match kind {
        RefKind::Conditions => {
            let e = reference::experiment(experiment_id(name)?).ok()?;
            Some(
                serde_json::to_string_pretty(&e.conditions_file()).expect("conditions serialize")
                    + "\n",
            )
        }
        RefKind::Curve => {
            let curve = reference::synthetic_curve(experiment_id(name)?, SYNTHETIC_POINTS).ok()?;
            Some(format!("# {}\n{}", curve.label(), write_curve_csv(&curve)))
        }
        RefKind::Correlation => {
            let m = match name {
                "a600e" => reference::a600e_correlation(),
                "a520e" => reference::a520e_correlation(),
                _ => return None,
            };
            Some(m.to_json() + "\n")
        }
    }
}

/// All built-in names of a kind.
pub fn builtin_names(kind: RefKind) -> Vec<String> {
    match kind {
        RefKind::Conditions => reference::EXPERIMENTS
            .iter()
            .map(|e| format!("exp{}", e.id))
            .collect(),
        RefKind::Curve => reference::UNPINNED_FITS
            .iter()
            .map(|f| format!("exp{}", f.0))
            .collect(),
        RefKind::Correlation => vec!["a600e".into(), "a520e".into()],
    }
}

/// Path a `ref:` name maps to under a data directory.
pub fn data_path(root: &std::path::Path, kind: RefKind, name: &str) -> PathBuf {
    root.join(kind.dir())
        .join(format!("{name}.{}", kind.extension()))
}

/// Reads a file path, or a `ref:` name.
pub fn load(spec: &str, kind: RefKind) -> CliResult<Input> {
    if let Some(name) = spec.strip_prefix(REF_PREFIX) {
        if let Some(root) = std::env::var_os(DATA_ENV) {
            let path = data_path(std::path::Path::new(&root), kind, name);
            let text =
                std::fs::read_to_string(&path).map_err(|e| CliError::parse(path.display(), e))?;
            return Ok(Input {
                source: spec.to_string(),
                stem: name.to_string(),
                text,
            });
        }
        let text = builtin(kind, name)
            .ok_or_else(|| CliError::Parse(format!("no bundled {} named `{name}`", kind.dir())))?;
        return Ok(Input {
            source: spec.to_string(),
            stem: name.to_string(),
            text,
        });
    }
    let path = std::path::Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(spec, e))?;
    let stem = path
        .file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.split('.').next().unwrap_or(s).to_string())
        .unwrap_or_else(|| "out".into());
    Ok(Input {
        source: spec.to_string(),
        stem,
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_name_resolves() {
        for kind in [RefKind::Conditions, RefKind::Curve, RefKind::Correlation] {
            for name in builtin_names(kind) {
                assert!(builtin(kind, &name).is_some(), "{name}");
            }
        }
        assert!(builtin(RefKind::Curve, "exp6").is_none());
        assert!(builtin(RefKind::Correlation, "nope").is_none());
    }

    #[test]
    fn file_stem_drops_all_extensions() {
        let dir = std::env::temp_dir().join(format!("breakcurve-stem-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("exp3.fit.json");
        std::fs::write(&p, "{}").unwrap();
        assert_eq!(
            load(p.to_str().unwrap(), RefKind::Conditions).unwrap().stem,
            "exp3"
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
