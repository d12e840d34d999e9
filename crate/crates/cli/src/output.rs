//! Persisted documents, float formatting and the run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use breakcurve_core::{
    Bounds, ConditionsFile, ExperimentConditions, FitResult, ModelKind, ParameterSet,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Significant digits for every float written to JSON.
pub const JSON_SIGNIFICANT_DIGITS: usize = 10;

/// Rounds to [`JSON_SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", JSON_SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Rounds every float in a JSON tree.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let v = serde_json::to_value(doc).expect("document serializes");
    serde_json::to_string_pretty(&round_value(v)).expect("value serializes") + "\n"
}

/// Rounds a conditions file field by field.
pub fn rounded_conditions(c: &ConditionsFile) -> ConditionsFile {
    let r = |x: Option<f64>| x.map(round_sig);
    ConditionsFile {
        c0_ppb: round_sig(c.c0_ppb),
        q_l_per_hr: round_sig(c.q_l_per_hr),
        v_ml: round_sig(c.v_ml),
        ct_min: r(c.ct_min),
        u0_cm_per_min: r(c.u0_cm_per_min),
        z_cm: r(c.z_cm),
        diameter_cm: r(c.diameter_cm),
        m_kg: r(c.m_kg),
        resin_id: c.resin_id.clone(),
    }
}

fn param_map(kind: ModelKind, values: &[f64]) -> Map<String, Value> {
    kind.param_keys()
        .iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), serde_json::json!(round_sig(*v))))
        .collect()
}

fn param_values(kind: ModelKind, map: &Map<String, Value>, what: &str) -> CliResult<Vec<f64>> {
    kind.param_keys()
        .iter()
        .map(|k| {
            map.get(*k)
                .and_then(Value::as_f64)
                .ok_or_else(|| CliError::Parse(format!("{what}: missing numeric `{k}`")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsDocument {
    pub lower: Map<String, Value>,
    pub upper: Map<String, Value>,
}

/// `<name>.fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDocument {
    pub model: String,
    pub label: String,
    pub conditions: ConditionsFile,
    pub params: Map<String, Value>,
    pub pinned: Vec<String>,
    pub bounds: Option<BoundsDocument>,
    pub active_bounds: Vec<String>,
    pub rsse: f64,
    pub hfe_pct: f64,
    pub hfe_param_count: usize,
    pub r_squared: Option<f64>,
    pub n_points_used: usize,
    pub excluded_points: usize,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl FitDocument {
    /// Document form of `r`, floats already rounded.
    pub fn from_result(r: &FitResult) -> Self {
        let kind = r.model;
        let keys = kind.param_keys();
        let flagged = |flags: &[bool]| -> Vec<String> {
            keys.iter()
                .zip(flags)
                .filter(|(_, f)| **f)
                .map(|(k, _)| k.to_string())
                .collect()
        };
        Self {
            model: kind.name().to_string(),
            label: r.label.clone(),
            conditions: rounded_conditions(&r.conditions.to_file()),
            params: param_map(kind, &r.params.values()),
            pinned: flagged(&r.pinned),
            bounds: r.bounds.as_ref().map(|b| BoundsDocument {
                lower: param_map(kind, b.lower()),
                upper: param_map(kind, b.upper()),
            }),
            active_bounds: flagged(&r.active_bounds),
            rsse: round_sig(r.rsse),
            hfe_pct: round_sig(r.hfe),
            hfe_param_count: r.hfe_param_count,
            r_squared: r.r_squared.map(round_sig),
            n_points_used: r.n_points_used,
            excluded_points: r.excluded_points,
            converged: r.converged,
            iterations: r.iterations,
            warnings: r.conditions.warnings().to_vec(),
        }
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::parse(source, e))
    }

    pub fn kind(&self) -> CliResult<ModelKind> {
        Ok(self.model.parse::<ModelKind>()?)
    }

    pub fn params(&self) -> CliResult<ParameterSet> {
        let kind = self.kind()?;
        Ok(ParameterSet::from_values(
            kind,
            &param_values(kind, &self.params, "params")?,
        )?)
    }

    pub fn conditions(&self) -> CliResult<ExperimentConditions> {
        Ok(self.conditions.to_canonical()?)
    }

    /// Rebuilds a result; statistics are the persisted (rounded) ones.
    pub fn to_result(&self) -> CliResult<FitResult> {
        let kind = self.kind()?;
        let keys = kind.param_keys();
        let flags = |names: &[String]| -> Vec<bool> {
            keys.iter().map(|k| names.iter().any(|n| n == k)).collect()
        };
        let bounds = match &self.bounds {
            Some(b) => Some(Bounds::new(
                param_values(kind, &b.lower, "bounds.lower")?,
                param_values(kind, &b.upper, "bounds.upper")?,
            )?),
            None => None,
        };
        Ok(FitResult {
            model: kind,
            params: self.params()?,
            rsse: self.rsse,
            hfe: self.hfe_pct,
            hfe_param_count: self.hfe_param_count,
            r_squared: self.r_squared,
            n_points_used: self.n_points_used,
            excluded_points: self.excluded_points,
            pinned: flags(&self.pinned),
            bounds,
            active_bounds: flags(&self.active_bounds),
            converged: self.converged,
            iterations: self.iterations,
            conditions: self.conditions()?,
            label: self.label.clone(),
        })
    }
}

/// Completion marker written after every other output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub options: Value,
    pub outputs: Vec<String>,
    pub timestamp_unix_s: u64,
    pub tool_version: String,
}

/// Collects the files a command writes.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    name: String,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path, name: &str) -> CliResult<Self> {
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(CliError::Parse(format!("invalid output name `{name}`")));
        }
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Other(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            name: name.to_string(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}.{suffix}", self.name))
    }

    pub fn write(&mut self, suffix: &str, contents: &str) -> CliResult<PathBuf> {
        let path = self.path(suffix);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Writes `<name>.<command>.manifest.json`.
    pub fn finish<O: Serialize>(
        self,
        command: &str,
        inputs: Vec<String>,
        options: &O,
    ) -> CliResult<PathBuf> {
        let manifest = RunManifest {
            command: command.to_string(),
            inputs,
            options: serde_json::to_value(options).expect("options serialize"),
            outputs: self
                .written
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            timestamp_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let path = self.path(&format!("{command}.manifest.json"));
        std::fs::write(&path, to_json(&manifest))
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
