use std::path::PathBuf;

use breakcurve_core::ModelKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "breakcurve",
    version,
    about = "Fixed-bed ion-exchange breakthrough curve toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model to a breakthrough curve.
    Fit(FitArgs),
    /// Fit all four models and rank them.
    Compare(CompareArgs),
    /// Build a K_T correlation from Thomas fits.
    Correlate(CorrelateArgs),
    /// Predict breakthrough at new conditions from a correlation.
    Predict(PredictArgs),
    /// Thomas parameter sensitivities and ±perturbation envelopes.
    Sensitivity(SensitivityArgs),
    /// Reference reproduction report, plus a summary of any fits given.
    Report(ReportArgs),
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Base name for output files (defaults to the input file stem).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// Curve CSV (`t_hr,ratio` or `t_hr,c_ppb`), or `ref:<name>`.
    #[arg(long)]
    pub curve: String,
    /// Conditions JSON, or `ref:<name>`.
    #[arg(long)]
    pub conditions: String,
    #[arg(long, value_parser = parse_model, default_value = "thomas")]
    #[serde(serialize_with = "ser_model")]
    pub model: ModelKind,
    /// Box of ±PCT percent around the initial point (or the free fit).
    #[arg(long, value_name = "PCT")]
    pub bounds_pct: Option<f64>,
    /// Initial parameters, comma-separated in canonical order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    /// Take the initial point from an earlier fit JSON.
    #[arg(long, conflicts_with = "init")]
    pub init_from: Option<String>,
    /// Hold q_m fixed (g/L, Thomas only).
    #[arg(long)]
    pub pin_qm: Option<f64>,
    /// Hold the Freundlich exponent fixed (Clark only).
    #[arg(long)]
    pub pin_n: Option<f64>,
    /// Count only free parameters in the HFE denominator.
    #[arg(long)]
    pub hfe_free_params: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub curve: String,
    #[arg(long)]
    pub conditions: String,
    /// Hold Clark's n fixed.
    #[arg(long)]
    pub pin_n: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorrelateArgs {
    /// Thomas fit JSON files.
    #[arg(required = true)]
    pub fits: Vec<String>,
    /// Raw curves, one per fit in the same order, for fixed-q_m refits.
    #[arg(long, value_delimiter = ',')]
    pub curves: Option<Vec<String>>,
    /// Fixed q_m (g/L); defaults to the mean over the fits.
    #[arg(long)]
    pub qm: Option<f64>,
    /// Correlate K_T with contact time only.
    #[arg(long, conflicts_with = "line_c0")]
    pub line_ct: bool,
    /// Correlate K_T with inlet concentration only.
    #[arg(long)]
    pub line_c0: bool,
    /// Resin label for the model (defaults to the fits' resin).
    #[arg(long)]
    pub resin: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    /// Correlation JSON, or `ref:a600e` / `ref:a520e`.
    #[arg(long)]
    pub correlation: String,
    #[arg(long)]
    pub conditions: String,
    /// Regulatory limit in ppb.
    #[arg(long, default_value_t = 10.0)]
    pub limit_ppb: f64,
    /// Target ratios to report breakthrough times for.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5")]
    pub targets: Vec<f64>,
    /// Measured curve to score the prediction against.
    #[arg(long)]
    pub curve: Option<String>,
    /// End of the sampled curve in hr (default: 2·t50 or 1.2× the data span).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SensitivityArgs {
    /// Thomas fit JSON.
    #[arg(long)]
    pub fit: String,
    /// Conditions to evaluate under (defaults to the fit's own).
    #[arg(long)]
    pub conditions: Option<String>,
    /// End of the grid in hr (default 2·t50).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Parameter perturbation for the envelope columns, percent.
    #[arg(long, default_value_t = 5.0)]
    pub perturb_pct: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Fit JSON files to summarize.
    pub fits: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

fn ser_model<S: serde::Serializer>(m: &ModelKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(m.name())
}
