//! Breakthrough-curve data and CSV ingestion.

use std::io::Read;

use crate::error::{Error, Result};
use crate::units::{ExperimentConditions, PPB_TO_G_PER_L};

/// Minimum number of points a curve must carry.
pub const MIN_POINTS: usize = 3;

/// One effluent observation: time in hr and the ratio C/C0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub ratio: f64,
}

/// A validated effluent time series with the conditions it was measured under.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakthroughCurve {
    points: Vec<CurvePoint>,
    conditions: ExperimentConditions,
    label: String,
}

impl BreakthroughCurve {
    pub fn new(
        points: Vec<CurvePoint>,
        conditions: ExperimentConditions,
        label: impl Into<String>,
    ) -> Result<Self> {
        if points.len() < MIN_POINTS {
            return Err(Error::TooFewPoints {
                found: points.len(),
                required: MIN_POINTS,
            });
        }
        for (i, p) in points.iter().enumerate() {
            let row = i + 1;
            if !p.t.is_finite() || p.t < 0.0 {
                return Err(Error::NonMonotoneTime { row });
            }
            if i > 0 && p.t <= points[i - 1].t {
                return Err(Error::NonMonotoneTime { row });
            }
            if !(0.0..=1.0).contains(&p.ratio) {
                return Err(Error::RatioOutOfRange {
                    row,
                    value: p.ratio,
                });
            }
        }
        Ok(Self {
            points,
            conditions,
            label: label.into(),
        })
    }

    /// Builds a curve from parallel time/ratio slices.
    pub fn from_series(
        times: &[f64],
        ratios: &[f64],
        conditions: ExperimentConditions,
        label: impl Into<String>,
    ) -> Result<Self> {
        if times.len() != ratios.len() {
            return Err(Error::LengthMismatch(times.len(), ratios.len()));
        }
        let points = times
            .iter()
            .zip(ratios)
            .map(|(&t, &ratio)| CurvePoint { t, ratio })
            .collect();
        Self::new(points, conditions, label)
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ratio).collect()
    }

    pub fn conditions(&self) -> &ExperimentConditions {
        &self.conditions
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_time(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.t)
    }

    /// Indices of points whose ratio is exactly zero. They are kept, but the
    /// log-linearization and relative-error objectives cannot use them.
    pub fn zero_points(&self) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.ratio == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Same curve under different conditions (e.g. a rescaled column).
    pub fn with_conditions(&self, conditions: ExperimentConditions) -> Self {
        Self {
            points: self.points.clone(),
            conditions,
            label: self.label.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueColumn {
    Ratio,
    ConcentrationPpb,
}

/// Reads a curve CSV.
///
/// The header is either `t_hr,ratio` or `t_hr,c_ppb`; in the latter case
/// each concentration is divided by the inlet concentration. Lines starting
/// with `#` are ignored.
pub fn ingest_curve<R: Read>(
    reader: R,
    conditions: ExperimentConditions,
    label: impl Into<String>,
) -> Result<BreakthroughCurve> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(csv_error)?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let column = match names.as_slice() {
        ["t_hr", "ratio"] => ValueColumn::Ratio,
        ["t_hr", "c_ppb"] => ValueColumn::ConcentrationPpb,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header `t_hr,ratio` or `t_hr,c_ppb`, found `{}`",
                    names.join(",")
                ),
            })
        }
    };
    let c0_ppb = conditions.c0() / PPB_TO_G_PER_L;

    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64> {
            let raw = record.get(i).ok_or_else(|| Error::Parse {
                line,
                message: "missing column".into(),
            })?;
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{raw}` is not a number"),
            })
        };
        let t = field(0)?;
        let value = field(1)?;
        let ratio = match column {
            ValueColumn::Ratio => value,
            ValueColumn::ConcentrationPpb => value / c0_ppb,
        };
        points.push(CurvePoint { t, ratio });
    }
    BreakthroughCurve::new(points, conditions, label)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Writes a curve in the `t_hr,ratio` layout.
pub fn write_curve_csv(curve: &BreakthroughCurve) -> String {
    let mut out = String::from("t_hr,ratio\n");
    for p in curve.points() {
        out.push_str(&format!("{},{}\n", p.t, p.ratio));
    }
    out
}
