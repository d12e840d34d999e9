//! Canonical units and experiment-condition records.
//!
//! Everything downstream works in one unit system:
//!
//! | quantity              | canonical | accepted on input |
//! |-----------------------|-----------|-------------------|
//! | inlet concentration   | g/L       | ppb (µg/L), g/L   |
//! | resin volume          | L         | mL, L             |
//! | contact time / time   | hr        | min, hr           |
//! | flow rate             | L/hr      | L/hr              |
//!
//! With K_T in L/(g·hr) the Thomas exponent `K_T·C0·t` is dimensionless only
//! when C0 is in g/L and t in hr, which is why those are the canonical choices.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ppb (µg/L) to g/L.
pub const PPB_TO_G_PER_L: f64 = 1e-6;
pub const MIN_PER_HR: f64 = 60.0;
pub const ML_PER_L: f64 = 1000.0;

/// Relative tolerance between a declared contact time and V/Q.
pub const CONTACT_TIME_TOLERANCE: f64 = 0.05;
/// Relative tolerance between V and Z·π·(d/2)².
pub const GEOMETRY_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcentrationUnit {
    Ppb,
    GramsPerLiter,
}

impl ConcentrationUnit {
    pub fn parse(field: &'static str, tag: &str) -> Result<Self> {
        match tag.trim() {
            "ppb" | "ug/L" | "µg/L" => Ok(Self::Ppb),
            "g/L" | "g/l" => Ok(Self::GramsPerLiter),
            other => Err(Error::UnknownUnit {
                field,
                unit: other.to_string(),
            }),
        }
    }

    pub fn to_canonical(self, value: f64) -> f64 {
        match self {
            Self::Ppb => value * PPB_TO_G_PER_L,
            Self::GramsPerLiter => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeUnit {
    Milliliter,
    Liter,
}

impl VolumeUnit {
    pub fn parse(field: &'static str, tag: &str) -> Result<Self> {
        match tag.trim() {
            "mL" | "ml" => Ok(Self::Milliliter),
            "L" | "l" => Ok(Self::Liter),
            other => Err(Error::UnknownUnit {
                field,
                unit: other.to_string(),
            }),
        }
    }

    pub fn to_canonical(self, value: f64) -> f64 {
        match self {
            Self::Milliliter => value / ML_PER_L,
            Self::Liter => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Minute,
    Hour,
}

impl TimeUnit {
    pub fn parse(field: &'static str, tag: &str) -> Result<Self> {
        match tag.trim() {
            "min" => Ok(Self::Minute),
            "hr" | "h" => Ok(Self::Hour),
            other => Err(Error::UnknownUnit {
                field,
                unit: other.to_string(),
            }),
        }
    }

    pub fn to_canonical(self, value: f64) -> f64 {
        match self {
            Self::Minute => value / MIN_PER_HR,
            Self::Hour => value,
        }
    }
}

fn parse_flow(field: &'static str, tag: &str) -> Result<()> {
    match tag.trim() {
        "L/hr" | "l/hr" | "L/h" => Ok(()),
        other => Err(Error::UnknownUnit {
            field,
            unit: other.to_string(),
        }),
    }
}

fn expect_unit(field: &'static str, tag: &str, accepted: &[&str]) -> Result<()> {
    if accepted.contains(&tag.trim()) {
        Ok(())
    } else {
        Err(Error::UnknownUnit {
            field,
            unit: tag.trim().to_string(),
        })
    }
}

/// A value with its declared unit tag, as read from user input.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub unit: String,
}

impl Measured {
    pub fn new(value: f64, unit: impl Into<String>) -> Self {
        Self {
            value,
            unit: unit.into(),
        }
    }
}

/// Experiment conditions as declared, before unit normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConditions {
    pub inlet_concentration: Measured,
    pub flow_rate: Measured,
    pub resin_volume: Measured,
    pub contact_time: Option<Measured>,
    pub resin_mass: Option<Measured>,
    pub linear_velocity: Option<Measured>,
    pub bed_depth: Option<Measured>,
    pub column_diameter: Option<Measured>,
    pub resin_id: String,
}

/// Validated experiment conditions in canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConditions {
    c0: f64,
    flow_rate: f64,
    resin_volume: f64,
    contact_time: f64,
    resin_mass: Option<f64>,
    linear_velocity: Option<f64>,
    bed_depth: Option<f64>,
    column_diameter: Option<f64>,
    resin_id: String,
    warnings: Vec<String>,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidConditions(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Normalizes declared conditions into canonical units and checks their
/// internal consistency.
///
/// A declared contact time that disagrees with V/Q by more than 5% is
/// replaced by V/Q and a warning is recorded; within tolerance the declared
/// value is kept as given.
pub fn to_canonical(raw: &RawConditions) -> Result<ExperimentConditions> {
    let c0_unit = ConcentrationUnit::parse("inlet_concentration", &raw.inlet_concentration.unit)?;
    parse_flow("flow_rate", &raw.flow_rate.unit)?;
    let v_unit = VolumeUnit::parse("resin_volume", &raw.resin_volume.unit)?;

    let c0 = positive(
        "inlet_concentration",
        c0_unit.to_canonical(raw.inlet_concentration.value),
    )?;
    let flow_rate = positive("flow_rate", raw.flow_rate.value)?;
    let resin_volume = positive("resin_volume", v_unit.to_canonical(raw.resin_volume.value))?;

    let mut warnings = Vec::new();
    let computed_ct = resin_volume / flow_rate;
    let contact_time = match &raw.contact_time {
        Some(declared) => {
            let unit = TimeUnit::parse("contact_time", &declared.unit)?;
            let ct = positive("contact_time", unit.to_canonical(declared.value))?;
            let rel = (ct - computed_ct).abs() / computed_ct;
            if rel > CONTACT_TIME_TOLERANCE {
                warnings.push(format!(
                    "declared contact time {:.4} min disagrees with V/Q = {:.4} min ({:.1}%); using V/Q",
                    ct * MIN_PER_HR,
                    computed_ct * MIN_PER_HR,
                    rel * 100.0
                ));
                computed_ct
            } else {
                ct
            }
        }
        None => computed_ct,
    };

    let resin_mass = match &raw.resin_mass {
        Some(m) => {
            let value = match m.unit.trim() {
                "kg" => m.value,
                "g" => m.value / 1000.0,
                other => {
                    return Err(Error::UnknownUnit {
                        field: "resin_mass",
                        unit: other.to_string(),
                    })
                }
            };
            Some(positive("resin_mass", value)?)
        }
        None => None,
    };
    let linear_velocity = match &raw.linear_velocity {
        Some(u) => {
            expect_unit("linear_velocity", &u.unit, &["cm/min"])?;
            Some(positive("linear_velocity", u.value)?)
        }
        None => None,
    };
    let bed_depth = match &raw.bed_depth {
        Some(z) => {
            expect_unit("bed_depth", &z.unit, &["cm"])?;
            Some(positive("bed_depth", z.value)?)
        }
        None => None,
    };
    let column_diameter = match &raw.column_diameter {
        Some(d) => {
            expect_unit("column_diameter", &d.unit, &["cm"])?;
            Some(positive("column_diameter", d.value)?)
        }
        None => None,
    };

    if let (Some(z), Some(d)) = (bed_depth, column_diameter) {
        let geometric_ml = z * PI * (d / 2.0).powi(2);
        let declared_ml = resin_volume * ML_PER_L;
        let rel = (geometric_ml - declared_ml).abs() / declared_ml;
        if rel > GEOMETRY_TOLERANCE {
            return Err(Error::InvalidConditions(format!(
                "bed depth {z} cm and diameter {d} cm give {geometric_ml:.3} mL, resin volume is {declared_ml:.3} mL"
            )));
        }
    }

    Ok(ExperimentConditions {
        c0,
        flow_rate,
        resin_volume,
        contact_time,
        resin_mass,
        linear_velocity,
        bed_depth,
        column_diameter,
        resin_id: raw.resin_id.clone(),
        warnings,
    })
}

impl ExperimentConditions {
    /// Inlet concentration C0 in g/L.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c0_ppb(&self) -> f64 {
        self.c0 / PPB_TO_G_PER_L
    }

    /// Flow rate Q in L/hr.
    pub fn flow_rate(&self) -> f64 {
        self.flow_rate
    }

    /// Resin volume V in L.
    pub fn resin_volume(&self) -> f64 {
        self.resin_volume
    }

    /// Contact time CT in hr.
    pub fn contact_time(&self) -> f64 {
        self.contact_time
    }

    pub fn contact_time_min(&self) -> f64 {
        self.contact_time * MIN_PER_HR
    }

    /// Resin mass in kg, when supplied.
    pub fn resin_mass(&self) -> Option<f64> {
        self.resin_mass
    }

    /// M/Q in kg·hr/L, the mass-form counterpart of the contact time.
    pub fn mass_time(&self) -> Option<f64> {
        self.resin_mass.map(|m| m / self.flow_rate)
    }

    /// Linear velocity U0 in cm/min.
    pub fn linear_velocity(&self) -> Option<f64> {
        self.linear_velocity
    }

    /// Bed depth Z in cm; derived from V and the column diameter when not
    /// given explicitly.
    pub fn bed_depth(&self) -> Option<f64> {
        self.bed_depth.or_else(|| {
            self.column_diameter
                .map(|d| self.resin_volume * ML_PER_L / (PI * (d / 2.0).powi(2)))
        })
    }

    pub fn column_diameter(&self) -> Option<f64> {
        self.column_diameter
    }

    /// Z/U0 in hr.
    pub fn bed_transit_time(&self) -> Result<f64> {
        let z = self.bed_depth().ok_or(Error::MissingField("bed_depth"))?;
        let u0 = self
            .linear_velocity
            .ok_or(Error::MissingField("linear_velocity"))?;
        Ok(z / u0 / MIN_PER_HR)
    }

    pub fn resin_id(&self) -> &str {
        &self.resin_id
    }

    /// Non-fatal diagnostics raised during normalization.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The same record expressed with canonical unit tags.
    pub fn to_raw_canonical(&self) -> RawConditions {
        RawConditions {
            inlet_concentration: Measured::new(self.c0, "g/L"),
            flow_rate: Measured::new(self.flow_rate, "L/hr"),
            resin_volume: Measured::new(self.resin_volume, "L"),
            contact_time: Some(Measured::new(self.contact_time, "hr")),
            resin_mass: self.resin_mass.map(|m| Measured::new(m, "kg")),
            linear_velocity: self.linear_velocity.map(|u| Measured::new(u, "cm/min")),
            bed_depth: self.bed_depth.map(|z| Measured::new(z, "cm")),
            column_diameter: self.column_diameter.map(|d| Measured::new(d, "cm")),
            resin_id: self.resin_id.clone(),
        }
    }

    /// File representation (ppb, mL, min).
    pub fn to_file(&self) -> ConditionsFile {
        ConditionsFile {
            c0_ppb: self.c0_ppb(),
            q_l_per_hr: self.flow_rate,
            v_ml: self.resin_volume * ML_PER_L,
            ct_min: Some(self.contact_time_min()),
            u0_cm_per_min: self.linear_velocity,
            z_cm: self.bed_depth,
            diameter_cm: self.column_diameter,
            m_kg: self.resin_mass,
            resin_id: self.resin_id.clone(),
        }
    }
}

impl fmt::Display for ExperimentConditions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: C0 = {} ppb, Q = {} L/hr, V = {} mL, CT = {:.4} min",
            self.resin_id,
            self.c0_ppb(),
            self.flow_rate,
            self.resin_volume * ML_PER_L,
            self.contact_time_min()
        )
    }
}

/// JSON conditions file. Units are carried in the key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsFile {
    pub c0_ppb: f64,
    pub q_l_per_hr: f64,
    pub v_ml: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ct_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0_cm_per_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_kg: Option<f64>,
    pub resin_id: String,
}

impl ConditionsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })
    }

    pub fn to_raw(&self) -> RawConditions {
        RawConditions {
            inlet_concentration: Measured::new(self.c0_ppb, "ppb"),
            flow_rate: Measured::new(self.q_l_per_hr, "L/hr"),
            resin_volume: Measured::new(self.v_ml, "mL"),
            contact_time: self.ct_min.map(|ct| Measured::new(ct, "min")),
            resin_mass: self.m_kg.map(|m| Measured::new(m, "kg")),
            linear_velocity: self.u0_cm_per_min.map(|u| Measured::new(u, "cm/min")),
            bed_depth: self.z_cm.map(|z| Measured::new(z, "cm")),
            column_diameter: self.diameter_cm.map(|d| Measured::new(d, "cm")),
            resin_id: self.resin_id.clone(),
        }
    }

    pub fn to_canonical(&self) -> Result<ExperimentConditions> {
        to_canonical(&self.to_raw())
    }
}

/// Dimensionless threshold `limit / C0` at which the bed counts as
/// exhausted. Both arguments must share a unit.
pub fn breakthrough_ratio(limit: f64, inlet: f64) -> Result<f64> {
    if !(limit.is_finite() && limit > 0.0) {
        return Err(Error::InvalidParameter {
            name: "limit",
            value: limit,
        });
    }
    if !(inlet.is_finite() && inlet > 0.0) {
        return Err(Error::InvalidParameter {
            name: "inlet_concentration",
            value: inlet,
        });
    }
    if limit >= inlet {
        return Err(Error::InletBelowLimit);
    }
    Ok(limit / inlet)
}
