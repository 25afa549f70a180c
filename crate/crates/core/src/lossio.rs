//! Loss-profile files: time, elevation and link efficiency per time slot.
//!
//! The format is comma-separated with `.` decimals. Lines starting with `#`
//! are comments, and a single header line is recognised by a non-numeric
//! first field. Column 1 holds time (s) and column 2 elevation (degrees);
//! the efficiency column is selectable, counting from 1.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::format::float_repr;
use crate::geometry::OrbitGeometry;

/// Default column holding the link efficiency.
pub const DEFAULT_EFFICIENCY_COLUMN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRow {
    pub time: f64,
    pub elevation: f64,
    /// Linear transmittance in `[0, 1]`.
    pub efficiency: f64,
}

/// How the efficiency column of a loss file is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EfficiencyUnit {
    #[default]
    Linear,
    /// Loss in dB, converted with `10^(-dB/10)`.
    Decibels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossProfile {
    rows: Vec<LossRow>,
    source: Option<PathBuf>,
}

impl LossProfile {
    /// Validate and wrap rows: strictly increasing, uniformly spaced times,
    /// elevations in `[0, 90]`, efficiencies in `[0, 1]`.
    pub fn new(rows: Vec<LossRow>, source: Option<PathBuf>) -> Result<Self> {
        let path = source.clone().unwrap_or_default();
        let spacing = match rows.as_slice() {
            [a, b, ..] => b.time - a.time,
            _ => 1.0,
        };
        for (i, r) in rows.iter().enumerate() {
            let row = i + 1;
            let violation = |field, value, rule| Error::RowInvariant {
                path: path.clone(),
                row,
                field,
                value,
                rule,
            };
            if !(0.0..=90.0).contains(&r.elevation) {
                return Err(violation("elevation", r.elevation, "0 <= elevation <= 90"));
            }
            if !(0.0..=1.0).contains(&r.efficiency) {
                return Err(violation("efficiency", r.efficiency, "0 <= efficiency <= 1"));
            }
            if !r.time.is_finite() {
                return Err(violation("time", r.time, "finite"));
            }
            if i > 0 {
                let step = r.time - rows[i - 1].time;
                if !(step > 0.0) {
                    return Err(violation("time", r.time, "strictly increasing"));
                }
                if (step - spacing).abs() > 1e-9 * spacing.abs().max(1.0) {
                    return Err(violation("time", r.time, "uniform spacing"));
                }
            }
        }
        Ok(LossProfile { rows, source })
    }

    pub fn rows(&self) -> &[LossRow] {
        &self.rows
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Time between consecutive slots; 1 s for a single-row profile.
    pub fn slot_duration(&self) -> f64 {
        match self.rows.as_slice() {
            [a, b, ..] => b.time - a.time,
            _ => 1.0,
        }
    }

    pub fn max_efficiency(&self) -> f64 {
        self.rows.iter().map(|r| r.efficiency).fold(0.0, f64::max)
    }
}

fn parse_field(path: &Path, line: usize, fields: &[&str], col: usize) -> Result<f64> {
    let raw = fields.get(col - 1).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("expected at least {col} columns, found {}", fields.len()),
    })?;
    raw.parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("column {col}: '{raw}' is not a number"),
    })
}

/// Read a loss file taking efficiencies from `column` (1-based).
pub fn read_loss_file(path: impl AsRef<Path>, column: usize) -> Result<LossProfile> {
    read_loss_file_with(path, column, EfficiencyUnit::Linear)
}

pub fn read_loss_file_with(
    path: impl AsRef<Path>,
    column: usize,
    unit: EfficiencyUnit,
) -> Result<LossProfile> {
    let path = path.as_ref();
    if column < 1 {
        return Err(Error::Config("loss column counts from 1".into()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_loss_text(&text, path, column, unit)
}

fn parse_loss_text(
    text: &str,
    path: &Path,
    column: usize,
    unit: EfficiencyUnit,
) -> Result<LossProfile> {
    let mut rows = Vec::new();
    let mut seen_data = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !seen_data && fields[0].parse::<f64>().is_err() {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let time = parse_field(path, lineno, &fields, 1)?;
        let elevation = parse_field(path, lineno, &fields, 2)?;
        let value = parse_field(path, lineno, &fields, column)?;
        let efficiency = match unit {
            EfficiencyUnit::Linear => value,
            EfficiencyUnit::Decibels => 10f64.powf(-value / 10.0),
        };
        rows.push(LossRow {
            time,
            elevation,
            efficiency,
        });
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "no data rows".into(),
        });
    }
    LossProfile::new(rows, Some(path.to_path_buf()))
}

/// Write `time,elevation,efficiency` with a header line. Values are printed
/// in shortest round-trip form so reading the file back is exact.
pub fn write_loss_file(profile: &LossProfile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("time,elevation,efficiency\n");
    for r in profile.rows() {
        out.push_str(&format!(
            "{},{},{}\n",
            float_repr(r.time),
            float_repr(r.elevation),
            float_repr(r.efficiency)
        ));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Scale every efficiency by an extra `loss_db` of attenuation.
pub fn apply_excess_loss(profile: &LossProfile, loss_db: f64) -> Result<LossProfile> {
    if !(loss_db >= 0.0) || !loss_db.is_finite() {
        return Err(Error::domain("excess loss", loss_db, "[0, inf) dB"));
    }
    let factor = 10f64.powf(-loss_db / 10.0);
    let rows = profile
        .rows
        .iter()
        .map(|r| LossRow {
            efficiency: r.efficiency * factor,
            ..*r
        })
        .collect();
    Ok(LossProfile {
        rows,
        source: profile.source.clone(),
    })
}

/// Best-case channel loss of the profile in dB, `-10 log10(max efficiency)`.
pub fn system_loss_db(profile: &LossProfile) -> f64 {
    -10.0 * profile.max_efficiency().log10()
}

/// Symmetric circular-orbit pass with free-space range loss.
///
/// Slots are one second apart with `t = 0` at closest approach. Loss at the
/// centre slot is `zenith_loss_db` and grows as `20 log10(range / range_0)`.
/// Elevations below the horizon are clamped to 0.
pub fn generate_synthetic_profile(
    geom: &OrbitGeometry,
    zenith_loss_db: f64,
    slot_count: usize,
) -> Result<LossProfile> {
    geom.validate()?;
    if slot_count < 3 || slot_count.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "slot_count must be odd and at least 3, got {slot_count}"
        )));
    }
    if !(zenith_loss_db >= 0.0) {
        return Err(Error::domain("zenith_loss_db", zenith_loss_db, "[0, inf)"));
    }
    let xi = geom.xi_deg.to_radians();
    let omega = geom.angular_rate();
    let closest = geom.slant_range(xi);
    let half = (slot_count / 2) as i64;
    let rows = (-half..=half)
        .map(|i| {
            let t = i as f64;
            let psi = (xi.cos() * (omega * t).cos()).clamp(-1.0, 1.0).acos();
            let loss = zenith_loss_db + 20.0 * (geom.slant_range(psi) / closest).log10();
            LossRow {
                time: t,
                elevation: geom.elevation_deg(psi).max(0.0),
                efficiency: 10f64.powf(-loss / 10.0),
            }
        })
        .collect();
    LossProfile::new(rows, None)
}
