//! Component library and the scaling rules built on it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tensor_core::PTCConfig;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const REQUIRED_DEVICES: [&str; 11] = [
    "dac",
    "adc",
    "tia",
    "mzm",
    "microdisk",
    "mrr",
    "directional_coupler",
    "phase_shifter",
    "photodetector",
    "y_branch",
    "laser",
];

pub const MIN_CONVERTER_BITS: u32 = 2;
pub const MAX_CONVERTER_BITS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceRecord {
    #[serde(skip)]
    pub name: String,
    #[serde(default)]
    pub power_mw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning_power_mw: Option<f64>,
    #[serde(default)]
    pub area_um2: f64,
    #[serde(default)]
    pub insertion_loss_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fsr_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_plug_efficiency: Option<f64>,
}

impl DeviceRecord {
    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidDevice { device: self.name.clone(), reason };
        for (field, v) in [
            ("power_mw", Some(self.power_mw)),
            ("tuning_power_mw", self.tuning_power_mw),
            ("area_um2", Some(self.area_um2)),
            ("insertion_loss_db", Some(self.insertion_loss_db)),
            ("response_time_s", self.response_time_s),
            ("reference_rate", self.reference_rate),
            ("fsr_hz", self.fsr_hz),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(bad(format!("{field} must be finite and >= 0, got {v}")));
                }
            }
        }
        if let Some(s) = self.sensitivity_dbm {
            if !s.is_finite() {
                return Err(bad(format!("sensitivity_dbm must be finite, got {s}")));
            }
        }
        if let Some(w) = self.wall_plug_efficiency {
            if !(w > 0.0 && w <= 1.0) {
                return Err(bad(format!("wall_plug_efficiency must be in (0, 1], got {w}")));
            }
        }
        Ok(())
    }
}

/// How converter power moves away from its reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConverterScaling {
    /// Power proportional to `rate · 2^bits`.
    #[default]
    Walden,
    /// Power proportional to rate only.
    LinearRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceLibrary {
    #[serde(default)]
    pub converter_scaling: ConverterScaling,
    devices: BTreeMap<String, DeviceRecord>,
}

impl DeviceLibrary {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut lib: DeviceLibrary = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for (name, rec) in lib.devices.iter_mut() {
            rec.name = name.clone();
        }
        lib.validate()?;
        Ok(lib)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("device library serializes")
    }

    /// Shipped component table.
    pub fn builtin() -> Self {
        Self::from_toml_str(crate::presets::DEVICES).expect("built-in device library is valid")
    }

    pub fn validate(&self) -> Result<()> {
        for name in REQUIRED_DEVICES {
            if !self.devices.contains_key(name) {
                return Err(Error::MissingDevice(name.to_string()));
            }
        }
        for rec in self.devices.values() {
            rec.validate()?;
        }
        for conv in ["dac", "adc"] {
            let rec = &self.devices[conv];
            let bad = |reason: &str| Error::InvalidDevice { device: conv.into(), reason: reason.into() };
            match (rec.reference_bits, rec.reference_rate) {
                (Some(b), Some(r)) if b >= 1 && r > 0.0 => {}
                _ => return Err(bad("converter needs reference_bits >= 1 and reference_rate > 0")),
            }
        }
        if self.devices["laser"].wall_plug_efficiency.is_none() {
            return Err(Error::InvalidDevice { device: "laser".into(), reason: "missing wall_plug_efficiency".into() });
        }
        if self.devices["photodetector"].sensitivity_dbm.is_none() {
            return Err(Error::InvalidDevice {
                device: "photodetector".into(),
                reason: "missing sensitivity_dbm".into(),
            });
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&DeviceRecord> {
        self.devices.get(name).ok_or_else(|| Error::MissingDevice(name.to_string()))
    }

    /// Look up a device that [`validate`](Self::validate) guarantees is present.
    pub fn device(&self, name: &str) -> &DeviceRecord {
        &self.devices[name]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.devices.keys().map(String::as_str)
    }

    pub fn insert(&mut self, name: &str, mut record: DeviceRecord) -> Result<()> {
        record.name = name.to_string();
        record.validate()?;
        self.devices.insert(name.to_string(), record);
        Ok(())
    }

    fn converter_power(&self, name: &str, bits: u32, rate: f64) -> Result<f64> {
        if !(MIN_CONVERTER_BITS..=MAX_CONVERTER_BITS).contains(&bits) {
            return Err(Error::BitWidth { bits, min: MIN_CONVERTER_BITS, max: MAX_CONVERTER_BITS });
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid("sample_rate", format!("must be positive, got {rate}")));
        }
        let rec = self.get(name)?;
        let ref_bits = rec.reference_bits.unwrap_or(bits);
        let ref_rate = rec.reference_rate.unwrap_or(rate);
        let rate_factor = rate / ref_rate;
        let bit_factor = match self.converter_scaling {
            ConverterScaling::Walden => 2f64.powi(bits as i32 - ref_bits as i32),
            ConverterScaling::LinearRate => 1.0,
        };
        Ok(rec.power_mw * rate_factor * bit_factor)
    }

    /// DAC power in mW at the given precision and sample rate (Hz).
    pub fn dac_power(&self, bits: u32, sample_rate: f64) -> Result<f64> {
        self.converter_power("dac", bits, sample_rate)
    }

    /// ADC power in mW at the given precision and sample rate (Hz).
    pub fn adc_power(&self, bits: u32, sample_rate: f64) -> Result<f64> {
        self.converter_power("adc", bits, sample_rate)
    }

    /// Minimum received optical power per detector, mW.
    pub fn detector_floor_mw(&self) -> f64 {
        dbm_to_mw(self.device("photodetector").sensitivity_dbm.unwrap_or(f64::NEG_INFINITY))
    }
}

impl Default for DeviceLibrary {
    fn default() -> Self {
        Self::builtin()
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One element of the worst-case optical path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathElement {
    pub device: String,
    pub count: u32,
    pub loss_db: f64,
}

/// Worst-case path from laser to detector, in traversal order:
/// Y-branch fan-out, MZM, DEMUX and MUX microdisks, one bus tap coupler (only
/// when a bus feeds more than one DDot), DDot coupler, phase shifter.
pub fn optical_path(ptc: &PTCConfig, lib: &DeviceLibrary) -> Vec<PathElement> {
    let il = |name: &str| lib.device(name).insertion_loss_db;
    let mut path = vec![
        PathElement { device: "y_branch".into(), count: 1, loss_db: il("y_branch") },
        PathElement { device: "mzm".into(), count: 1, loss_db: il("mzm") },
        PathElement { device: "microdisk".into(), count: 2, loss_db: 2.0 * il("microdisk") },
    ];
    if ptc.n_h.max(ptc.n_v) > 1 {
        path.push(PathElement { device: "directional_coupler".into(), count: 1, loss_db: il("directional_coupler") });
    }
    path.push(PathElement { device: "directional_coupler".into(), count: 1, loss_db: il("directional_coupler") });
    path.push(PathElement { device: "phase_shifter".into(), count: 1, loss_db: il("phase_shifter") });
    path
}

/// Total insertion loss (dB) along [`optical_path`]. Equal power splitting is
/// accounted for in the detector count of [`laser_power`], not here.
pub fn path_insertion_loss(ptc: &PTCConfig, lib: &DeviceLibrary) -> f64 {
    optical_path(ptc, lib).iter().map(|e| e.loss_db).sum()
}

/// Every factor of the laser link budget for one tensor core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserBudget {
    pub detector_floor_mw: f64,
    pub path_loss_db: f64,
    pub loss_factor: f64,
    pub precision_factor: f64,
    /// Balanced detector pairs fed by this core (one per DDot).
    pub detectors: u64,
    pub wall_plug_efficiency: f64,
    pub optical_mw: f64,
    pub electrical_mw: f64,
}

/// Electrical laser power (mW) for one tensor core at `bits` precision.
///
/// Each balanced detector must receive the sensitivity floor after path loss,
/// multiplied by `2^bits` for the precision requirement.
pub fn laser_power(ptc: &PTCConfig, lib: &DeviceLibrary, bits: u32) -> LaserBudget {
    let floor = lib.detector_floor_mw();
    let loss_db = path_insertion_loss(ptc, lib);
    let loss_factor = db_to_linear(loss_db);
    let precision_factor = 2f64.powi(bits as i32);
    let detectors = (ptc.n_h * ptc.n_v) as u64;
    let wpe = lib.device("laser").wall_plug_efficiency.unwrap_or(1.0);
    let optical = floor * loss_factor * precision_factor * detectors as f64;
    LaserBudget {
        detector_floor_mw: floor,
        path_loss_db: loss_db,
        loss_factor,
        precision_factor,
        detectors,
        wall_plug_efficiency: wpe,
        optical_mw: optical,
        electrical_mw: optical / wpe,
    }
}

/// Usable window `(λ_l, λ_r)` in metres for a resonator of the given FSR.
pub fn wavelength_window(fsr: f64, lambda0: f64) -> Result<(f64, f64)> {
    for (name, v) in [("fsr", fsr), ("lambda0", lambda0)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    let f0 = SPEED_OF_LIGHT / lambda0;
    if fsr / 2.0 >= f0 {
        return Err(invalid("fsr", "half FSR exceeds the carrier frequency"));
    }
    Ok((SPEED_OF_LIGHT / (f0 + fsr / 2.0), SPEED_OF_LIGHT / (f0 - fsr / 2.0)))
}

/// Number of channels at `spacing` that fit inside one FSR around `lambda0`.
pub fn max_wavelengths(fsr: f64, lambda0: f64, spacing: f64) -> Result<usize> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(invalid("spacing", format!("must be positive, got {spacing}")));
    }
    let (l, r) = wavelength_window(fsr, lambda0)?;
    Ok(((r - l) / spacing).floor() as usize)
}
