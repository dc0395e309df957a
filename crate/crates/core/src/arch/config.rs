use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::devices::{DeviceLibrary, SPEED_OF_LIGHT};
use crate::error::{invalid, Error, Result};
use crate::tensor_core::PTCConfig;

/// SRAM hierarchy. Energies and areas are per-byte / per-KB constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryConfig {
    pub global_sram_bytes: u64,
    /// Weight/operand buffer per tile.
    pub tile_sram_bytes: u64,
    /// Output/activation buffer per tile.
    pub tile_activation_bytes: u64,
    pub subarray_bytes: u64,
    pub subarray_bytes_per_access: u64,
    pub subarray_clock_hz: f64,
    pub read_pj_per_byte: f64,
    pub write_pj_per_byte: f64,
    pub leakage_mw_per_kb: f64,
    pub area_mm2_per_kb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigitalConfig {
    /// Energy of one digital partial-sum accumulation.
    pub accumulate_pj: f64,
    /// Time to drain and accumulate outputs at the end of a GEMM.
    pub drain_latency_s: f64,
    /// Digital unit area per tile.
    pub unit_area_mm2: f64,
    /// Softmax / LayerNorm / GELU cost per element.
    pub nonlinear_pj_per_element: f64,
    pub nonlinear_latency_s_per_element: f64,
}

/// Physical layout constants used for area and optical propagation delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    pub ddot_pitch_um: f64,
    pub mzm_length_um: f64,
    pub group_index: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceleratorConfig {
    pub name: String,
    pub n_t: usize,
    pub n_c: usize,
    pub accumulation_depth: usize,
    /// Share right-operand modulation across tiles.
    #[serde(default = "default_true")]
    pub broadcast: bool,
    /// Fixed EO/OE conversion latency per GEMM; defaults to one DAC period
    /// plus one ADC period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eo_oe_latency_s: Option<f64>,
    pub ptc: PTCConfig,
    pub memory: MemoryConfig,
    pub digital: DigitalConfig,
    pub layout: LayoutConfig,
}

fn default_true() -> bool {
    true
}

impl AcceleratorConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml_str(crate::presets::arch(name)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("accelerator config serializes")
    }

    pub fn with_bits(mut self, bits: u32) -> Result<Self> {
        self.ptc.bits = bits;
        self.ptc.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.ptc.validate()?;
        for (name, v) in [("n_t", self.n_t), ("n_c", self.n_c), ("accumulation_depth", self.accumulation_depth)] {
            if v == 0 {
                return Err(invalid(name, "must be >= 1"));
            }
        }
        let m = &self.memory;
        let d = &self.digital;
        let l = &self.layout;
        for (name, v) in [
            ("memory.read_pj_per_byte", m.read_pj_per_byte),
            ("memory.write_pj_per_byte", m.write_pj_per_byte),
            ("memory.leakage_mw_per_kb", m.leakage_mw_per_kb),
            ("memory.area_mm2_per_kb", m.area_mm2_per_kb),
            ("digital.accumulate_pj", d.accumulate_pj),
            ("digital.drain_latency_s", d.drain_latency_s),
            ("digital.unit_area_mm2", d.unit_area_mm2),
            ("digital.nonlinear_pj_per_element", d.nonlinear_pj_per_element),
            ("digital.nonlinear_latency_s_per_element", d.nonlinear_latency_s_per_element),
            ("layout.ddot_pitch_um", l.ddot_pitch_um),
            ("layout.mzm_length_um", l.mzm_length_um),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("memory.subarray_clock_hz", m.subarray_clock_hz), ("layout.group_index", l.group_index)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if m.subarray_bytes == 0 || m.subarray_bytes_per_access == 0 {
            return Err(invalid("memory.subarray_bytes", "sub-array size and access width must be >= 1"));
        }
        if let Some(t) = self.eo_oe_latency_s {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid("eo_oe_latency_s", format!("must be finite and >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn cores(&self) -> usize {
        self.n_t * self.n_c
    }

    /// Rows of the left operand processed per cycle across all tiles.
    pub fn rows_per_cycle(&self) -> usize {
        self.ptc.n_h * self.n_t
    }

    /// Shared dimension consumed per cycle across the cores of a tile.
    pub fn depth_per_cycle(&self) -> usize {
        self.ptc.n_lambda * self.n_c
    }

    pub fn peak_macs_per_cycle(&self) -> usize {
        self.cores() * self.ptc.macs_per_cycle()
    }

    pub fn adc_rate(&self) -> f64 {
        self.ptc.clock_hz / self.accumulation_depth as f64
    }

    pub fn eo_oe_latency(&self) -> f64 {
        self.eo_oe_latency_s.unwrap_or(1.0 / self.ptc.clock_hz + 1.0 / self.adc_rate())
    }

    /// Light propagation through one modulator and across the crossbar.
    pub fn optics_latency(&self) -> f64 {
        let l = &self.layout;
        let path_um = l.mzm_length_um + (self.ptc.n_h + self.ptc.n_v) as f64 * l.ddot_pitch_um;
        path_um * 1e-6 * l.group_index / SPEED_OF_LIGHT
    }

    pub fn total_sram_bytes(&self) -> u64 {
        let m = &self.memory;
        m.global_sram_bytes + self.n_t as u64 * (m.tile_sram_bytes + m.tile_activation_bytes)
    }

    /// Aggregate SRAM bandwidth (bytes/s) over all sub-arrays.
    pub fn sram_bandwidth(&self) -> f64 {
        let m = &self.memory;
        let subarrays = self.total_sram_bytes().div_ceil(m.subarray_bytes).max(1);
        subarrays as f64 * m.subarray_bytes_per_access as f64 * m.subarray_clock_hz
    }

    pub fn devices(&self) -> DeviceCounts {
        DeviceCounts::of(self)
    }

    pub(crate) fn check_library(&self, lib: &DeviceLibrary) -> Result<()> {
        lib.validate()?;
        lib.dac_power(self.ptc.bits, self.ptc.clock_hz)?;
        Ok(())
    }
}

/// Instantiated device counts for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceCounts {
    /// One per modulated (waveguide, wavelength); right-operand modulators are
    /// shared by all tiles when broadcast is on.
    pub dacs: u64,
    pub mzms: u64,
    /// One per tile output position; the cores of a tile sum in the analog domain.
    pub adcs: u64,
    pub tias: u64,
    /// Two per DDot (balanced pair).
    pub photodetectors: u64,
    /// DEMUX plus MUX per modulated waveguide.
    pub microdisks: u64,
    pub ddots: u64,
}

impl DeviceCounts {
    pub fn of(cfg: &AcceleratorConfig) -> Self {
        let p = &cfg.ptc;
        let (nt, nc) = (cfg.n_t as u64, cfg.n_c as u64);
        let (nh, nv, nl) = (p.n_h as u64, p.n_v as u64, p.n_lambda as u64);
        let right_copies = if cfg.broadcast { 1 } else { nt };
        let waveguides = nc * (nt * nh + right_copies * nv);
        let dacs = waveguides * nl;
        let ddots = nt * nc * nh * nv;
        let adcs = nt * nh * nv;
        DeviceCounts {
            dacs,
            mzms: dacs,
            adcs,
            tias: adcs,
            photodetectors: 2 * ddots,
            microdisks: 2 * nl * waveguides,
            ddots,
        }
    }
}
