use serde::{Deserialize, Serialize};

use super::config::AcceleratorConfig;
use super::cost::{area_of, power_of, AreaBreakdown, PowerBreakdown};
use crate::devices::DeviceLibrary;
use crate::error::{invalid, Result};

/// One core size of the scaling sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub core_size: usize,
    pub area_mm2: f64,
    pub area: AreaBreakdown,
    pub power_w: f64,
    pub power: PowerBreakdown,
    pub optics_latency_ns: f64,
    pub eo_oe_latency_ns: f64,
    pub tops: f64,
    /// Efficiency metrics below exclude DAC and ADC area and power.
    pub tops_per_mm2: f64,
    pub tops_per_w: f64,
    pub tops_per_w_per_mm2: f64,
}

/// A single tile with one `size × size × size` core and only its local
/// buffers, derived from `base`.
pub fn single_core_config(base: &AcceleratorConfig, size: usize) -> AcceleratorConfig {
    let mut cfg = base.clone();
    cfg.name = format!("single-core-{size}");
    cfg.n_t = 1;
    cfg.n_c = 1;
    cfg.ptc.n_h = size;
    cfg.ptc.n_v = size;
    cfg.ptc.n_lambda = size;
    cfg.memory.global_sram_bytes = 0;
    cfg
}

pub fn scaling_sweep(base: &AcceleratorConfig, sizes: &[usize], lib: &DeviceLibrary) -> Result<Vec<ScalingPoint>> {
    if sizes.is_empty() {
        return Err(invalid("sizes", "empty core-size list"));
    }
    sizes
        .iter()
        .map(|&size| {
            let cfg = single_core_config(base, size);
            cfg.validate()?;
            let area = area_of(&cfg, lib)?;
            let power = power_of(&cfg, cfg.ptc.bits, lib)?;
            let tops = 2.0 * cfg.peak_macs_per_cycle() as f64 * cfg.ptc.clock_hz / 1e12;
            let optical_area = area.total() - area.dac - area.adc;
            let optical_power = power.total() - power.dac - power.adc;
            Ok(ScalingPoint {
                core_size: size,
                area_mm2: area.total(),
                area,
                power_w: power.total(),
                power,
                optics_latency_ns: cfg.optics_latency() * 1e9,
                eo_oe_latency_ns: cfg.eo_oe_latency() * 1e9,
                tops,
                tops_per_mm2: tops / optical_area,
                tops_per_w: tops / optical_power,
                tops_per_w_per_mm2: tops / optical_power / optical_area,
            })
        })
        .collect()
}

/// Least-squares line `y = a + b·x`; returns `(a, b, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (my - slope * mx, slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_grows_and_latency_split() {
        let base = AcceleratorConfig::preset("dota-b").unwrap();
        let lib = DeviceLibrary::builtin();
        let sizes: Vec<usize> = (8..=32).step_by(4).collect();
        let pts = scaling_sweep(&base, &sizes, &lib).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].area_mm2 > w[0].area_mm2);
            assert!(w[1].tops > w[0].tops);
            assert_eq!(w[1].eo_oe_latency_ns, w[0].eo_oe_latency_ns);
        }
        let x: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.optics_latency_ns).collect();
        assert!(linear_fit(&x, &y).2 > 0.999);
    }

    #[test]
    fn fit_recovers_line() {
        let (a, b, r2) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
