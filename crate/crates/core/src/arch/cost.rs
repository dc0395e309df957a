use serde::{Deserialize, Serialize};

use super::config::AcceleratorConfig;
use super::schedule::Schedule;
use crate::devices::{laser_power, DeviceLibrary};
use crate::error::Result;
use crate::workloads::WorkloadGraph;

const PJ: f64 = 1e-12;
const MW: f64 = 1e-3;

/// Energy per category in mJ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub laser: f64,
    pub dac: f64,
    pub adc: f64,
    pub mzm: f64,
    pub tia: f64,
    pub photodetector: f64,
    pub microdisk: f64,
    pub memory: f64,
    pub digital: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.items().iter().map(|(_, v)| v).sum()
    }

    pub fn items(&self) -> [(&'static str, f64); 9] {
        [
            ("laser", self.laser),
            ("dac", self.dac),
            ("adc", self.adc),
            ("mzm", self.mzm),
            ("tia", self.tia),
            ("photodetector", self.photodetector),
            ("microdisk", self.microdisk),
            ("memory", self.memory),
            ("digital", self.digital),
        ]
    }
}

/// Steady-state power per category in W.
pub type PowerBreakdown = EnergyBreakdown;

/// Latency components in ms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub compute: f64,
    pub eo_oe: f64,
    pub digital: f64,
    pub memory_stall: f64,
}

impl LatencyBreakdown {
    pub fn total(&self) -> f64 {
        self.compute + self.eo_oe + self.digital + self.memory_stall
    }
}

/// Area per category in mm².
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AreaBreakdown {
    /// DDot arrays, photodetectors and WDM microdisks.
    pub photonic_core: f64,
    pub dac: f64,
    pub adc: f64,
    pub mzm: f64,
    pub memory: f64,
    /// On-chip laser and frequency comb.
    pub laser: f64,
    /// TIAs and digital units.
    pub other: f64,
}

impl AreaBreakdown {
    pub fn total(&self) -> f64 {
        self.items().iter().map(|(_, v)| v).sum()
    }

    pub fn items(&self) -> [(&'static str, f64); 7] {
        [
            ("photonic_core", self.photonic_core),
            ("dac", self.dac),
            ("adc", self.adc),
            ("mzm", self.mzm),
            ("memory", self.memory),
            ("laser", self.laser),
            ("other", self.other),
        ]
    }

    pub fn share(&self, value: f64) -> f64 {
        value / self.total()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub energy_mj: f64,
    pub latency_ms: f64,
    pub edp_mj_ms: f64,
    pub avg_power_w: f64,
    pub energy: EnergyBreakdown,
    pub latency: LatencyBreakdown,
}

/// Per-event and static quantities shared by the energy and power models.
struct Rates {
    e_dac: f64,
    e_mzm: f64,
    e_adc: f64,
    laser_w: f64,
    tia_w: f64,
    pd_w: f64,
    md_w: f64,
    leakage_w: f64,
}

fn rates(cfg: &AcceleratorConfig, lib: &DeviceLibrary) -> Result<Rates> {
    cfg.check_library(lib)?;
    let p = &cfg.ptc;
    let n = cfg.devices();
    let adc_rate = cfg.adc_rate();
    let laser = laser_power(p, lib, p.bits).electrical_mw * cfg.cores() as f64;
    Ok(Rates {
        e_dac: lib.dac_power(p.bits, p.clock_hz)? * MW / p.clock_hz,
        e_mzm: lib.device("mzm").power_mw * MW / p.clock_hz,
        e_adc: lib.adc_power(p.bits, adc_rate)? * MW / adc_rate,
        laser_w: laser * MW,
        tia_w: n.tias as f64 * lib.device("tia").power_mw * MW,
        pd_w: n.photodetectors as f64 * lib.device("photodetector").power_mw * MW,
        md_w: n.microdisks as f64 * lib.device("microdisk").power_mw * MW,
        leakage_w: cfg.total_sram_bytes() as f64 / 1024.0 * cfg.memory.leakage_mw_per_kb * MW,
    })
}

/// Sequential GEMMs, each paying the EO/OE delay and an output drain; a
/// memory stall is added only when operand traffic outruns SRAM bandwidth.
pub fn latency_of(sched: &Schedule, cfg: &AcceleratorConfig) -> LatencyBreakdown {
    let clock = cfg.ptc.clock_hz;
    let bw = cfg.sram_bandwidth();
    let mut out = LatencyBreakdown::default();
    for g in &sched.gemms {
        let c = &g.counts;
        let compute = c.photonic_cycles as f64 / clock;
        let traffic = (c.sram_reads_bytes + c.sram_writes_bytes) as f64 / bw;
        out.compute += compute;
        out.eo_oe += c.gemms as f64 * cfg.eo_oe_latency();
        out.digital += c.gemms as f64 * cfg.digital.drain_latency_s;
        out.memory_stall += (traffic - compute).max(0.0);
    }
    LatencyBreakdown {
        compute: out.compute * 1e3,
        eo_oe: out.eo_oe * 1e3,
        digital: out.digital * 1e3,
        memory_stall: out.memory_stall * 1e3,
    }
}

/// Event energies times counts, static optical/analog power over compute time,
/// SRAM leakage over the whole latency.
pub fn energy_of(sched: &Schedule, cfg: &AcceleratorConfig, lib: &DeviceLibrary) -> Result<EnergyBreakdown> {
    let r = rates(cfg, lib)?;
    let c = &sched.totals;
    let compute = c.photonic_cycles as f64 / cfg.ptc.clock_hz;
    let latency_s = latency_of(sched, cfg).total() * 1e-3;
    let m = &cfg.memory;
    let memory = c.sram_reads_bytes as f64 * m.read_pj_per_byte * PJ
        + c.sram_writes_bytes as f64 * m.write_pj_per_byte * PJ
        + r.leakage_w * latency_s;
    let to_mj = 1e3;
    Ok(EnergyBreakdown {
        laser: r.laser_w * compute * to_mj,
        dac: c.dac_conversions as f64 * r.e_dac * to_mj,
        adc: c.adc_conversions as f64 * r.e_adc * to_mj,
        mzm: c.mzm_modulations as f64 * r.e_mzm * to_mj,
        tia: r.tia_w * compute * to_mj,
        photodetector: r.pd_w * compute * to_mj,
        microdisk: r.md_w * compute * to_mj,
        memory: memory * to_mj,
        digital: c.digital_accumulations as f64 * cfg.digital.accumulate_pj * PJ * to_mj,
    })
}

pub fn cost_report(sched: &Schedule, cfg: &AcceleratorConfig, lib: &DeviceLibrary) -> Result<CostReport> {
    let energy = energy_of(sched, cfg, lib)?;
    let latency = latency_of(sched, cfg);
    let (e, t) = (energy.total(), latency.total());
    Ok(CostReport {
        energy_mj: e,
        latency_ms: t,
        edp_mj_ms: e * t,
        avg_power_w: if t > 0.0 { e / t } else { 0.0 },
        energy,
        latency,
    })
}

/// Energy (mJ) and latency (ms) of the non-GEMM digital work of a workload.
pub fn digital_ops_cost(graph: &WorkloadGraph, cfg: &AcceleratorConfig) -> (f64, f64) {
    let elements: u64 = graph.digital_ops.iter().map(|o| o.elements).sum();
    let d = &cfg.digital;
    (elements as f64 * d.nonlinear_pj_per_element * PJ * 1e3, elements as f64 * d.nonlinear_latency_s_per_element * 1e3)
}

/// Device areas times counts plus per-KB memory area and per-tile digital units.
pub fn area_of(cfg: &AcceleratorConfig, lib: &DeviceLibrary) -> Result<AreaBreakdown> {
    cfg.check_library(lib)?;
    let n = cfg.devices();
    let um2 = |name: &str| lib.device(name).area_um2 * 1e-6;
    let pitch_mm = cfg.layout.ddot_pitch_um * 1e-3;
    let comb = lib.get("micro_comb").map(|d| d.area_um2 * 1e-6).unwrap_or(0.0);
    Ok(AreaBreakdown {
        photonic_core: n.ddots as f64 * pitch_mm * pitch_mm
            + n.photodetectors as f64 * um2("photodetector")
            + n.microdisks as f64 * um2("microdisk"),
        dac: n.dacs as f64 * um2("dac"),
        adc: n.adcs as f64 * um2("adc"),
        mzm: n.mzms as f64 * um2("mzm"),
        memory: cfg.total_sram_bytes() as f64 / 1024.0 * cfg.memory.area_mm2_per_kb,
        laser: um2("laser") + comb,
        other: n.tias as f64 * um2("tia") + cfg.n_t as f64 * cfg.digital.unit_area_mm2,
    })
}

/// Power (W) at full utilization: every converter and modulator toggling each
/// cycle, operands streamed from SRAM each cycle, static power always on.
pub fn power_of(cfg: &AcceleratorConfig, bits: u32, lib: &DeviceLibrary) -> Result<PowerBreakdown> {
    let cfg = cfg.clone().with_bits(bits)?;
    let r = rates(&cfg, lib)?;
    let n = cfg.devices();
    let clock = cfg.ptc.clock_hz;
    let adc_rate = cfg.adc_rate();
    let read_bytes_per_s = n.dacs as f64 * bits as f64 / 8.0 * clock;
    Ok(PowerBreakdown {
        laser: r.laser_w,
        dac: n.dacs as f64 * r.e_dac * clock,
        adc: n.adcs as f64 * r.e_adc * adc_rate,
        mzm: n.mzms as f64 * r.e_mzm * clock,
        tia: r.tia_w,
        photodetector: r.pd_w,
        microdisk: r.md_w,
        memory: read_bytes_per_s * cfg.memory.read_pj_per_byte * PJ + r.leakage_w,
        digital: n.adcs as f64 * adc_rate * cfg.digital.accumulate_pj * PJ,
    })
}

/// Power (mW) of a standalone DDot of length `n_lambda`: `2·n_lambda` DACs and
/// MZMs, one ADC at the full clock, a balanced photodetector pair and one TIA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdotPower {
    pub dac: f64,
    pub mzm: f64,
    pub adc: f64,
    pub photodetector: f64,
    pub tia: f64,
}

impl DdotPower {
    pub fn total(&self) -> f64 {
        self.dac + self.mzm + self.adc + self.photodetector + self.tia
    }

    pub fn modulation_share(&self) -> f64 {
        (self.dac + self.mzm) / self.total()
    }
}

pub fn ddot_power_breakdown(n_lambda: usize, bits: u32, clock_hz: f64, lib: &DeviceLibrary) -> Result<DdotPower> {
    let mods = 2.0 * n_lambda as f64;
    Ok(DdotPower {
        dac: mods * lib.dac_power(bits, clock_hz)?,
        mzm: mods * lib.device("mzm").power_mw,
        adc: lib.adc_power(bits, clock_hz)?,
        photodetector: 2.0 * lib.device("photodetector").power_mw,
        tia: lib.device("tia").power_mw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::schedule::{schedule_workload, tile_gemm};
    use crate::workloads::{extract_gemms, GemmTask, Group, TransformerConfig};
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn setup() -> (AcceleratorConfig, DeviceLibrary) {
        (AcceleratorConfig::preset("dota-b").unwrap(), DeviceLibrary::builtin())
    }

    fn one(task: GemmTask, cfg: &AcceleratorConfig) -> Schedule {
        let mut s = Schedule::default();
        s.push(tile_gemm(&task, cfg));
        s
    }

    #[test]
    fn empty_schedule_costs_nothing() {
        let (cfg, lib) = setup();
        let e = energy_of(&Schedule::default(), &cfg, &lib).unwrap();
        assert_eq!(e.total(), 0.0);
        assert_eq!(latency_of(&Schedule::default(), &cfg).total(), 0.0);
    }

    #[test]
    fn one_cycle_latency() {
        let (mut cfg, _) = setup();
        cfg.eo_oe_latency_s = Some(0.0);
        cfg.digital.drain_latency_s = 0.0;
        let s = one(GemmTask::fc("x", 0, 1, 1, 1), &cfg);
        assert!((latency_of(&s, &cfg).total() - 0.2e-6).abs() < 1e-18);
    }

    #[test]
    fn default_eo_oe_is_dac_plus_adc_period() {
        let (cfg, _) = setup();
        assert!((cfg.eo_oe_latency() - (0.2e-9 + 0.6e-9)).abs() < 1e-21);
    }

    #[test]
    fn event_energies_by_hand() {
        let (cfg, lib) = setup();
        let s = one(GemmTask::fc("x", 0, 48, 24, 12), &cfg);
        let e = energy_of(&s, &cfg, &lib).unwrap();
        // one cycle: 1440 DAC/MZM events, 576 ADC events at 4 bits
        let e_dac = 50e-3 * (5.0 / 14.0) / 16.0 / 5e9;
        assert!((e.dac - 1440.0 * e_dac * 1e3).abs() < 1e-15);
        assert!((e.mzm - 1440.0 * 0.45e-12 * 1e3).abs() < 1e-15);
        assert!((e.adc - 576.0 * 1.48e-12 / 16.0 * 1e3).abs() < 1e-15);
        assert!((e.photodetector - 2304.0 * 1.1e-3 * 0.2e-9 * 1e3).abs() < 1e-15);
    }

    #[test]
    fn breakdowns_sum_to_totals() {
        let (cfg, lib) = setup();
        let g = extract_gemms(&TransformerConfig::preset("deit-t").unwrap()).unwrap();
        let s = schedule_workload(&g, &cfg);
        let r = cost_report(&s, &cfg, &lib).unwrap();
        let sum: f64 = r.energy.items().iter().map(|(_, v)| v).sum();
        assert!((sum - r.energy_mj).abs() <= 1e-9 * r.energy_mj);
        let mha = cost_report(&s.group(Group::Mha), &cfg, &lib).unwrap();
        let fc = cost_report(&s.group(Group::Fc), &cfg, &lib).unwrap();
        assert!((mha.energy_mj + fc.energy_mj - r.energy_mj).abs() <= 1e-9 * r.energy_mj);
        assert!((mha.latency_ms + fc.latency_ms - r.latency_ms).abs() <= 1e-9 * r.latency_ms);
    }

    #[test]
    fn fig3_modulation_share() {
        let lib = DeviceLibrary::builtin();
        let p = ddot_power_breakdown(4, 4, 5e9, &lib).unwrap();
        let share = p.modulation_share();
        assert!((0.70..=0.90).contains(&share), "{share}");
        // independent spreadsheet: 8 DACs, 8 MZMs, one ADC, 2 PDs, 1 TIA
        let dac = 8.0 * 50.0 * (5.0 / 14.0) / 16.0;
        let total = dac + 18.0 + 14.8 * 0.5 / 16.0 + 2.2 + 3.0;
        assert!(((dac + 18.0) / total - share).abs() < 1e-12);
    }

    #[test]
    fn area_additive_in_tiles() {
        let (cfg, lib) = setup();
        let mut double = cfg.clone();
        double.n_t *= 2;
        let a = area_of(&cfg, &lib).unwrap();
        let b = area_of(&double, &lib).unwrap();
        assert!((b.adc / a.adc - 2.0).abs() < 1e-12);
        assert!((b.photonic_core / a.photonic_core - 2.0).abs() < 0.1);
        assert!((b.dac / a.dac - 2.0).abs() < 0.25);
    }

    #[test]
    fn power_breakdown_sums() {
        let (cfg, lib) = setup();
        let p = power_of(&cfg, 8, &lib).unwrap();
        let sum: f64 = p.items().iter().map(|(_, v)| v).sum();
        assert!((sum - p.total()).abs() < 1e-12);
        assert!(p.total() > 3.0 * power_of(&cfg, 4, &lib).unwrap().total());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn energy_and_latency_monotone(m in 1usize..400, k in 1usize..400, n in 1usize..400, d in 0usize..3) {
            let (cfg, lib) = setup();
            let base = one(GemmTask::fc("x", 0, m, k, n), &cfg);
            let (m2, k2, n2) = match d { 0 => (m + 1, k, n), 1 => (m, k + 1, n), _ => (m, k, n + 1) };
            let grown = one(GemmTask::fc("x", 0, m2, k2, n2), &cfg);
            let eb = energy_of(&base, &cfg, &lib).unwrap().total();
            let eg = energy_of(&grown, &cfg, &lib).unwrap().total();
            prop_assert!(eg >= eb * (1.0 - 1e-12));
            prop_assert!(latency_of(&grown, &cfg).total() >= latency_of(&base, &cfg).total() * (1.0 - 1e-12));
        }
    }
}
