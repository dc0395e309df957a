use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::config::AcceleratorConfig;
use crate::workloads::{GemmTask, Group, WorkloadGraph};

/// Event counts of a schedule; additive across GEMMs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub gemms: u64,
    pub photonic_cycles: u64,
    pub dac_conversions: u64,
    pub mzm_modulations: u64,
    pub adc_conversions: u64,
    pub tia_events: u64,
    pub digital_accumulations: u64,
    pub sram_reads_bytes: u64,
    pub sram_writes_bytes: u64,
    pub broadcast_modulations_saved: u64,
    pub useful_macs: u64,
    pub padding_macs: u64,
}

impl Add for EventCounts {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl AddAssign for EventCounts {
    fn add_assign(&mut self, o: Self) {
        self.gemms += o.gemms;
        self.photonic_cycles += o.photonic_cycles;
        self.dac_conversions += o.dac_conversions;
        self.mzm_modulations += o.mzm_modulations;
        self.adc_conversions += o.adc_conversions;
        self.tia_events += o.tia_events;
        self.digital_accumulations += o.digital_accumulations;
        self.sram_reads_bytes += o.sram_reads_bytes;
        self.sram_writes_bytes += o.sram_writes_bytes;
        self.broadcast_modulations_saved += o.broadcast_modulations_saved;
        self.useful_macs += o.useful_macs;
        self.padding_macs += o.padding_macs;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GemmSchedule {
    pub name: String,
    pub layer: usize,
    pub group: Group,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub counts: EventCounts,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub totals: EventCounts,
    pub gemms: Vec<GemmSchedule>,
}

impl Schedule {
    pub fn push(&mut self, g: GemmSchedule) {
        self.totals += g.counts;
        self.gemms.push(g);
    }

    pub fn extend(&mut self, other: Schedule) {
        for g in other.gemms {
            self.push(g);
        }
    }

    /// Sub-schedule of one GEMM group.
    pub fn group(&self, group: Group) -> Schedule {
        let mut out = Schedule::default();
        for g in self.gemms.iter().filter(|g| g.group == group) {
            out.push(g.clone());
        }
        out
    }
}

/// Output-stationary tiling of one GEMM.
///
/// Row blocks of `N_h` rows go round-robin to the `N_t` tiles; each tile walks
/// the `N_v`-wide column blocks; the shared dimension is consumed `N_λ·N_c` at a
/// time with the cores of a tile summing photocurrents. Consecutive K groups
/// accumulate in analog for `accumulation_depth` steps per A/D conversion.
/// Right-operand modulation is broadcast to all tiles. Partial blocks are
/// zero-padded and charged as full blocks.
pub fn tile_gemm(task: &GemmTask, cfg: &AcceleratorConfig) -> GemmSchedule {
    let p = &cfg.ptc;
    let (m, k, n) = (task.m.max(1) as u64, task.k.max(1) as u64, task.n.max(1) as u64);
    let (nt, nc) = (cfg.n_t as u64, cfg.n_c as u64);
    let (nh, nv, nl) = (p.n_h as u64, p.n_v as u64, p.n_lambda as u64);
    let row_rounds = m.div_ceil(nh * nt);
    let col_blocks = n.div_ceil(nv);
    let k_groups = k.div_ceil(nl * nc);
    let cycles = row_rounds * col_blocks * k_groups;

    let left_per_cycle = nt * nc * nh * nl;
    let right_per_cycle = nc * nv * nl;
    let right_copies = if cfg.broadcast { 1 } else { nt };
    let dac_per_cycle = left_per_cycle + right_copies * right_per_cycle;
    let saved_per_cycle = (nt - right_copies) * right_per_cycle;

    let conversions_per_output = k_groups.div_ceil(cfg.accumulation_depth as u64);
    let adc = row_rounds * col_blocks * nt * nh * nv * conversions_per_output;
    let padded_macs = cycles * cfg.peak_macs_per_cycle() as u64;
    let useful = m * k * n;
    let bytes_per_value = (p.bits as u64).div_ceil(8).max(1);
    let dac = cycles * dac_per_cycle;
    let repeat = task.repeat.max(1);

    let counts = EventCounts {
        gemms: 1,
        photonic_cycles: cycles,
        dac_conversions: dac,
        mzm_modulations: dac,
        adc_conversions: adc,
        tia_events: adc,
        digital_accumulations: adc,
        sram_reads_bytes: dac * p.bits as u64 / 8,
        sram_writes_bytes: m * n * bytes_per_value,
        broadcast_modulations_saved: cycles * saved_per_cycle,
        useful_macs: useful,
        padding_macs: padded_macs - useful,
    };
    let mut total = EventCounts::default();
    for _ in 0..repeat {
        total += counts;
    }
    GemmSchedule {
        name: task.name.clone(),
        layer: task.layer,
        group: task.group,
        m: task.m,
        k: task.k,
        n: task.n,
        counts: total,
    }
}

pub fn schedule_workload(graph: &WorkloadGraph, cfg: &AcceleratorConfig) -> Schedule {
    let mut s = Schedule::default();
    for t in &graph.gemms {
        s.push(tile_gemm(t, cfg));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn cfg() -> AcceleratorConfig {
        AcceleratorConfig::preset("dota-b").unwrap()
    }

    /// Walks the tiling loop nest explicitly: row blocks dealt to tiles one by
    /// one, each tile stepping over column blocks and K chunks. The busiest
    /// tile sets the cycle count.
    fn event_driven(m: usize, k: usize, n: usize, c: &AcceleratorConfig) -> (u64, u64, u64) {
        let p = &c.ptc;
        let mut busy = vec![0u64; c.n_t];
        let mut blocks_per_tile = vec![0u64; c.n_t];
        let mut row = 0;
        let mut next_tile = 0;
        while row < m {
            blocks_per_tile[next_tile] += 1;
            next_tile = (next_tile + 1) % c.n_t;
            row += p.n_h;
        }
        let mut col_steps = 0u64;
        let mut col = 0;
        while col < n {
            col_steps += 1;
            col += p.n_v;
        }
        let mut k_steps = 0u64;
        let mut kk = 0;
        while kk < k {
            k_steps += 1;
            kk += p.n_lambda * c.n_c;
        }
        for t in 0..c.n_t {
            busy[t] = blocks_per_tile[t] * col_steps * k_steps;
        }
        let cycles = *busy.iter().max().unwrap();
        // a conversion after every `depth` analog steps, plus one for the tail
        let mut convs = 0u64;
        let mut acc = 0;
        for step in 0..k_steps {
            acc += 1;
            if acc == c.accumulation_depth || step + 1 == k_steps {
                convs += 1;
                acc = 0;
            }
        }
        let rounds = blocks_per_tile[0];
        let adc = rounds * c.n_t as u64 * col_steps * (p.n_h * p.n_v) as u64 * convs;
        // modulation events: left operand per tile, right operand once
        let dac = cycles * (c.n_t * c.n_c * p.n_h * p.n_lambda + c.n_c * p.n_v * p.n_lambda) as u64;
        (cycles, adc, dac)
    }

    #[test]
    fn single_shot_fit() {
        let c = cfg();
        let t = GemmTask::fc("x", 0, 48, 24, 12);
        let s = tile_gemm(&t, &c);
        assert_eq!(s.counts.photonic_cycles, 1);
        assert_eq!(s.counts.padding_macs, 0);
    }

    #[test]
    fn unit_gemm_pads() {
        let s = tile_gemm(&GemmTask::fc("x", 0, 1, 1, 1), &cfg());
        assert_eq!(s.counts.photonic_cycles, 1);
        assert_eq!(s.counts.useful_macs, 1);
        assert_eq!(s.counts.padding_macs, 13824 - 1);
    }

    #[test]
    fn deit_b_fc_hand_formula() {
        let s = tile_gemm(&GemmTask::fc("ffn1", 0, 197, 768, 3072), &cfg());
        assert_eq!(s.counts.photonic_cycles, 5 * 256 * 32);
        assert_eq!(s.counts.photonic_cycles, 40960);
    }

    #[test]
    fn broadcast_divides_right_operand_events() {
        let mut c = cfg();
        let t = GemmTask::fc("x", 0, 100, 50, 70);
        let shared = tile_gemm(&t, &c).counts;
        c.broadcast = false;
        let unshared = tile_gemm(&t, &c).counts;
        let right = |dac: u64, cyc: u64| dac - cyc * (c.n_t * c.n_c * 12 * 12) as u64;
        let (rs, ru) = (
            right(shared.dac_conversions, shared.photonic_cycles),
            right(unshared.dac_conversions, unshared.photonic_cycles),
        );
        assert_eq!(ru, rs * c.n_t as u64);
        assert_eq!(unshared.dac_conversions - shared.dac_conversions, shared.broadcast_modulations_saved);
    }

    #[test]
    fn repeat_multiplies() {
        let mut t = GemmTask::mha("x", 0, 30, 40, 50);
        let one = tile_gemm(&t, &cfg()).counts;
        t.repeat = 3;
        let three = tile_gemm(&t, &cfg()).counts;
        assert_eq!(three.photonic_cycles, 3 * one.photonic_cycles);
        assert_eq!(three.gemms, 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn closed_form_matches_event_walk(m in 1usize..=4096, k in 1usize..=4096, n in 1usize..=4096) {
            let c = cfg();
            let s = tile_gemm(&GemmTask::fc("x", 0, m, k, n), &c).counts;
            let (cycles, adc, dac) = event_driven(m, k, n, &c);
            prop_assert_eq!(s.photonic_cycles, cycles);
            prop_assert_eq!(s.adc_conversions, adc);
            prop_assert_eq!(s.dac_conversions, dac);
            prop_assert_eq!(s.useful_macs + s.padding_macs, cycles * 13824);
            let out_tiles = (m.div_ceil(48) * c.n_t * n.div_ceil(12) * 144) as u64;
            prop_assert!(s.adc_conversions <= out_tiles * (k.div_ceil(24) as u64).div_ceil(3));
        }

        #[test]
        fn cycles_monotone(m in 1usize..=600, k in 1usize..=600, n in 1usize..=600, d in 0usize..3) {
            let c = cfg();
            let base = tile_gemm(&GemmTask::fc("x", 0, m, k, n), &c).counts;
            let (m2, k2, n2) = match d { 0 => (m + 1, k, n), 1 => (m, k + 1, n), _ => (m, k, n + 1) };
            let grown = tile_gemm(&GemmTask::fc("x", 0, m2, k2, n2), &c).counts;
            prop_assert!(grown.photonic_cycles >= base.photonic_cycles);
            prop_assert!(grown.adc_conversions >= base.adc_conversions);
            prop_assert!(grown.sram_writes_bytes >= base.sram_writes_bytes);
        }
    }
}
