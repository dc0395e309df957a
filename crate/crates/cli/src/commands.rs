use std::path::{Path, PathBuf};

use serde::Serialize;

use dota_core::arch::{
    area_of, cost_report, digital_ops_cost, linear_fit, power_of, scaling_sweep, schedule_workload, AcceleratorConfig,
    AreaBreakdown, CostReport, DeviceCounts, EnergyBreakdown, EventCounts, LatencyBreakdown, ScalingPoint, Schedule,
};
use dota_core::devices::{laser_power, DeviceLibrary, LaserBudget};
use dota_core::fidelity::{dispersion_sweep, error_sweep, noise_sweep, DispersionPoint, ErrorSweep, NoisePoint};
use dota_core::optics::{DispersionSpec, NoiseSpec};
use dota_core::tensor_core::PTCConfig;
use dota_core::validation::{run_checks, Check};
use dota_core::workloads::{extract_gemms, Group, TransformerConfig};

use crate::output::{num, write_json, RunManifest, Table};
use crate::{Common, NoiseAxis};

pub enum Failure {
    Config(String),
    Validation(String),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) | Failure::Runtime(_) => 1,
            Failure::Config(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("configuration: {m}"),
            Failure::Validation(m) => format!("validation failed: {m}"),
            Failure::Runtime(e) => format!("{e:#}"),
        }
    }
}

impl From<dota_core::Error> for Failure {
    fn from(e: dota_core::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn is_file_spec(spec: &str) -> bool {
    spec.ends_with(".toml") || Path::new(spec).is_file()
}

fn label(spec: &str) -> String {
    if is_file_spec(spec) {
        spec.to_string()
    } else {
        format!("preset:{spec}")
    }
}

fn load_model(spec: &str) -> Result<TransformerConfig, Failure> {
    Ok(if is_file_spec(spec) {
        TransformerConfig::from_file(Path::new(spec))?
    } else {
        TransformerConfig::preset(spec)?
    })
}

fn load_arch(spec: &str) -> Result<AcceleratorConfig, Failure> {
    Ok(if is_file_spec(spec) {
        AcceleratorConfig::from_file(Path::new(spec))?
    } else {
        AcceleratorConfig::preset(spec)?
    })
}

fn load_devices(common: &Common) -> Result<(DeviceLibrary, String), Failure> {
    match &common.devices {
        Some(p) => Ok((DeviceLibrary::from_file(p)?, p.display().to_string())),
        None => Ok((DeviceLibrary::builtin(), "builtin".into())),
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

#[derive(Serialize)]
struct Totaled<T: Serialize> {
    #[serde(flatten)]
    parts: T,
    total: f64,
}

#[derive(Serialize)]
struct ScopeRow {
    scope: String,
    gemms: u64,
    events: EventCounts,
    energy_mj: f64,
    latency_ms: f64,
    edp_mj_ms: f64,
    avg_power_w: f64,
    energy_breakdown_mj: EnergyBreakdown,
    latency_breakdown_ms: LatencyBreakdown,
}

impl ScopeRow {
    fn new(scope: &str, sched: &Schedule, r: CostReport) -> Self {
        ScopeRow {
            scope: scope.into(),
            gemms: sched.totals.gemms,
            events: sched.totals,
            energy_mj: r.energy_mj,
            latency_ms: r.latency_ms,
            edp_mj_ms: r.edp_mj_ms,
            avg_power_w: r.avg_power_w,
            energy_breakdown_mj: r.energy,
            latency_breakdown_ms: r.latency,
        }
    }
}

#[derive(Serialize)]
struct GemmRow {
    name: String,
    layer: usize,
    group: Group,
    m: usize,
    k: usize,
    n: usize,
    photonic_cycles: u64,
    energy_mj: f64,
    latency_ms: f64,
}

#[derive(Serialize)]
struct DigitalRow {
    elements: u64,
    energy_mj: f64,
    latency_ms: f64,
}

#[derive(Serialize)]
struct LaserReport {
    per_core: LaserBudget,
    cores: usize,
    system_electrical_w: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    model: TransformerConfig,
    arch: AcceleratorConfig,
    bits: u32,
    /// MHA, FC and all GEMMs; non-GEMM digital work is reported separately.
    scopes: Vec<ScopeRow>,
    digital_ops: DigitalRow,
    power_w: Totaled<EnergyBreakdown>,
    area_mm2: Totaled<AreaBreakdown>,
    devices: DeviceCounts,
    laser: LaserReport,
    gemms: Vec<GemmRow>,
}

const SCOPE_HEADER: [&str; 21] = [
    "scope",
    "gemms",
    "photonic_cycles",
    "energy_mj",
    "latency_ms",
    "edp_mj_ms",
    "avg_power_w",
    "energy_laser_mj",
    "energy_dac_mj",
    "energy_adc_mj",
    "energy_mzm_mj",
    "energy_tia_mj",
    "energy_photodetector_mj",
    "energy_microdisk_mj",
    "energy_memory_mj",
    "energy_digital_mj",
    "dac_conversions",
    "adc_conversions",
    "broadcast_modulations_saved",
    "useful_macs",
    "padding_macs",
];

pub fn simulate(model: &str, arch: &str, bits: u32, classifier: bool, common: &Common) -> Outcome {
    let (lib, dev_label) = load_devices(common)?;
    let mut m = load_model(model)?;
    m.include_classifier |= classifier;
    let cfg = load_arch(arch)?.with_bits(bits)?;
    let graph = extract_gemms(&m)?;
    let sched = schedule_workload(&graph, &cfg);

    let mut scopes = Vec::new();
    for (name, s) in [("MHA", sched.group(Group::Mha)), ("FC", sched.group(Group::Fc)), ("total", sched.clone())] {
        let r = cost_report(&s, &cfg, &lib)?;
        scopes.push(ScopeRow::new(name, &s, r));
    }
    let mut gemms = Vec::new();
    for g in &sched.gemms {
        let mut one = Schedule::default();
        one.push(g.clone());
        let r = cost_report(&one, &cfg, &lib)?;
        gemms.push(GemmRow {
            name: g.name.clone(),
            layer: g.layer,
            group: g.group,
            m: g.m,
            k: g.k,
            n: g.n,
            photonic_cycles: g.counts.photonic_cycles,
            energy_mj: r.energy_mj,
            latency_ms: r.latency_ms,
        });
    }
    let (de, dl) = digital_ops_cost(&graph, &cfg);
    let power = power_of(&cfg, bits, &lib)?;
    let area = area_of(&cfg, &lib)?;
    let per_core = laser_power(&cfg.ptc, &lib, bits);
    let report = SimulateReport {
        model: m.clone(),
        arch: cfg.clone(),
        bits,
        scopes,
        digital_ops: DigitalRow {
            elements: graph.digital_ops.iter().map(|o| o.elements).sum(),
            energy_mj: de,
            latency_ms: dl,
        },
        power_w: Totaled { parts: power, total: power.total() },
        area_mm2: Totaled { parts: area, total: area.total() },
        devices: cfg.devices(),
        laser: LaserReport {
            system_electrical_w: per_core.electrical_mw * 1e-3 * cfg.cores() as f64,
            per_core,
            cores: cfg.cores(),
        },
        gemms,
    };

    let manifest = RunManifest::new(
        "simulate",
        vec![("model".into(), label(model)), ("arch".into(), label(arch)), ("devices".into(), dev_label)],
        common.seed,
        &common.out,
    );
    let mut written = Vec::new();
    if common.format.json() {
        written.push(write_json(&common.out, "simulate", &manifest, &report)?);
    }
    if common.format.csv() {
        let mut t = Table::new(&SCOPE_HEADER);
        for s in &report.scopes {
            let mut row = vec![
                s.scope.clone(),
                s.gemms.to_string(),
                s.events.photonic_cycles.to_string(),
                num(s.energy_mj),
                num(s.latency_ms),
                num(s.edp_mj_ms),
                num(s.avg_power_w),
            ];
            row.extend(s.energy_breakdown_mj.items().iter().map(|(_, v)| num(*v)));
            row.extend([
                s.events.dac_conversions.to_string(),
                s.events.adc_conversions.to_string(),
                s.events.broadcast_modulations_saved.to_string(),
                s.events.useful_macs.to_string(),
                s.events.padding_macs.to_string(),
            ]);
            t.push(row);
        }
        written.push(t.write(&common.out, "simulate")?);
        let mut b = Table::new(&["quantity", "category", "value"]);
        for (k, v) in power.items() {
            b.push(vec!["power_w".into(), k.into(), num(v)]);
        }
        b.push(vec!["power_w".into(), "total".into(), num(power.total())]);
        for (k, v) in area.items() {
            b.push(vec!["area_mm2".into(), k.into(), num(v)]);
        }
        b.push(vec!["area_mm2".into(), "total".into(), num(area.total())]);
        written.push(b.write(&common.out, "simulate_breakdown")?);
    }
    for s in &report.scopes {
        println!(
            "{:>5}: energy {:.4e} mJ, latency {:.4e} ms, EDP {:.4e} mJ*ms",
            s.scope, s.energy_mj, s.latency_ms, s.edp_mj_ms
        );
    }
    println!("power {:.3} W, area {:.3} mm^2", power.total(), area.total());
    announce(&written);
    Ok(())
}

fn parse_shape(s: &str) -> Result<(usize, usize, usize), Failure> {
    let parts: Vec<usize> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("shape `{s}` is not MxKxN")))?;
    match parts[..] {
        [m, k, n] if m > 0 && k > 0 && n > 0 => Ok((m, k, n)),
        _ => Err(Failure::Config(format!("shape `{s}` is not MxKxN with positive dimensions"))),
    }
}

#[derive(Serialize)]
struct NoiseSweepReport {
    shape: [usize; 3],
    bits: u32,
    trials: usize,
    dispersion: bool,
    metric: &'static str,
    points: Vec<NoisePoint>,
}

pub fn sweep_noise(
    sigmas: &[f64],
    vary: NoiseAxis,
    shape: &str,
    bits: u32,
    trials: usize,
    dispersion: bool,
    common: &Common,
) -> Outcome {
    let (m, k, n) = parse_shape(shape)?;
    let grid = sigmas
        .iter()
        .map(|&s| match vary {
            NoiseAxis::Phi => NoiseSpec::new(s, 0.0, 0.0),
            NoiseAxis::V => NoiseSpec::new(0.0, s, 0.0),
            NoiseAxis::Out => NoiseSpec::new(0.0, 0.0, s),
            NoiseAxis::All => NoiseSpec::new(s, s, s),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ptc = PTCConfig { bits, ..PTCConfig::default() };
    let disp = DispersionSpec::default();
    let points = noise_sweep(&grid, (m, k, n), &ptc, dispersion.then_some(&disp), trials, common.seed)?;
    let report = NoiseSweepReport {
        shape: [m, k, n],
        bits,
        trials,
        dispersion,
        metric: "matmul error ||C - AB||_F / ||AB||_F against unquantized operands",
        points,
    };
    let manifest = RunManifest::new("sweep noise", vec![], common.seed, &common.out);
    let mut written = Vec::new();
    if common.format.json() {
        written.push(write_json(&common.out, "sweep_noise", &manifest, &report)?);
    }
    if common.format.csv() {
        let mut t = Table::new(&[
            "sigma_phi",
            "sigma_v",
            "sigma_out",
            "trials",
            "mean_rel",
            "std_rel",
            "std_err",
            "p95_rel",
            "max_rel",
        ]);
        for p in &report.points {
            let s = &p.stats;
            t.push(vec![
                num(p.noise.sigma_phi),
                num(p.noise.sigma_v),
                num(p.noise.sigma_out),
                s.trials.to_string(),
                num(s.mean_rel),
                num(s.std_rel),
                num(s.std_err),
                num(s.p95_rel),
                num(s.max_rel),
            ]);
        }
        written.push(t.write(&common.out, "sweep_noise")?);
    }
    for p in &report.points {
        println!(
            "sigma ({}, {}, {}): mean {:.4} +/- {:.4}",
            p.noise.sigma_phi, p.noise.sigma_v, p.noise.sigma_out, p.stats.mean_rel, p.stats.std_err
        );
    }
    announce(&written);
    Ok(())
}

#[derive(Serialize)]
struct DispersionSweepReport {
    dispersion: DispersionSpec,
    bits: u32,
    trials: usize,
    points: Vec<DispersionPoint>,
}

pub fn sweep_dispersion(max_channels: usize, step: usize, bits: u32, trials: usize, common: &Common) -> Outcome {
    let disp = DispersionSpec::default();
    let points = dispersion_sweep(max_channels, step, &disp, bits, trials, common.seed)?;
    let report = DispersionSweepReport { dispersion: disp, bits, trials, points };
    let manifest = RunManifest::new("sweep dispersion", vec![], common.seed, &common.out);
    let mut written = Vec::new();
    if common.format.json() {
        written.push(write_json(&common.out, "sweep_dispersion", &manifest, &report)?);
    }
    if common.format.csv() {
        let mut t = Table::new(&["channels", "kappa_deviation", "phase_deviation_deg", "mean_rel_error"]);
        for p in &report.points {
            t.push(vec![
                p.channels.to_string(),
                num(p.kappa_deviation),
                num(p.phase_deviation_deg),
                num(p.mean_rel_error),
            ]);
        }
        written.push(t.write(&common.out, "sweep_dispersion")?);
    }
    if let Some(p) = report.points.iter().find(|p| p.channels == 25) {
        println!(
            "25 channels: kappa deviation {:.3}%, phase deviation {:.3} deg",
            p.kappa_deviation * 100.0,
            p.phase_deviation_deg
        );
    }
    announce(&written);
    Ok(())
}

#[derive(Serialize)]
struct ErrorRow {
    bits: u32,
    #[serde(flatten)]
    sweep: ErrorSweep,
}

#[derive(Serialize)]
struct ErrorSweepReport {
    length: usize,
    trials: usize,
    noise: NoiseSpec,
    dispersion: Option<DispersionSpec>,
    metric: &'static str,
    rows: Vec<ErrorRow>,
}

pub fn sweep_error(length: usize, bits: &[u32], trials: usize, dispersion: bool, common: &Common) -> Outcome {
    let disp = dispersion.then(DispersionSpec::default);
    let rows = bits
        .iter()
        .map(|&b| {
            Ok(ErrorRow {
                bits: b,
                sweep: error_sweep(length, b, &NoiseSpec::DEFAULT, disp.as_ref(), trials, common.seed)?,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let report = ErrorSweepReport {
        length,
        trials,
        noise: NoiseSpec::DEFAULT,
        dispersion: disp,
        metric: "|optical - reference| / (||x|| ||y|| / sqrt(length))",
        rows,
    };
    let manifest = RunManifest::new("sweep error", vec![], common.seed, &common.out);
    let mut written = Vec::new();
    if common.format.json() {
        written.push(write_json(&common.out, "sweep_error", &manifest, &report)?);
    }
    if common.format.csv() {
        let mut t = Table::new(&[
            "bits",
            "length",
            "trials",
            "analog_mean_rel",
            "analog_std_err",
            "analog_p95_rel",
            "analog_max_rel",
            "end_to_end_mean_rel",
            "end_to_end_std_err",
            "end_to_end_p95_rel",
            "end_to_end_max_rel",
        ]);
        for r in &report.rows {
            let (a, e) = (&r.sweep.analog, &r.sweep.end_to_end);
            t.push(vec![
                r.bits.to_string(),
                length.to_string(),
                trials.to_string(),
                num(a.mean_rel),
                num(a.std_err),
                num(a.p95_rel),
                num(a.max_rel),
                num(e.mean_rel),
                num(e.std_err),
                num(e.p95_rel),
                num(e.max_rel),
            ]);
        }
        written.push(t.write(&common.out, "sweep_error")?);
    }
    for r in &report.rows {
        println!(
            "{}-bit: analog {:.2}%, end-to-end {:.2}%",
            r.bits,
            r.sweep.analog.mean_rel * 100.0,
            r.sweep.end_to_end.mean_rel * 100.0
        );
    }
    announce(&written);
    Ok(())
}

#[derive(Serialize)]
struct ScalingReport {
    base_arch: String,
    bits: u32,
    optics_latency_fit_r2: f64,
    points: Vec<ScalingPoint>,
}

pub fn sweep_scaling(arch: &str, min: usize, max: usize, step: usize, bits: u32, common: &Common) -> Outcome {
    if min == 0 || max < min || step == 0 {
        return Err(Failure::Config(format!("core sizes {min}..={max} step {step} are not a valid range")));
    }
    let (lib, dev_label) = load_devices(common)?;
    let base = load_arch(arch)?.with_bits(bits)?;
    let sizes: Vec<usize> = (min..=max).step_by(step).collect();
    let points = scaling_sweep(&base, &sizes, &lib)?;
    let x: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.optics_latency_ns).collect();
    let r2 = if sizes.len() > 1 { linear_fit(&x, &y).2 } else { 1.0 };
    let report = ScalingReport { base_arch: base.name.clone(), bits, optics_latency_fit_r2: r2, points };
    let manifest = RunManifest::new(
        "sweep scaling",
        vec![("arch".into(), label(arch)), ("devices".into(), dev_label)],
        common.seed,
        &common.out,
    );
    let mut written = Vec::new();
    if common.format.json() {
        written.push(write_json(&common.out, "sweep_scaling", &manifest, &report)?);
    }
    if common.format.csv() {
        let mut t = Table::new(&[
            "core_size",
            "area_mm2",
            "area_photonic_core_mm2",
            "area_dac_mm2",
            "area_adc_mm2",
            "area_mzm_mm2",
            "area_memory_mm2",
            "area_laser_mm2",
            "area_other_mm2",
            "power_w",
            "optics_latency_ns",
            "eo_oe_latency_ns",
            "tops",
            "tops_per_mm2",
            "tops_per_w",
            "tops_per_w_per_mm2",
        ]);
        for p in &report.points {
            let mut row = vec![p.core_size.to_string(), num(p.area_mm2)];
            row.extend(p.area.items().iter().map(|(_, v)| num(*v)));
            row.extend([
                num(p.power_w),
                num(p.optics_latency_ns),
                num(p.eo_oe_latency_ns),
                num(p.tops),
                num(p.tops_per_mm2),
                num(p.tops_per_w),
                num(p.tops_per_w_per_mm2),
            ]);
            t.push(row);
        }
        written.push(t.write(&common.out, "sweep_scaling")?);
    }
    for p in &report.points {
        println!(
            "size {:>3}: area {:.2} mm^2, optics {:.4} ns, {:.2} TOPS",
            p.core_size, p.area_mm2, p.optics_latency_ns, p.tops
        );
    }
    announce(&written);
    Ok(())
}

#[derive(Serialize)]
struct ValidateReport {
    passed: bool,
    checks: Vec<Check>,
}

pub fn validate(common: &Common) -> Outcome {
    let (lib, dev_label) = load_devices(common)?;
    let checks = run_checks(&lib, common.seed);
    let passed = checks.iter().all(|c| c.passed);
    let report = ValidateReport { passed, checks };
    let manifest = RunManifest::new("validate", vec![("devices".into(), dev_label)], common.seed, &common.out);
    let mut written = Vec::new();
    if common.format.json() {
        written.push(write_json(&common.out, "validate", &manifest, &report)?);
    }
    if common.format.csv() {
        let mut t = Table::new(&["check", "passed", "stochastic", "detail"]);
        for c in &report.checks {
            t.push(vec![c.name.clone(), c.passed.to_string(), c.stochastic.to_string(), c.detail.clone()]);
        }
        written.push(t.write(&common.out, "validate")?);
    }
    for c in &report.checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    announce(&written);
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Validation(failed.join(", ")))
    }
}
