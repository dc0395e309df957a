use dota_core::arch::{cost_report, power_of, schedule_workload, AcceleratorConfig};
use dota_core::devices::DeviceLibrary;
use dota_core::presets::{ARCH_NAMES, MODEL_NAMES};
use dota_core::workloads::{extract_gemms, Group, TransformerConfig};

#[test]
fn every_preset_pair_schedules_and_costs() {
    let lib = DeviceLibrary::builtin();
    for arch in ARCH_NAMES {
        let cfg = AcceleratorConfig::preset(arch).unwrap();
        for model in MODEL_NAMES {
            let graph = extract_gemms(&TransformerConfig::preset(model).unwrap()).unwrap();
            let sched = schedule_workload(&graph, &cfg);
            assert_eq!(sched.totals.useful_macs, graph.total_macs(), "{arch}/{model}");
            let total = cost_report(&sched, &cfg, &lib).unwrap();
            let mha = cost_report(&sched.group(Group::Mha), &cfg, &lib).unwrap();
            let fc = cost_report(&sched.group(Group::Fc), &cfg, &lib).unwrap();
            assert!(total.energy_mj > 0.0 && total.latency_ms > 0.0);
            assert!((mha.energy_mj + fc.energy_mj - total.energy_mj).abs() <= 1e-9 * total.energy_mj);
        }
    }
}

#[test]
fn larger_arch_is_faster_on_the_same_model() {
    let lib = DeviceLibrary::builtin();
    let graph = extract_gemms(&TransformerConfig::preset("bert-base").unwrap()).unwrap();
    let lat = |name| {
        let cfg = AcceleratorConfig::preset(name).unwrap();
        cost_report(&schedule_workload(&graph, &cfg), &cfg, &lib).unwrap().latency_ms
    };
    assert!(lat("dota-l") < lat("dota-b"));
}

#[test]
fn configs_round_trip_through_toml() {
    let lib = DeviceLibrary::builtin();
    assert_eq!(DeviceLibrary::from_toml_str(&lib.to_toml_string()).unwrap(), lib);
    for arch in ARCH_NAMES {
        let cfg = AcceleratorConfig::preset(arch).unwrap();
        assert_eq!(AcceleratorConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }
}

#[test]
fn precision_raises_power_monotonically() {
    let lib = DeviceLibrary::builtin();
    let cfg = AcceleratorConfig::preset("dota-b").unwrap();
    let p: Vec<f64> = (2..=8).map(|b| power_of(&cfg, b, &lib).unwrap().total()).collect();
    assert!(p.windows(2).all(|w| w[1] > w[0]), "{p:?}");
    assert!(power_of(&cfg, 9, &lib).is_err());
}
