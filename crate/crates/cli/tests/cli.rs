use std::path::Path;
use std::process::{Command, Output};

const DEVICES: &str = include_str!("../../core/presets/devices.toml");
const ARCH_B: &str = include_str!("../../core/presets/arch/dota-b.toml");

fn dota(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dota"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("spawn dota")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = dota(&["simulate", "--model", "deit-t", "--arch", "dota-b"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["manifest"]["command"], "simulate");
    assert_eq!(json["manifest"]["timestamp"], "1970-01-01T00:00:00Z");
    let scopes = json["scopes"].as_array().unwrap();
    assert_eq!(scopes.len(), 3);
    let sum = scopes[0]["energy_mj"].as_f64().unwrap() + scopes[1]["energy_mj"].as_f64().unwrap();
    assert!((sum - scopes[2]["energy_mj"].as_f64().unwrap()).abs() < 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("simulate_breakdown.csv").exists());
}

#[test]
fn model_and_arch_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("tiny.toml");
    std::fs::write(
        &model,
        "model_name = \"tiny\"\nlayers = 1\nhidden_dim = 32\nheads = 2\nffn_dim = 64\nseq_len = 8\n",
    )
    .unwrap();
    let arch = dir.path().join("one-tile.toml");
    std::fs::write(&arch, ARCH_B.replacen("n_t = 4", "n_t = 1", 1)).unwrap();
    let o = dota(
        &["simulate", "--model", model.to_str().unwrap(), "--arch", arch.to_str().unwrap(), "--format", "json"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("simulate.json")).unwrap()).unwrap();
    // q, k, v, out, ffn1, ffn2 plus one QK^T and one AV per head
    assert_eq!(json["gemms"].as_array().unwrap().len(), 10);
    assert_eq!(json["arch"]["n_t"], 1);
    assert_eq!(json["manifest"]["configs"][1][1], arch.to_str().unwrap());
    assert!(!dir.path().join("simulate.csv").exists());
}

#[test]
fn unknown_preset_lists_available() {
    let dir = tempfile::tempdir().unwrap();
    let o = dota(&["simulate", "--model", "gpt-9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("gpt-9") && e.contains("deit-t") && e.contains("bert-large"), "{e}");
}

#[test]
fn negative_device_power_names_the_device() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("devices.toml");
    std::fs::write(&bad, DEVICES.replacen("power_mw = 3.0", "power_mw = -3.0", 1)).unwrap();
    let o = dota(&["validate", "--devices", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tia"), "{}", stderr(&o));
}

#[test]
fn malformed_shape_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dota(&["sweep", "noise", "--shape", "12x0x4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = dota(&["validate", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["manifest"]["seed"], 3);
}

#[test]
fn sweeps_emit_plot_ready_tables() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sweep", "error", "--trials", "50"][..],
        &["sweep", "dispersion", "--max-channels", "10", "--trials", "3"],
        &["sweep", "noise", "--sigmas", "0.01,0.02", "--trials", "4", "--shape", "4x12x4"],
        &["sweep", "scaling", "--min", "8", "--max", "16", "--step", "4"],
    ] {
        let o = dota(args, dir.path());
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    }
    let scaling = std::fs::read_to_string(dir.path().join("sweep_scaling.csv")).unwrap();
    assert_eq!(scaling.lines().count(), 4);
    let noise = std::fs::read_to_string(dir.path().join("sweep_noise.csv")).unwrap();
    assert_eq!(noise.lines().count(), 3);
    let error: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep_error.json")).unwrap()).unwrap();
    assert_eq!(error["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn seed_changes_stochastic_output_only() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "error", "--trials", "30", "--format", "csv"];
    assert!(dota(&args, a.path()).status.success());
    let mut seeded = args.to_vec();
    seeded.extend(["--seed", "9"]);
    assert!(dota(&seeded, b.path()).status.success());
    let ra = std::fs::read(a.path().join("sweep_error.csv")).unwrap();
    let rb = std::fs::read(b.path().join("sweep_error.csv")).unwrap();
    assert_ne!(ra, rb);
}
