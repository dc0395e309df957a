//! Data files shipped with the crate.

use crate::error::{Error, Result};

pub const DEVICES: &str = include_str!("../presets/devices.toml");

const MODELS: [(&str, &str); 7] = [
    ("deit-t", include_str!("../presets/models/deit-t.toml")),
    ("deit-s", include_str!("../presets/models/deit-s.toml")),
    ("deit-b", include_str!("../presets/models/deit-b.toml")),
    ("bert-base", include_str!("../presets/models/bert-base.toml")),
    ("bert-base-384", include_str!("../presets/models/bert-base-384.toml")),
    ("bert-large", include_str!("../presets/models/bert-large.toml")),
    ("bert-large-384", include_str!("../presets/models/bert-large-384.toml")),
];

const ARCHS: [(&str, &str); 2] =
    [("dota-b", include_str!("../presets/arch/dota-b.toml")), ("dota-l", include_str!("../presets/arch/dota-l.toml"))];

pub const MODEL_NAMES: [&str; 7] = {
    let mut out = [""; 7];
    let mut i = 0;
    while i < 7 {
        out[i] = MODELS[i].0;
        i += 1;
    }
    out
};

pub const ARCH_NAMES: [&str; 2] = [ARCHS[0].0, ARCHS[1].0];

fn lookup(table: &[(&str, &'static str)], kind: &'static str, name: &str) -> Result<&'static str> {
    table.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| Error::UnknownPreset {
        kind,
        name: name.to_string(),
        available: table.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", "),
    })
}

pub fn model(name: &str) -> Result<&'static str> {
    lookup(&MODELS, "model", name)
}

pub fn arch(name: &str) -> Result<&'static str> {
    lookup(&ARCHS, "arch", name)
}
