//! Simulator for a photonic Transformer accelerator built from
//! interference-based dot-product engines.
//!
//! - [`optics`]: DDot field model, quantization, encoding noise, WDM dispersion.
//! - [`devices`]: component library and converter/laser scaling rules.
//! - [`tensor_core`]: crossbar of DDot engines, splitter network, modulation sharing.
//! - [`arch`]: tiling with output-stationary dataflow and the energy/latency/area/power model.
//! - [`workloads`]: Transformer layers lowered to GEMM task lists.
//! - [`fidelity`]: Monte-Carlo error sweeps.

pub mod arch;
pub mod devices;
pub mod error;
pub mod fidelity;
pub mod optics;
pub mod presets;
pub mod rng;
pub mod tensor_core;
pub mod validation;
pub mod workloads;

pub use error::{Error, Result};
