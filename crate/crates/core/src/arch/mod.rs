//! Tiling onto tiles × cores with output-stationary dataflow, and the
//! energy / latency / area / power model on top of the resulting schedule.

mod config;
mod cost;
mod scaling;
mod schedule;

pub use config::{AcceleratorConfig, DeviceCounts, DigitalConfig, LayoutConfig, MemoryConfig};
pub use cost::{
    area_of, cost_report, ddot_power_breakdown, digital_ops_cost, energy_of, latency_of, power_of, AreaBreakdown,
    CostReport, DdotPower, EnergyBreakdown, LatencyBreakdown, PowerBreakdown,
};
pub use scaling::{linear_fit, scaling_sweep, single_core_config, ScalingPoint};
pub use schedule::{schedule_workload, tile_gemm, EventCounts, GemmSchedule, Schedule};
