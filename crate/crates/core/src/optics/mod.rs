//! Complex-amplitude model of the DDot dot-product engine.

mod ddot;
mod dispersion;
mod encoding;
mod noise;

pub use ddot::{coupler_outputs, ddot_dispersive, ddot_ideal, ddot_noisy, dispersion_offset, scaled_ddot};
pub(crate) use ddot::{evaluate_amplitudes, scaled_ddot_with};
pub use dispersion::{ChannelResponse, DispersionSpec, CALIBRATED_COUPLING_SLOPE, VALIDITY_HALF_WIDTH};
pub(crate) use encoding::check_bits;
pub use encoding::{levels, quantize_encode, EncodedVector, MAX_BITS, MIN_BITS};
pub use noise::NoiseSpec;
