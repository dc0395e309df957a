//! Wavelength-dependent response of the DDot coupler and phase shifter.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Half-width of the window in which the linear coupling-length model is trusted.
pub const VALIDITY_HALF_WIDTH: f64 = 15e-9;

/// Coupling-length slope (1/m) that puts the worst of 25 channels at 0.4 nm
/// spacing at a 1.8% relative deviation of the power coupling coefficient.
pub const CALIBRATED_COUPLING_SLOPE: f64 = 2_360_403.389_431_825;

/// Device dispersion parameters.
///
/// The 100%-coupling length follows `L_c(λ) = L_c(λ0)·(1 + slope·(λ - λ0))`, and
/// the phase shifter applies `2π·optical_length/λ`. With
/// `optical_length = -λ0/4` the shifter sits at -90° at the centre wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSpec {
    pub lambda0: f64,
    pub channel_spacing: f64,
    pub coupling_length_slope: f64,
    pub phase_shifter_optical_length: f64,
    /// When false the phase shifter holds its centre-wavelength phase on every channel.
    #[serde(default = "default_true")]
    pub phase_dispersion: bool,
}

fn default_true() -> bool {
    true
}

impl Default for DispersionSpec {
    fn default() -> Self {
        let lambda0 = 1550e-9;
        Self {
            lambda0,
            channel_spacing: 0.4e-9,
            coupling_length_slope: CALIBRATED_COUPLING_SLOPE,
            phase_shifter_optical_length: -lambda0 / 4.0,
            phase_dispersion: true,
        }
    }
}

/// Coupler and phase-shifter response seen by one wavelength channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelResponse {
    /// Power coupling coefficient κ.
    pub kappa: f64,
    /// Deviation of the shifter phase from -π/2, in radians.
    pub phase_offset: f64,
}

impl ChannelResponse {
    pub const IDEAL: ChannelResponse = ChannelResponse { kappa: 0.5, phase_offset: 0.0 };

    /// Field transmission `t = sqrt(1 - κ)`.
    pub fn t(&self) -> f64 {
        (1.0 - self.kappa).sqrt()
    }

    /// Field coupling `k = sqrt(κ)`.
    pub fn k(&self) -> f64 {
        self.kappa.sqrt()
    }
}

impl DispersionSpec {
    /// Coupler slope and phase dispersion both off: κ ≡ 0.5, φ ≡ -π/2.
    pub fn dispersion_free() -> Self {
        Self { coupling_length_slope: 0.0, phase_dispersion: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(invalid("lambda0", format!("must be positive, got {}", self.lambda0)));
        }
        if !(self.channel_spacing.is_finite() && self.channel_spacing > 0.0) {
            return Err(invalid("channel_spacing", format!("must be positive, got {}", self.channel_spacing)));
        }
        if !self.coupling_length_slope.is_finite() || !self.phase_shifter_optical_length.is_finite() {
            return Err(invalid("dispersion", "slope and optical length must be finite"));
        }
        Ok(())
    }

    fn check_window(&self, lambda: f64) -> Result<()> {
        let lo = self.lambda0 - VALIDITY_HALF_WIDTH;
        let hi = self.lambda0 + VALIDITY_HALF_WIDTH;
        // small slack so grid points computed in floating point at the edge stay valid
        let slack = 1e-6 * self.channel_spacing;
        if !lambda.is_finite() || lambda < lo - slack || lambda > hi + slack {
            return Err(Error::WavelengthOutOfRange { lambda_nm: lambda * 1e9, lo_nm: lo * 1e9, hi_nm: hi * 1e9 });
        }
        Ok(())
    }

    /// Power coupling coefficient `κ(λ) = sin²(π·L_c(λ0) / (4·L_c(λ)))`.
    ///
    /// Evaluated as `(1 + sin 2ε)/2` with ε the offset from π/4, which makes
    /// κ(λ0) = 0.5 exactly.
    pub fn kappa_of_lambda(&self, lambda: f64) -> Result<f64> {
        self.check_window(lambda)?;
        let stretch = self.coupling_length_slope * (lambda - self.lambda0);
        let eps = -std::f64::consts::FRAC_PI_4 * stretch / (1.0 + stretch);
        Ok(0.5 * (1.0 + (2.0 * eps).sin()))
    }

    /// Phase shifter response in radians; -π/2 at λ0 for the default optical length.
    pub fn phase_of_lambda(&self, lambda: f64) -> Result<f64> {
        self.check_window(lambda)?;
        let at = if self.phase_dispersion { lambda } else { self.lambda0 };
        // 2π·OPL/λ written so that OPL = -λ0/4 yields exactly -π/2 at λ0
        Ok(FRAC_PI_2 * (4.0 * self.phase_shifter_optical_length / at))
    }

    /// Wavelength of channel `index` when `count` channels are placed
    /// symmetrically about λ0 (a channel sits on λ0 only when `count` is odd).
    pub fn channel_wavelength(&self, index: usize, count: usize) -> f64 {
        let offset = index as f64 - (count as f64 - 1.0) / 2.0;
        self.lambda0 + offset * self.channel_spacing
    }

    /// Largest channel count whose symmetric placement fits the validity window.
    pub fn max_channels(&self) -> usize {
        (2.0 * VALIDITY_HALF_WIDTH / self.channel_spacing * (1.0 + 1e-9)).floor() as usize + 1
    }

    /// Responses for `count` symmetric channels.
    pub fn channel_responses(&self, count: usize) -> Result<Vec<ChannelResponse>> {
        self.validate()?;
        if count > self.max_channels() {
            return Err(Error::TooManyChannels { channels: count, max: self.max_channels() });
        }
        (0..count)
            .map(|i| {
                let lambda = self.channel_wavelength(i, count);
                Ok(ChannelResponse {
                    kappa: self.kappa_of_lambda(lambda)?,
                    phase_offset: self.phase_of_lambda(lambda)? + FRAC_PI_2,
                })
            })
            .collect()
    }

    /// Worst-channel relative κ deviation `|κ - 0.5| / 0.5` and phase deviation
    /// from -90° in degrees, over `count` symmetric channels.
    pub fn worst_deviation(&self, count: usize) -> Result<(f64, f64)> {
        let responses = self.channel_responses(count)?;
        let kappa_dev = responses.iter().map(|r| (r.kappa - 0.5).abs() / 0.5).fold(0.0, f64::max);
        let phase_dev = responses.iter().map(|r| r.phase_offset.abs().to_degrees()).fold(0.0, f64::max);
        Ok((kappa_dev, phase_dev))
    }
}
