//! DDot: coherent-interference dot product with balanced detection.
//!
//! Each channel carries `x_i` on one coupler input and `y_i` (through the -π/2
//! phase shifter) on the other. The coupler outputs are squared and summed over
//! wavelengths at two photodiodes; the balanced difference `(I0 - I1)/2` is the
//! dot product. Every variant below goes through the same per-channel field
//! computation so the noise-free, dispersion-free limits agree bit for bit.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dispersion::{ChannelResponse, DispersionSpec};
use super::encoding::{quantize_encode, EncodedVector};
use super::noise::NoiseSpec;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Output fields `(z0, z1)` of one channel.
///
/// `phase_drift` adds to the shifter's deviation from -π/2, so the shifter
/// phasor is `e^{jφ}` with `φ = -π/2 + response.phase_offset + phase_drift`.
pub fn coupler_outputs(x: f64, y: f64, response: ChannelResponse, phase_drift: f64) -> (Complex64, Complex64) {
    let dev = response.phase_offset + phase_drift;
    // e^{j(dev - π/2)} without rounding π/2
    let phasor = Complex64::new(dev.sin(), -dev.cos());
    let (t, k) = (response.t(), response.k());
    let x = Complex64::new(x, 0.0);
    let shifted = phasor * y;
    let z0 = x * t + J * k * shifted;
    let z1 = J * k * x + shifted * t;
    (z0, z1)
}

/// Per-channel drift plus the output factor, drawn in a fixed order so the draw
/// count never depends on the sigmas.
struct Drift<'a> {
    noise: &'a NoiseSpec,
    rng: &'a mut ChaCha8Rng,
}

impl Drift<'_> {
    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Balanced photocurrent for normalized amplitudes.
fn detect(x: &[f64], y: &[f64], responses: Option<&[ChannelResponse]>, mut drift: Option<Drift<'_>>) -> f64 {
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let response = responses.map_or(ChannelResponse::IDEAL, |r| r[i]);
        let (xh, yh, dphi) = match drift.as_mut() {
            Some(d) => {
                let (zx, zy, zp) = (d.normal(), d.normal(), d.normal());
                let s = *d.noise;
                (xi + s.sigma_v * xi * zx, yi + s.sigma_v * yi * zy, s.sigma_phi * zp)
            }
            None => (xi, yi, 0.0),
        };
        let (z0, z1) = coupler_outputs(xh, yh, response, dphi);
        i0 += z0.norm_sqr();
        i1 += z1.norm_sqr();
    }
    let out = 0.5 * (i0 - i1);
    match drift {
        Some(mut d) => {
            let factor = 1.0 + d.noise.sigma_out * d.normal();
            out * factor
        }
        None => out,
    }
}

/// Shared entry point for the tensor core: amplitudes in, photocurrent out.
pub(crate) fn evaluate_amplitudes(
    x: &[f64],
    y: &[f64],
    responses: Option<&[ChannelResponse]>,
    noise: &NoiseSpec,
    rng: &mut ChaCha8Rng,
) -> f64 {
    detect(x, y, responses, Some(Drift { noise, rng }))
}

/// Ideal 50:50 coupler, exact -π/2 shifter, no drift.
pub fn ddot_ideal(x: &EncodedVector, y: &EncodedVector) -> Result<f64> {
    check_lengths(x.amplitudes(), y.amplitudes())?;
    Ok(detect(x.amplitudes(), y.amplitudes(), None, None))
}

/// Ideal devices with encoding drift and output noise, deterministic in `seed`.
pub fn ddot_noisy(x: &EncodedVector, y: &EncodedVector, noise: &NoiseSpec, seed: u64) -> Result<f64> {
    check_lengths(x.amplitudes(), y.amplitudes())?;
    noise.validate()?;
    let mut rng = stream_rng(seed, 0);
    Ok(evaluate_amplitudes(x.amplitudes(), y.amplitudes(), None, noise, &mut rng))
}

/// Wavelength-dependent coupler and shifter, channels placed symmetrically about λ0.
pub fn ddot_dispersive(
    x: &EncodedVector,
    y: &EncodedVector,
    disp: &DispersionSpec,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<f64> {
    check_lengths(x.amplitudes(), y.amplitudes())?;
    noise.validate()?;
    let responses = disp.channel_responses(x.len())?;
    let mut rng = stream_rng(seed, 0);
    Ok(evaluate_amplitudes(x.amplitudes(), y.amplitudes(), Some(&responses), noise, &mut rng))
}

/// Additive dispersion error of the balanced output in amplitude units:
/// `Σ (t_i² - k_i²)(x_i² - y_i²)/2`.
pub fn dispersion_offset(x: &[f64], y: &[f64], responses: &[ChannelResponse]) -> f64 {
    x.iter().zip(y).zip(responses).map(|((xi, yi), r)| 0.5 * (1.0 - 2.0 * r.kappa) * (xi * xi - yi * yi)).sum()
}

/// Quantize both raw operands, evaluate on the DDot, and rescale by `β_x·β_y`.
///
/// With `compensate`, the additive dispersion term is removed using the known
/// κ values and the nominal (drift-free) encoded operands.
pub fn scaled_ddot(
    x_raw: &[f64],
    y_raw: &[f64],
    bits: u32,
    disp: Option<&DispersionSpec>,
    noise: &NoiseSpec,
    seed: u64,
    compensate: bool,
) -> Result<f64> {
    check_lengths(x_raw, y_raw)?;
    noise.validate()?;
    let responses = disp.map(|d| d.channel_responses(x_raw.len())).transpose()?;
    let mut rng = stream_rng(seed, 0);
    scaled_ddot_with(x_raw, y_raw, bits, responses.as_deref(), noise, &mut rng, compensate)
}

/// [`scaled_ddot`] with precomputed channel responses and a caller-owned
/// generator, for sweeps that evaluate many pairs.
pub(crate) fn scaled_ddot_with(
    x_raw: &[f64],
    y_raw: &[f64],
    bits: u32,
    responses: Option<&[ChannelResponse]>,
    noise: &NoiseSpec,
    rng: &mut ChaCha8Rng,
    compensate: bool,
) -> Result<f64> {
    check_lengths(x_raw, y_raw)?;
    let x = quantize_encode(x_raw, bits)?;
    let y = quantize_encode(y_raw, bits)?;
    let mut out = evaluate_amplitudes(x.amplitudes(), y.amplitudes(), responses, noise, rng);
    if compensate {
        if let Some(r) = responses {
            out -= dispersion_offset(x.amplitudes(), y.amplitudes(), r);
        }
    }
    Ok(out * x.scale_beta() * y.scale_beta())
}
