//! Crossbar of DDot engines: geometry, splitter network, photonic matmul and
//! modulation-energy accounting.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::devices::DeviceLibrary;
use crate::error::{invalid, Error, Result};
use crate::optics::{check_bits, evaluate_amplitudes, quantize_encode, ChannelResponse, DispersionSpec, NoiseSpec};
use crate::rng::stream_rng;

/// Geometry and timing of one tensor core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PTCConfig {
    /// Horizontal input waveguides (rows of the left operand block).
    pub n_h: usize,
    /// Vertical input waveguides (columns of the right operand block).
    pub n_v: usize,
    /// Wavelengths per waveguide (shared dimension).
    pub n_lambda: usize,
    pub clock_hz: f64,
    pub bits: u32,
}

impl Default for PTCConfig {
    fn default() -> Self {
        Self { n_h: 12, n_v: 12, n_lambda: 12, clock_hz: 5e9, bits: 4 }
    }
}

impl PTCConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("n_h", self.n_h), ("n_v", self.n_v), ("n_lambda", self.n_lambda)] {
            if v == 0 {
                return Err(invalid(name, "must be >= 1"));
            }
        }
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(invalid("clock_hz", format!("must be positive, got {}", self.clock_hz)));
        }
        check_bits(self.bits)
    }

    /// Also checks the channel count against the dispersion validity window.
    pub fn validate_with(&self, disp: &DispersionSpec) -> Result<()> {
        self.validate()?;
        let max = disp.max_channels();
        if self.n_lambda > max {
            return Err(Error::TooManyChannels { channels: self.n_lambda, max });
        }
        Ok(())
    }

    pub fn ddots(&self) -> usize {
        self.n_h * self.n_v
    }

    /// MACs completed in one photonic cycle.
    pub fn macs_per_cycle(&self) -> usize {
        self.n_h * self.n_v * self.n_lambda
    }
}

/// Coupling ratios of the bus taps feeding every DDot.
///
/// `ratios_v[[i, j]]` is the tap on horizontal waveguide `i` at column `j`;
/// `ratios_h[[i, j]]` is the tap on vertical waveguide `j` at row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitterNetwork {
    pub ratios_v: Array2<f64>,
    pub ratios_h: Array2<f64>,
}

pub fn split_ratios(n_v: usize, n_h: usize) -> Result<SplitterNetwork> {
    if n_v == 0 || n_h == 0 {
        return Err(invalid("splitter", "n_v and n_h must be >= 1"));
    }
    Ok(SplitterNetwork {
        ratios_v: Array2::from_shape_fn((n_h, n_v), |(_, j)| 1.0 / (n_v - j) as f64),
        ratios_h: Array2::from_shape_fn((n_h, n_v), |(i, _)| 1.0 / (n_h - i) as f64),
    })
}

/// Power extracted at each tap of a bus, plus what is left after the last tap.
pub fn tap_powers(ratios: ArrayView1<'_, f64>, input: f64) -> (Vec<f64>, f64) {
    let mut remaining = input;
    let taps = ratios
        .iter()
        .map(|r| {
            let out = remaining * r;
            remaining -= out;
            out
        })
        .collect();
    (taps, remaining)
}

impl SplitterNetwork {
    /// Optical power reaching each DDot from its horizontal and vertical buses,
    /// given per-waveguide input powers. Returns `(from_h, from_v, residual)`.
    pub fn deliver(&self, h_inputs: &[f64], v_inputs: &[f64]) -> (Array2<f64>, Array2<f64>, f64) {
        let (n_h, n_v) = self.ratios_v.dim();
        assert_eq!(h_inputs.len(), n_h);
        assert_eq!(v_inputs.len(), n_v);
        let mut from_h = Array2::zeros((n_h, n_v));
        let mut from_v = Array2::zeros((n_h, n_v));
        let mut residual = 0.0;
        for (i, &input) in h_inputs.iter().enumerate() {
            let (taps, rest) = tap_powers(self.ratios_v.row(i), input);
            from_h.row_mut(i).assign(&ArrayView1::from(&taps));
            residual += rest;
        }
        for (j, &input) in v_inputs.iter().enumerate() {
            let (taps, rest) = tap_powers(self.ratios_h.column(j), input);
            from_v.column_mut(j).assign(&ArrayView1::from(&taps));
            residual += rest;
        }
        (from_h, from_v, residual)
    }
}

/// Result of a photonic matrix product.
#[derive(Debug, Clone, PartialEq)]
pub struct MatmulOutput {
    pub values: Array2<f64>,
    pub photonic_cycles: u64,
}

fn check_operands(a: &Array2<f64>, b: &Array2<f64>) -> Result<()> {
    if a.ncols() != b.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "left is {}x{}, right is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Per-tensor quantization of both operands, then every output entry is a sum
/// over `ceil(K / chunk)` DDot evaluations of at most `chunk` channels. Each
/// evaluation draws from its own stream so the result is order-independent.
fn photonic_product(
    a: &Array2<f64>,
    b: &Array2<f64>,
    chunk: usize,
    bits: u32,
    disp: Option<&DispersionSpec>,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<Array2<f64>> {
    check_operands(a, b)?;
    noise.validate()?;
    let (m, k) = a.dim();
    let n = b.ncols();
    let qa = quantize_encode(&a.iter().copied().collect::<Vec<_>>(), bits)?;
    let qb = quantize_encode(&b.t().iter().copied().collect::<Vec<_>>(), bits)?;
    let responses: Option<Vec<ChannelResponse>> = disp.map(|d| d.channel_responses(chunk)).transpose()?;
    let scale = qa.scale_beta() * qb.scale_beta();
    let (ax, by) = (qa.amplitudes(), qb.amplitudes());
    let chunks = k.div_ceil(chunk);
    let values: Vec<f64> = (0..m * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let row = &ax[i * k..(i + 1) * k];
            let col = &by[j * k..(j + 1) * k];
            let mut acc = 0.0;
            for c in 0..chunks {
                let lo = c * chunk;
                let hi = (lo + chunk).min(k);
                let mut rng = stream_rng(seed, (idx * chunks + c) as u64);
                let resp = responses.as_deref().map(|r| &r[..hi - lo]);
                acc += evaluate_amplitudes(&row[lo..hi], &col[lo..hi], resp, noise, &mut rng);
            }
            acc * scale
        })
        .collect();
    Ok(Array2::from_shape_vec((m, n), values).expect("shape matches"))
}

/// One-shot `[N_h, N_λ] × [N_λ, N_v]` product on a core sized to the operands.
///
/// Operands are quantized per tensor; entry `(i, j)` is the DDot of row `i`
/// and column `j` rescaled by `β_A·β_B`.
pub fn dptc_matmul(
    a: &Array2<f64>,
    b: &Array2<f64>,
    bits: u32,
    disp: Option<&DispersionSpec>,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<MatmulOutput> {
    check_operands(a, b)?;
    let values = photonic_product(a, b, a.ncols(), bits, disp, noise, seed)?;
    Ok(MatmulOutput { values, photonic_cycles: 1 })
}

/// Arbitrary `M×K×N` product on a fixed core, K split into `N_λ`-channel
/// chunks with partial sums added after detection.
pub fn tiled_matmul(
    a: &Array2<f64>,
    b: &Array2<f64>,
    ptc: &PTCConfig,
    disp: Option<&DispersionSpec>,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<MatmulOutput> {
    ptc.validate()?;
    check_operands(a, b)?;
    let values = photonic_product(a, b, ptc.n_lambda, ptc.bits, disp, noise, seed)?;
    let cycles = a.nrows().div_ceil(ptc.n_h) * b.ncols().div_ceil(ptc.n_v) * a.ncols().div_ceil(ptc.n_lambda);
    Ok(MatmulOutput { values, photonic_cycles: cycles as u64 })
}

/// Modulation energy of one cycle with operand sharing across the crossbar.
pub fn modulation_energy_shared(n_h: usize, n_v: usize, n_lambda: usize, e_dac: f64, e_mzm: f64) -> f64 {
    ((n_h * n_lambda + n_lambda * n_v) as f64) * (e_dac + e_mzm)
}

/// Modulation energy if every dot product had its own DDot and modulators.
pub fn modulation_energy_unshared(n_h: usize, n_v: usize, n_lambda: usize, e_dac: f64, e_mzm: f64) -> f64 {
    ((n_h * n_v * 2 * n_lambda) as f64) * (e_dac + e_mzm)
}

pub fn sharing_factor(n_h: usize, n_v: usize) -> f64 {
    (2 * n_h * n_v) as f64 / (n_h + n_v) as f64
}

/// Per-symbol DAC and MZM energies (J) at the core clock.
pub fn symbol_energies(ptc: &PTCConfig, lib: &DeviceLibrary) -> Result<(f64, f64)> {
    let e_dac = lib.dac_power(ptc.bits, ptc.clock_hz)? * 1e-3 / ptc.clock_hz;
    let e_mzm = lib.device("mzm").power_mw * 1e-3 / ptc.clock_hz;
    Ok((e_dac, e_mzm))
}
