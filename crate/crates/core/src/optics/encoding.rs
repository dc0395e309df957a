//! Symmetric full-range quantization of operands onto MZM amplitudes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 8;

/// A quantized operand mapped onto per-wavelength optical amplitudes.
///
/// Amplitudes lie on the grid `k / 2^(b-1)` with `k` in `[-2^(b-1), 2^(b-1) - 1]`,
/// so every amplitude is inside `[-1, 1)`. A negative amplitude is a π phase on
/// the carrier. `scale_beta` multiplies amplitudes back to the original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedVector {
    amplitudes: Vec<f64>,
    scale_beta: f64,
    bits: u32,
}

impl EncodedVector {
    /// Builds an encoded vector from amplitudes that are already on the grid.
    pub fn from_amplitudes(amplitudes: Vec<f64>, scale_beta: f64, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        if !(scale_beta.is_finite() && scale_beta > 0.0) {
            return Err(crate::error::invalid("scale_beta", format!("must be positive, got {scale_beta}")));
        }
        for (index, &a) in amplitudes.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::NonFinite { index, value: a });
            }
            if !(-1.0..=1.0).contains(&a) {
                return Err(crate::error::invalid("amplitude", format!("{a} at index {index} outside [-1, 1]")));
            }
        }
        Ok(Self { amplitudes, scale_beta, bits })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn scale_beta(&self) -> f64 {
        self.scale_beta
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Quantization step in original units.
    pub fn alpha(&self) -> f64 {
        self.scale_beta / levels(self.bits)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Values reconstructed in original units (`amplitude * beta`).
    pub fn dequantize(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a * self.scale_beta).collect()
    }

    /// Sign-flipped copy; exact because the grid is symmetric except for `-1`,
    /// which is only reachable through `from_amplitudes`.
    pub fn negated(&self) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|a| -a).collect(), scale_beta: self.scale_beta, bits: self.bits }
    }
}

/// `2^(b-1)` as a float.
pub fn levels(bits: u32) -> f64 {
    (1u64 << (bits - 1)) as f64
}

pub(crate) fn check_bits(bits: u32) -> Result<()> {
    if (MIN_BITS..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(Error::BitWidth { bits, min: MIN_BITS, max: MAX_BITS })
    }
}

/// Per-tensor symmetric quantization with `alpha = max|v| / 2^(b-1)`.
///
/// An all-zero input uses `max|v| = 1`, giving `beta = 1`.
pub fn quantize_encode(values: &[f64], bits: u32) -> Result<EncodedVector> {
    check_bits(bits)?;
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut max_abs = 0.0f64;
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index, value: v });
        }
        max_abs = max_abs.max(v.abs());
    }
    if max_abs == 0.0 {
        max_abs = 1.0;
    }
    let lv = levels(bits);
    let alpha = max_abs / lv;
    let amplitudes = values.iter().map(|&v| (v / alpha).round().clamp(-lv, lv - 1.0) / lv).collect();
    Ok(EncodedVector { amplitudes, scale_beta: max_abs, bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_vector_uses_unit_scale() {
        let e = quantize_encode(&[0.0, 0.0, 0.0], 4).unwrap();
        assert_eq!(e.amplitudes(), &[0.0, 0.0, 0.0]);
        assert_eq!(e.scale_beta(), 1.0);
        assert_eq!(e.alpha(), 1.0 / 8.0);
    }

    #[test]
    fn integers_on_grid_are_exact() {
        let values: Vec<f64> = (-8..=7).map(f64::from).collect();
        let e = quantize_encode(&values, 4).unwrap();
        assert_eq!(e.alpha(), 1.0);
        assert_eq!(e.scale_beta(), 8.0);
        for (k, a) in (-8..=7).zip(e.amplitudes()) {
            assert_eq!(*a, k as f64 / 8.0);
        }
        assert_eq!(e.dequantize(), values);
    }

    #[test]
    fn reconstruction_matches_brute_force_nearest_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lv = levels(8) as i64;
        for _ in 0..200 {
            let v: Vec<f64> = (0..32).map(|_| rng.random_range(-3.0..3.0)).collect();
            let e = quantize_encode(&v, 8).unwrap();
            let alpha = e.alpha();
            for (orig, deq) in v.iter().zip(e.dequantize()) {
                // oracle: scan every representable level
                let best = (-lv..lv).map(|k| (orig - k as f64 * alpha).abs()).fold(f64::INFINITY, f64::min);
                assert!(((orig - deq).abs() - best).abs() < 1e-12);
                // half a step everywhere except above the top (clamped) level
                if *orig <= (lv as f64 - 0.5) * alpha {
                    assert!(best <= alpha / 2.0 + 1e-12);
                } else {
                    assert!(best <= alpha + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(quantize_encode(&[], 4), Err(Error::EmptyInput));
        assert!(matches!(quantize_encode(&[1.0, f64::NAN], 4), Err(Error::NonFinite { index: 1, .. })));
        assert!(matches!(quantize_encode(&[f64::INFINITY], 4), Err(Error::NonFinite { .. })));
        assert!(matches!(quantize_encode(&[1.0], 1), Err(Error::BitWidth { .. })));
        assert!(matches!(quantize_encode(&[1.0], 9), Err(Error::BitWidth { .. })));
    }

    #[test]
    fn amplitudes_stay_on_grid() {
        let e = quantize_encode(&[5.0, -5.0, 1.3, -0.2], 4).unwrap();
        for a in e.amplitudes() {
            let k = a * 8.0;
            assert_eq!(k, k.round());
            assert!((-8.0..=7.0).contains(&k));
        }
    }
}
