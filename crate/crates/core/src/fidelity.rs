//! Monte-Carlo numerical-fidelity experiments on the photonic datapath.
//!
//! These measure matmul / attention numerical error; they do not measure
//! end-task model accuracy.

use ndarray::{Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::optics::{quantize_encode, scaled_ddot_with, DispersionSpec, NoiseSpec};
use crate::rng::stream_rng;
use crate::tensor_core::{dptc_matmul, tiled_matmul, PTCConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub trials: usize,
    pub mean_rel: f64,
    pub std_rel: f64,
    pub std_err: f64,
    pub p95_rel: f64,
    pub max_rel: f64,
}

impl ErrorStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let p95 = sorted[((0.95 * n as f64).ceil() as usize).clamp(1, n) - 1];
        ErrorStats {
            trials: n,
            mean_rel: mean,
            std_rel: var.sqrt(),
            std_err: (var / n as f64).sqrt(),
            p95_rel: p95,
            max_rel: sorted[n - 1],
        }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    Ok(())
}

fn normal_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn normal_matrix<R: Rng>(rng: &mut R, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_vec((r, c), normal_vec(rng, r * c)).expect("shape")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Both error views of one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSweep {
    /// Optical result against the exact dot product of the quantized operands:
    /// the analog error of the engine alone.
    pub analog: ErrorStats,
    /// Optical result against the exact dot product of the unquantized operands,
    /// including quantization error.
    pub end_to_end: ErrorStats,
}

/// Random `N(0,1)` pairs of length `length` through quantization and the DDot.
///
/// Relative error is `|optical − reference| / (‖x‖‖y‖/√length)`, i.e.
/// normalized by the typical magnitude of a dot product of such vectors. Trial
/// `t` draws its operands from stream `2t` and its noise from stream `2t+1`.
pub fn error_sweep(
    length: usize,
    bits: u32,
    noise: &NoiseSpec,
    disp: Option<&DispersionSpec>,
    trials: usize,
    seed: u64,
) -> Result<ErrorSweep> {
    check_trials(trials)?;
    if length == 0 {
        return Err(invalid("length", "must be >= 1"));
    }
    noise.validate()?;
    let responses = disp.map(|d| d.channel_responses(length)).transpose()?;
    let root_n = (length as f64).sqrt();
    let samples = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut op = stream_rng(seed, 2 * t);
            let x = normal_vec(&mut op, length);
            let y = normal_vec(&mut op, length);
            let exact: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let qx = quantize_encode(&x, bits)?.dequantize();
            let qy = quantize_encode(&y, bits)?.dequantize();
            let q_exact: f64 = qx.iter().zip(&qy).map(|(a, b)| a * b).sum();
            let mut nz = stream_rng(seed, 2 * t + 1);
            let got = scaled_ddot_with(&x, &y, bits, responses.as_deref(), noise, &mut nz, false)?;
            Ok((
                (got - q_exact).abs() / (norm(&qx) * norm(&qy) / root_n),
                (got - exact).abs() / (norm(&x) * norm(&y) / root_n),
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (analog, total): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
    Ok(ErrorSweep { analog: ErrorStats::from_samples(&analog), end_to_end: ErrorStats::from_samples(&total) })
}

/// Mean error of the noisy DDot against the same DDot without noise, with
/// common random numbers across the `sigmas` grid. Only phase drift is on.
pub fn phase_sensitivity(sigmas: &[f64], length: usize, bits: u32, trials: usize, seed: u64) -> Result<Vec<f64>> {
    check_trials(trials)?;
    sigmas
        .iter()
        .map(|&s| {
            let noise = NoiseSpec::new(s, 0.0, 0.0)?;
            let errs = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut op = stream_rng(seed, 2 * t);
                    let x = normal_vec(&mut op, length);
                    let y = normal_vec(&mut op, length);
                    let clean = scaled_ddot_with(
                        &x,
                        &y,
                        bits,
                        None,
                        &NoiseSpec::NONE,
                        &mut stream_rng(seed, 2 * t + 1),
                        false,
                    )?;
                    let noisy = scaled_ddot_with(&x, &y, bits, None, &noise, &mut stream_rng(seed, 2 * t + 1), false)?;
                    Ok((noisy - clean).abs() / (norm(&x) * norm(&y)))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(errs.iter().sum::<f64>() / trials as f64)
        })
        .collect()
}

/// Slope of `ln(error)` against `ln(sigma)`.
pub fn log_log_slope(sigmas: &[f64], errors: &[f64]) -> f64 {
    let x: Vec<f64> = sigmas.iter().map(|s| s.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    crate::arch::linear_fit(&x, &y).1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub channels: usize,
    /// Worst-channel relative deviation of κ from 0.5.
    pub kappa_deviation: f64,
    /// Worst-channel phase deviation from -90°, degrees.
    pub phase_deviation_deg: f64,
    /// Mean relative error of a `12 × N × 12` product against the same product
    /// on ideal devices (noise off).
    pub mean_rel_error: f64,
}

/// Worst-case device deviation and matmul error for `N = 1, 1+step, …`
/// channels. Operands are shared across channel counts (columns truncated).
pub fn dispersion_sweep(
    max_channels: usize,
    step: usize,
    disp: &DispersionSpec,
    bits: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<DispersionPoint>> {
    check_trials(trials)?;
    if max_channels == 0 || step == 0 {
        return Err(invalid("max_channels", "max_channels and step must be >= 1"));
    }
    let operands: Vec<(Array2<f64>, Array2<f64>)> = (0..trials as u64)
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            (normal_matrix(&mut rng, 12, max_channels), normal_matrix(&mut rng, max_channels, 12))
        })
        .collect();
    (1..=max_channels)
        .step_by(step)
        .map(|n| {
            let (kd, pd) = disp.worst_deviation(n)?;
            let errs = operands
                .par_iter()
                .map(|(a, b)| {
                    let a = a.slice(ndarray::s![.., ..n]).to_owned();
                    let b = b.slice(ndarray::s![..n, ..]).to_owned();
                    let ideal = dptc_matmul(&a, &b, bits, None, &NoiseSpec::NONE, 0)?.values;
                    let got = dptc_matmul(&a, &b, bits, Some(disp), &NoiseSpec::NONE, 0)?.values;
                    Ok(frobenius(&(&got - &ideal)) / frobenius(&ideal))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(DispersionPoint {
                channels: n,
                kappa_deviation: kd,
                phase_deviation_deg: pd,
                mean_rel_error: errs.iter().sum::<f64>() / trials as f64,
            })
        })
        .collect()
}

fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub noise: NoiseSpec,
    pub stats: ErrorStats,
}

/// Matmul relative error `‖C − AB‖_F / ‖AB‖_F` on a tiled core for every
/// noise setting in `grid`, reusing the same operands and noise streams.
pub fn noise_sweep(
    grid: &[NoiseSpec],
    shape: (usize, usize, usize),
    ptc: &PTCConfig,
    disp: Option<&DispersionSpec>,
    trials: usize,
    seed: u64,
) -> Result<Vec<NoisePoint>> {
    check_trials(trials)?;
    let (m, k, n) = shape;
    if m == 0 || k == 0 || n == 0 {
        return Err(invalid("shape", "all dimensions must be >= 1"));
    }
    grid.iter()
        .map(|noise| {
            let errs = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream_rng(seed, 2 * t);
                    let a = normal_matrix(&mut rng, m, k);
                    let b = normal_matrix(&mut rng, k, n);
                    let exact = a.dot(&b);
                    let got = tiled_matmul(&a, &b, ptc, disp, noise, seed.wrapping_add(2 * t + 1))?.values;
                    Ok(frobenius(&(&got - &exact)) / frobenius(&exact))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(NoisePoint { noise: *noise, stats: ErrorStats::from_samples(&errs) })
        })
        .collect()
}

/// Errors of one attention head computed on the photonic core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionError {
    /// Max-abs error of `QKᵀ/√d_k` over its max-abs value.
    pub scores: f64,
    /// Max-abs error of `softmax(·)V` over its max-abs value.
    pub output: f64,
}

fn softmax_rows(s: &Array2<f64>) -> Array2<f64> {
    let mut p = s.clone();
    for mut row in p.axis_iter_mut(Axis(0)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    p
}

fn max_rel(got: &Array2<f64>, exact: &Array2<f64>) -> f64 {
    let err = got.iter().zip(exact).map(|(g, e)| (g - e).abs()).fold(0.0, f64::max);
    let scale = exact.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}

/// Attention head on given operands: both products on the photonic core,
/// scaling and softmax exact in the digital units.
pub fn attention_on_core(
    q: &Array2<f64>,
    k: &Array2<f64>,
    v: &Array2<f64>,
    ptc: &PTCConfig,
    noise: &NoiseSpec,
    disp: Option<&DispersionSpec>,
    seed: u64,
) -> Result<AttentionError> {
    let d_k = q.ncols() as f64;
    let kt = k.t().to_owned();
    let exact_s = q.dot(&kt) / d_k.sqrt();
    let exact_o = softmax_rows(&exact_s).dot(v);
    let s = tiled_matmul(q, &kt, ptc, disp, noise, seed)?.values / d_k.sqrt();
    let o = tiled_matmul(&softmax_rows(&s), v, ptc, disp, noise, seed.wrapping_add(1))?.values;
    Ok(AttentionError { scores: max_rel(&s, &exact_s), output: max_rel(&o, &exact_o) })
}

/// Random `N(0,1)` Q, K, V of shape `seq × d_k` through [`attention_on_core`]
/// on a 12×12×12 core.
pub fn attention_block_fidelity(
    d_k: usize,
    seq: usize,
    bits: u32,
    noise: &NoiseSpec,
    disp: Option<&DispersionSpec>,
    seed: u64,
) -> Result<AttentionError> {
    if d_k == 0 || seq == 0 {
        return Err(invalid("attention", "d_k and seq must be >= 1"));
    }
    let ptc = PTCConfig { bits, ..PTCConfig::default() };
    let mut rng = stream_rng(seed, u64::MAX);
    let q = normal_matrix(&mut rng, seq, d_k);
    let k = normal_matrix(&mut rng, seq, d_k);
    let v = normal_matrix(&mut rng, seq, d_k);
    attention_on_core(&q, &k, &v, &ptc, noise, disp, seed)
}

/// Mean output error and 95% confidence half-width over `seeds` runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionSummary {
    pub seeds: usize,
    pub mean_output_error: f64,
    pub ci95_half_width: f64,
    pub mean_scores_error: f64,
}

pub fn attention_fidelity_summary(
    d_k: usize,
    seq: usize,
    bits: u32,
    noise: &NoiseSpec,
    disp: Option<&DispersionSpec>,
    seeds: usize,
    seed: u64,
) -> Result<AttentionSummary> {
    check_trials(seeds)?;
    let runs = (0..seeds as u64)
        .into_par_iter()
        .map(|i| attention_block_fidelity(d_k, seq, bits, noise, disp, seed.wrapping_add(i << 1)))
        .collect::<Result<Vec<_>>>()?;
    let out: Vec<f64> = runs.iter().map(|r| r.output).collect();
    let stats = ErrorStats::from_samples(&out);
    Ok(AttentionSummary {
        seeds,
        mean_output_error: stats.mean_rel,
        ci95_half_width: 1.96 * stats.std_err,
        mean_scores_error: runs.iter().map(|r| r.scores).sum::<f64>() / seeds as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_error_is_quantization_only() {
        let s = error_sweep(12, 4, &NoiseSpec::NONE, None, 300, 9).unwrap();
        assert!(s.analog.max_rel < 1e-12);
        // bound: every element off by at most one step α, products expanded
        let mut bound = 0.0;
        for t in 0..300u64 {
            let mut op = stream_rng(9, 2 * t);
            let x = normal_vec(&mut op, 12);
            let y = normal_vec(&mut op, 12);
            let ax = x.iter().fold(0.0f64, |m, v| m.max(v.abs())) / 8.0;
            let ay = y.iter().fold(0.0f64, |m, v| m.max(v.abs())) / 8.0;
            let b: f64 = x.iter().zip(&y).map(|(a, b)| a.abs() * ay + b.abs() * ax + ax * ay).sum();
            bound += b / (norm(&x) * norm(&y) / 12f64.sqrt());
        }
        assert!(s.end_to_end.mean_rel <= bound / 300.0);
        assert!(s.end_to_end.mean_rel > 0.0);
    }

    #[test]
    fn output_noise_error_matches_closed_form() {
        // only output noise: error = σ|z|·|q|, so E = σ·sqrt(2/π)·E|q|/ref
        let trials = 4000;
        let sigma = 1.0;
        let noise = NoiseSpec::new(0.0, 0.0, sigma).unwrap();
        let s = error_sweep(12, 8, &noise, None, trials, 4).unwrap();
        let mut mean_q = 0.0;
        for t in 0..trials as u64 {
            let mut op = stream_rng(4, 2 * t);
            let x = normal_vec(&mut op, 12);
            let y = normal_vec(&mut op, 12);
            let qx = quantize_encode(&x, 8).unwrap().dequantize();
            let qy = quantize_encode(&y, 8).unwrap().dequantize();
            let q: f64 = qx.iter().zip(&qy).map(|(a, b)| a * b).sum();
            mean_q += q.abs() / (norm(&qx) * norm(&qy) / 12f64.sqrt());
        }
        let expect = sigma * (2.0 / std::f64::consts::PI).sqrt() * mean_q / trials as f64;
        assert!((s.analog.mean_rel - expect).abs() < 0.05 * expect, "{} {}", s.analog.mean_rel, expect);
        let double = error_sweep(12, 8, &NoiseSpec::new(0.0, 0.0, 2.0 * sigma).unwrap(), None, trials, 4).unwrap();
        assert!((double.analog.mean_rel / s.analog.mean_rel - 2.0).abs() < 1e-9);
    }

    #[test]
    fn default_noise_lands_in_band() {
        for bits in [4, 8] {
            let s = error_sweep(12, bits, &NoiseSpec::DEFAULT, Some(&DispersionSpec::default()), 1000, 1).unwrap();
            assert!((0.03..=0.12).contains(&s.analog.mean_rel), "{bits}: {}", s.analog.mean_rel);
        }
    }

    #[test]
    fn error_sweep_is_deterministic() {
        let a = error_sweep(12, 4, &NoiseSpec::DEFAULT, None, 50, 3).unwrap();
        let b = error_sweep(12, 4, &NoiseSpec::DEFAULT, None, 50, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn phase_error_is_quadratic() {
        let sig = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
        let e = phase_sensitivity(&sig, 12, 8, 200, 1).unwrap();
        let slope = log_log_slope(&sig, &e);
        assert!((slope - 2.0).abs() < 0.3, "{slope}");
    }

    #[test]
    fn dispersion_sweep_endpoints_and_trend() {
        let d = DispersionSpec::default();
        let pts = dispersion_sweep(25, 1, &d, 8, 20, 3).unwrap();
        assert_eq!(pts[0].kappa_deviation, 0.0);
        assert_eq!(pts[0].phase_deviation_deg, 0.0);
        assert!(pts[0].mean_rel_error < 1e-12);
        let last = pts.last().unwrap();
        assert!((last.kappa_deviation - 0.018).abs() < 0.003);
        assert!((last.phase_deviation_deg - 0.28).abs() < 0.05);
        for w in pts.windows(2) {
            assert!(w[1].kappa_deviation >= w[0].kappa_deviation);
            assert!(w[1].mean_rel_error >= w[0].mean_rel_error * 0.95);
        }
        assert!(last.mean_rel_error > pts[4].mean_rel_error);
    }

    #[test]
    fn noise_sweep_properties() {
        let ptc = PTCConfig { bits: 8, ..PTCConfig::default() };
        let grid: Vec<NoiseSpec> = [0.0, 0.02, 0.05, 0.1].iter().map(|&s| NoiseSpec::new(s, s, s).unwrap()).collect();
        let pts = noise_sweep(&grid, (12, 24, 12), &ptc, None, 40, 5).unwrap();
        // σ = 0: same as the noise-free tiled product
        let mut rng = stream_rng(5, 0);
        let a = normal_matrix(&mut rng, 12, 24);
        let b = normal_matrix(&mut rng, 24, 12);
        let q = tiled_matmul(&a, &b, &ptc, None, &NoiseSpec::NONE, 0).unwrap().values;
        let first = frobenius(&(&q - &a.dot(&b))) / frobenius(&a.dot(&b));
        let pts0 = noise_sweep(&grid[..1], (12, 24, 12), &ptc, None, 1, 5).unwrap();
        assert!((pts0[0].stats.mean_rel - first).abs() < 1e-15);
        for w in pts.windows(2) {
            assert!(w[1].stats.mean_rel >= w[0].stats.mean_rel);
        }
    }

    #[test]
    fn std_error_halves_with_four_times_trials() {
        let ptc = PTCConfig::default();
        let grid = [NoiseSpec::DEFAULT];
        let a = noise_sweep(&grid, (12, 12, 12), &ptc, None, 100, 8).unwrap()[0].stats.std_err;
        let b = noise_sweep(&grid, (12, 12, 12), &ptc, None, 400, 8).unwrap()[0].stats.std_err;
        assert!((b / a - 0.5).abs() < 0.15, "{}", b / a);
    }

    #[test]
    fn attention_8bit_noiseless_within_two_percent() {
        let mean = (0..20)
            .map(|s| attention_block_fidelity(16, 16, 8, &NoiseSpec::NONE, None, s).unwrap().output)
            .sum::<f64>()
            / 20.0;
        assert!(mean <= 0.02, "{mean}");
    }

    #[test]
    fn on_grid_scores_are_exact() {
        // integers in [-8, 7] with a -8 present sit on the 4-bit grid
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut grid = |r, c| {
            let mut m = Array2::from_shape_fn((r, c), |_| rng.random_range(-8i32..8) as f64);
            m[[0, 0]] = -8.0;
            m
        };
        let (q, k, v) = (grid(16, 16), grid(16, 16), grid(16, 16));
        let ptc = PTCConfig { bits: 4, ..PTCConfig::default() };
        let e = attention_on_core(&q, &k, &v, &ptc, &NoiseSpec::NONE, None, 0).unwrap();
        assert!(e.scores < 1e-12, "{}", e.scores);
        assert!(e.output.is_finite());
    }

    #[test]
    fn default_noise_attention_summary() {
        let s = attention_fidelity_summary(16, 16, 8, &NoiseSpec::DEFAULT, None, 100, 2).unwrap();
        assert!(s.mean_output_error.is_finite() && s.mean_output_error > 0.0);
        assert!(s.ci95_half_width > 0.0 && s.ci95_half_width < s.mean_output_error);
    }
}
