//! Colored Gaussian twin-beam quadrature traces with the analytic spectra.
//!
//! The normal modes `u = (1 + 2)/√2` and `v = (1 − 2)/√2` are independent.
//! Each of their four quadratures is white noise shaped in the frequency
//! domain by the square root of its target spectrum:
//!
//! - `X_v`: `vx_minus(f)`
//! - `Y_u`: `vy_plus(f)`
//! - `X_u`: anti-squeezed partner of `Y_u`
//! - `Y_v`: anti-squeezed partner of `X_v`
//!
//! and the beams are recovered as `1 = (u + v)/√2`, `2 = (u − v)/√2`.

use std::f64::consts::FRAC_1_SQRT_2;

use super::fft::RealFft;
use super::noise::NoiseStreams;
use super::trace::NoiseTrace;
use crate::error::{Error, Result};
use crate::nopo::{Detuning, NopoParams};

pub const MIN_SAMPLES: usize = 1 << 16;

/// Stream ids used by synthesis; later pipeline stages use ids from 16 up.
pub(crate) mod stream {
    pub const X_U: u64 = 0;
    pub const X_V: u64 = 1;
    pub const Y_U: u64 = 2;
    pub const Y_V: u64 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinTraces {
    pub x1: NoiseTrace,
    pub y1: NoiseTrace,
    pub x2: NoiseTrace,
    pub y2: NoiseTrace,
}

pub fn synthesize_twin_traces(
    p: &NopoParams,
    d: Detuning,
    n_samples: usize,
    sample_rate: f64,
    seed: u64,
) -> Result<TwinTraces> {
    p.validate()?;
    if !(sample_rate > 4.0 * p.bandwidth_hz) {
        return Err(Error::Sampling(format!(
            "sample rate {sample_rate} Hz must exceed 4·B = {} Hz",
            4.0 * p.bandwidth_hz
        )));
    }
    if !n_samples.is_power_of_two() {
        return Err(Error::Sampling(format!(
            "{n_samples} samples is not a power of two"
        )));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::Sampling(format!(
            "{n_samples} samples is below the minimum {MIN_SAMPLES}"
        )));
    }

    let w = p.phasematch_factor(d);
    let s0 = p.qnl;
    let eps = p.excess_phase_noise;
    let psd_x_minus = |f: f64| p.spectra(f, w).vx_minus / s0;
    let psd_y_plus = |f: f64| p.spectra(f, w).vy_plus / s0;
    let psd_x_plus = |f: f64| p.antisqueeze_excess_x * s0 / (p.spectra(f, w).vy_plus - eps);
    let psd_y_minus = |f: f64| p.antisqueeze_excess_y * s0 / p.spectra(f, w).vx_minus;

    let fft = RealFft::new(n_samples);
    let streams = NoiseStreams::new(seed);
    let shaped = |id: u64, psd: &(dyn Fn(f64) -> f64 + Sync)| {
        fft.shape(&streams.white(id, n_samples), sample_rate, psd)
    };
    let ((xu, xv), (yu, yv)) = rayon::join(
        || {
            rayon::join(
                || shaped(stream::X_U, &psd_x_plus),
                || shaped(stream::X_V, &psd_x_minus),
            )
        },
        || {
            rayon::join(
                || shaped(stream::Y_U, &psd_y_plus),
                || shaped(stream::Y_V, &psd_y_minus),
            )
        },
    );

    let mix = |u: &[f64], v: &[f64], sign: f64| -> Vec<f64> {
        u.iter()
            .zip(v)
            .map(|(a, b)| (a + sign * b) * FRAC_1_SQRT_2)
            .collect()
    };
    let trace = |s| NoiseTrace::new(s, sample_rate, seed);
    Ok(TwinTraces {
        x1: trace(mix(&xu, &xv, 1.0))?,
        y1: trace(mix(&yu, &yv, 1.0))?,
        x2: trace(mix(&xu, &xv, -1.0))?,
        y2: trace(mix(&yu, &yv, -1.0))?,
    })
}
