//! Time-domain Monte Carlo ground truth.
//!
//! Twin-beam quadrature traces are synthesized at the oscillator output,
//! attenuated with vacuum injection (ζ², then η), given common-mode excess
//! phase noise, and pushed sample by sample through two simulated
//! interferometers whose long arms are real time delays. The photocurrents
//! are combined and read out with an emulated spectrum analyzer. None of
//! this uses the closed-form spectra of [`crate::nopo`] beyond the source
//! spectra themselves, so it checks the loss, detection and combining chain
//! independently.

mod fft;
mod noise;
mod synthesis;
mod trace;
mod welch;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

pub use noise::NoiseStreams;
pub use synthesis::{synthesize_twin_traces, TwinTraces, MIN_SAMPLES};
pub use trace::{combine, NoiseTrace};
pub use welch::{welch_estimate, SpectrumEstimate};

use crate::error::{Error, Result};
use crate::interferometer::{coefficients, Combiner, MeasurementMode, MzConfig};
use crate::nopo::{Detuning, NopoParams};
use crate::units::variance_to_db;
use fft::RealFft;

/// Stream ids after the four synthesis streams.
mod stream {
    /// Four per loss stage: X1, Y1, X2, Y2.
    pub const LOSS_ZETA: u64 = 16;
    pub const LOSS_ETA: u64 = 20;
    pub const EXCESS_PHASE: u64 = 24;
    /// Vacuum ports of the interferometers: base + 4·mode + 2·beam + quadrature.
    pub const MZ_VACUUM: u64 = 32;
}

/// Acquisition and analyzer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    /// Requested resolution bandwidth (bin spacing).
    pub rbw_hz: f64,
    /// Width of the band around the analysis frequency that is averaged
    /// into one reading.
    pub band_hz: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            n_samples: 1 << 20,
            sample_rate_hz: 64e6,
            rbw_hz: 30e3,
            band_hz: 1.6e6,
        }
    }
}

impl OracleSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.band_hz.is_finite() && self.band_hz > 0.0) {
            return Err(Error::param(
                "band_hz",
                format!("{} must be > 0", self.band_hz),
            ));
        }
        if !(self.rbw_hz.is_finite() && self.rbw_hz > 0.0) {
            return Err(Error::param(
                "rbw_hz",
                format!("{} must be > 0", self.rbw_hz),
            ));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::param(
                "sample_rate_hz",
                format!("{} must be > 0", self.sample_rate_hz),
            ));
        }
        Ok(())
    }
}

/// Oracle readings. Linear values are in QNL units; `*_db` are
/// `10·log10` of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub vx_minus: f64,
    pub vy_plus: f64,
    /// Estimated vacuum level relative to `a²`.
    pub qnl: f64,
    pub vx_minus_db: f64,
    pub vy_plus_db: f64,
    pub qnl_db: f64,
}

/// Combined photocurrent records of one simulated acquisition, normalized
/// by the classical amplitude of each beam.
#[derive(Debug, Clone)]
pub struct DetectionRecord {
    /// Amplitude mode, sum channels, minus combiner.
    pub amplitude_difference: NoiseTrace,
    /// Amplitude mode, difference channels (vacuum only).
    pub qnl_channel: NoiseTrace,
    /// Phase mode, difference channels, plus combiner.
    pub phase_sum: NoiseTrace,
}

/// `√t x + √(1 − t) v` with fresh unit-variance vacuum `v`.
pub fn attenuate(x: &NoiseTrace, t: f64, vacuum: &[f64]) -> Result<NoiseTrace> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param(
            "transmittance",
            format!("{t} is outside [0, 1]"),
        ));
    }
    if vacuum.len() != x.len() {
        return Err(Error::ShapeMismatch(
            "vacuum stream length differs from trace".into(),
        ));
    }
    let (a, b) = (t.sqrt(), (1.0 - t).sqrt());
    let samples = x
        .samples()
        .iter()
        .zip(vacuum)
        .map(|(s, v)| a * s + b * v)
        .collect();
    NoiseTrace::new(samples, x.sample_rate(), x.seed())
}

fn check_oracle_interferometers(cfg1: &MzConfig, cfg2: &MzConfig, f: f64) -> Result<()> {
    for cfg in [cfg1, cfg2] {
        cfg.clone()
            .with_mode(MeasurementMode::Phase)
            .check_operating_point(f)?;
        if (cfg.splitter_reflectivity - 0.5).abs() > 1e-12 {
            return Err(Error::OperatingPoint(
                "the oracle calibrates on the vacuum channel and needs 50/50 splitters".into(),
            ));
        }
        if (crate::interferometer::wrap_angle(cfg.carrier_phase_rad - FRAC_PI_2)).abs() > 1e-9 {
            return Err(Error::OperatingPoint(
                "the oracle needs the carrier phase locked at π/2".into(),
            ));
        }
    }
    if (cfg1.delay_s() - cfg2.delay_s()).abs() > 1e-12 * cfg1.delay_s() {
        return Err(Error::OperatingPoint(
            "the oracle needs matched interferometer delays".into(),
        ));
    }
    Ok(())
}

/// Lossless unbalanced Mach-Zehnder on sampled quadratures. Returns the
/// (sum, difference) photocurrents divided by the classical amplitude.
fn interferometer_time_domain(
    cfg: &MzConfig,
    x: &[f64],
    y: &[f64],
    vx: &[f64],
    vy: &[f64],
    sample_rate: f64,
    fft: &RealFft,
) -> (Vec<f64>, Vec<f64>) {
    let r2 = cfg.splitter_reflectivity;
    let r1 = if cfg.input_splitter_present { r2 } else { 0.0 };
    let (sr1, st1) = (r1.sqrt(), (1.0 - r1).sqrt());
    let (sr2, st2) = (r2.sqrt(), (1.0 - r2).sqrt());
    let phi = cfg.carrier_phase_rad;
    let (sphi, cphi) = phi.sin_cos();

    let long_x: Vec<f64> = x.iter().zip(vx).map(|(a, v)| sr1 * a - st1 * v).collect();
    let long_y: Vec<f64> = y.iter().zip(vy).map(|(a, v)| sr1 * a - st1 * v).collect();
    let tau = cfg.delay_s();
    let (long_x, long_y) = rayon::join(
        || fft.delay(&long_x, sample_rate, tau),
        || fft.delay(&long_y, sample_rate, tau),
    );

    // output mean fields divided by a
    let beta = (st2 * st1 + sr2 * sr1 * cphi, sr2 * sr1 * sphi);
    let gamma = (sr2 * st1 - st2 * sr1 * cphi, -st2 * sr1 * sphi);

    let n = x.len();
    let mut sum = Vec::with_capacity(n);
    let mut diff = Vec::with_capacity(n);
    for k in 0..n {
        let sx = st1 * x[k] + sr1 * vx[k];
        let sy = st1 * y[k] + sr1 * vy[k];
        let lx = cphi * long_x[k] - sphi * long_y[k];
        let ly = sphi * long_x[k] + cphi * long_y[k];
        let (bx, by) = (st2 * sx + sr2 * lx, st2 * sy + sr2 * ly);
        let (cx, cy) = (sr2 * sx - st2 * lx, sr2 * sy - st2 * ly);
        let nb = beta.0 * bx + beta.1 * by;
        let nc = gamma.0 * cx + gamma.1 * cy;
        sum.push(nb + nc);
        diff.push(nb - nc);
    }
    (sum, diff)
}

/// Synthesize, attenuate, detect and combine one acquisition.
pub fn simulate_detection(
    p: &NopoParams,
    cfg1: &MzConfig,
    cfg2: &MzConfig,
    d: Detuning,
    settings: &OracleSettings,
    seed: u64,
) -> Result<DetectionRecord> {
    p.validate()?;
    settings.validate()?;
    cfg1.validate()?;
    cfg2.validate()?;
    let n = settings.n_samples;
    let fs = settings.sample_rate_hz;
    let streams = NoiseStreams::new(seed);

    let source = synthesize_twin_traces(&p.at_source(), d, n, fs, seed)?;
    let mut quads = [source.x1, source.y1, source.x2, source.y2];
    for (base, t) in [
        (stream::LOSS_ZETA, p.zeta * p.zeta),
        (stream::LOSS_ETA, p.eta),
    ] {
        let attenuated: Vec<Result<NoiseTrace>> = {
            use rayon::prelude::*;
            quads
                .par_iter()
                .enumerate()
                .map(|(i, q)| attenuate(q, t, &streams.white(base + i as u64, n)))
                .collect()
        };
        let mut it = attenuated.into_iter();
        quads = [
            it.next().unwrap()?,
            it.next().unwrap()?,
            it.next().unwrap()?,
            it.next().unwrap()?,
        ];
    }
    let [x1, mut y1, x2, mut y2] = quads;

    if p.excess_phase_noise > 0.0 {
        // common-mode phase noise of variance ε/2 per beam adds ε to the phase sum
        let scale = (0.5 * p.excess_phase_noise / p.qnl).sqrt();
        let common = streams.white(stream::EXCESS_PHASE, n);
        let add = |y: &NoiseTrace| {
            let s = y
                .samples()
                .iter()
                .zip(&common)
                .map(|(a, c)| a + scale * c)
                .collect();
            NoiseTrace::new(s, fs, seed)
        };
        y1 = add(&y1)?;
        y2 = add(&y2)?;
    }

    let fft = RealFft::new(n);
    let detect = |mode: MeasurementMode, beam: usize| {
        let (cfg, x, y) = match beam {
            0 => (cfg1, &x1, &y1),
            _ => (cfg2, &x2, &y2),
        };
        let cfg = cfg.clone().with_mode(mode);
        let m = match mode {
            MeasurementMode::Amplitude => 0,
            MeasurementMode::Phase => 1,
        };
        let base = stream::MZ_VACUUM + 4 * m + 2 * beam as u64;
        let vx = streams.white(base, n);
        let vy = streams.white(base + 1, n);
        interferometer_time_domain(&cfg, x.samples(), y.samples(), &vx, &vy, fs, &fft)
    };
    let ((a1, a2), (p1, p2)) = rayon::join(
        || {
            rayon::join(
                || detect(MeasurementMode::Amplitude, 0),
                || detect(MeasurementMode::Amplitude, 1),
            )
        },
        || {
            rayon::join(
                || detect(MeasurementMode::Phase, 0),
                || detect(MeasurementMode::Phase, 1),
            )
        },
    );

    let trace = |s: Vec<f64>| NoiseTrace::new(s, fs, seed);
    Ok(DetectionRecord {
        amplitude_difference: combine(&trace(a1.0)?, &trace(a2.0)?, Combiner::Minus)?,
        qnl_channel: combine(&trace(a1.1)?, &trace(a2.1)?, Combiner::Minus)?,
        phase_sum: combine(&trace(p1.1)?, &trace(p2.1)?, Combiner::Plus)?,
    })
}

/// Full oracle pipeline at analysis frequency `f`.
///
/// The QNL is the mean of the white vacuum channel over the whole spectrum.
/// `vx_minus` is the mean of the amplitude-difference spectrum over the
/// analysis band. The phase-sum spectrum is corrected bin by bin for the
/// known interferometer response `m(f) = g_Y(f)·vy_plus + g_vac(f)`, which
/// varies across the band because θ does, and averaged with weights `g_Y²`.
pub fn oracle_run(
    p: &NopoParams,
    cfg1: &MzConfig,
    cfg2: &MzConfig,
    d: Detuning,
    f: f64,
    settings: &OracleSettings,
    seed: u64,
) -> Result<OracleEstimate> {
    check_oracle_interferometers(cfg1, cfg2, f)?;
    let record = simulate_detection(p, cfg1, cfg2, d, settings, seed)?;
    let half = 0.5 * settings.band_hz;

    let qnl_spec = welch_estimate(&record.qnl_channel, settings.rbw_hz)?;
    let nyq = 0.5 * settings.sample_rate_hz;
    let qnl = qnl_spec
        .band_mean(0.5 * nyq, nyq)
        .ok_or_else(|| Error::Sampling("no interior bins in the QNL spectrum".into()))?;

    let x_spec = welch_estimate(&record.amplitude_difference, settings.rbw_hz)?;
    let vx = x_spec
        .band_mean(f, half)
        .ok_or_else(|| Error::Sampling(format!("no analyzer bins within {half} Hz of {f} Hz")))?
        / qnl;

    let y_spec = welch_estimate(&record.phase_sum, settings.rbw_hz)?;
    let phase_cfg = cfg1.clone().with_mode(MeasurementMode::Phase);
    let a2 = phase_cfg.classical_amplitude.powi(2);
    let (mut num, mut den) = (0.0, 0.0);
    for (fk, m) in y_spec.band(f, half) {
        let co = coefficients(&phase_cfg, fk);
        let g_y = co.diff[1].norm_sqr() / a2;
        let g_vac = (co.diff[2].norm_sqr() + co.diff[3].norm_sqr()) / a2;
        if g_y <= 1e-6 {
            continue;
        }
        let w = g_y * g_y;
        num += w * (m / qnl - g_vac) / g_y;
        den += w;
    }
    if den <= 0.0 {
        return Err(Error::Sampling(format!(
            "no analyzer bins near {f} Hz carry phase-quadrature signal"
        )));
    }
    let vy = num / den;

    Ok(OracleEstimate {
        vx_minus: vx,
        vy_plus: vy,
        qnl,
        vx_minus_db: variance_to_db(vx, 1.0),
        vy_plus_db: variance_to_db(vy, 1.0),
        qnl_db: variance_to_db(qnl, 1.0),
    })
}

/// Vacuum-channel spectrum for coherent (uncorrelated, QNL) input beams.
pub fn qnl_calibration(
    cfg1: &MzConfig,
    cfg2: &MzConfig,
    f: f64,
    settings: &OracleSettings,
    seed: u64,
) -> Result<SpectrumEstimate> {
    check_oracle_interferometers(cfg1, cfg2, f)?;
    let coherent = NopoParams {
        xi: 0.0,
        ..Default::default()
    };
    let record = simulate_detection(&coherent, cfg1, cfg2, Detuning::new(0.0)?, settings, seed)?;
    welch_estimate(&record.qnl_channel, settings.rbw_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_injection_preserves_qnl() {
        let streams = NoiseStreams::new(1);
        let n = 1 << 18;
        let x = NoiseTrace::new(streams.white(0, n), 1e6, 1).unwrap();
        for t in [0.0, 0.3, 0.81, 1.0] {
            let y = attenuate(&x, t, &streams.white(1, n)).unwrap();
            // σ of a variance estimate from 2^18 samples is about 0.28%
            assert!(
                (y.variance() - 1.0).abs() < 0.012,
                "t = {t}: {}",
                y.variance()
            );
        }
        assert!(attenuate(&x, 1.5, &streams.white(1, n)).is_err());
    }

    #[test]
    fn oracle_rejects_mismatched_or_unlocked_interferometers() {
        let s = OracleSettings::default();
        let d = Detuning::new(0.0).unwrap();
        let p = NopoParams::default();
        let longer = MzConfig {
            delta_l_m: 48.5,
            ..Default::default()
        };
        assert!(matches!(
            oracle_run(&p, &MzConfig::default(), &longer, d, 2e6, &s, 0),
            Err(Error::OperatingPoint(_))
        ));
        let unlocked = MzConfig {
            carrier_phase_rad: FRAC_PI_2 + 0.01,
            ..Default::default()
        };
        assert!(oracle_run(&p, &unlocked, &unlocked, d, 2e6, &s, 0).is_err());
    }

    #[test]
    fn coherent_beams_read_zero_db() {
        let settings = OracleSettings {
            n_samples: 1 << 18,
            ..Default::default()
        };
        let coherent = NopoParams {
            xi: 0.0,
            ..Default::default()
        };
        let cfg = MzConfig::default();
        let est = oracle_run(
            &coherent,
            &cfg,
            &cfg,
            Detuning::new(0.0).unwrap(),
            2e6,
            &settings,
            4,
        )
        .unwrap();
        assert!(est.qnl_db.abs() < 0.05, "{est:?}");
        assert!(est.vx_minus_db.abs() < 0.25, "{est:?}");
        assert!(est.vy_plus_db.abs() < 0.25, "{est:?}");
    }

    fn default_run(p: &NopoParams, seed: u64) -> OracleEstimate {
        let cfg = MzConfig::default();
        oracle_run(
            p,
            &cfg,
            &cfg,
            Detuning::new(0.0).unwrap(),
            2e6,
            &OracleSettings::default(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn default_parameters_match_the_analytic_levels() {
        let est = default_run(&NopoParams::default(), 11);
        assert!((est.vx_minus_db + 3.107).abs() < 0.1, "{est:?}");
        assert!((est.vy_plus_db + 1.821).abs() < 0.1, "{est:?}");
        assert!(est.qnl_db.abs() < 0.05, "{est:?}");
    }

    #[test]
    fn excess_phase_noise_reads_one_and_a_half_db() {
        let p = NopoParams {
            excess_phase_noise: 0.051,
            ..Default::default()
        };
        let est = default_run(&p, 12);
        assert!((est.vy_plus_db + 1.50).abs() < 0.1, "{est:?}");
    }

    #[test]
    fn no_correlation_reads_qnl_plus_excess() {
        let p = NopoParams {
            xi: 0.0,
            excess_phase_noise: 0.051,
            ..Default::default()
        };
        let est = default_run(&p, 13);
        assert!(est.vx_minus_db.abs() < 0.1, "{est:?}");
        assert!(
            (est.vy_plus_db - 10.0 * 1.051f64.log10()).abs() < 0.1,
            "{est:?}"
        );
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let settings = OracleSettings {
            n_samples: 1 << 16,
            ..Default::default()
        };
        let cfg = MzConfig::default();
        let d = Detuning::new(0.0).unwrap();
        let p = NopoParams::default();
        let a = simulate_detection(&p, &cfg, &cfg, d, &settings, 3).unwrap();
        let b = simulate_detection(&p, &cfg, &cfg, d, &settings, 3).unwrap();
        assert_eq!(a.phase_sum, b.phase_sum);
        assert_eq!(a.amplitude_difference, b.amplitude_difference);
        let c = simulate_detection(&p, &cfg, &cfg, d, &settings, 4).unwrap();
        assert_ne!(a.phase_sum, c.phase_sum);
    }
}
