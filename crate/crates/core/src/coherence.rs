//! Classical interference channel: fringe visibility of the two beams
//! overlapped on a 50/50 splitter and the beat note between them.

use std::path::Path;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Visibility below which fringes count as vanished. This is the Gaussian
/// overlap at a detuning of about 3.37 linewidths.
pub const VANISH_VISIBILITY: f64 = 0.0034;

/// Smallest relative modulation depth the beat-note measurement resolves
/// (an 80 dB analyzer dynamic range).
pub const BEAT_DETECTION_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceParams {
    /// Optical frequency ν2 of beam 2.
    pub reference_hz: f64,
    /// ν1 − ν2.
    pub detuning_hz: f64,
    /// Gaussian frequency spread Δν (standard deviation) of each beam.
    pub linewidth_hz: f64,
    pub intensity1: f64,
    pub intensity2: f64,
}

impl Default for CoherenceParams {
    fn default() -> Self {
        Self {
            reference_hz: 2.776e14,
            detuning_hz: 0.0,
            linewidth_hz: 1.0e6,
            intensity1: 1.0,
            intensity2: 1.0,
        }
    }
}

impl CoherenceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth_hz.is_finite() && self.linewidth_hz > 0.0) {
            return Err(Error::param(
                "linewidth_hz",
                format!("{} must be > 0", self.linewidth_hz),
            ));
        }
        for (name, v) in [
            ("intensity1", self.intensity1),
            ("intensity2", self.intensity2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("{v} must be >= 0")));
            }
        }
        if !(self.detuning_hz.is_finite() && self.reference_hz.is_finite()) {
            return Err(Error::param("detuning_hz", "frequencies must be finite"));
        }
        Ok(())
    }

    pub fn nu1(&self) -> f64 {
        self.reference_hz + self.detuning_hz
    }

    pub fn nu2(&self) -> f64 {
        self.reference_hz
    }

    pub fn with_detuning(&self, detuning_hz: f64) -> Self {
        Self {
            detuning_hz,
            ..self.clone()
        }
    }
}

/// `exp(-(ν1 - ν2)² / 2Δν²)`.
pub fn gaussian_overlap(detuning_hz: f64, linewidth_hz: f64) -> f64 {
    (-(detuning_hz * detuning_hz) / (2.0 * linewidth_hz * linewidth_hz)).exp()
}

/// `2√(I1 I2) / (I1 + I2)`, at most 1 with equality iff the intensities match.
pub fn imbalance_factor(i1: f64, i2: f64) -> f64 {
    2.0 * (i1 * i2).sqrt() / (i1 + i2)
}

/// Detuning magnitude beyond which the visibility is below
/// [`VANISH_VISIBILITY`].
pub fn vanish_threshold(linewidth_hz: f64) -> f64 {
    linewidth_hz * (2.0 * (1.0 / VANISH_VISIBILITY).ln()).sqrt()
}

pub fn visibility(p: &CoherenceParams) -> Result<f64> {
    p.validate()?;
    if p.intensity1 + p.intensity2 <= 0.0 {
        return Err(Error::param("intensity", "both beam intensities are zero"));
    }
    Ok(gaussian_overlap(p.detuning_hz, p.linewidth_hz)
        * imbalance_factor(p.intensity1, p.intensity2))
}

/// Sampled interference intensity with its extracted extrema.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeTrace {
    time: Vec<f64>,
    intensity: Vec<f64>,
    /// Fringe frequency when known from synthesis.
    fringe_frequency_hz: Option<f64>,
    i_max: f64,
    i_min: f64,
}

impl FringeTrace {
    pub fn new(
        time: Vec<f64>,
        intensity: Vec<f64>,
        fringe_frequency_hz: Option<f64>,
    ) -> Result<Self> {
        if time.len() != intensity.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} time stamps for {} intensity samples",
                time.len(),
                intensity.len()
            )));
        }
        if intensity.is_empty() {
            return Err(Error::TraceTooShort("trace has no samples".into()));
        }
        if let Some(bad) = intensity.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::param(
                "intensity",
                format!("sample {bad} must be finite and >= 0"),
            ));
        }
        let (i_max, i_min) = refined_extrema(&intensity);
        Ok(Self {
            time,
            intensity,
            fringe_frequency_hz,
            i_max,
            i_min,
        })
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn i_max(&self) -> f64 {
        self.i_max
    }

    pub fn i_min(&self) -> f64 {
        self.i_min
    }

    pub fn fringe_frequency_hz(&self) -> Option<f64> {
        self.fringe_frequency_hz
    }

    pub fn duration(&self) -> f64 {
        match self.time.len() {
            0 | 1 => 0.0,
            n => (self.time[n - 1] - self.time[0]) * n as f64 / (n - 1) as f64,
        }
    }

    fn sample_rate(&self) -> Result<f64> {
        let n = self.time.len();
        if n < 2 {
            return Err(Error::TraceTooShort("need at least two samples".into()));
        }
        let dt = (self.time[n - 1] - self.time[0]) / (n - 1) as f64;
        let uniform = self
            .time
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt);
        if !(dt > 0.0) || !uniform {
            return Err(Error::Sampling(
                "time stamps are not uniformly increasing".into(),
            ));
        }
        Ok(1.0 / dt)
    }

    /// Two-column CSV `time_s,intensity`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["time_s", "intensity"])?;
        for (t, i) in self.time.iter().zip(&self.intensity) {
            w.write_record([t.to_string(), i.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut time = Vec::new();
        let mut intensity = Vec::new();
        for rec in r.deserialize() {
            let (t, i): (f64, f64) = rec?;
            time.push(t);
            intensity.push(i);
        }
        Self::new(time, intensity, None)
    }
}

/// Synthesize the interference intensity
/// `I1 + I2 + 2√(I1 I2)·g·cos(2π(ν1 − ν2)t + ramp·t)` where `g` is the
/// Gaussian overlap and `ramp` the phase ramp from a moving mirror.
pub fn fringe_trace(
    p: &CoherenceParams,
    phase_ramp_rate: f64,
    duration: f64,
    sample_rate: f64,
) -> Result<FringeTrace> {
    p.validate()?;
    let ramp_hz = phase_ramp_rate / std::f64::consts::TAU;
    let needed = 2.0 * (p.detuning_hz.abs() + ramp_hz.abs());
    if !(sample_rate > needed) {
        return Err(Error::Sampling(format!(
            "sample rate {sample_rate} Hz does not exceed {needed} Hz"
        )));
    }
    if !(duration > 0.0) {
        return Err(Error::param("duration", format!("{duration} must be > 0")));
    }
    let n = (duration * sample_rate).round().max(1.0) as usize;
    let g = gaussian_overlap(p.detuning_hz, p.linewidth_hz);
    let dc = p.intensity1 + p.intensity2;
    let ac = 2.0 * (p.intensity1 * p.intensity2).sqrt() * g;
    let omega = std::f64::consts::TAU * p.detuning_hz + phase_ramp_rate;
    let time: Vec<f64> = (0..n).map(|k| k as f64 / sample_rate).collect();
    let intensity = time
        .iter()
        .map(|&t| (dc + ac * (omega * t).cos()).max(0.0))
        .collect();
    FringeTrace::new(time, intensity, Some((p.detuning_hz + ramp_hz).abs()))
}

/// `(I_max − I_min) / (I_max + I_min)` from the trace extrema.
pub fn extract_visibility(t: &FringeTrace) -> Result<f64> {
    match t.fringe_frequency_hz {
        Some(f) => {
            let periods = t.duration() * f;
            if periods < 2.0 {
                return Err(Error::TraceTooShort(format!(
                    "trace spans {periods:.3} fringe periods, need at least 2"
                )));
            }
        }
        None if t.intensity.len() < 5 => {
            return Err(Error::TraceTooShort("need at least five samples".into()));
        }
        None => {}
    }
    let total = t.i_max + t.i_min;
    if total <= 0.0 {
        return Ok(0.0);
    }
    Ok(((t.i_max - t.i_min) / total).clamp(0.0, 1.0))
}

/// Beat frequency `|ν1 − ν2|` from the dominant non-DC spectral peak.
///
/// A perfectly flat trace has only a DC component and reads 0 Hz. A trace
/// whose modulation depth is below [`BEAT_DETECTION_FLOOR`] yields
/// [`Error::MeasurementFailure`].
pub fn beat_frequency(t: &FringeTrace) -> Result<f64> {
    let fs = t.sample_rate()?;
    if let Some(f) = t.fringe_frequency_hz.filter(|f| *f > 0.0) {
        let periods = t.duration() * f;
        if periods < 4.0 {
            return Err(Error::TraceTooShort(format!(
                "trace spans {periods:.3} beat periods, need at least 4"
            )));
        }
    }
    let depth = if t.i_max + t.i_min > 0.0 {
        (t.i_max - t.i_min) / (t.i_max + t.i_min)
    } else {
        0.0
    };
    if depth <= 1e-12 {
        return Ok(0.0);
    }
    if depth < BEAT_DETECTION_FLOOR {
        return Err(Error::MeasurementFailure(format!(
            "modulation depth {depth:e} is below the detection floor {BEAT_DETECTION_FLOOR:e}"
        )));
    }
    let power = ac_power_spectrum(&t.intensity);
    let n = t.intensity.len();
    let peak = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::TraceTooShort("no non-DC bins".into()))?;
    Ok(peak as f64 * fs / n as f64)
}

/// One-sided beat spectrum as `(freq_hz, power_db)` rows, power relative to
/// the squared mean intensity.
pub fn beat_spectrum(t: &FringeTrace) -> Result<Vec<(f64, f64)>> {
    let fs = t.sample_rate()?;
    let n = t.intensity.len();
    let mean = t.intensity.iter().sum::<f64>() / n as f64;
    let norm = if mean > 0.0 { mean * mean } else { 1.0 };
    Ok(ac_power_spectrum(&t.intensity)
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            (
                k as f64 * fs / n as f64,
                10.0 * (p / norm).max(1e-300).log10(),
            )
        })
        .collect())
}

pub fn write_beat_spectrum_csv(rows: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["freq_hz", "power_db"])?;
    for (f, p) in rows {
        w.write_record([f.to_string(), p.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `|X_k|² / n²` of the mean-removed samples for `k = 0..=n/2`.
fn ac_power_spectrum(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = samples
        .iter()
        .map(|&v| Complex64::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * n as f64);
    buf[..=n / 2].iter().map(|c| c.norm_sqr() * scale).collect()
}

/// Global maximum and minimum, each refined by an exact local sinusoid fit
/// through the five samples around it.
fn refined_extrema(y: &[f64]) -> (f64, f64) {
    let (mut imax, mut imin) = (0, 0);
    for (k, v) in y.iter().enumerate() {
        if *v > y[imax] {
            imax = k;
        }
        if *v < y[imin] {
            imin = k;
        }
    }
    let max = refine_extremum(y, imax).max(y[imax]);
    let min = refine_extremum(y, imin).min(y[imin]).max(0.0);
    (max, min)
}

/// For `y_n = C + A cos(ωn + ψ)` the second difference obeys
/// `y_{n+1} + y_{n-1} − 2y_n = k (y_n − C)` with `k = 2cos ω − 2`. A
/// three-point regression gives `k` and `C`, from which the local amplitude
/// and hence the true extremum follow. Falls back to the raw sample when the
/// fit is ill-conditioned and never moves the value by more than the local
/// sample-to-sample swing.
fn refine_extremum(y: &[f64], m: usize) -> f64 {
    let raw = y[m];
    if m < 2 || m + 2 >= y.len() {
        return raw;
    }
    let idx = [m - 1, m, m + 1];
    let xs = idx.map(|n| y[n]);
    let ss = idx.map(|n| y[n + 1] + y[n - 1] - 2.0 * y[n]);
    let xm = xs.iter().sum::<f64>() / 3.0;
    let sm = ss.iter().sum::<f64>() / 3.0;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + xm * xm) {
        return raw;
    }
    let sxy: f64 = xs.iter().zip(&ss).map(|(x, s)| (x - xm) * (s - sm)).sum();
    let k = sxy / sxx;
    if !(k < -1e-9 && k > -4.0) {
        return raw;
    }
    let c = xm - sm / k;
    let cos_w = 1.0 + 0.5 * k;
    let sin_w = (1.0 - cos_w * cos_w).max(0.0).sqrt();
    let quad = (y[m + 1] - y[m - 1]) / (2.0 * sin_w);
    let amp = ((raw - c).powi(2) + quad * quad).sqrt();
    let refined = if raw >= c { c + amp } else { c - amp };
    let swing = (raw - y[m - 1]).abs().max((raw - y[m + 1]).abs());
    if refined.is_finite() && (refined - raw).abs() <= swing {
        refined
    } else {
        raw
    }
}
