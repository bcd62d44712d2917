//! Unbalanced Mach-Zehnder self-homodyne detector.
//!
//! The measured beam `a` and a vacuum `v` enter the input splitter B1. The
//! long arm is delayed by `n·ΔL/c`, which rotates the carrier by `φ` and
//! multiplies every sideband component at frequency `f` by `e^{iθ}` with
//! `θ = 2π f n ΔL / c`. The output splitter B2 recombines the arms onto two
//! photodiodes whose linearized photocurrent fluctuations are
//! `δn = Re(β) δX_out + Im(β) δY_out` for output mean field `β`.
//!
//! With B1 in place, `φ = π/2` and `θ = π` the sum photocurrent carries only
//! vacuum noise and the difference carries the phase quadrature of `a`. With
//! B1 removed the pair is an ordinary balanced detector: the sum carries the
//! amplitude quadrature and the difference the vacuum.
//!
//! The interferometer is lossless; transmission and detector efficiency are
//! applied to the state upstream.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::TwoModeCovariance;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Which quadrature the interferometer is set up to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementMode {
    /// Input splitter removed; balanced detection of the amplitude quadrature.
    Amplitude,
    /// Input splitter in place; self-homodyne detection of the phase quadrature.
    Phase,
}

/// Sign of the RF power combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    Plus,
    Minus,
}

impl Combiner {
    pub fn sign(self) -> f64 {
        match self {
            Combiner::Plus => 1.0,
            Combiner::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MzConfig {
    /// Arm-length difference ΔL in metres.
    pub delta_l_m: f64,
    pub refractive_index: f64,
    /// Carrier phase of the long arm relative to the short arm at B2.
    pub carrier_phase_rad: f64,
    /// B1 in place (phase mode) or removed (amplitude mode).
    pub input_splitter_present: bool,
    /// Reflectivity of B1 and B2.
    pub splitter_reflectivity: f64,
    /// Real classical amplitude `a` of the input beam.
    pub classical_amplitude: f64,
    /// Allowed deviation of θ from π (and φ from π/2) in phase mode.
    pub theta_tolerance_rad: f64,
}

impl Default for MzConfig {
    fn default() -> Self {
        Self {
            delta_l_m: 48.0,
            refractive_index: 1.55,
            carrier_phase_rad: FRAC_PI_2,
            input_splitter_present: true,
            splitter_reflectivity: 0.5,
            classical_amplitude: 1.0,
            theta_tolerance_rad: 0.05,
        }
    }
}

impl MzConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_l_m.is_finite() && self.delta_l_m > 0.0) {
            return Err(Error::param(
                "delta_l_m",
                format!("{} must be > 0", self.delta_l_m),
            ));
        }
        if !(self.refractive_index.is_finite() && self.refractive_index >= 1.0) {
            return Err(Error::param(
                "refractive_index",
                format!("{} must be >= 1", self.refractive_index),
            ));
        }
        if !(0.0..=1.0).contains(&self.splitter_reflectivity) {
            return Err(Error::param(
                "splitter_reflectivity",
                format!("{} is outside [0, 1]", self.splitter_reflectivity),
            ));
        }
        if !(self.classical_amplitude.is_finite() && self.classical_amplitude >= 0.0) {
            return Err(Error::param(
                "classical_amplitude",
                format!("{} must be >= 0", self.classical_amplitude),
            ));
        }
        if !self.carrier_phase_rad.is_finite() {
            return Err(Error::param("carrier_phase_rad", "must be finite"));
        }
        if !(self.theta_tolerance_rad.is_finite() && self.theta_tolerance_rad > 0.0) {
            return Err(Error::param(
                "theta_tolerance_rad",
                format!("{} must be > 0", self.theta_tolerance_rad),
            ));
        }
        Ok(())
    }

    pub fn mode(&self) -> MeasurementMode {
        if self.input_splitter_present {
            MeasurementMode::Phase
        } else {
            MeasurementMode::Amplitude
        }
    }

    pub fn with_mode(mut self, mode: MeasurementMode) -> Self {
        self.input_splitter_present = mode == MeasurementMode::Phase;
        self
    }

    /// Long-arm delay `n·ΔL/c` in seconds.
    pub fn delay_s(&self) -> f64 {
        self.refractive_index * self.delta_l_m / SPEED_OF_LIGHT
    }

    /// Same interferometer with ΔL trimmed so that θ = π exactly at `f`.
    pub fn with_pi_sideband_at(mut self, f: f64) -> Self {
        self.delta_l_m = SPEED_OF_LIGHT / (2.0 * self.refractive_index * f);
        self
    }

    /// Checks the operating point of the configured mode at sideband `f`.
    pub fn check_operating_point(&self, f: f64) -> Result<()> {
        self.validate()?;
        if self.classical_amplitude <= 0.0 {
            return Err(Error::OperatingPoint(
                "classical amplitude must be > 0 to produce a photocurrent".into(),
            ));
        }
        if self.mode() == MeasurementMode::Amplitude {
            return Ok(());
        }
        let tol = self.theta_tolerance_rad;
        let dphi = wrap_angle(self.carrier_phase_rad - FRAC_PI_2);
        if dphi.abs() > tol {
            return Err(Error::OperatingPoint(format!(
                "carrier phase φ deviates from π/2 by {dphi:.4} rad (tolerance {tol} rad)"
            )));
        }
        let dtheta = wrap_angle(sideband_phase(self, f) - PI);
        if dtheta.abs() > tol {
            return Err(Error::OperatingPoint(format!(
                "sideband phase θ deviates from π by {dtheta:.4} rad at {f} Hz (tolerance {tol} rad)"
            )));
        }
        Ok(())
    }
}

/// Unwrapped sideband phase `θ = 2π f n ΔL / c`.
pub fn sideband_phase(cfg: &MzConfig, f: f64) -> f64 {
    TAU * f * cfg.delay_s()
}

/// Reduce an angle to `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Complex sideband coefficients of the sum and difference photocurrents on
/// the input fluctuations `(δX_a, δY_a, δX_v, δY_v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoefficients {
    pub sum: [Complex64; 4],
    pub diff: [Complex64; 4],
}

impl ChannelCoefficients {
    pub fn channel(&self, mode: MeasurementMode) -> &[Complex64; 4] {
        match mode {
            MeasurementMode::Amplitude => &self.sum,
            MeasurementMode::Phase => &self.diff,
        }
    }
}

type Field = [[Complex64; 4]; 2];

fn scale(f: &Field, s: Complex64) -> Field {
    f.map(|row| row.map(|c| c * s))
}

fn add(a: &Field, b: &Field) -> Field {
    let mut out = *a;
    for (ro, rb) in out.iter_mut().zip(b) {
        for (o, x) in ro.iter_mut().zip(rb) {
            *o += x;
        }
    }
    out
}

fn rotate(f: &Field, angle: f64) -> Field {
    let (s, c) = angle.sin_cos();
    let mut out = *f;
    for k in 0..4 {
        out[0][k] = f[0][k] * c - f[1][k] * s;
        out[1][k] = f[0][k] * s + f[1][k] * c;
    }
    out
}

fn photocurrent(mean: Complex64, field: &Field) -> [Complex64; 4] {
    let mut row = [Complex64::new(0.0, 0.0); 4];
    for (k, r) in row.iter_mut().enumerate() {
        *r = field[0][k] * mean.re + field[1][k] * mean.im;
    }
    row
}

/// General transfer coefficients at explicit carrier phase (from `cfg`) and
/// sideband phase `theta`.
pub fn coefficients_at(cfg: &MzConfig, theta: f64) -> ChannelCoefficients {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let r2 = cfg.splitter_reflectivity;
    let r1 = if cfg.input_splitter_present { r2 } else { 0.0 };
    let (sr1, st1) = (r1.sqrt(), (1.0 - r1).sqrt());
    let (sr2, st2) = (r2.sqrt(), (1.0 - r2).sqrt());
    let a = cfg.classical_amplitude;
    let phi = cfg.carrier_phase_rad;

    let input: Field = [[one, zero, zero, zero], [zero, one, zero, zero]];
    let vacuum: Field = [[zero, zero, one, zero], [zero, zero, zero, one]];

    let short = add(&scale(&input, st1.into()), &scale(&vacuum, sr1.into()));
    let long = add(&scale(&input, sr1.into()), &scale(&vacuum, (-st1).into()));
    let long = scale(&rotate(&long, phi), Complex64::from_polar(1.0, theta));

    let b = add(&scale(&short, st2.into()), &scale(&long, sr2.into()));
    let c = add(&scale(&short, sr2.into()), &scale(&long, (-st2).into()));

    let carrier = Complex64::from_polar(1.0, phi);
    let beta = a * (st2 * st1 + sr2 * sr1 * carrier);
    let gamma = a * (sr2 * st1 - st2 * sr1 * carrier);

    let nb = photocurrent(beta, &b);
    let nc = photocurrent(gamma, &c);
    let mut sum = [zero; 4];
    let mut diff = [zero; 4];
    for k in 0..4 {
        sum[k] = nb[k] + nc[k];
        diff[k] = nb[k] - nc[k];
    }
    ChannelCoefficients { sum, diff }
}

pub fn coefficients(cfg: &MzConfig, f: f64) -> ChannelCoefficients {
    coefficients_at(cfg, sideband_phase(cfg, f))
}

/// Sum and difference photocurrent variances at one sideband frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotocurrentSpectra {
    pub sum_variance: f64,
    pub diff_variance: f64,
    pub frequency: f64,
}

/// Spectral variance `Σ |c_k|² V_k` of a linear combination of uncorrelated
/// inputs.
fn diagonal_form(c: &[Complex64; 4], variances: &[f64; 4]) -> f64 {
    c.iter().zip(variances).map(|(c, v)| c.norm_sqr() * v).sum()
}

/// Photocurrent spectra for a single-mode input with the given quadrature
/// variances (vacuum port at 1).
pub fn transfer(
    cfg: &MzConfig,
    input_x_var: f64,
    input_y_var: f64,
    f: f64,
) -> Result<PhotocurrentSpectra> {
    cfg.validate()?;
    if !(input_x_var > 0.0 && input_y_var > 0.0) {
        return Err(Error::param(
            "input variance",
            format!("({input_x_var}, {input_y_var}) must be > 0"),
        ));
    }
    if !(f.is_finite() && f >= 0.0) {
        return Err(Error::param("frequency", format!("{f} must be >= 0")));
    }
    Ok(transfer_at(
        cfg,
        input_x_var,
        input_y_var,
        sideband_phase(cfg, f),
        f,
    ))
}

/// [`transfer`] at an explicit sideband phase; `f` is only recorded.
pub fn transfer_at(
    cfg: &MzConfig,
    input_x_var: f64,
    input_y_var: f64,
    theta: f64,
    f: f64,
) -> PhotocurrentSpectra {
    let co = coefficients_at(cfg, theta);
    let v = [input_x_var, input_y_var, 1.0, 1.0];
    PhotocurrentSpectra {
        sum_variance: diagonal_form(&co.sum, &v),
        diff_variance: diagonal_form(&co.diff, &v),
        frequency: f,
    }
}

/// Read out one combined variance of the twin beams through two
/// interferometers and an RF combiner.
///
/// Each beam's selected channel (sum in amplitude mode, difference in phase
/// mode) is normalized by its QNL amplitude `a`; the result is
/// `½⟨(ch1 ± ch2)²⟩` at `cm.analysis_frequency()`. Amplitude mode with
/// `Minus` gives `vx_minus`; phase mode with `Plus` gives `vy_plus`.
pub fn measure_twin_beams(
    cm: &TwoModeCovariance,
    cfg1: &MzConfig,
    cfg2: &MzConfig,
    combiner: Combiner,
) -> Result<f64> {
    let f = cm.analysis_frequency();
    cfg1.check_operating_point(f)?;
    cfg2.check_operating_point(f)?;
    if cfg1.mode() != cfg2.mode() {
        return Err(Error::OperatingPoint(format!(
            "interferometers are in different modes ({:?} and {:?})",
            cfg1.mode(),
            cfg2.mode()
        )));
    }
    let mode = cfg1.mode();
    let ch1 = coefficients(cfg1, f);
    let ch2 = coefficients(cfg2, f);
    let ch1 = ch1.channel(mode).map(|c| c / cfg1.classical_amplitude);
    let ch2 = ch2
        .channel(mode)
        .map(|c| c * combiner.sign() / cfg2.classical_amplitude);

    // variables: X1 Y1 X2 Y2 (state) then the two vacuum ports
    let c = [
        ch1[0], ch1[1], ch2[0], ch2[1], ch1[2], ch1[3], ch2[2], ch2[3],
    ];
    let m = cm.entries();
    let cov = |i: usize, j: usize| -> f64 {
        match (i < 4, j < 4) {
            (true, true) => m[(i, j)],
            (false, false) if i == j => 1.0,
            _ => 0.0,
        }
    };
    let mut total = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            let v = cov(i, j);
            if v != 0.0 {
                total += (c[i].re * c[j].re + c[i].im * c[j].im) * v;
            }
        }
    }
    Ok(0.5 * total)
}

/// The calibration level of a beam's vacuum-only channel: `a²`.
pub fn qnl_reference(cfg: &MzConfig, f: f64) -> Result<f64> {
    cfg.check_operating_point(f)?;
    Ok(cfg.classical_amplitude * cfg.classical_amplitude)
}
