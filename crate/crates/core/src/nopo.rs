//! Analytic model of the above-threshold nondegenerate OPO twin-beam source.
//!
//! The detected amplitude-difference and phase-sum spectra are
//!
//! ```text
//! vx_minus(f) = S0 [1 - η ζ² ξ / (1 + (f/B)²)]
//! vy_plus(f)  = S0 [1 - η ζ² ξ / (σ² + (f/B)²)] + ε
//! ```
//!
//! with σ = √(P/P0). Outside the phase-matching band the product η ζ² ξ is
//! scaled by a raised-cosine window over the signal/idler detuning.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{build_covariance, TwoModeCovariance};

/// Signed signal/idler frequency difference ν1 − ν2 in Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Detuning(f64);

impl Detuning {
    pub fn new(hz: f64) -> Result<Self> {
        if hz.is_finite() {
            Ok(Self(hz))
        } else {
            Err(Error::param("detuning", format!("{hz} is not finite")))
        }
    }

    pub fn hz(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NopoParams {
    /// Detection efficiency η.
    pub eta: f64,
    /// Interferometer transmission ζ (enters squared).
    pub zeta: f64,
    /// Output coupling efficiency ξ.
    pub xi: f64,
    pub pump_power_mw: f64,
    pub threshold_power_mw: f64,
    /// Cavity bandwidth B.
    pub bandwidth_hz: f64,
    /// Quantum noise limit S0.
    pub qnl: f64,
    /// Gaussian frequency spread Δν of each beam.
    pub linewidth_hz: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    /// Width of the raised-cosine roll-off outside the band.
    pub band_softness_hz: f64,
    /// Additive excess noise ε on the phase-sum variance.
    pub excess_phase_noise: f64,
    /// Multiplicative factor (≥ 1) on the anti-squeezed amplitude sum.
    pub antisqueeze_excess_x: f64,
    /// Multiplicative factor (≥ 1) on the anti-squeezed phase difference.
    pub antisqueeze_excess_y: f64,
}

impl Default for NopoParams {
    fn default() -> Self {
        Self {
            eta: 0.90,
            zeta: 0.81,
            xi: 0.88,
            pump_power_mw: 195.0,
            threshold_power_mw: 130.0,
            bandwidth_hz: 15.4e6,
            qnl: 1.0,
            linewidth_hz: 1.0e6,
            band_low_hz: -83.2e9,
            band_high_hz: 975e9,
            band_softness_hz: 50e9,
            excess_phase_noise: 0.0,
            antisqueeze_excess_x: 1.0,
            antisqueeze_excess_y: 1.0,
        }
    }
}

/// The two squeezed combinations of the detected twin beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedPair {
    pub vx_minus: f64,
    pub vy_plus: f64,
}

impl NopoParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("zeta", self.zeta), ("xi", self.xi)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} is outside [0, 1]")));
            }
        }
        let positive = [
            ("threshold_power_mw", self.threshold_power_mw),
            ("bandwidth_hz", self.bandwidth_hz),
            ("qnl", self.qnl),
            ("linewidth_hz", self.linewidth_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("{v} must be > 0")));
            }
        }
        let non_negative = [
            ("pump_power_mw", self.pump_power_mw),
            ("band_softness_hz", self.band_softness_hz),
            ("excess_phase_noise", self.excess_phase_noise),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("{v} must be >= 0")));
            }
        }
        if !(self.band_low_hz.is_finite()
            && self.band_high_hz.is_finite()
            && self.band_low_hz < self.band_high_hz)
        {
            return Err(Error::param(
                "band_low_hz",
                format!(
                    "band_low_hz ({}) must be below band_high_hz ({})",
                    self.band_low_hz, self.band_high_hz
                ),
            ));
        }
        for (name, v) in [
            ("antisqueeze_excess_x", self.antisqueeze_excess_x),
            ("antisqueeze_excess_y", self.antisqueeze_excess_y),
        ] {
            if !(v.is_finite() && v >= 1.0) {
                return Err(Error::param(name, format!("{v} must be >= 1")));
            }
        }
        let sigma = self.pump_parameter()?;
        if sigma <= 1.0 {
            return Err(Error::param(
                "pump_power_mw",
                format!("pump parameter σ = {sigma} must exceed 1 (above threshold)"),
            ));
        }
        Ok(())
    }

    /// σ = √(P/P0).
    pub fn pump_parameter(&self) -> Result<f64> {
        if !(self.threshold_power_mw > 0.0) {
            return Err(Error::param(
                "threshold_power_mw",
                format!("{} must be > 0", self.threshold_power_mw),
            ));
        }
        if !(self.pump_power_mw >= 0.0) {
            return Err(Error::param(
                "pump_power_mw",
                format!("{} must be >= 0", self.pump_power_mw),
            ));
        }
        Ok((self.pump_power_mw / self.threshold_power_mw).sqrt())
    }

    /// η ζ² ξ, the fraction of the intracavity correlation that is detected.
    pub fn correlated_fraction(&self) -> f64 {
        self.eta * self.zeta * self.zeta * self.xi
    }

    pub fn squeezed_variances(&self, f: f64) -> Result<SqueezedPair> {
        self.validate()?;
        check_frequency(f)?;
        Ok(self.spectra(f, 1.0))
    }

    /// `vx_minus`/`vy_plus` with the correlated fraction scaled by
    /// `window`. Parameters are assumed valid.
    pub(crate) fn spectra(&self, f: f64, window: f64) -> SqueezedPair {
        let gain = self.correlated_fraction() * window;
        let lorentz = (f / self.bandwidth_hz).powi(2);
        let sigma_sq = self.pump_power_mw / self.threshold_power_mw;
        SqueezedPair {
            vx_minus: self.qnl * (1.0 - gain / (1.0 + lorentz)),
            vy_plus: self.qnl * (1.0 - gain / (sigma_sq + lorentz)) + self.excess_phase_noise,
        }
    }

    /// Raised-cosine phase-matching window: 1 on `[band_low, band_high]`,
    /// falling to 0 over `band_softness` on either side.
    pub fn phasematch_factor(&self, d: Detuning) -> f64 {
        let d = d.hz();
        let outside = if d < self.band_low_hz {
            self.band_low_hz - d
        } else if d > self.band_high_hz {
            d - self.band_high_hz
        } else {
            return 1.0;
        };
        if self.band_softness_hz <= 0.0 {
            return 0.0;
        }
        let x = outside / self.band_softness_hz;
        if x >= 1.0 {
            0.0
        } else {
            0.5 * (1.0 + (PI * x).cos())
        }
    }

    /// Detected twin-beam state at sideband frequency `f` and detuning `d`,
    /// in QNL units (entries divided by S0).
    ///
    /// Anti-squeezed partners are the minimum-uncertainty completion of the
    /// ε-free squeezed pair, times the optional excess factors; ε is then
    /// added to the phase sum as extra classical noise.
    pub fn twin_beam_covariance(&self, f: f64, d: Detuning) -> Result<TwoModeCovariance> {
        self.validate()?;
        check_frequency(f)?;
        let w = self.phasematch_factor(d);
        let pair = self.spectra(f, w);
        let vx_minus = pair.vx_minus / self.qnl;
        let vy_plus = pair.vy_plus / self.qnl;
        let vy_plus_pure = (pair.vy_plus - self.excess_phase_noise) / self.qnl;
        build_covariance(
            self.antisqueeze_excess_x / vy_plus_pure,
            vx_minus,
            vy_plus,
            self.antisqueeze_excess_y / vx_minus,
            f,
        )
    }

    /// Open detuning interval on which `vx_minus + vy_plus < 2` (QNL units)
    /// at sideband frequency `f`, or `None` if the beams are never entangled.
    pub fn entanglement_window(&self, f: f64) -> Result<Option<(f64, f64)>> {
        self.validate()?;
        check_frequency(f)?;
        // vx_- + vy_+ < 2  <=>  w·g·(L1 + L2) > ε/S0
        let full = self.spectra(f, 1.0);
        let depth =
            (2.0 * self.qnl - full.vx_minus - full.vy_plus + self.excess_phase_noise) / self.qnl;
        let w_min = (self.excess_phase_noise / self.qnl) / depth;
        if !(depth > 0.0) || w_min >= 1.0 {
            return Ok(None);
        }
        if self.band_softness_hz <= 0.0 {
            return Ok(Some((self.band_low_hz, self.band_high_hz)));
        }
        // invert ½(1 + cos πx) = w_min
        let reach = (2.0 * w_min - 1.0).clamp(-1.0, 1.0).acos() / PI * self.band_softness_hz;
        Ok(Some((self.band_low_hz - reach, self.band_high_hz + reach)))
    }

    /// What leaves the oscillator before detection: η = ζ = 1 and no excess
    /// phase noise.
    pub fn at_source(&self) -> Self {
        Self {
            eta: 1.0,
            zeta: 1.0,
            excess_phase_noise: 0.0,
            ..self.clone()
        }
    }
}

fn check_frequency(f: f64) -> Result<()> {
    if f.is_finite() && f >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "analysis_frequency",
            format!("{f} must be >= 0"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{combined_variances, duan_criterion};
    use crate::units::variance_to_db;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix4;

    fn d(hz: f64) -> Detuning {
        Detuning::new(hz).unwrap()
    }

    #[test]
    fn pump_parameter_examples() {
        let mut p = NopoParams::default();
        assert_abs_diff_eq!(
            p.pump_parameter().unwrap(),
            1.224744871391589,
            epsilon = 1e-12
        );
        p.pump_power_mw = p.threshold_power_mw;
        assert_eq!(p.pump_parameter().unwrap(), 1.0);
        p.pump_power_mw = 4.0 * p.threshold_power_mw;
        assert_eq!(p.pump_parameter().unwrap(), 2.0);
        p.threshold_power_mw = 0.0;
        assert!(p.pump_parameter().is_err());
    }

    #[test]
    fn default_spectra_hand_evaluated() {
        // η ζ² ξ = 0.5196312, (f/B)² = (2/15.4)², σ² = 1.5
        let g = 0.9 * 0.81 * 0.81 * 0.88;
        let l = (2.0f64 / 15.4).powi(2);
        let pair = NopoParams::default().squeezed_variances(2e6).unwrap();
        assert_abs_diff_eq!(pair.vx_minus, 1.0 - g / (1.0 + l), epsilon = 1e-14);
        assert_abs_diff_eq!(pair.vy_plus, 1.0 - g / (1.5 + l), epsilon = 1e-14);
        assert_abs_diff_eq!(pair.vx_minus, 0.488988, epsilon = 1e-6);
        assert_abs_diff_eq!(pair.vy_plus, 0.657431, epsilon = 1e-6);
        assert_abs_diff_eq!(variance_to_db(pair.vx_minus, 1.0), -3.107, epsilon = 1e-3);
        assert_abs_diff_eq!(variance_to_db(pair.vy_plus, 1.0), -1.821, epsilon = 1e-3);
    }

    #[test]
    fn no_gain_or_far_sideband_is_qnl() {
        let p = NopoParams {
            xi: 0.0,
            excess_phase_noise: 0.02,
            ..Default::default()
        };
        let pair = p.squeezed_variances(2e6).unwrap();
        assert_eq!(pair.vx_minus, 1.0);
        assert_abs_diff_eq!(pair.vy_plus, 1.02, epsilon = 1e-15);

        let pair = NopoParams::default().squeezed_variances(1e15).unwrap();
        assert_abs_diff_eq!(pair.vx_minus, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.vy_plus, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn phasematch_window() {
        let p = NopoParams::default();
        assert_eq!(p.phasematch_factor(d(0.0)), 1.0);
        assert_eq!(p.phasematch_factor(d(p.band_high_hz)), 1.0);
        assert_eq!(p.phasematch_factor(d(p.band_low_hz)), 1.0);
        assert!(p.phasematch_factor(d(p.band_low_hz - 10.0 * p.band_softness_hz)) < 0.01);
        assert_abs_diff_eq!(
            p.phasematch_factor(d(p.band_high_hz + 0.5 * p.band_softness_hz)),
            0.5,
            epsilon = 1e-12
        );
        // monotone on each side
        let mut prev = 1.0;
        for k in 0..200 {
            let w = p.phasematch_factor(d(p.band_high_hz + k as f64 * 0.5e9));
            assert!(w <= prev);
            prev = w;
        }
        let mut prev = 1.0;
        for k in 0..200 {
            let w = p.phasematch_factor(d(p.band_low_hz - k as f64 * 0.5e9));
            assert!(w <= prev);
            prev = w;
        }
    }

    #[test]
    fn twin_beam_examples() {
        let p = NopoParams::default();
        let cm = p.twin_beam_covariance(2e6, d(0.0)).unwrap();
        let duan = duan_criterion(&combined_variances(&cm));
        assert_abs_diff_eq!(duan.value_corr, 1.146419, epsilon = 1e-6);
        assert!(duan.entangled);

        let eps = NopoParams {
            excess_phase_noise: 0.051,
            ..Default::default()
        };
        let far = eps
            .twin_beam_covariance(2e6, d(eps.band_low_hz - 500e9))
            .unwrap();
        let mut expected = Matrix4::identity();
        for (i, j) in [(1, 1), (3, 3), (1, 3), (3, 1)] {
            expected[(i, j)] += 0.051 / 2.0;
        }
        assert_abs_diff_eq!(*far.entries(), expected, epsilon = 1e-15);

        let cv = combined_variances(&eps.twin_beam_covariance(2e6, d(0.0)).unwrap());
        assert_abs_diff_eq!(cv.vy_plus, 0.708431, epsilon = 1e-6);
        assert_abs_diff_eq!(variance_to_db(cv.vy_plus, 1.0), -1.497, epsilon = 1e-3);
    }

    #[test]
    fn flat_in_band() {
        let p = NopoParams::default();
        let at = |hz| {
            duan_criterion(&combined_variances(
                &p.twin_beam_covariance(2e6, d(hz)).unwrap(),
            ))
            .value_corr
        };
        let centre = at(0.0);
        for hz in [p.band_low_hz, -1e9, 3.37e6, 500e9, p.band_high_hz] {
            assert_eq!(at(hz), centre);
        }
    }

    #[test]
    fn efficiencies_and_pump_monotone() {
        let grid = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let base = NopoParams::default();
        for knob in 0..3 {
            let mut prev: Option<SqueezedPair> = None;
            for v in grid {
                let mut p = base.clone();
                match knob {
                    0 => p.eta = v,
                    1 => p.zeta = v,
                    _ => p.xi = v,
                }
                let s = p.squeezed_variances(2e6).unwrap();
                if let Some(prev) = prev {
                    assert!(s.vx_minus <= prev.vx_minus && s.vy_plus <= prev.vy_plus);
                }
                prev = Some(s);
            }
        }
        let mut prev = f64::NEG_INFINITY;
        for k in 1..40 {
            let p = NopoParams {
                pump_power_mw: base.threshold_power_mw * (1.0 + 0.1 * k as f64).powi(2),
                ..base.clone()
            };
            let vy = p.squeezed_variances(2e6).unwrap().vy_plus;
            assert!(vy >= prev);
            prev = vy;
        }
    }

    #[test]
    fn validation_names_fields() {
        let bad = NopoParams {
            zeta: 1.2,
            ..Default::default()
        };
        match bad.validate().unwrap_err() {
            Error::InvalidParameter { name, .. } => assert_eq!(name, "zeta"),
            e => panic!("{e:?}"),
        }
        let below = NopoParams {
            pump_power_mw: 100.0,
            ..Default::default()
        };
        assert!(below.validate().is_err());
        assert!(Detuning::new(f64::NAN).is_err());
    }

    #[test]
    fn entanglement_window_edges() {
        let p = NopoParams::default();
        let (lo, hi) = p.entanglement_window(2e6).unwrap().unwrap();
        assert_eq!(lo, p.band_low_hz - p.band_softness_hz);
        assert_eq!(hi, p.band_high_hz + p.band_softness_hz);

        let eps = NopoParams {
            excess_phase_noise: 0.051,
            ..Default::default()
        };
        let (lo, hi) = eps.entanglement_window(2e6).unwrap().unwrap();
        let value = |hz| {
            duan_criterion(&combined_variances(
                &eps.twin_beam_covariance(2e6, d(hz)).unwrap(),
            ))
            .value_corr
        };
        assert!(value(hi - 1e6) < 2.0);
        assert!(value(hi + 1e6) >= 2.0);
        assert!(value(lo + 1e6) < 2.0);
        assert!(value(lo - 1e6) >= 2.0);

        let dead = NopoParams {
            eta: 0.0,
            ..Default::default()
        };
        assert_eq!(dead.entanglement_window(2e6).unwrap(), None);
    }
}
