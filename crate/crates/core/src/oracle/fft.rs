//! FFT-based shaping and delay of real sample sequences.

use std::sync::Arc;

use rustfft::{num_complex::Complex64, Fft, FftPlanner};

pub(crate) struct RealFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RealFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Signed frequency of bin `k` in units of the sample rate.
    fn bin_frequency(&self, k: usize) -> f64 {
        let n = self.n as f64;
        if 2 * k <= self.n {
            k as f64 / n
        } else {
            k as f64 / n - 1.0
        }
    }

    /// Multiply the spectrum of `x` by `gain(f)` where `f` is the signed
    /// normalized frequency, and return the real part of the result.
    fn filter(&self, x: &[f64], gain: impl Fn(usize, f64) -> Complex64) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= gain(k, self.bin_frequency(k));
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Zero-phase amplitude shaping by `√psd(|f|)`, `f` in Hz.
    pub fn shape(&self, white: &[f64], sample_rate: f64, psd: impl Fn(f64) -> f64) -> Vec<f64> {
        self.filter(white, |_, f| {
            Complex64::new(psd(f.abs() * sample_rate).max(0.0).sqrt(), 0.0)
        })
    }

    /// Circular time delay `x(t - tau)`.
    pub fn delay(&self, x: &[f64], sample_rate: f64, tau: f64) -> Vec<f64> {
        let nyquist = self.n / 2;
        let even = self.n.is_multiple_of(2);
        self.filter(x, |k, f| {
            let phase = -std::f64::consts::TAU * f * sample_rate * tau;
            if even && k == nyquist {
                // real-valued at Nyquist so the output stays real
                Complex64::new(phase.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, phase)
            }
        })
    }
}
