use std::path::Path;

use crate::error::{Error, Result};
use crate::interferometer::Combiner;

/// Real stationary time series in QNL-normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    samples: Vec<f64>,
    sample_rate: f64,
    seed: u64,
}

impl NoiseTrace {
    pub fn new(samples: Vec<f64>, sample_rate: f64, seed: u64) -> Result<Self> {
        if !samples.len().is_power_of_two() {
            return Err(Error::Sampling(format!(
                "trace length {} is not a power of two",
                samples.len()
            )));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::param(
                "sample_rate",
                format!("{sample_rate} must be > 0"),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("samples", "trace contains non-finite values"));
        }
        Ok(Self {
            samples,
            sample_rate,
            seed,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn variance(&self) -> f64 {
        let n = self.samples.len() as f64;
        let mean = self.samples.iter().sum::<f64>() / n;
        self.samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
    }

    /// Two-column CSV `time_s,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["time_s", "value"])?;
        for (k, v) in self.samples.iter().enumerate() {
            w.write_record([(k as f64 / self.sample_rate).to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// RF power combiner: `(a ± b) / √2`.
pub fn combine(a: &NoiseTrace, b: &NoiseTrace, sign: Combiner) -> Result<NoiseTrace> {
    if a.len() != b.len() || a.sample_rate != b.sample_rate {
        return Err(Error::ShapeMismatch(format!(
            "cannot combine {} samples at {} Hz with {} samples at {} Hz",
            a.len(),
            a.sample_rate,
            b.len(),
            b.sample_rate
        )));
    }
    let s = sign.sign();
    let samples = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x + s * y) * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    Ok(NoiseTrace {
        samples,
        sample_rate: a.sample_rate,
        seed: a.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::noise::NoiseStreams;

    #[test]
    fn combine_examples() {
        let streams = NoiseStreams::new(9);
        let a = NoiseTrace::new(streams.white(0, 1 << 16), 1e6, 9).unwrap();
        let b = NoiseTrace::new(streams.white(1, 1 << 16), 1e6, 9).unwrap();
        let zero = combine(&a, &a, Combiner::Minus).unwrap();
        assert!(zero.samples().iter().all(|v| *v == 0.0));
        // sampling error of a variance estimate from 2^16 samples is ~0.55%
        for sign in [Combiner::Plus, Combiner::Minus] {
            let v = combine(&a, &b, sign).unwrap().variance();
            assert!((v - 1.0).abs() < 0.03, "{v}");
        }
        let short = NoiseTrace::new(streams.white(2, 1 << 10), 1e6, 9).unwrap();
        assert!(matches!(
            combine(&a, &short, Combiner::Plus),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn rejects_odd_lengths() {
        assert!(matches!(
            NoiseTrace::new(vec![0.0; 1000], 1.0, 0),
            Err(Error::Sampling(_))
        ));
    }
}
