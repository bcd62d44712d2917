//! Simulator for bright twin-beam quadrature correlations from a
//! nondegenerate optical parametric oscillator above threshold.
//!
//! The crate is organised along the measurement chain:
//!
//! - [`quadrature`]: two-mode Gaussian covariance algebra (combined
//!   variances, inseparability test, loss, beamsplitters, symplectic
//!   spectrum).
//! - [`nopo`]: analytic squeezing spectra of the oscillator and the
//!   phase-matching window over frequency detuning.
//! - [`interferometer`]: the unbalanced Mach-Zehnder self-homodyne detector.
//! - [`coherence`]: the classical channel (fringe visibility and beat note).
//! - [`oracle`]: time-domain Monte Carlo ground truth with an emulated
//!   spectrum analyzer.
//! - [`pipeline`]: configuration, sweeps, region report and file output.
//!
//! All variances are expressed in units of the quantum noise limit (QNL):
//! a vacuum or coherent mode has quadrature variance 1.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherence;
pub mod error;
pub mod interferometer;
pub mod nopo;
pub mod oracle;
pub mod pipeline;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
