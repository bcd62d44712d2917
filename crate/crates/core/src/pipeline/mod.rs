//! Configuration, experiment orchestration and data output.

mod config;
mod output;
mod report;
mod sweep;

pub use config::{
    load_config, ExperimentConfig, OracleConfig, OutputConfig, OutputFormat, Spacing, SweepConfig,
    SYMLOG_CORE_HZ,
};
pub use output::{emit_outputs, Artifact, OracleCheck};
pub use report::{
    coherence_threshold, run_coexistence_report, CoexistenceReport, Interval, MEASURED_EXTENT_HZ,
};
pub use sweep::{
    first_crossing, interpolate, run_correlation_sweep, run_visibility_sweep, OracleColumns,
    SweepKind, SweepResult, SweepRow,
};

use crate::error::Result;
use crate::nopo::Detuning;
use crate::oracle::{oracle_run, qnl_calibration, SpectrumEstimate};
use crate::units::variance_to_db;

/// Oracle against the analytic model at detuning `d`.
pub fn run_oracle_check(cfg: &ExperimentConfig, d: f64) -> Result<OracleCheck> {
    cfg.validate()?;
    let f = cfg.analysis_frequency_hz;
    let det = Detuning::new(d)?;
    let cv = cfg.nopo.twin_beam_covariance(f, det)?.combined_variances();
    let est = oracle_run(
        &cfg.nopo,
        &cfg.mz1,
        &cfg.mz2,
        det,
        f,
        &cfg.oracle.settings(),
        cfg.oracle.seed,
    )?;
    Ok(OracleCheck {
        detuning_hz: d,
        seed: cfg.oracle.seed,
        n_samples: cfg.oracle.n_samples,
        rows: vec![
            (
                "vx_minus".into(),
                variance_to_db(cv.vx_minus, 1.0),
                est.vx_minus_db,
            ),
            (
                "vy_plus".into(),
                variance_to_db(cv.vy_plus, 1.0),
                est.vy_plus_db,
            ),
            ("qnl".into(), 0.0, est.qnl_db),
        ],
    })
}

/// Vacuum-channel spectrum with coherent input beams.
pub fn run_qnl_calibration(cfg: &ExperimentConfig) -> Result<SpectrumEstimate> {
    cfg.validate()?;
    qnl_calibration(
        &cfg.mz1,
        &cfg.mz2,
        cfg.analysis_frequency_hz,
        &cfg.oracle.settings(),
        cfg.oracle.seed,
    )
}
