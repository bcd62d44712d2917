//! Detuning sweeps of the classical and quantum channels.

use rayon::prelude::*;
use serde::Serialize;

use crate::coherence::visibility;
use crate::error::{Error, Result};
use crate::nopo::Detuning;
use crate::oracle::oracle_run;
use crate::quadrature::duan_criterion;
use crate::units::variance_to_db;

use super::config::{ExperimentConfig, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Visibility,
    Correlation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleColumns {
    pub vx_minus_oracle_db: f64,
    pub vy_plus_oracle_db: f64,
    pub qnl_oracle_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub detuning_hz: f64,
    pub visibility: f64,
    pub vx_minus_db: f64,
    pub vy_plus_db: f64,
    /// `vx_minus + vy_plus` in QNL units.
    pub duan_value: f64,
    pub entangled: bool,
    pub oracle: Option<OracleColumns>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn detunings(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.detuning_hz).collect()
    }

    pub fn column(&self, pick: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(pick).collect()
    }
}

/// Piecewise-linear interpolation on an ascending grid; `None` outside it.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if xs.len() != ys.len() || xs.is_empty() || x < xs[0] || x > xs[xs.len() - 1] {
        return None;
    }
    let k = xs.partition_point(|&v| v <= x);
    if k == xs.len() {
        return Some(ys[ys.len() - 1]);
    }
    let (x0, x1, y0, y1) = (xs[k - 1], xs[k], ys[k - 1], ys[k]);
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// First `x` at which the interpolated curve crosses `level`.
pub fn first_crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    xs.windows(2).zip(ys.windows(2)).find_map(|(x, y)| {
        let (a, b) = (y[0] - level, y[1] - level);
        if a == 0.0 {
            Some(x[0])
        } else if a * b < 0.0 || b == 0.0 {
            Some(x[0] + (x[1] - x[0]) * a / (a - b))
        } else {
            None
        }
    })
}

fn analytic_row(cfg: &ExperimentConfig, d: f64) -> Result<SweepRow> {
    let f = cfg.analysis_frequency_hz;
    let v = visibility(&cfg.coherence.with_detuning(d))?;
    let cm = cfg.nopo.twin_beam_covariance(f, Detuning::new(d)?)?;
    let cv = cm.combined_variances();
    let duan = duan_criterion(&cv);
    let row = SweepRow {
        detuning_hz: d,
        visibility: v,
        vx_minus_db: variance_to_db(cv.vx_minus, 1.0),
        vy_plus_db: variance_to_db(cv.vy_plus, 1.0),
        duan_value: duan.value_corr,
        entangled: duan.value_corr < 2.0,
        oracle: None,
    };
    if !(row.vx_minus_db.is_finite() && row.vy_plus_db.is_finite()) {
        return Err(Error::Physicality {
            invariant: "finite dB values",
            detail: format!("at detuning {d} Hz"),
        });
    }
    Ok(row)
}

fn run(
    cfg: &ExperimentConfig,
    kind: SweepKind,
    default: SweepConfig,
    oracle: bool,
) -> Result<SweepResult> {
    cfg.validate()?;
    let sweep = cfg.sweep_or(default);
    sweep.validate()?;
    let rows = sweep
        .grid()
        .into_par_iter()
        .map(|d| {
            let mut row = analytic_row(cfg, d)?;
            if oracle {
                // the same seed at every point, so neighbouring rows share
                // their noise realization
                let est = oracle_run(
                    &cfg.nopo,
                    &cfg.mz1,
                    &cfg.mz2,
                    Detuning::new(d)?,
                    cfg.analysis_frequency_hz,
                    &cfg.oracle.settings(),
                    cfg.oracle.seed,
                )?;
                row.oracle = Some(OracleColumns {
                    vx_minus_oracle_db: est.vx_minus_db,
                    vy_plus_oracle_db: est.vy_plus_db,
                    qnl_oracle_db: est.qnl_db,
                });
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { kind, rows })
}

/// Fringe visibility across detuning (default grid 0 to 5 MHz, 101 points).
pub fn run_visibility_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run(
        cfg,
        SweepKind::Visibility,
        SweepConfig::visibility_default(),
        false,
    )
}

/// Analytic squeezing and inseparability across detuning, with oracle
/// columns when `cfg.oracle.enabled`.
pub fn run_correlation_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run(
        cfg,
        SweepKind::Correlation,
        SweepConfig::correlation_default(),
        cfg.oracle.enabled,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn visibility_sweep_defaults() {
        let res = run_visibility_sweep(&ExperimentConfig::default()).unwrap();
        assert_eq!(res.rows.len(), 101);
        assert_eq!(res.rows[0].visibility, 1.0);
        let xs = res.detunings();
        let vs = res.column(|r| r.visibility);
        assert!(vs.windows(2).all(|w| w[1] < w[0]));
        assert_abs_diff_eq!(
            interpolate(&xs, &vs, 1.41e6).unwrap(),
            0.3701,
            epsilon = 2e-3
        );
        assert_abs_diff_eq!(
            interpolate(&xs, &vs, 3.37e6).unwrap(),
            0.0034,
            epsilon = 2e-4
        );
        let cross = first_crossing(&xs, &vs, (-1.0f64).exp()).unwrap();
        assert_abs_diff_eq!(cross, 1.414e6, epsilon = 1e4);
    }

    #[test]
    fn correlation_sweep_defaults() {
        let res = run_correlation_sweep(&ExperimentConfig::default()).unwrap();
        assert!(res
            .rows
            .windows(2)
            .all(|w| w[0].detuning_hz < w[1].detuning_hz));
        for r in &res.rows {
            assert!(r.duan_value >= 1.146419 - 1e-6, "{r:?}");
        }
        let centre = analytic_row(&ExperimentConfig::default(), 0.0).unwrap();
        assert_abs_diff_eq!(centre.duan_value, 1.146419, epsilon = 1e-6);
        assert!(centre.entangled);
        assert_abs_diff_eq!(centre.vx_minus_db, -3.107, epsilon = 1e-3);
        assert_abs_diff_eq!(centre.vy_plus_db, -1.821, epsilon = 1e-3);
        // in-band rows are flat
        for r in res
            .rows
            .iter()
            .filter(|r| (-83.2e9..=975e9).contains(&r.detuning_hz))
        {
            assert_abs_diff_eq!(r.duan_value, 1.146419, epsilon = 1e-6);
        }
        let far = analytic_row(&ExperimentConfig::default(), -83.2e9 - 500e9).unwrap();
        assert_abs_diff_eq!(far.vx_minus_db, 0.0, epsilon = 1e-12);
        assert!(!far.entangled);
        assert!(res.rows.iter().any(|r| !r.entangled));
    }

    #[test]
    fn excess_phase_noise_sweep_row() {
        let mut cfg = ExperimentConfig::default();
        cfg.nopo.excess_phase_noise = 0.051;
        let r = analytic_row(&cfg, 0.0).unwrap();
        assert_abs_diff_eq!(r.vy_plus_db, -1.497, epsilon = 1e-3);
        assert_abs_diff_eq!(r.duan_value, 1.197419, epsilon = 1e-5);
    }

    #[test]
    fn interpolation_helpers() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 0.0, -1.0];
        assert_eq!(interpolate(&xs, &ys, 0.5), Some(0.5));
        assert_eq!(interpolate(&xs, &ys, 2.0), Some(-1.0));
        assert_eq!(interpolate(&xs, &ys, 2.5), None);
        assert_eq!(first_crossing(&xs, &ys, 0.5), Some(0.5));
        assert_eq!(first_crossing(&xs, &ys, 5.0), None);
    }
}
