//! File emission. Everything is formatted with the shortest round-trip
//! float representation and contains no timestamps, so identical inputs
//! give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::SpectrumEstimate;

use super::config::{ExperimentConfig, OutputFormat};
use super::report::CoexistenceReport;
use super::sweep::{SweepKind, SweepResult};

/// Analytic and oracle values side by side at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub detuning_hz: f64,
    pub seed: u64,
    pub n_samples: usize,
    /// (quantity, analytic dB, oracle dB)
    pub rows: Vec<(String, f64, f64)>,
}

pub enum Artifact<'a> {
    Sweep(&'a SweepResult),
    Report(&'a CoexistenceReport),
    OracleCheck(&'a OracleCheck),
    QnlSpectrum(&'a SpectrumEstimate),
}

impl Artifact<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Artifact::Sweep(s) if s.kind == SweepKind::Visibility => "visibility_sweep",
            Artifact::Sweep(_) => "correlation_sweep",
            Artifact::Report(_) => "coexistence_report",
            Artifact::OracleCheck(_) => "oracle_check",
            Artifact::QnlSpectrum(_) => "qnl_calibration",
        }
    }

    fn table(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let s = |x: f64| x.to_string();
        match self {
            Artifact::Sweep(res) if res.kind == SweepKind::Visibility => (
                vec!["detuning_hz", "visibility"],
                res.rows
                    .iter()
                    .map(|r| vec![s(r.detuning_hz), s(r.visibility)])
                    .collect(),
            ),
            Artifact::Sweep(res) => {
                let oracle = res.rows.iter().any(|r| r.oracle.is_some());
                let mut header = vec![
                    "detuning_hz",
                    "vx_minus_db",
                    "vy_plus_db",
                    "duan_value",
                    "entangled",
                ];
                if oracle {
                    header.extend(["vx_minus_oracle_db", "vy_plus_oracle_db", "qnl_oracle_db"]);
                }
                let rows = res
                    .rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![
                            s(r.detuning_hz),
                            s(r.vx_minus_db),
                            s(r.vy_plus_db),
                            s(r.duan_value),
                            r.entangled.to_string(),
                        ];
                        if let Some(o) = r.oracle {
                            row.extend(
                                [o.vx_minus_oracle_db, o.vy_plus_oracle_db, o.qnl_oracle_db].map(s),
                            );
                        }
                        row
                    })
                    .collect();
                (header, rows)
            }
            Artifact::Report(rep) => {
                let mut rows = Vec::new();
                for (region, list) in [
                    ("A", &rep.region_a),
                    ("B", &rep.region_b),
                    ("C", &rep.region_c),
                    ("classical_only", &rep.classical_only),
                ] {
                    for i in list {
                        rows.push(vec![region.to_string(), s(i.lower_hz), s(i.upper_hz)]);
                    }
                }
                (vec!["region", "lower_hz", "upper_hz"], rows)
            }
            Artifact::OracleCheck(chk) => (
                vec!["quantity", "analytic_db", "oracle_db", "difference_db"],
                chk.rows
                    .iter()
                    .map(|(q, a, o)| vec![q.clone(), s(*a), s(*o), s(o - a)])
                    .collect(),
            ),
            Artifact::QnlSpectrum(spec) => (
                vec!["freq_hz", "variance", "variance_db"],
                spec.bins()
                    .map(|(f, v)| vec![s(f), s(v), s(10.0 * v.log10())])
                    .collect(),
            ),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn gnuplot_text(name: &str, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("# {name}\n# {}\n", header.join(" "));
    for r in rows {
        out.push_str(&r.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    files: Vec<String>,
    config: &'a ExperimentConfig,
}

/// Write the artifact's data file(s) and `<name>.manifest.toml` into the
/// configured output directory. Returns the paths written.
pub fn emit_outputs(artifact: &Artifact<'_>, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = artifact.name();
    let (header, rows) = artifact.table();

    let mut written = Vec::new();
    let csv_path = dir.join(format!("{name}.csv"));
    write(&csv_path, &csv_text(&header, &rows)?)?;
    written.push(csv_path);
    if cfg.output.format == OutputFormat::Gnuplot {
        let dat = dir.join(format!("{name}.dat"));
        write(&dat, &gnuplot_text(name, &header, &rows))?;
        written.push(dat);
    }

    let manifest = Manifest {
        command: name,
        seed: cfg.oracle.seed,
        files: written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        config: cfg,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    let manifest_path = dir.join(format!("{name}.manifest.toml"));
    write(&manifest_path, &text)?;
    written.push(manifest_path);
    Ok(written)
}
