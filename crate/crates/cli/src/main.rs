use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use twinbeam::pipeline::{
    emit_outputs, load_config, run_coexistence_report, run_correlation_sweep, run_oracle_check,
    run_qnl_calibration, run_visibility_sweep, Artifact, ExperimentConfig, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "twinbeam",
    version,
    about = "Twin-beam quantum correlation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fringe visibility against detuning.
    VisibilitySweep(Common),
    /// Squeezing and inseparability against detuning.
    CorrelationSweep(Common),
    /// Detuning regions with and without classical coherence and entanglement.
    CoexistenceReport(Common),
    /// Time-domain oracle against the analytic model at one detuning.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Detuning ν1 − ν2 in Hz.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        detuning: f64,
    },
    /// Vacuum-channel spectrum for coherent input beams.
    QnlCalibrate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Oracle seed (overrides `oracle.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Enable the oracle columns in sweeps.
    #[arg(long)]
    oracle: bool,
    /// Number of sweep points (overrides `sweep.points`).
    #[arg(long)]
    points: Option<usize>,
}

impl Common {
    fn resolve(&self, default_sweep: Option<SweepConfig>) -> twinbeam::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output.directory = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.oracle.seed = seed;
        }
        if self.oracle {
            cfg.oracle.enabled = true;
        }
        if let Some(default) = default_sweep {
            let mut sweep = cfg.sweep.take().unwrap_or(default);
            if let Some(points) = self.points {
                sweep.points = points;
            }
            cfg.sweep = Some(sweep);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> twinbeam::Result<serde_json::Value> {
    let (cfg, files, summary) = match &cli.command {
        Command::VisibilitySweep(c) => {
            let cfg = c.resolve(Some(SweepConfig::visibility_default()))?;
            let res = run_visibility_sweep(&cfg)?;
            let files = emit_outputs(&Artifact::Sweep(&res), &cfg)?;
            (cfg, files, json!({ "rows": res.rows.len() }))
        }
        Command::CorrelationSweep(c) => {
            let cfg = c.resolve(Some(SweepConfig::correlation_default()))?;
            let res = run_correlation_sweep(&cfg)?;
            let files = emit_outputs(&Artifact::Sweep(&res), &cfg)?;
            let min_duan = res
                .rows
                .iter()
                .map(|r| r.duan_value)
                .fold(f64::INFINITY, f64::min);
            let entangled = res.rows.iter().filter(|r| r.entangled).count();
            (
                cfg,
                files,
                json!({ "rows": res.rows.len(), "entangled_rows": entangled, "min_duan_value": min_duan }),
            )
        }
        Command::CoexistenceReport(c) => {
            let cfg = c.resolve(None)?;
            let rep = run_coexistence_report(&cfg)?;
            let files = emit_outputs(&Artifact::Report(&rep), &cfg)?;
            let summary =
                serde_json::to_value(&rep).map_err(|e| twinbeam::Error::Config(e.to_string()))?;
            (cfg, files, summary)
        }
        Command::OracleCheck { common, detuning } => {
            let cfg = common.resolve(None)?;
            let chk = run_oracle_check(&cfg, *detuning)?;
            let files = emit_outputs(&Artifact::OracleCheck(&chk), &cfg)?;
            let rows: Vec<_> = chk
                .rows
                .iter()
                .map(|(q, a, o)| json!({ "quantity": q, "analytic_db": a, "oracle_db": o }))
                .collect();
            (cfg, files, json!({ "seed": chk.seed, "rows": rows }))
        }
        Command::QnlCalibrate(c) => {
            let cfg = c.resolve(None)?;
            let spec = run_qnl_calibration(&cfg)?;
            let files = emit_outputs(&Artifact::QnlSpectrum(&spec), &cfg)?;
            let nyq = 0.5 * cfg.oracle.sample_rate_hz;
            let mean = spec.band_mean(0.5 * nyq, nyq).unwrap_or(f64::NAN);
            (
                cfg,
                files,
                json!({ "qnl_db": 10.0 * mean.log10(), "rbw_hz": spec.rbw, "n_averages": spec.n_averages }),
            )
        }
    };
    let files: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    Ok(json!({ "seed": cfg.oracle.seed, "files": files, "summary": summary }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            println!("{out:#}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string(), "kind": e.kind() }));
            ExitCode::FAILURE
        }
    }
}
