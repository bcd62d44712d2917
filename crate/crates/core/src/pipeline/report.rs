//! Detuning regions where classical coherence and entanglement coexist,
//! where only entanglement survives, and where neither does.

use serde::Serialize;

use crate::coherence::{imbalance_factor, VANISH_VISIBILITY};
use crate::error::Result;

use super::config::ExperimentConfig;

/// Detuning beyond which the phase-matching data were not taken.
pub const MEASURED_EXTENT_HZ: f64 = 860e9;

/// Open interval of detuning. Unbounded sides are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower_hz: f64,
    pub upper_hz: f64,
}

impl Interval {
    pub fn new(lower_hz: f64, upper_hz: f64) -> Option<Self> {
        (lower_hz < upper_hz).then_some(Self { lower_hz, upper_hz })
    }

    pub fn contains(&self, d: f64) -> bool {
        self.lower_hz < d && d < self.upper_hz
    }

    /// Whether `[a, b]` lies inside the closure of the interval.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        self.lower_hz <= a && b <= self.upper_hz
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(
            self.lower_hz.max(other.lower_hz),
            self.upper_hz.min(other.upper_hz),
        )
    }
}

/// `a \ b` for open intervals, as up to two open pieces. The boundary points
/// of `b` are dropped, which only matters on a set of measure zero.
fn difference(a: &Interval, b: &Interval) -> Vec<Interval> {
    [
        Interval::new(a.lower_hz, a.upper_hz.min(b.lower_hz)),
        Interval::new(a.lower_hz.max(b.upper_hz), a.upper_hz),
    ]
    .into_iter()
    .flatten()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoexistenceReport {
    pub analysis_frequency_hz: f64,
    /// |d| below which fringes have visibility above the vanish level.
    pub coherence_threshold_hz: f64,
    pub vanish_visibility: f64,
    pub entanglement_window: Option<Interval>,
    pub phasematch_band: Interval,
    pub measured_extent_hz: f64,
    /// Classical coherence and entanglement.
    pub region_a: Vec<Interval>,
    /// Entanglement without classical coherence.
    pub region_b: Vec<Interval>,
    /// Neither.
    pub region_c: Vec<Interval>,
    /// Classical coherence without entanglement.
    pub classical_only: Vec<Interval>,
}

impl CoexistenceReport {
    pub fn in_region_b(&self, d: f64) -> bool {
        self.region_b.iter().any(|i| i.contains(d))
    }

    /// The region B piece on the positive-detuning side, if any.
    pub fn region_b_upper(&self) -> Option<Interval> {
        self.region_b
            .iter()
            .copied()
            .find(|i| i.upper_hz > 0.0 && i.lower_hz >= 0.0)
    }
}

/// |d| at which the visibility `k·exp(−d²/2Δν²)` falls to the vanish level.
pub fn coherence_threshold(linewidth_hz: f64, imbalance: f64) -> f64 {
    if imbalance <= VANISH_VISIBILITY {
        0.0
    } else {
        linewidth_hz * (2.0 * (imbalance / VANISH_VISIBILITY).ln()).sqrt()
    }
}

pub fn run_coexistence_report(cfg: &ExperimentConfig) -> Result<CoexistenceReport> {
    cfg.validate()?;
    let f = cfg.analysis_frequency_hz;
    let c = &cfg.coherence;
    let k = imbalance_factor(c.intensity1, c.intensity2);
    let t = coherence_threshold(c.linewidth_hz, if k.is_finite() { k } else { 0.0 });
    let coherent = Interval::new(-t, t);
    let window = cfg
        .nopo
        .entanglement_window(f)?
        .and_then(|(lo, hi)| Interval::new(lo, hi));
    let everything = Interval {
        lower_hz: f64::NEG_INFINITY,
        upper_hz: f64::INFINITY,
    };

    let (region_a, region_b, region_c, classical_only) = match (&window, &coherent) {
        (Some(w), Some(coh)) => (
            w.intersect(coh).into_iter().collect(),
            difference(w, coh),
            difference(&everything, w)
                .iter()
                .flat_map(|piece| difference(piece, coh))
                .collect(),
            difference(coh, w),
        ),
        (Some(w), None) => (vec![], vec![*w], difference(&everything, w), vec![]),
        (None, Some(coh)) => (vec![], vec![], difference(&everything, coh), vec![*coh]),
        (None, None) => (vec![], vec![], vec![everything], vec![]),
    };

    Ok(CoexistenceReport {
        analysis_frequency_hz: f,
        coherence_threshold_hz: t,
        vanish_visibility: VANISH_VISIBILITY,
        entanglement_window: window,
        phasematch_band: Interval {
            lower_hz: cfg.nopo.band_low_hz,
            upper_hz: cfg.nopo.band_high_hz,
        },
        measured_extent_hz: MEASURED_EXTENT_HZ,
        region_a,
        region_b,
        region_c,
        classical_only,
    })
}
