//! Two-mode Gaussian sideband states.
//!
//! A state is described by the 4×4 covariance matrix of the quadrature
//! fluctuations in basis order `(X1, Y1, X2, Y2)`, normalized so that a
//! vacuum or coherent mode has variance 1 in each quadrature. All
//! operations are pure and return new values.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};

/// Maximum allowed `|m_ij - m_ji|`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Minimum allowed eigenvalue is `-PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;
/// Symplectic eigenvalues must be at least `1 - PHYSICALITY_TOL`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

const X1: usize = 0;
const Y1: usize = 1;
const X2: usize = 2;
const Y2: usize = 3;

/// Covariance matrix of a two-mode Gaussian state at one sideband frequency.
///
/// Construction validates symmetry, positive semidefiniteness and the
/// Heisenberg bound on both symplectic eigenvalues, so every value of this
/// type describes a physical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    entries: Matrix4<f64>,
    analysis_frequency: f64,
}

impl TwoModeCovariance {
    pub fn new(entries: Matrix4<f64>, analysis_frequency: f64) -> Result<Self> {
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::Physicality {
                invariant: "finite",
                detail: "matrix contains non-finite entries".into(),
            });
        }
        let asym = (entries - entries.transpose()).abs().max();
        if asym > SYMMETRY_TOL {
            return Err(Error::Physicality {
                invariant: "symmetric",
                detail: format!("max |m_ij - m_ji| = {asym:e} exceeds {SYMMETRY_TOL:e}"),
            });
        }
        let min_eig = SymmetricEigen::new(entries).eigenvalues.min();
        if min_eig < -PSD_TOL {
            return Err(Error::Physicality {
                invariant: "positive semidefinite",
                detail: format!("minimum eigenvalue {min_eig:e} below -{PSD_TOL:e}"),
            });
        }
        let (nu1, nu2) = symplectic_pair(&entries);
        if nu1 < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Physicality {
                invariant: "uncertainty principle",
                detail: format!("symplectic eigenvalues ({nu1:.9}, {nu2:.9}); both must be >= 1"),
            });
        }
        Ok(Self {
            entries,
            analysis_frequency,
        })
    }

    /// Two uncorrelated vacua (the identity matrix).
    pub fn vacuum(analysis_frequency: f64) -> Self {
        Self {
            entries: Matrix4::identity(),
            analysis_frequency,
        }
    }

    /// Beam-symmetric state with no X-Y cross-correlation that reproduces
    /// the given combined variances exactly.
    pub fn from_combined(cv: &CombinedVariances, analysis_frequency: f64) -> Result<Self> {
        build_covariance(
            cv.vx_plus,
            cv.vx_minus,
            cv.vy_plus,
            cv.vy_minus,
            analysis_frequency,
        )
    }

    pub fn entries(&self) -> &Matrix4<f64> {
        &self.entries
    }

    /// Sideband frequency (Hz) this matrix describes.
    pub fn analysis_frequency(&self) -> f64 {
        self.analysis_frequency
    }

    pub fn with_analysis_frequency(mut self, f: f64) -> Self {
        self.analysis_frequency = f;
        self
    }

    /// Apply `S V Sᵀ` and re-validate.
    pub fn transform(&self, s: &Matrix4<f64>) -> Result<Self> {
        let out = s * self.entries * s.transpose();
        Self::new(symmetrize(out), self.analysis_frequency)
    }

    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        symplectic_pair(&self.entries)
    }

    pub fn combined_variances(&self) -> CombinedVariances {
        combined_variances(self)
    }
}

/// Sum and difference quadrature variances `½⟨(δA1 ± δA2)²⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedVariances {
    pub vx_plus: f64,
    pub vx_minus: f64,
    pub vy_plus: f64,
    pub vy_minus: f64,
}

impl CombinedVariances {
    pub fn new(vx_plus: f64, vx_minus: f64, vy_plus: f64, vy_minus: f64) -> Result<Self> {
        let cv = Self {
            vx_plus,
            vx_minus,
            vy_plus,
            vy_minus,
        };
        cv.validate()?;
        Ok(cv)
    }

    /// Complete a squeezed pair `(vx_minus, vy_plus)` with minimum-uncertainty
    /// partners `vx_plus = 1/vy_plus`, `vy_minus = 1/vx_minus`.
    pub fn minimum_uncertainty(vx_minus: f64, vy_plus: f64) -> Result<Self> {
        if !(vx_minus > 0.0 && vy_plus > 0.0) {
            return Err(Error::Physicality {
                invariant: "positive variances",
                detail: format!("vx_minus = {vx_minus}, vy_plus = {vy_plus}"),
            });
        }
        Self::new(1.0 / vy_plus, vx_minus, vy_plus, 1.0 / vx_minus)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.vx_plus, self.vx_minus, self.vy_plus, self.vy_minus];
        if !vals.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::Physicality {
                invariant: "positive variances",
                detail: format!("{vals:?}"),
            });
        }
        let plus = self.vx_plus * self.vy_plus;
        let minus = self.vx_minus * self.vy_minus;
        if plus < 1.0 - PHYSICALITY_TOL || minus < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Physicality {
                invariant: "uncertainty principle",
                detail: format!(
                    "vx_plus*vy_plus = {plus:.9}, vx_minus*vy_minus = {minus:.9}; both must be >= 1"
                ),
            });
        }
        Ok(())
    }
}

pub fn combined_variances(cm: &TwoModeCovariance) -> CombinedVariances {
    let m = &cm.entries;
    let comb =
        |a: usize, b: usize, sign: f64| 0.5 * (m[(a, a)] + m[(b, b)] + sign * 2.0 * m[(a, b)]);
    CombinedVariances {
        vx_plus: comb(X1, X2, 1.0),
        vx_minus: comb(X1, X2, -1.0),
        vy_plus: comb(Y1, Y2, 1.0),
        vy_minus: comb(Y1, Y2, -1.0),
    }
}

/// Inverse of [`combined_variances`] under beam symmetry and zero X-Y
/// cross-correlation.
pub fn build_covariance(
    vx_plus: f64,
    vx_minus: f64,
    vy_plus: f64,
    vy_minus: f64,
    analysis_frequency: f64,
) -> Result<TwoModeCovariance> {
    let vals = [vx_plus, vx_minus, vy_plus, vy_minus];
    if !vals.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::Physicality {
            invariant: "positive variances",
            detail: format!("{vals:?}"),
        });
    }
    let vx = 0.5 * (vx_plus + vx_minus);
    let cx = 0.5 * (vx_plus - vx_minus);
    let vy = 0.5 * (vy_plus + vy_minus);
    let cy = 0.5 * (vy_plus - vy_minus);
    #[rustfmt::skip]
    let m = Matrix4::new(
        vx,  0.0, cx,  0.0,
        0.0, vy,  0.0, cy,
        cx,  0.0, vx,  0.0,
        0.0, cy,  0.0, vy,
    );
    TwoModeCovariance::new(m, analysis_frequency)
}

/// Outcome of the sum-of-variances inseparability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuanCriterion {
    /// `vx_minus + vy_plus`
    pub value_corr: f64,
    /// `vx_plus + vy_minus`
    pub value_anticorr: f64,
    /// Strict: a value of exactly 2 is not entangled.
    pub entangled: bool,
}

impl DuanCriterion {
    pub fn min_value(&self) -> f64 {
        self.value_corr.min(self.value_anticorr)
    }
}

pub fn duan_criterion(cv: &CombinedVariances) -> DuanCriterion {
    let value_corr = cv.vx_minus + cv.vy_plus;
    let value_anticorr = cv.vx_plus + cv.vy_minus;
    DuanCriterion {
        value_corr,
        value_anticorr,
        entangled: value_corr.min(value_anticorr) < 2.0,
    }
}

/// Pure-loss channel on each mode: `V ↦ t V + (1 - t) I` per mode block,
/// cross blocks scaled by `√(t1 t2)`.
pub fn apply_loss(cm: &TwoModeCovariance, t1: f64, t2: f64) -> Result<TwoModeCovariance> {
    check_unit_interval("t1", t1)?;
    check_unit_interval("t2", t2)?;
    let g = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        t1.sqrt(),
        t1.sqrt(),
        t2.sqrt(),
        t2.sqrt(),
    ));
    let noise = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        1.0 - t1,
        1.0 - t1,
        1.0 - t2,
        1.0 - t2,
    ));
    let out = g * cm.entries * g + noise;
    TwoModeCovariance::new(symmetrize(out), cm.analysis_frequency)
}

/// Lossless two-mode beamsplitter with reflectivity `r` and phase `phi`.
pub fn beamsplitter(cm: &TwoModeCovariance, r: f64, phi: f64) -> Result<TwoModeCovariance> {
    check_unit_interval("reflectivity", r)?;
    cm.transform(&symplectic::beamsplitter(r, phi))
}

/// Symplectic eigenvalues `(ν_min, ν_max)`; both equal 1 for a pure state.
pub fn symplectic_eigenvalues(cm: &TwoModeCovariance) -> (f64, f64) {
    symplectic_pair(&cm.entries)
}

/// Closed form for two modes via the seralian `Δ = det A + det B + 2 det C`.
///
/// Near `ν_min = ν_max` the square root of the discriminant amplifies
/// rounding error to `O(√ε)`, so there the eigenvalues are taken from the
/// spectrum of `−(V^½ Ω V^½)²` instead, which is `ν²` with multiplicity two.
fn symplectic_pair(m: &Matrix4<f64>) -> (f64, f64) {
    let a: Matrix2<f64> = m.fixed_view::<2, 2>(0, 0).into();
    let b: Matrix2<f64> = m.fixed_view::<2, 2>(2, 2).into();
    let c: Matrix2<f64> = m.fixed_view::<2, 2>(0, 2).into();
    let seralian = a.determinant() + b.determinant() + 2.0 * c.determinant();
    let det = m.determinant().max(0.0);
    let disc = (seralian * seralian - 4.0 * det).max(0.0).sqrt();
    if disc < 1e-3 * seralian.abs() {
        return symplectic_pair_eigen(m);
    }
    let big_sq = 0.5 * (seralian + disc);
    if big_sq <= 0.0 {
        return (0.0, 0.0);
    }
    // small² = det / big² avoids cancellation in (Δ - √(Δ² - 4 det)) / 2.
    let small_sq = det / big_sq;
    (small_sq.sqrt(), big_sq.sqrt())
}

fn symplectic_pair_eigen(m: &Matrix4<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(*m);
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let half = eig.eigenvectors * Matrix4::from_diagonal(&root) * eig.eigenvectors.transpose();
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut omega = Matrix4::zeros();
    omega.fixed_view_mut::<2, 2>(0, 0).copy_from(&j);
    omega.fixed_view_mut::<2, 2>(2, 2).copy_from(&j);
    let k = half * omega * half;
    let mut sq: Vec<f64> = SymmetricEigen::new(symmetrize(k.transpose() * k))
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    sq.sort_by(f64::total_cmp);
    // pairs (0, 1) and (2, 3) are the two eigenvalues, each doubled
    (
        (0.5 * (sq[0] + sq[1])).sqrt(),
        (0.5 * (sq[2] + sq[3])).sqrt(),
    )
}

fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} is outside [0, 1]")))
    }
}

/// Symplectic matrices in the `(X1, Y1, X2, Y2)` basis.
pub mod symplectic {
    use nalgebra::{Matrix2, Matrix4};

    fn rotation(angle: f64) -> Matrix2<f64> {
        let (s, c) = angle.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    fn blocks(
        tl: Matrix2<f64>,
        tr: Matrix2<f64>,
        bl: Matrix2<f64>,
        br: Matrix2<f64>,
    ) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&tl);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&tr);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&bl);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&br);
        m
    }

    /// `a1' = √τ a1 + √r e^{iφ} a2`, `a2' = -√r e^{-iφ} a1 + √τ a2`.
    pub fn beamsplitter(r: f64, phi: f64) -> Matrix4<f64> {
        let t = (1.0 - r).sqrt();
        let r = r.sqrt();
        blocks(
            Matrix2::identity() * t,
            rotation(phi) * r,
            rotation(-phi) * -r,
            Matrix2::identity() * t,
        )
    }

    /// Phase shift of one mode (0 or 1).
    pub fn phase_shift(mode: usize, angle: f64) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<2, 2>(2 * mode, 2 * mode)
            .copy_from(&rotation(angle));
        m
    }

    /// Single-mode squeezer: `X ↦ e^{-s} X`, `Y ↦ e^{s} Y`.
    pub fn squeezer(mode: usize, s: f64) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m[(2 * mode, 2 * mode)] = (-s).exp();
        m[(2 * mode + 1, 2 * mode + 1)] = s.exp();
        m
    }
}

/// Random physical state: a random symplectic (phase shifts, squeezers,
/// beamsplitters) applied to a thermal diagonal `diag(n1, n1, n2, n2)`.
pub fn random_physical_state<R: Rng + ?Sized>(
    rng: &mut R,
    max_squeeze: f64,
    max_thermal: f64,
    analysis_frequency: f64,
) -> TwoModeCovariance {
    let angle = Uniform::new(0.0, std::f64::consts::TAU).unwrap();
    let refl = Uniform::new_inclusive(0.0, 1.0).unwrap();
    let thermal = Uniform::new_inclusive(1.0, max_thermal.max(1.0)).unwrap();
    let sq = Uniform::new_inclusive(-max_squeeze, max_squeeze).unwrap();

    let n1 = thermal.sample(rng);
    let n2 = thermal.sample(rng);
    let mut m = Matrix4::from_diagonal(&nalgebra::Vector4::new(n1, n1, n2, n2));
    for _ in 0..3 {
        let s = symplectic::beamsplitter(refl.sample(rng), angle.sample(rng))
            * symplectic::squeezer(1, sq.sample(rng))
            * symplectic::squeezer(0, sq.sample(rng))
            * symplectic::phase_shift(1, angle.sample(rng))
            * symplectic::phase_shift(0, angle.sample(rng));
        m = symmetrize(s * m * s.transpose());
    }
    TwoModeCovariance::new(m, analysis_frequency)
        .expect("symplectic image of a thermal state is physical")
}
