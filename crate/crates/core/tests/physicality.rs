//! Random states through random chains of loss and beamsplitters stay
//! physical.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use twinbeam::quadrature::{apply_loss, beamsplitter, random_physical_state, TwoModeCovariance};

#[derive(Debug, Clone)]
enum Op {
    Loss(f64, f64),
    Splitter(f64, f64),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(a, b)| Op::Loss(a, b)),
        (0.0..=1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, p)| Op::Splitter(r, p)),
    ]
}

/// Symplectic eigenvalues from the spectrum of `i Ω V`, independent of the
/// library's closed form.
fn nu_min(m: &Matrix4<f64>) -> f64 {
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut omega = Matrix4::zeros();
    omega.fixed_view_mut::<2, 2>(0, 0).copy_from(&j);
    omega.fixed_view_mut::<2, 2>(2, 2).copy_from(&j);
    (omega * m)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .fold(f64::INFINITY, f64::min)
}

fn check(cm: &TwoModeCovariance) -> Result<(), TestCaseError> {
    let m = cm.entries();
    let asym = (m - m.transpose()).amax();
    prop_assert!(asym <= 1e-12 * m.amax().max(1.0), "asymmetry {asym}");
    let min_eig = SymmetricEigen::new(*m).eigenvalues.min();
    prop_assert!(min_eig >= -1e-10, "eigenvalue {min_eig}");
    let nu = nu_min(m);
    prop_assert!(nu >= 1.0 - 1e-9 * m.amax().max(1.0), "ν_min {nu}");
    let (lib_min, _) = cm.symplectic_eigenvalues();
    prop_assert!(
        (lib_min - nu).abs() <= 1e-7 * m.amax().max(1.0),
        "{lib_min} vs {nu}"
    );
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn composed_operations_preserve_physicality(
        seed in any::<u64>(),
        ops in prop::collection::vec(op(), 1..8),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut cm = random_physical_state(&mut rng, 1.2, 3.0, 2e6);
        check(&cm)?;
        for op in &ops {
            cm = match *op {
                Op::Loss(a, b) => apply_loss(&cm, a, b),
                Op::Splitter(r, p) => beamsplitter(&cm, r, p),
            }
            .expect("operation on a physical state");
            check(&cm)?;
        }
    }
}
