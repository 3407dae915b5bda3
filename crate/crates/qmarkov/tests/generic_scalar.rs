//! The numerical core is generic over the complex scalar; exercise the
//! single-precision instantiation end to end at f32-sized tolerances.

use ndarray_linalg::Scalar;
use qmarkov::channel::{DensityState, KrausChannel};
use qmarkov::corpus;
use qmarkov::kms::{verify_adjoint_relation, ModularPair};
use qmarkov::{Tolerances, C32};

fn loose() -> Tolerances {
    Tolerances {
        density: 1e-5,
        unitality: 1e-4,
        peripheral: 1e-3,
        eig_residual: 1e-3,
        algebra: 1e-3,
        subspace: 1e-4,
        invariance: 1e-4,
        decay: 1e-3,
        ..Tolerances::default()
    }
}

#[test]
fn single_precision_channel_spectrum() {
    let ch = corpus::two_cycle_channel::<C32>();
    let spec = ch.spectrum(1e-3).unwrap();
    let mut periph = spec.peripheral_eigenvalues();
    periph.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    assert_eq!(periph.len(), 2);
    assert!((periph[0] + C32::new(1.0, 0.0)).abs() < 1e-5);
    assert!((periph[1] - C32::new(1.0, 0.0)).abs() < 1e-5);
}

#[test]
fn single_precision_kms_adjoint() {
    let tol = loose();
    let mut rng = corpus::seeded_rng(5);
    let ch = corpus::random_unital_channel::<C32>(2, 2, &mut rng).unwrap();
    let st = corpus::cesaro_invariant_state(&ch).unwrap();
    if !st.faithful() {
        return;
    }
    let pair = ModularPair::new(ch, st, &tol).unwrap();
    let adj = pair.kms_adjoint().unwrap();
    assert!(verify_adjoint_relation(&pair, &adj).unwrap() < 1e-4);
}

#[test]
fn single_precision_io_types_compose() {
    let kraus = vec![qmarkov::linalg::eye::<C32>(2)];
    let ch = KrausChannel::new(kraus, 1e-5).unwrap();
    let st = DensityState::<C32>::maximally_mixed(2);
    assert!(st.invariance_residual(&ch).unwrap() < 1e-6);
}
