use qcflow::grad::{finite_difference_grad, FdScheme, GradRequest};
use qcflow::rng::StreamKey;
use qcflow::{Pauli, PauliString, PauliSum};
use qcflow_apps::barren::*;

#[test]
fn shallow_two_qubit_variance_is_positive() {
    let v = barren_plateau_scan(&[2], 1, 50, 3).unwrap();
    assert!(v[0].1 > 0.0);
}

#[test]
fn layer_structure() {
    let mut rng = StreamKey::new(1).rng();
    let (c, b) = random_layered_circuit(4, 3, &mut rng);
    // 4 initial Ry, then per layer 4 rotations and 3 CZ.
    assert_eq!(c.len(), 4 + 3 * 7);
    assert_eq!(c.symbols().len(), 12);
    assert_eq!(b.len(), 12);
    assert_eq!(c.symbols()[0].name(), "l0_q0");
}

#[test]
fn gradient_samples_match_finite_differences() {
    let key = StreamKey::new(8);
    let g = gradient_samples(3, 4, 5, key).unwrap();
    let obs: PauliSum = PauliString::new(1.0, [(0, Pauli::Z), (1, Pauli::Z)]).into();
    for (t, &gt) in g.iter().enumerate() {
        let (c, b) = random_layered_circuit(3, 4, &mut key.child(t as u64).rng());
        let fd = finite_difference_grad(&GradRequest::new(c, obs.clone(), b), FdScheme::Central, 1e-5).unwrap();
        assert!((fd.gradient[0] - gt).abs() < 1e-8);
    }
}

#[test]
fn scan_is_reproducible() {
    let a = barren_plateau_scan(&[2, 3], 5, 20, 4).unwrap();
    assert_eq!(a, barren_plateau_scan(&[2, 3], 5, 20, 4).unwrap());
}

#[test]
fn invalid_scan_arguments() {
    assert!(barren_plateau_scan(&[2], 0, 10, 1).is_err());
    assert!(barren_plateau_scan(&[2], 1, 1, 1).is_err());
    assert!(barren_plateau_scan(&[1], 1, 10, 1).is_err());
}

#[test]
fn sample_variance_oracle() {
    assert!((sample_variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-15);
}
