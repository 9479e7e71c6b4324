mod common;

use common::*;
use qcflow::sim::{
    apply_fused, batch_execute, batch_execute_with, expectation, fuse, sample,
    sampled_expectation_with_error, simulate, StateVector,
};
use qcflow::{bindings, Bindings, Circuit, ConcreteCircuit, Gate, Pauli, PauliString, PauliSum, Symbol, C64};
use rand::Rng;

fn concrete(c: Circuit) -> ConcreteCircuit {
    ConcreteCircuit::new(c).unwrap()
}

fn fused_unitary(c: &ConcreteCircuit) -> Dense {
    let f = fuse(c).unwrap();
    let mut u = Dense::identity(1 << c.num_qubits());
    for g in &f.gates {
        u = embed(&g.matrix, &g.targets, c.num_qubits()).mul(&u);
    }
    u
}

#[test]
fn four_by_four_gate_on_q1_q3_matches_kron_embedding() {
    let mut r = rng(1);
    let amps = random_state(5, &mut r);
    let m = random_unitary(4, &mut r);
    let mut s = StateVector::from_amplitudes(amps.clone()).unwrap();
    s.apply_matrix(&m, &[1, 3]).unwrap();
    let oracle = embed(&m, &[1, 3], 5).apply(&amps);
    let d = s
        .amplitudes()
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(d < 1e-12, "{d}");

    // Same gate with reversed targets is the qubit-swapped matrix.
    let mut t = StateVector::from_amplitudes(amps).unwrap();
    t.apply_matrix(&m.permute_qubits(&[1, 0]), &[3, 1]).unwrap();
    let d2 = t
        .amplitudes()
        .iter()
        .zip(s.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(d2 < 1e-12, "{d2}");
}

#[test]
fn kron_oracle_for_adjacent_pair() {
    // For targets (0, 1) of 3 qubits the embedding is I ⊗ m.
    let mut r = rng(2);
    let m = random_unitary(4, &mut r);
    let k = qcflow::Matrix::identity(2).kron(&m);
    assert!(embed(&m, &[0, 1], 3).max_diff(&Dense::from_matrix(&k)) < 1e-15);
}

#[test]
fn x_and_cz_basics() {
    let mut s = StateVector::zero(1).unwrap();
    s.apply_matrix(&qcflow::linalg::named::x(), &[0]).unwrap();
    assert_eq!(s.amplitudes()[1], C64::new(1.0, 0.0));

    let mut s = StateVector::basis(2, 3).unwrap();
    s.apply_matrix(&qcflow::linalg::named::cz(), &[0, 1]).unwrap();
    assert_eq!(s.amplitudes()[3], C64::new(-1.0, 0.0));
}

#[test]
fn bell_state_and_empty_circuit() {
    let bell = concrete(Circuit::new(2).with(Gate::h(0)).with(Gate::cnot(0, 1)));
    for fused in [false, true] {
        let s = simulate(&bell, fused).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = [h, 0.0, 0.0, h];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a - C64::new(w, 0.0)).norm() < 1e-12);
        }
        let zz = PauliSum::from_terms([PauliString::new(1.0, [(0, Pauli::Z), (1, Pauli::Z)])]);
        assert!((expectation(&s, &zz).unwrap() - 1.0).abs() < 1e-12);
    }
    let s = simulate(&concrete(Circuit::new(3)), true).unwrap();
    assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
    assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
}

#[test]
fn plus_state_z_expectation_is_zero() {
    let s = simulate(&concrete(Circuit::new(1).with(Gate::h(0))), false).unwrap();
    assert!(expectation(&s, &PauliSum::single(1.0, 0, Pauli::Z)).unwrap().abs() < 1e-12);
}

#[test]
fn fused_and_unfused_states_agree() {
    let mut r = rng(4);
    for _ in 0..20 {
        let c = concrete(random_concrete(6, 20, &mut r));
        let a = simulate(&c, false).unwrap();
        let b = simulate(&c, true).unwrap();
        let d = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-9, "{d}");
    }
}

#[test]
fn fusion_preserves_unitary_on_random_circuits() {
    let mut r = rng(6);
    for n in 1..=6 {
        for _ in 0..15 {
            let depth = r.gen_range(0..=30);
            let c = concrete(random_concrete(n, depth, &mut r));
            let f = fuse(&c).unwrap();
            assert!(f.len() <= c.len());
            for g in &f.gates {
                assert!(g.matrix.is_unitary(1e-9));
            }
            let d = fused_unitary(&c).max_diff(&circuit_unitary(c.circuit(), &Bindings::new()));
            assert!(d < 1e-9, "n={n} depth={depth} diff={d}");
        }
    }
}

#[test]
fn single_row_of_one_qubit_gates_fuses_to_product() {
    let c = concrete(
        Circuit::new(1)
            .with(Gate::h(0))
            .with(Gate::t(0))
            .with(Gate::rx(0, 0.4))
            .with(Gate::s(0)),
    );
    let f = fuse(&c).unwrap();
    assert_eq!(f.len(), 1);
    assert_eq!(f.gates[0].targets, vec![0]);
    assert!(fused_unitary(&c).max_diff(&circuit_unitary(c.circuit(), &Bindings::new())) < 1e-12);
}

#[test]
fn three_qubit_pattern_fuses_to_two_qubit_blocks() {
    // One-qubit layers interleaved with CZs on (0,1) and (1,2).
    let mut c = Circuit::new(3);
    for q in 0..3 {
        c.push(Gate::h(q)).unwrap();
    }
    c.push(Gate::cz(0, 1)).unwrap();
    c.push(Gate::t(2)).unwrap();
    c.push(Gate::rx(0, 0.3)).unwrap();
    c.push(Gate::cz(1, 2)).unwrap();
    c.push(Gate::ry(1, 0.7)).unwrap();
    c.push(Gate::cz(0, 1)).unwrap();
    c.push(Gate::rz(2, 1.1)).unwrap();
    c.push(Gate::h(0)).unwrap();
    c.push(Gate::s(1)).unwrap();
    let c = concrete(c);
    let f = fuse(&c).unwrap();
    assert!(f.gates.iter().all(|g| g.targets.len() == 2), "{:?}", f.gates.iter().map(|g| &g.targets).collect::<Vec<_>>());
    assert!(f.len() < c.len());
    let d = fused_unitary(&c).max_diff(&circuit_unitary(c.circuit(), &Bindings::new()));
    assert!(d < 1e-10, "{d}");
}

#[test]
fn two_cz_with_sandwiched_one_qubit_gates_is_one_block() {
    let c = concrete(
        Circuit::new(2)
            .with(Gate::cz(0, 1))
            .with(Gate::h(0))
            .with(Gate::rx(1, 0.2))
            .with(Gate::cz(0, 1)),
    );
    let f = fuse(&c).unwrap();
    assert_eq!(f.len(), 1);
    assert_eq!(f.gates[0].matrix.dim(), 4);
    assert!(fused_unitary(&c).max_diff(&circuit_unitary(c.circuit(), &Bindings::new())) < 1e-12);
}

#[test]
fn ladder_on_fixed_pairs_fuses_to_one_block_per_pair() {
    let n = 8;
    let mut c = Circuit::new(n);
    for layer in 0..40 {
        for p in 0..n / 2 {
            let (a, b) = (2 * p, 2 * p + 1);
            c.push(Gate::rx(a, 0.1 * layer as f64)).unwrap();
            c.push(Gate::ry(b, 0.2 * layer as f64)).unwrap();
            c.push(Gate::cz(a, b)).unwrap();
        }
    }
    let c = concrete(c);
    let f = fuse(&c).unwrap();
    assert_eq!(f.len(), n / 2);
    let a = simulate(&c, false).unwrap();
    let b = simulate(&c, true).unwrap();
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!((x - y).norm() < 1e-9);
    }
}

#[test]
fn wide_gates_are_rejected_by_fusion() {
    let gen = PauliSum::from_terms([PauliString::new(
        1.0,
        [(0, Pauli::Z), (1, Pauli::Z), (2, Pauli::Z)],
    )]);
    let c = concrete(Circuit::new(3).with(Gate::exp(&[0, 1, 2], 0.3.into(), gen).unwrap()));
    assert!(matches!(fuse(&c), Err(qcflow::Error::GateTooWide { .. })));
    // The unfused path still handles it.
    assert!(simulate(&c, false).is_ok());
}

#[test]
fn apply_fused_preserves_norm() {
    let mut r = rng(9);
    let c = concrete(random_concrete(7, 60, &mut r));
    let mut s = StateVector::zero(7).unwrap();
    for g in &fuse(&c).unwrap().gates {
        apply_fused(&mut s, g).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn norm_is_preserved_at_depth_1000() {
    let mut r = rng(10);
    let c = concrete(random_concrete(10, 1000, &mut r));
    for fused in [false, true] {
        let s = simulate(&c, fused).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn expectation_matches_dense_oracle() {
    let mut r = rng(12);
    for _ in 0..20 {
        let amps = random_state(4, &mut r);
        let h = random_pauli_sum(4, 5, &mut r);
        let s = StateVector::from_amplitudes(amps.clone()).unwrap();
        let hv = pauli_dense(&h, 4).apply(&amps);
        let oracle: C64 = amps.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
        assert!(oracle.im.abs() < 1e-12);
        assert!((expectation(&s, &h).unwrap() - oracle.re).abs() < 1e-10);
    }
}

#[test]
fn sampling_basics() {
    let zero = StateVector::zero(3).unwrap();
    assert!(sample(&zero, 100, 1).unwrap().bitstrings.iter().all(|&b| b == 0));

    let plus = simulate(&concrete(Circuit::new(1).with(Gate::h(0))), false).unwrap();
    let b = sample(&plus, 100_000, 2).unwrap();
    let p1 = b.bitstrings.iter().filter(|&&x| x == 1).count() as f64 / 1e5;
    assert!((p1 - 0.5).abs() < 0.01, "{p1}");

    let bell = simulate(
        &concrete(Circuit::new(2).with(Gate::h(0)).with(Gate::cnot(0, 1))),
        false,
    )
    .unwrap();
    let b = sample(&bell, 100_000, 3).unwrap();
    assert!(b.bitstrings.iter().all(|&x| x == 0 || x == 3));
    assert_eq!(b.bits(0).len(), 2);
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let mut r = rng(13);
    let s = simulate(&concrete(random_concrete(5, 30, &mut r)), false).unwrap();
    assert_eq!(sample(&s, 500, 77).unwrap(), sample(&s, 500, 77).unwrap());
    assert_ne!(sample(&s, 500, 77).unwrap(), sample(&s, 500, 78).unwrap());
}

#[test]
fn deterministic_sampled_expectations() {
    let bell = concrete(Circuit::new(2).with(Gate::h(0)).with(Gate::cnot(0, 1)));
    let zz = PauliSum::from_terms([PauliString::new(1.0, [(0, Pauli::Z), (1, Pauli::Z)])]);
    assert_eq!(sampled_expectation_with_error(&bell, &zz, 10_000, 1).unwrap().value, 1.0);

    let plus = concrete(Circuit::new(1).with(Gate::h(0)));
    let x = PauliSum::single(1.0, 0, Pauli::X);
    assert_eq!(sampled_expectation_with_error(&plus, &x, 10_000, 1).unwrap().value, 1.0);

    // Y eigenstate: S·H|0⟩ = |+i⟩.
    let plus_i = concrete(Circuit::new(1).with(Gate::h(0)).with(Gate::s(0)));
    let y = PauliSum::single(1.0, 0, Pauli::Y);
    assert_eq!(sampled_expectation_with_error(&plus_i, &y, 1000, 1).unwrap().value, 1.0);
}

#[test]
fn sampled_expectation_within_five_sigma() {
    let mut r = rng(14);
    let c = concrete(random_concrete(3, 15, &mut r));
    let h = random_pauli_sum(3, 4, &mut r);
    let exact = expectation(&simulate(&c, false).unwrap(), &h).unwrap();
    for seed in 0..100 {
        let e = sampled_expectation_with_error(&c, &h, 2000, seed).unwrap();
        assert!(e.std_err > 0.0);
        assert!(
            (e.value - exact).abs() < 5.0 * e.std_err,
            "seed {seed}: {} vs {exact} (σ̂ {})",
            e.value,
            e.std_err
        );
    }
}

fn xpow_batch() -> (Vec<Circuit>, Vec<Symbol>) {
    let c = Circuit::new(1).with(Gate::xpow(0, "t"));
    (vec![c.clone(), c.clone(), c], vec![Symbol::from("t")])
}

#[test]
fn batch_of_xpow_circuits() {
    let (cs, syms) = xpow_batch();
    let z = PauliSum::single(1.0, 0, Pauli::Z);
    let out = batch_execute(&cs, &syms, &[vec![0.0], vec![1.0], vec![2.0]], std::slice::from_ref(&z)).unwrap();
    for (row, want) in out.iter().zip([1.0, -1.0, 1.0]) {
        assert!((row[0] - want).abs() < 1e-12);
    }
    assert!(batch_execute(&[], &syms, &[], &[z]).unwrap().is_empty());
}

#[test]
fn batch_rejects_ragged_rows() {
    let (cs, syms) = xpow_batch();
    let z = PauliSum::single(1.0, 0, Pauli::Z);
    assert!(batch_execute(&cs, &syms, &[vec![0.0], vec![], vec![2.0]], std::slice::from_ref(&z)).is_err());
    assert!(batch_execute(&cs, &syms, &[vec![0.0]], &[z]).is_err());
}

#[test]
fn batch_rows_match_single_circuit_path_and_permute() {
    let mut r = rng(15);
    let n = 10;
    let mut cs = Vec::new();
    let mut rows = Vec::new();
    let syms = vec![Symbol::from("s0"), Symbol::from("s1"), Symbol::from("s2")];
    for _ in 0..50 {
        let (c, b) = random_parameterized(n, 30, 3, &mut r);
        rows.push(syms.iter().map(|s| b.get(s).copied().unwrap_or(0.0)).collect::<Vec<_>>());
        cs.push(c);
    }
    let obs = vec![
        random_pauli_sum(n, 3, &mut r),
        PauliSum::single(1.0, 4, Pauli::Z),
    ];
    let out = batch_execute(&cs, &syms, &rows, &obs).unwrap();
    for (i, c) in cs.iter().enumerate() {
        let b: Bindings = syms.iter().cloned().zip(rows[i].iter().copied()).collect();
        let s = simulate(&c.resolve(&b).unwrap(), false).unwrap();
        for (k, o) in obs.iter().enumerate() {
            assert_eq!(out[i][k], expectation(&s, o).unwrap());
        }
    }

    let perm: Vec<usize> = (0..50).rev().collect();
    let pc: Vec<Circuit> = perm.iter().map(|&i| cs[i].clone()).collect();
    let pr: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
    let pout = batch_execute(&pc, &syms, &pr, &obs).unwrap();
    for (j, &i) in perm.iter().enumerate() {
        assert_eq!(pout[j], out[i]);
    }
}

#[test]
fn sampled_batch_is_reproducible() {
    let (cs, syms) = xpow_batch();
    let x = PauliSum::single(1.0, 0, Pauli::X);
    let vals = [vec![0.3], vec![0.5], vec![0.7]];
    let a = batch_execute_with(&cs, &syms, &vals, std::slice::from_ref(&x), Some((200, 4))).unwrap();
    let b = batch_execute_with(&cs, &syms, &vals, &[x], Some((200, 4))).unwrap();
    assert_eq!(a, b);
}

#[test]
fn qubit_cap_is_enforced() {
    assert!(matches!(
        StateVector::zero(qcflow::sim::max_qubits() + 1),
        Err(qcflow::Error::QubitLimit { .. })
    ));
}

#[test]
fn unbound_circuit_is_not_concrete() {
    assert!(ConcreteCircuit::new(Circuit::new(1).with(Gate::rx(0, "a"))).is_err());
    let c = Circuit::new(1).with(Gate::rx(0, "a"));
    assert!(c.resolve(&bindings([("a", 0.0)])).is_ok());
}
