use qcflow::C64 as C;
use qcflow::grad::GradRequest;
use qcflow::sim::{expectation, StateVector};
use qcflow::{bindings, Gate};
use qcflow_apps::qaoa::*;

fn energy(problem: &MaxCutProblem, gamma: f64, eta: f64) -> f64 {
    let (c, hc) = build_maxcut_qaoa(problem).unwrap();
    GradRequest::new(c, hc, bindings([("gamma_0", gamma), ("eta_0", eta)]))
        .value()
        .unwrap()
}

/// p = 1 QAOA energy from explicit amplitudes: uniform start, diagonal cost
/// phase, then `cos η − i sin η X` on each qubit.
fn dense_energy(n: usize, edges: &[(usize, usize)], gamma: f64, eta: f64) -> f64 {
    let uncut = |x: usize| edges.iter().filter(|&&(a, b)| (x >> a) & 1 == (x >> b) & 1).count() as f64;
    let dim = 1 << n;
    let mut v: Vec<C> = (0..dim)
        .map(|x| C::from_polar(1.0 / (dim as f64).sqrt(), -gamma * uncut(x)))
        .collect();
    for q in 0..n {
        let mut w = vec![C::new(0.0, 0.0); dim];
        for x in 0..dim {
            w[x] = v[x] * eta.cos() + C::new(0.0, -eta.sin()) * v[x ^ (1 << q)];
        }
        v = w;
    }
    (0..dim).map(|x| v[x].norm_sqr() * uncut(x)).sum()
}

#[test]
fn single_edge_at_zero_gamma_keeps_uniform_state() {
    let p = MaxCutProblem::new(2, vec![(0, 1)], 1).unwrap();
    for eta in [0.0, 0.4, 1.3] {
        assert!((energy(&p, 0.0, eta) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn triangle_landscape_matches_dense_oracle() {
    let edges = vec![(0, 1), (1, 2), (0, 2)];
    let p = MaxCutProblem::new(3, edges.clone(), 1).unwrap();
    let mut best = (f64::INFINITY, f64::INFINITY);
    for i in 0..12 {
        for j in 0..12 {
            let (g, e) = (i as f64 * 0.26, j as f64 * 0.13);
            let (a, b) = (energy(&p, g, e), dense_energy(3, &edges, g, e));
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            best = (best.0.min(a), best.1.min(b));
        }
    }
    assert!((best.0 - best.1).abs() < 1e-10);
    // The triangle's best cut leaves one edge uncut.
    assert!(best.0 >= 1.0 - 1e-12 && best.0 < 1.5);
}

#[test]
fn cost_hamiltonian_is_diagonal_in_cut_counts() {
    let edges = random_regular_graph(8, 3, 4).unwrap();
    let p = MaxCutProblem::new(8, edges, 1).unwrap();
    let hc = cost_hamiltonian(&p);
    for x in 0..256u64 {
        let s = StateVector::basis(8, x as usize).unwrap();
        assert_eq!(expectation(&s, &hc).unwrap(), p.cost(x));
        assert_eq!(p.cost(x) + p.cut_value(x) as f64, p.edges.len() as f64);
    }
}

#[test]
fn regular_graph_is_simple_connected_and_seeded() {
    let e = random_regular_graph(10, 3, 2020).unwrap();
    assert_eq!(e.len(), 15);
    let mut deg = [0; 10];
    for &(a, b) in &e {
        assert!(a < b);
        deg[a] += 1;
        deg[b] += 1;
    }
    assert!(deg.iter().all(|&d| d == 3));
    assert!(MaxCutProblem::new(10, e.clone(), 1).is_ok());
    assert_eq!(random_regular_graph(10, 3, 2020).unwrap(), e);
    assert!(random_regular_graph(5, 3, 1).is_err());
}

#[test]
fn brute_force_on_known_graphs() {
    // Even cycle: every edge can be cut.
    let ring: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
    assert_eq!(MaxCutProblem::new(6, ring, 1).unwrap().brute_force().unwrap().0, 6);
    // K4: best split is 2|2 cutting 4 edges.
    let k4 = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let (cut, x) = MaxCutProblem::new(4, k4.clone(), 1).unwrap().brute_force().unwrap();
    assert_eq!(cut, 4);
    assert_eq!(x.count_ones(), 2);
}

#[test]
fn invalid_problems_are_rejected() {
    assert!(MaxCutProblem::new(2, vec![(0, 1)], 0).is_err());
    assert!(MaxCutProblem::new(2, vec![(0, 0)], 1).is_err());
    assert!(MaxCutProblem::new(2, vec![(0, 1), (1, 0)], 1).is_err());
    assert!(MaxCutProblem::new(4, vec![(0, 1), (2, 3)], 1).is_err());
}

#[test]
fn circuit_layout() {
    let p = MaxCutProblem::new(3, vec![(0, 1), (1, 2)], 2).unwrap();
    let (c, hc) = build_maxcut_qaoa(&p).unwrap();
    // 3 Hadamards, then per block 2 ZZ and 3 X exponentials.
    assert_eq!(c.len(), 3 + 2 * (2 + 3));
    assert!(c.gates()[..3].iter().all(|g| g == &Gate::h(g.targets()[0])));
    let names: Vec<String> = c.symbols().iter().map(|s| s.to_string()).collect();
    assert_eq!(names, ["gamma_0", "eta_0", "gamma_1", "eta_1"]);
    assert_eq!(hc.len(), 3);
}

#[test]
fn single_edge_training_finds_the_cut() {
    let p = MaxCutProblem::new(2, vec![(0, 1)], 1).unwrap();
    let run = run_qaoa(&p, &QaoaConfig::default()).unwrap();
    assert_eq!(run.best_cut, 1);
    // ⟨H_C⟩ is the probability of the uncut strings.
    assert!(run.final_energy() < 0.01, "{}", run.final_energy());
}
