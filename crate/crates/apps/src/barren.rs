//! Gradient variance of randomly initialized deep circuits.

use std::f64::consts::{FRAC_PI_4, TAU};

use qcflow::grad::{parameter_shift_component, GradRequest};
use qcflow::rng::StreamKey;
use qcflow::{Bindings, Circuit, Error, Gate, ParamExpr, Pauli, PauliString, PauliSum, Result, Symbol};
use rand::Rng;

/// `Ry(π/4)` on every qubit, then `depth` layers of a random choice of
/// `Rx`/`Ry`/`Rz` per qubit (one fresh symbol each) followed by a CZ ladder.
/// Returns the circuit with random angles bound to every symbol.
pub fn random_layered_circuit(n: usize, depth: usize, rng: &mut impl Rng) -> (Circuit, Bindings) {
    let mut c = (0..n).fold(Circuit::new(n), |c, q| c.with(Gate::ry(q, FRAC_PI_4)));
    let mut b = Bindings::new();
    for layer in 0..depth {
        for q in 0..n {
            let s = Symbol::new(format!("l{layer}_q{q}"));
            let g = match rng.gen_range(0..3) {
                0 => Gate::rx(q, ParamExpr::symbol(s.clone())),
                1 => Gate::ry(q, ParamExpr::symbol(s.clone())),
                _ => Gate::rz(q, ParamExpr::symbol(s.clone())),
            };
            c.push(g).expect("qubit in range");
            b.insert(s, rng.gen_range(0.0..TAU));
        }
        for q in 0..n.saturating_sub(1) {
            c.push(Gate::cz(q, q + 1)).expect("qubit in range");
        }
    }
    (c, b)
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Parameter-shift derivatives of `⟨Z₀Z₁⟩` with respect to the first symbol
/// over `trials` random circuits.
pub fn gradient_samples(n: usize, depth: usize, trials: usize, key: StreamKey) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two qubits".into()));
    }
    let obs: PauliSum = PauliString::new(1.0, [(0, Pauli::Z), (1, Pauli::Z)]).into();
    (0..trials)
        .map(|t| {
            let mut rng = key.child(t as u64).rng();
            let (c, b) = random_layered_circuit(n, depth, &mut rng);
            let req = GradRequest::new(c, obs.clone(), b);
            Ok(parameter_shift_component(&req, 0)?.gradient[0])
        })
        .collect()
}

/// Gradient variance for each register size in `n_list`.
pub fn barren_plateau_scan(n_list: &[usize], depth: usize, trials: usize, seed: u64) -> Result<Vec<(usize, f64)>> {
    if depth == 0 || trials < 2 {
        return Err(Error::InvalidArgument("need depth ≥ 1 and at least two trials".into()));
    }
    let key = StreamKey::new(seed);
    n_list
        .iter()
        .map(|&n| {
            let g = gradient_samples(n, depth, trials, key.child(n as u64))?;
            Ok((n, sample_variance(&g)))
        })
        .collect()
}
