//! Parameter-shift gradients.
//!
//! A gate `exp(−i·a·Σ_k β_k P_k)` with commuting terms factors into
//! `Π_k exp(−i·η_k P_k)` with `η_k = a·β_k`, and for each factor
//! `∂f/∂η = f(η + π/4) − f(η − π/4)`. Shifting `η_k` is the same as inserting
//! `exp(∓i(π/4)P_k)` right after the gate. With `a = scale·(c·θ + d)`, the chain
//! rule weight of that term is `scale·c·β_k`.

use std::f64::consts::FRAC_PI_4;

use crate::circuit::{Circuit, ConcreteCircuit, GateKind};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::sim::{apply_gate, StateVector};

use super::{GradRequest, GradResult};

/// One symbol occurrence: gate `gate` depends on symbol `symbol` and its
/// shiftable terms are `(P_k, weight_k)`.
#[derive(Debug, Clone)]
pub(crate) struct Occurrence {
    pub gate: usize,
    pub symbol: usize,
    pub terms: Vec<(PauliString, f64)>,
}

impl Occurrence {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w.abs()).sum()
    }
}

pub(crate) fn occurrences(c: &Circuit) -> Result<Vec<Occurrence>> {
    let symbols = c.symbols();
    let mut out = Vec::new();
    for (j, g) in c.gates().iter().enumerate() {
        let Some(sym) = g.symbol() else { continue };
        let GateKind::Exp {
            exponent,
            scale,
            generator,
        } = g.kind()
        else {
            return Err(Error::Unsupported(format!(
                "symbol `{sym}` in a fixed-matrix gate; use finite differences"
            )));
        };
        if let Some((a, b)) = generator.first_noncommuting_pair() {
            return Err(Error::Unsupported(format!(
                "gate {j} (`{}`) has non-commuting generator terms `{}` and `{}`; use finite differences",
                g.name(),
                generator.terms()[a],
                generator.terms()[b]
            )));
        }
        let terms = generator
            .terms()
            .iter()
            .filter(|t| !t.is_identity())
            .map(|t| (t.with_coeff(1.0), scale * exponent.coeff * t.coeff))
            .filter(|(_, w)| *w != 0.0)
            .collect();
        out.push(Occurrence {
            gate: j,
            symbol: symbols.iter().position(|s| s == sym).unwrap(),
            terms,
        });
    }
    Ok(out)
}

/// Final state with the term `p` shifted by `sign·π/4` after gate `gate`.
pub(crate) fn shifted_state(
    req: &GradRequest,
    c: &ConcreteCircuit,
    gate: usize,
    p: &PauliString,
    sign: f64,
) -> Result<StateVector> {
    let mut s = req.initial()?;
    for (j, g) in c.gates().iter().enumerate() {
        apply_gate(&mut s, g)?;
        if j == gate {
            s.apply_pauli_rotation(p, sign * FRAC_PI_4)?;
        }
    }
    Ok(s)
}

/// Runs every `(occurrence, term)` shift pair, reusing the state prefix, and
/// calls `visit(occurrence_index, term_index, f_plus − f_minus)`.
fn sweep(
    req: &GradRequest,
    occ: &[Occurrence],
    mut visit: impl FnMut(usize, usize, f64),
) -> Result<usize> {
    let c = req.circuit.resolve(&req.bindings)?;
    let gates = c.gates();
    let mut evals = 0;
    let mut state = req.initial()?;
    let mut next = 0;
    for (j, g) in gates.iter().enumerate() {
        apply_gate(&mut state, g)?;
        while next < occ.len() && occ[next].gate == j {
            let o = &occ[next];
            for (k, (p, _)) in o.terms.iter().enumerate() {
                let mut f = [0.0; 2];
                for (si, sign) in [1.0, -1.0].into_iter().enumerate() {
                    let mut s = state.clone();
                    s.apply_pauli_rotation(p, sign * FRAC_PI_4)?;
                    for g in &gates[j + 1..] {
                        apply_gate(&mut s, g)?;
                    }
                    f[si] = req.measure(&s, &req.observable, &[next as u64, k as u64, si as u64])?;
                    evals += 1;
                }
                visit(next, k, f[0] - f[1]);
            }
            next += 1;
        }
    }
    Ok(evals)
}

/// Exact-rule gradient; `evaluations` is `2·Σ K` over occurrences, where `K`
/// counts the non-identity, nonzero generator terms of each occurrence.
pub fn parameter_shift_grad(req: &GradRequest) -> Result<GradResult> {
    req.check()?;
    let occ = occurrences(&req.circuit)?;
    let mut grad = vec![0.0; req.circuit.symbols().len()];
    let evals = sweep(req, &occ, |o, k, d| {
        grad[occ[o].symbol] += occ[o].terms[k].1 * d;
    })?;
    Ok(GradResult::new(grad, evals))
}

/// Parameter-shift derivative with respect to a single symbol (by index in
/// symbol order), skipping every other occurrence.
pub fn parameter_shift_component(req: &GradRequest, symbol: usize) -> Result<GradResult> {
    req.check()?;
    let n = req.circuit.symbols().len();
    if symbol >= n {
        return Err(Error::InvalidArgument(format!(
            "symbol index {symbol} out of range for {n} symbols"
        )));
    }
    let occ: Vec<Occurrence> = occurrences(&req.circuit)?
        .into_iter()
        .filter(|o| o.symbol == symbol)
        .collect();
    let mut d = 0.0;
    let evals = sweep(req, &occ, |o, k, diff| d += occ[o].terms[k].1 * diff)?;
    let mut grad = vec![0.0; n];
    grad[symbol] = d;
    Ok(GradResult::new(grad, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{bindings, Gate};
    use crate::pauli::{Pauli, PauliSum};

    #[test]
    fn z_rotation_on_plus_measured_in_x() {
        let c = Circuit::new(1)
            .with(Gate::h(0))
            .with(Gate::exp(&[0], "t".into(), PauliSum::single(1.0, 0, Pauli::Z)).unwrap());
        let req = GradRequest::new(c, PauliSum::single(1.0, 0, Pauli::X), bindings([("t", 0.3)]));
        let r = parameter_shift_grad(&req).unwrap();
        assert!((r.gradient[0] + 2.0 * 0.6f64.sin()).abs() < 1e-10);
        assert_eq!(r.evaluations, 2);
    }

    #[test]
    fn noncommuting_generator_rejected() {
        let gen = PauliSum::from_terms([
            PauliString::single(1.0, 0, Pauli::X),
            PauliString::single(1.0, 0, Pauli::Z),
        ]);
        let c = Circuit::new(1).with(Gate::exp(&[0], "t".into(), gen).unwrap());
        let req = GradRequest::new(c, PauliSum::single(1.0, 0, Pauli::Z), bindings([("t", 0.3)]));
        assert!(matches!(parameter_shift_grad(&req), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pow_gate_identity_term_costs_nothing() {
        let c = Circuit::new(1).with(Gate::xpow(0, "t"));
        let req = GradRequest::new(c, PauliSum::single(1.0, 0, Pauli::Z), bindings([("t", 0.3)]));
        let r = parameter_shift_grad(&req).unwrap();
        // ⟨Z⟩ = cos(πt)
        let want = -std::f64::consts::PI * (std::f64::consts::PI * 0.3).sin();
        assert!((r.gradient[0] - want).abs() < 1e-10);
        assert_eq!(r.evaluations, 2);
    }
}
