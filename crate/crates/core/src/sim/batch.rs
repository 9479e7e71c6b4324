use rayon::prelude::*;

use crate::circuit::{Bindings, Circuit, Symbol};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::rng::StreamKey;

use super::{expectation, sampled_expectation_state, simulate};

/// Expectation of every observable for every (circuit, parameter row) pair.
///
/// Row `b` binds `symbols[j]` to `values[b][j]` in `circuits[b]`. The result is
/// `[circuits.len()][observables.len()]`.
pub fn batch_execute(
    circuits: &[Circuit],
    symbols: &[Symbol],
    values: &[Vec<f64>],
    observables: &[PauliSum],
) -> Result<Vec<Vec<f64>>> {
    batch_execute_with(circuits, symbols, values, observables, None)
}

/// Like [`batch_execute`]; with `Some((shots, seed))` every entry is a shot
/// estimate drawn from substream `(seed, row, observable)`.
pub fn batch_execute_with(
    circuits: &[Circuit],
    symbols: &[Symbol],
    values: &[Vec<f64>],
    observables: &[PauliSum],
    sampled: Option<(usize, u64)>,
) -> Result<Vec<Vec<f64>>> {
    if circuits.len() != values.len() {
        return Err(Error::Shape(format!(
            "{} circuits but {} parameter rows",
            circuits.len(),
            values.len()
        )));
    }
    for (b, row) in values.iter().enumerate() {
        if row.len() != symbols.len() {
            return Err(Error::Shape(format!(
                "parameter row {b} has {} values for {} symbols",
                row.len(),
                symbols.len()
            )));
        }
    }
    circuits
        .par_iter()
        .zip(values.par_iter())
        .enumerate()
        .map(|(b, (c, row))| {
            let bind: Bindings = symbols.iter().cloned().zip(row.iter().copied()).collect();
            let state = simulate(&c.resolve(&bind)?, false)?;
            observables
                .iter()
                .enumerate()
                .map(|(k, o)| match sampled {
                    None => expectation(&state, o),
                    Some((shots, seed)) => {
                        let key = StreamKey::new(seed).child(b as u64).child(k as u64);
                        Ok(sampled_expectation_state(&state, o, shots, key)?.value)
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::pauli::Pauli;

    #[test]
    fn xpow_rows() {
        let c = Circuit::new(1).with(Gate::xpow(0, "theta"));
        let out = batch_execute(
            &[c.clone(), c.clone(), c],
            &[Symbol::new("theta")],
            &[vec![0.0], vec![1.0], vec![2.0]],
            &[PauliSum::single(1.0, 0, Pauli::Z)],
        )
        .unwrap();
        let flat: Vec<f64> = out.into_iter().flatten().collect();
        for (got, want) in flat.iter().zip([1.0, -1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_batch() {
        let out = batch_execute(&[], &[], &[], &[PauliSum::single(1.0, 0, Pauli::Z)]).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn ragged_rows_rejected() {
        let c = Circuit::new(1).with(Gate::rx(0, "a"));
        let err = batch_execute(&[c], &[Symbol::new("a")], &[vec![]], &[]).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }
}
