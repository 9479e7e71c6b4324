use crate::error::{Error, Result};

use super::{GradRequest, GradResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    /// `(f(θ+ε) − f(θ)) / ε`, sharing `f(θ)` across coordinates.
    Forward,
    /// `(f(θ+ε) − f(θ−ε)) / 2ε`.
    Central,
}

pub fn finite_difference_grad(req: &GradRequest, scheme: FdScheme, eps: f64) -> Result<GradResult> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("step {eps} must be positive")));
    }
    req.check()?;
    let symbols = req.circuit.symbols();
    let mut evals = 0;
    let mut f = |i: usize, delta: f64, tag: u64| -> Result<f64> {
        let mut b = req.bindings.clone();
        if delta != 0.0 {
            *b.get_mut(&symbols[i]).unwrap() += delta;
        }
        let state = req.run(&req.circuit.resolve(&b)?)?;
        evals += 1;
        req.measure(&state, &req.observable, &[i as u64, tag])
    };
    let mut grad = Vec::with_capacity(symbols.len());
    match scheme {
        FdScheme::Central => {
            for i in 0..symbols.len() {
                let plus = f(i, eps, 0)?;
                let minus = f(i, -eps, 1)?;
                grad.push((plus - minus) / (2.0 * eps));
            }
        }
        FdScheme::Forward => {
            if !symbols.is_empty() {
                let base = f(0, 0.0, 2)?;
                for i in 0..symbols.len() {
                    grad.push((f(i, eps, 0)? - base) / eps);
                }
            }
        }
    }
    Ok(GradResult::new(grad, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{bindings, Circuit, Gate};
    use crate::pauli::{Pauli, PauliSum};

    fn cos2() -> GradRequest {
        let c = Circuit::new(1)
            .with(Gate::exp(&[0], "t".into(), PauliSum::single(1.0, 0, Pauli::Y)).unwrap());
        GradRequest::new(
            c,
            PauliSum::single(1.0, 0, Pauli::Z),
            bindings([("t", std::f64::consts::FRAC_PI_4)]),
        )
    }

    #[test]
    fn central_difference_of_cosine() {
        let r = finite_difference_grad(&cos2(), FdScheme::Central, 1e-4).unwrap();
        assert!((r.gradient[0] + 2.0).abs() < 1e-6);
        assert_eq!(r.evaluations, 2);
    }

    #[test]
    fn forward_counts_shared_base() {
        let r = finite_difference_grad(&cos2(), FdScheme::Forward, 1e-6).unwrap();
        assert!((r.gradient[0] + 2.0).abs() < 1e-4);
        assert_eq!(r.evaluations, 2);
    }

    #[test]
    fn constant_circuit_has_empty_gradient() {
        let req = GradRequest::new(
            Circuit::new(1).with(Gate::h(0)),
            PauliSum::single(1.0, 0, Pauli::X),
            Default::default(),
        );
        let r = finite_difference_grad(&req, FdScheme::Central, 1e-4).unwrap();
        assert!(r.gradient.is_empty());
        assert!(r.evaluations <= 1);
    }
}
