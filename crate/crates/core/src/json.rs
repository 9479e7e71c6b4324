//! JSON form of circuits and Pauli sums.
//!
//! ```text
//! {"num_qubits": 2,
//!  "gates": [{"name": "Rx", "targets": [0],
//!             "exponent": {"symbol": "a", "coeff": 1.0, "const": 0.0},
//!             "matrix": null, "generator": null}]}
//! ```
//! `matrix` is row-major `[[re, im], ...]`; a generator or observable is a list
//! of `{"coeff": c, "paulis": {"0": "Z", ...}}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, ParamExpr, Symbol};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};
use crate::pauli::{Pauli, PauliString, PauliSum};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    num_qubits: usize,
    gates: Vec<RawGate>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    name: String,
    targets: Vec<usize>,
    #[serde(default)]
    exponent: Option<RawExpr>,
    #[serde(default)]
    matrix: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    generator: Option<Vec<RawTerm>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpr {
    symbol: Option<String>,
    coeff: f64,
    #[serde(rename = "const")]
    constant: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: f64,
    paulis: BTreeMap<String, Pauli>,
}

fn expr_to_raw(e: &ParamExpr) -> RawExpr {
    RawExpr {
        symbol: e.symbol.as_ref().map(|s| s.name().to_string()),
        coeff: e.coeff,
        constant: e.constant,
    }
}

fn raw_to_expr(r: RawExpr, gate: usize) -> Result<ParamExpr> {
    match r.symbol {
        Some(s) if s.is_empty() => Err(Error::Parse(format!("gates[{gate}]: empty symbol name"))),
        Some(s) => Ok(ParamExpr::affine(Symbol::new(s), r.coeff, r.constant)),
        None => Ok(ParamExpr::constant(r.constant)),
    }
}

fn sum_to_raw(s: &PauliSum) -> Vec<RawTerm> {
    s.terms()
        .iter()
        .map(|t| RawTerm {
            coeff: t.coeff,
            paulis: t
                .factors()
                .iter()
                .map(|(q, p)| (q.to_string(), *p))
                .collect(),
        })
        .collect()
}

fn raw_to_sum(raw: Vec<RawTerm>, ctx: &str) -> Result<PauliSum> {
    let mut sum = PauliSum::new();
    for (i, t) in raw.into_iter().enumerate() {
        if !t.coeff.is_finite() {
            return Err(Error::Parse(format!("{ctx}[{i}].coeff: not finite")));
        }
        let mut factors = Vec::with_capacity(t.paulis.len());
        for (k, p) in t.paulis {
            let q: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("{ctx}[{i}].paulis: bad qubit key `{k}`")))?;
            factors.push((q, p));
        }
        sum.push(PauliString::new(t.coeff, factors));
    }
    Ok(sum)
}

fn gate_to_raw(g: &Gate) -> RawGate {
    let mut raw = RawGate {
        name: g.name().to_string(),
        targets: g.targets().to_vec(),
        exponent: None,
        matrix: None,
        generator: None,
    };
    match g.kind() {
        GateKind::Fixed(m) => {
            if g.name() == "Matrix" {
                raw.matrix = Some(m.as_slice().iter().map(|z| [z.re, z.im]).collect());
            }
        }
        GateKind::Exp {
            exponent,
            generator,
            ..
        } => {
            raw.exponent = Some(expr_to_raw(exponent));
            if g.name() == "Exp" {
                raw.generator = Some(sum_to_raw(generator));
            }
        }
    }
    raw
}

fn raw_to_gate(r: RawGate, idx: usize) -> Result<Gate> {
    let ctx = |msg: String| Error::Parse(format!("gates[{idx}] ({}): {msg}", r.name));
    match r.name.as_str() {
        "Matrix" => {
            let data = r.matrix.as_ref().ok_or_else(|| ctx("missing `matrix`".into()))?;
            let dim = 1usize << r.targets.len();
            if data.len() != dim * dim {
                return Err(ctx(format!("`matrix` needs {} entries, got {}", dim * dim, data.len())));
            }
            let m = Matrix::from_vec(dim, data.iter().map(|&[re, im]| C64::new(re, im)).collect());
            Gate::matrix(&r.targets, m).map_err(|e| ctx(e.to_string()))
        }
        "Exp" => {
            let gen = r.generator.ok_or_else(|| Error::Parse(format!("gates[{idx}] (Exp): missing `generator`")))?;
            let gen = raw_to_sum(gen, &format!("gates[{idx}].generator"))?;
            let e = r
                .exponent
                .ok_or_else(|| Error::Parse(format!("gates[{idx}] (Exp): missing `exponent`")))?;
            Gate::exp(&r.targets, raw_to_expr(e, idx)?, gen)
                .map_err(|e| Error::Parse(format!("gates[{idx}] (Exp): {e}")))
        }
        name => {
            let exponent = r.exponent.map(|e| raw_to_expr(e, idx)).transpose()?;
            Gate::named(name, &r.targets, exponent).map_err(|e| match e {
                Error::Parse(_) => Error::Parse(format!("gates[{idx}]: unknown gate `{name}`")),
                other => Error::Parse(format!("gates[{idx}] ({name}): {other}")),
            })
        }
    }
}

pub fn circuit_to_json(c: &Circuit) -> String {
    let raw = RawCircuit {
        num_qubits: c.num_qubits(),
        gates: c.gates().iter().map(gate_to_raw).collect(),
    };
    serde_json::to_string_pretty(&raw).expect("circuit serializes")
}

pub fn circuit_from_json(text: &str) -> Result<Circuit> {
    let raw: RawCircuit = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if raw.num_qubits == 0 {
        return Err(Error::Parse("num_qubits: must be positive".into()));
    }
    let mut c = Circuit::new(raw.num_qubits);
    for (i, g) in raw.gates.into_iter().enumerate() {
        let gate = raw_to_gate(g, i)?;
        c.push(gate)
            .map_err(|e| Error::Parse(format!("gates[{i}]: {e}")))?;
    }
    Ok(c)
}

pub fn pauli_sum_to_json(s: &PauliSum) -> String {
    serde_json::to_string_pretty(&sum_to_raw(s)).expect("pauli sum serializes")
}

pub fn pauli_sum_from_json(text: &str) -> Result<PauliSum> {
    let raw: Vec<RawTerm> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw_to_sum(raw, "terms")
}
