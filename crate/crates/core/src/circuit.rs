//! Parameterized circuits: symbols, affine parameter expressions, gates and
//! their unitaries, composition and parameter resolution.
//!
//! Qubit ordering is little-endian throughout: qubit 0 is the least-significant
//! bit of a basis-state index.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashSet};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, named, Matrix, C64};
use crate::pauli::{Pauli, PauliString, PauliSum};

const UNITARY_TOL: f64 = 1e-10;

/// Named free parameter of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: impl AsRef<str>) -> Self {
        Symbol(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

pub type Bindings = BTreeMap<Symbol, f64>;

/// Convenience constructor for [`Bindings`].
pub fn bindings<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Bindings {
    pairs.into_iter().map(|(k, v)| (Symbol::new(k), v)).collect()
}

/// `coeff · binding(symbol) + constant`; just `constant` when there is no symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamExpr {
    pub symbol: Option<Symbol>,
    pub coeff: f64,
    pub constant: f64,
}

impl ParamExpr {
    pub fn constant(value: f64) -> Self {
        ParamExpr {
            symbol: None,
            coeff: 0.0,
            constant: value,
        }
    }

    pub fn symbol(name: impl Into<Symbol>) -> Self {
        ParamExpr {
            symbol: Some(name.into()),
            coeff: 1.0,
            constant: 0.0,
        }
    }

    pub fn affine(name: impl Into<Symbol>, coeff: f64, constant: f64) -> Self {
        ParamExpr {
            symbol: Some(name.into()),
            coeff,
            constant,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.symbol.is_none()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ParamExpr {
            symbol: self.symbol.clone(),
            coeff: self.coeff * s,
            constant: self.constant * s,
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn value(&self, b: &Bindings) -> Result<f64> {
        match &self.symbol {
            None => Ok(self.constant),
            Some(s) => {
                let v = *b
                    .get(s)
                    .ok_or_else(|| Error::MissingBinding(s.to_string()))?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteBinding(s.to_string()));
                }
                Ok(self.coeff * v + self.constant)
            }
        }
    }

    fn resolve(&self, b: &Bindings) -> Result<ParamExpr> {
        Ok(ParamExpr::constant(self.value(b)?))
    }
}

impl From<f64> for ParamExpr {
    fn from(v: f64) -> Self {
        ParamExpr::constant(v)
    }
}

impl From<&str> for ParamExpr {
    fn from(s: &str) -> Self {
        ParamExpr::symbol(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// A fixed unitary on the gate's targets.
    Fixed(Matrix),
    /// `exp(−i · scale · value(exponent) · generator)`.
    Exp {
        exponent: ParamExpr,
        scale: f64,
        generator: PauliSum,
    },
}

/// A gate applied to an ordered list of qubits. `name` identifies it in the
/// JSON form; `"Exp"` and `"Matrix"` are the generic kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: String,
    targets: Vec<usize>,
    kind: GateKind,
}

/// Description of one entry of the named gate library.
pub(crate) enum NamedGate {
    Fixed(fn() -> Matrix, usize),
    /// (scale, generator builder over local targets)
    Param(f64, fn(&[usize]) -> PauliSum, usize),
}

fn rot_gen(p: Pauli) -> fn(&[usize]) -> PauliSum {
    match p {
        Pauli::X => |t| PauliSum::single(1.0, t[0], Pauli::X),
        Pauli::Y => |t| PauliSum::single(1.0, t[0], Pauli::Y),
        Pauli::Z => |t| PauliSum::single(1.0, t[0], Pauli::Z),
    }
}

fn pow_gen(p: Pauli) -> fn(&[usize]) -> PauliSum {
    // P^t = e^{iπt/2} e^{−iπt/2 P} = exp(−i (π/2) t (P − I))
    match p {
        Pauli::X => |t| {
            PauliSum::from_terms([
                PauliString::single(1.0, t[0], Pauli::X),
                PauliString::identity(-1.0),
            ])
        },
        Pauli::Y => |t| {
            PauliSum::from_terms([
                PauliString::single(1.0, t[0], Pauli::Y),
                PauliString::identity(-1.0),
            ])
        },
        Pauli::Z => |t| {
            PauliSum::from_terms([
                PauliString::single(1.0, t[0], Pauli::Z),
                PauliString::identity(-1.0),
            ])
        },
    }
}

fn cnot_pow_gen(t: &[usize]) -> PauliSum {
    // CNOT^t = exp(iπt·|1><1|_c ⊗ |−><−|_t) = exp(−i (π/2) t G),
    // G = −(I − Z_c − X_t + Z_c X_t)/2
    let (c, x) = (t[0], t[1]);
    PauliSum::from_terms([
        PauliString::identity(-0.5),
        PauliString::single(0.5, c, Pauli::Z),
        PauliString::single(0.5, x, Pauli::X),
        PauliString::new(-0.5, [(c, Pauli::Z), (x, Pauli::X)]),
    ])
}

pub(crate) fn lookup_named(name: &str) -> Option<NamedGate> {
    use NamedGate::*;
    Some(match name {
        "I" => Fixed(|| Matrix::identity(2), 1),
        "X" => Fixed(named::x, 1),
        "Y" => Fixed(named::y, 1),
        "Z" => Fixed(named::z, 1),
        "H" => Fixed(named::h, 1),
        "S" => Fixed(named::s, 1),
        "T" => Fixed(named::t, 1),
        "CZ" => Fixed(named::cz, 2),
        "CNOT" => Fixed(named::cnot, 2),
        "SWAP" => Fixed(named::swap, 2),
        "Rx" => Param(0.5, rot_gen(Pauli::X), 1),
        "Ry" => Param(0.5, rot_gen(Pauli::Y), 1),
        "Rz" => Param(0.5, rot_gen(Pauli::Z), 1),
        "XPow" => Param(FRAC_PI_2, pow_gen(Pauli::X), 1),
        "YPow" => Param(FRAC_PI_2, pow_gen(Pauli::Y), 1),
        "ZPow" => Param(FRAC_PI_2, pow_gen(Pauli::Z), 1),
        "CNotPow" => Param(FRAC_PI_2, cnot_pow_gen, 2),
        _ => return None,
    })
}

impl Gate {
    /// A gate from the named library. Parameterized names require `exponent`.
    pub fn named(name: &str, targets: &[usize], exponent: Option<ParamExpr>) -> Result<Gate> {
        let spec = lookup_named(name)
            .ok_or_else(|| Error::Parse(format!("unknown gate `{name}`")))?;
        let arity = match &spec {
            NamedGate::Fixed(_, a) | NamedGate::Param(_, _, a) => *a,
        };
        if targets.len() != arity {
            return Err(Error::InvalidArgument(format!(
                "gate `{name}` takes {arity} target(s), got {}",
                targets.len()
            )));
        }
        check_distinct(name, targets)?;
        let kind = match spec {
            NamedGate::Fixed(m, _) => {
                if exponent.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "gate `{name}` takes no exponent"
                    )));
                }
                GateKind::Fixed(m())
            }
            NamedGate::Param(scale, gen, _) => {
                let exponent = exponent.ok_or_else(|| {
                    Error::InvalidArgument(format!("gate `{name}` requires an exponent"))
                })?;
                GateKind::Exp {
                    exponent,
                    scale,
                    generator: gen(targets),
                }
            }
        };
        Ok(Gate {
            name: name.to_string(),
            targets: targets.to_vec(),
            kind,
        })
    }

    /// `exp(−i · value(exponent) · generator)` on `targets`.
    pub fn exp(targets: &[usize], exponent: ParamExpr, generator: PauliSum) -> Result<Gate> {
        check_distinct("Exp", targets)?;
        if !generator.is_finite() {
            return Err(Error::NonHermitian(
                "generator has non-finite coefficients".into(),
            ));
        }
        for q in generator.support() {
            if !targets.contains(&q) {
                return Err(Error::GeneratorOutsideTargets {
                    gate: "Exp".into(),
                    qubit: q,
                });
            }
        }
        Ok(Gate {
            name: "Exp".into(),
            targets: targets.to_vec(),
            kind: GateKind::Exp {
                exponent,
                scale: 1.0,
                generator,
            },
        })
    }

    /// A fixed unitary; rejected unless `U†U = I` within 1e-10.
    pub fn matrix(targets: &[usize], m: Matrix) -> Result<Gate> {
        check_distinct("Matrix", targets)?;
        if m.dim() != 1 << targets.len() {
            return Err(Error::Shape(format!(
                "{}x{} matrix on {} target(s)",
                m.dim(),
                m.dim(),
                targets.len()
            )));
        }
        if !m.is_finite() || !m.is_unitary(UNITARY_TOL) {
            return Err(Error::NonUnitary("Matrix".into()));
        }
        Ok(Gate {
            name: "Matrix".into(),
            targets: targets.to_vec(),
            kind: GateKind::Fixed(m),
        })
    }

    pub fn i(q: usize) -> Gate {
        Gate::named("I", &[q], None).unwrap()
    }
    pub fn x(q: usize) -> Gate {
        Gate::named("X", &[q], None).unwrap()
    }
    pub fn y(q: usize) -> Gate {
        Gate::named("Y", &[q], None).unwrap()
    }
    pub fn z(q: usize) -> Gate {
        Gate::named("Z", &[q], None).unwrap()
    }
    pub fn h(q: usize) -> Gate {
        Gate::named("H", &[q], None).unwrap()
    }
    pub fn s(q: usize) -> Gate {
        Gate::named("S", &[q], None).unwrap()
    }
    pub fn t(q: usize) -> Gate {
        Gate::named("T", &[q], None).unwrap()
    }

    /// Panics if `a == b`.
    pub fn cz(a: usize, b: usize) -> Gate {
        Gate::named("CZ", &[a, b], None).unwrap()
    }

    /// Panics if `control == target`.
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::named("CNOT", &[control, target], None).unwrap()
    }

    pub fn swap(a: usize, b: usize) -> Gate {
        Gate::named("SWAP", &[a, b], None).unwrap()
    }

    /// `exp(−i θ/2 X)`.
    pub fn rx(q: usize, theta: impl Into<ParamExpr>) -> Gate {
        Gate::named("Rx", &[q], Some(theta.into())).unwrap()
    }
    pub fn ry(q: usize, theta: impl Into<ParamExpr>) -> Gate {
        Gate::named("Ry", &[q], Some(theta.into())).unwrap()
    }
    pub fn rz(q: usize, theta: impl Into<ParamExpr>) -> Gate {
        Gate::named("Rz", &[q], Some(theta.into())).unwrap()
    }

    /// `X^t` with its global phase, `e^{iπt/2}·exp(−iπt/2·X)`.
    pub fn xpow(q: usize, t: impl Into<ParamExpr>) -> Gate {
        Gate::named("XPow", &[q], Some(t.into())).unwrap()
    }
    pub fn ypow(q: usize, t: impl Into<ParamExpr>) -> Gate {
        Gate::named("YPow", &[q], Some(t.into())).unwrap()
    }
    pub fn zpow(q: usize, t: impl Into<ParamExpr>) -> Gate {
        Gate::named("ZPow", &[q], Some(t.into())).unwrap()
    }
    pub fn cnot_pow(control: usize, target: usize, t: impl Into<ParamExpr>) -> Gate {
        Gate::named("CNotPow", &[control, target], Some(t.into())).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    /// The symbol this gate depends on, if any.
    pub fn symbol(&self) -> Option<&Symbol> {
        match &self.kind {
            GateKind::Exp { exponent, .. } => exponent.symbol.as_ref(),
            GateKind::Fixed(_) => None,
        }
    }

    /// The user-facing exponent of a parameterized gate.
    pub fn exponent(&self) -> Option<&ParamExpr> {
        match &self.kind {
            GateKind::Exp { exponent, .. } => Some(exponent),
            GateKind::Fixed(_) => None,
        }
    }

    /// Rotation angle `a` such that the gate is `exp(−i·a·generator)`.
    pub fn angle(&self, b: &Bindings) -> Result<Option<f64>> {
        match &self.kind {
            GateKind::Exp {
                exponent, scale, ..
            } => Ok(Some(scale * exponent.value(b)?)),
            GateKind::Fixed(_) => Ok(None),
        }
    }

    /// Same gate with its exponent evaluated to a constant.
    pub fn resolve(&self, b: &Bindings) -> Result<Gate> {
        let kind = match &self.kind {
            GateKind::Fixed(m) => GateKind::Fixed(m.clone()),
            GateKind::Exp {
                exponent,
                scale,
                generator,
            } => GateKind::Exp {
                exponent: exponent.resolve(b)?,
                scale: *scale,
                generator: generator.clone(),
            },
        };
        Ok(Gate {
            name: self.name.clone(),
            targets: self.targets.clone(),
            kind,
        })
    }

    /// Dense unitary in the local basis of `targets` (targets[0] is bit 0).
    pub fn matrix_with(&self, b: &Bindings) -> Result<Matrix> {
        match &self.kind {
            GateKind::Fixed(m) => Ok(m.clone()),
            GateKind::Exp {
                exponent,
                scale,
                generator,
            } => {
                let angle = scale * exponent.value(b)?;
                generator_exp(generator, angle, &self.targets)
            }
        }
    }

    /// The inverse gate. Parameterized gates negate their exponent and keep
    /// their symbol; fixed gates become their adjoint.
    pub fn inverse(&self) -> Gate {
        match &self.kind {
            GateKind::Fixed(m) => {
                let adj = m.adjoint();
                let name = if adj.max_abs_diff(m) < 1e-14 {
                    self.name.clone()
                } else {
                    "Matrix".to_string()
                };
                Gate {
                    name,
                    targets: self.targets.clone(),
                    kind: GateKind::Fixed(adj),
                }
            }
            GateKind::Exp {
                exponent,
                scale,
                generator,
            } => Gate {
                name: self.name.clone(),
                targets: self.targets.clone(),
                kind: GateKind::Exp {
                    exponent: exponent.negated(),
                    scale: *scale,
                    generator: generator.clone(),
                },
            },
        }
    }
}

fn check_distinct(name: &str, targets: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument(format!("gate `{name}` has no targets")));
    }
    let mut seen = HashSet::new();
    for &q in targets {
        if !seen.insert(q) {
            return Err(Error::DuplicateTarget {
                gate: name.to_string(),
                qubit: q,
            });
        }
    }
    Ok(())
}

/// `exp(−i·angle·G)` in the local basis of `targets`.
///
/// Commuting generators use the product of `cos(aβ)I − i·sin(aβ)P` factors;
/// anything else goes through a Hermitian eigendecomposition.
pub fn generator_exp(generator: &PauliSum, angle: f64, targets: &[usize]) -> Result<Matrix> {
    let dim = 1 << targets.len();
    if generator.all_commute() {
        let mut u = Matrix::identity(dim);
        for term in generator.terms() {
            let eta = angle * term.coeff;
            let p = term.with_coeff(1.0).matrix_on(targets)?;
            let factor = Matrix::identity(dim)
                .scale(C64::new(eta.cos(), 0.0))
                .add(&p.scale(C64::new(0.0, -eta.sin())));
            u = &factor * &u;
        }
        Ok(u)
    } else {
        let g = generator.matrix_on(targets)?;
        Ok(expm_hermitian(&g, angle))
    }
}

/// Dense unitary of `g` under `b`.
pub fn gate_matrix(g: &Gate, b: &Bindings) -> Result<Matrix> {
    g.matrix_with(b)
}

/// Ordered gate list on a fixed-size register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        for &q in g.targets() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        self.gates.push(g);
        Ok(())
    }

    /// Builder-style [`Circuit::push`]; panics on an out-of-range target.
    pub fn with(mut self, g: Gate) -> Self {
        self.push(g).expect("gate target out of range");
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Distinct symbols in order of first appearance.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for g in &self.gates {
            if let Some(s) = g.symbol() {
                if seen.insert(s.clone()) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    pub fn is_concrete(&self) -> bool {
        self.gates.iter().all(|g| g.symbol().is_none())
    }

    /// Appends `other`'s gates after this circuit's.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitCountMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Evaluates every parameter expression under `b`.
    pub fn resolve(&self, b: &Bindings) -> Result<ConcreteCircuit> {
        let gates = self
            .gates
            .iter()
            .map(|g| g.resolve(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConcreteCircuit(Circuit {
            num_qubits: self.num_qubits,
            gates,
        }))
    }

    /// Binds `values[i]` to `self.symbols()[i]` and resolves.
    pub fn resolve_values(&self, values: &[f64]) -> Result<ConcreteCircuit> {
        let syms = self.symbols();
        if syms.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} values for {} symbols",
                values.len(),
                syms.len()
            )));
        }
        let b: Bindings = syms.into_iter().zip(values.iter().copied()).collect();
        self.resolve(&b)
    }
}

/// `a` followed by `b`. Shared symbol names become one shared parameter.
pub fn compose(a: &Circuit, b: &Circuit) -> Result<Circuit> {
    let mut out = a.clone();
    out.extend(b)?;
    Ok(out)
}

/// `resolve` as a free function.
pub fn resolve(c: &Circuit, b: &Bindings) -> Result<ConcreteCircuit> {
    c.resolve(b)
}

/// A circuit with no free symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteCircuit(Circuit);

impl ConcreteCircuit {
    /// Wraps a circuit that must not contain symbols.
    pub fn new(c: Circuit) -> Result<Self> {
        match c.symbols().first() {
            Some(s) => Err(Error::MissingBinding(s.to_string())),
            None => Ok(ConcreteCircuit(c)),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.0
    }

    pub fn into_circuit(self) -> Circuit {
        self.0
    }

    pub fn num_qubits(&self) -> usize {
        self.0.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.0.gates
    }

    pub fn len(&self) -> usize {
        self.0.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.gates.is_empty()
    }

    /// Dense matrix and targets of every gate, in order.
    pub fn ops(&self) -> Result<Vec<(Matrix, Vec<usize>)>> {
        let empty = Bindings::new();
        self.0
            .gates
            .iter()
            .map(|g| Ok((g.matrix_with(&empty)?, g.targets.clone())))
            .collect()
    }

    pub fn then(&self, other: &ConcreteCircuit) -> Result<ConcreteCircuit> {
        Ok(ConcreteCircuit(compose(&self.0, &other.0)?))
    }
}

/// One `Exp` gate per non-identity term of each operator:
/// `exp(−i · coefficients[j] · γ_term · P_term)`, operators in the given order.
///
/// Terms inside one operator must mutually commute; identity terms only add a
/// global phase and are dropped.
pub fn exponential_circuit(
    num_qubits: usize,
    operators: &[PauliSum],
    coefficients: &[ParamExpr],
) -> Result<Circuit> {
    if operators.len() != coefficients.len() {
        return Err(Error::Shape(format!(
            "{} operators but {} coefficients",
            operators.len(),
            coefficients.len()
        )));
    }
    let mut c = Circuit::new(num_qubits);
    for (op, coeff) in operators.iter().zip(coefficients) {
        if let Some((i, j)) = op.first_noncommuting_pair() {
            return Err(Error::NonCommuting(format!(
                "terms `{}` and `{}`",
                op.terms()[i],
                op.terms()[j]
            )));
        }
        for term in op.terms().iter().filter(|t| !t.is_identity()) {
            let targets: Vec<usize> = term.support().collect();
            c.push(Gate::exp(&targets, coeff.clone(), term.clone().into())?)?;
        }
    }
    Ok(c)
}
