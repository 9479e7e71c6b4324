use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{Circuit, ConcreteCircuit};
use crate::error::{Error, Result};
use crate::grad::Estimator;
use crate::pauli::PauliSum;
use crate::rng::StreamKey;
use crate::sim::StateVector;

use super::adam::Adam;
use super::dense::{Activation, DenseLayer};
use super::loss::LossFn;
use super::quantum::{prepare_inputs, Differentiator, QuantumNode};
use super::tensor::Tensor;

pub type NodeId = usize;

#[derive(Debug, Clone)]
enum Node {
    CircuitInput,
    FeatureInput {
        width: usize,
    },
    Dense {
        input: NodeId,
        layer: DenseLayer,
    },
    Quantum {
        circuits: Option<NodeId>,
        /// Feeding node in controlled mode.
        params_from: Option<NodeId>,
        /// Owned parameters in managed mode.
        managed: Option<Vec<f64>>,
        node: QuantumNode,
    },
    Concat {
        inputs: Vec<NodeId>,
    },
}

/// One batch of model inputs: data circuits for the circuit input and a
/// feature matrix for the feature input.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub circuits: Vec<ConcreteCircuit>,
    pub features: Option<Tensor>,
}

impl Batch {
    pub fn circuits(circuits: Vec<ConcreteCircuit>) -> Self {
        Batch {
            circuits,
            features: None,
        }
    }

    pub fn features(features: Tensor) -> Self {
        Batch {
            circuits: Vec::new(),
            features: Some(features),
        }
    }

    pub fn len(&self) -> usize {
        match &self.features {
            Some(f) => f.rows(),
            None => self.circuits.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, idx: &[usize]) -> Batch {
        Batch {
            circuits: if self.circuits.is_empty() {
                Vec::new()
            } else {
                idx.iter().map(|&i| self.circuits[i].clone()).collect()
            },
            features: self.features.as_ref().map(|f| f.select_rows(idx)),
        }
    }
}

/// Per-epoch mean losses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub loss: Vec<f64>,
    /// Validation loss after each epoch, when validation data is given.
    pub val_loss: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

struct Pass {
    values: Vec<Option<Tensor>>,
    states: Option<Vec<StateVector>>,
}

/// Static computation graph of classical and quantum nodes. Nodes are added in
/// topological order: every node's inputs must already exist.
#[derive(Debug, Clone)]
pub struct Model {
    nodes: Vec<Node>,
    output: Option<NodeId>,
    seed: u64,
    step: u64,
}

impl Model {
    pub fn new(seed: u64) -> Self {
        Model {
            nodes: Vec::new(),
            output: None,
            seed,
            step: 0,
        }
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn init_rng(&self) -> rand_chacha::ChaCha8Rng {
        StreamKey::new(self.seed)
            .child(u64::MAX)
            .child(self.nodes.len() as u64)
            .rng()
    }

    fn check_id(&self, id: NodeId) -> Result<()> {
        if id >= self.nodes.len() {
            return Err(Error::InvalidArgument(format!("unknown node {id}")));
        }
        Ok(())
    }

    /// Output width of a real-valued node.
    pub fn width(&self, id: NodeId) -> Result<usize> {
        self.check_id(id)?;
        Ok(match &self.nodes[id] {
            Node::CircuitInput => {
                return Err(Error::InvalidArgument(format!(
                    "node {id} carries circuits, not values"
                )))
            }
            Node::FeatureInput { width } => *width,
            Node::Dense { layer, .. } => layer.outputs(),
            Node::Quantum { node, .. } => node.num_outputs(),
            Node::Concat { inputs } => {
                let mut w = 0;
                for &i in inputs {
                    w += self.width(i)?;
                }
                w
            }
        })
    }

    pub fn circuit_input(&mut self) -> NodeId {
        self.push(Node::CircuitInput)
    }

    pub fn feature_input(&mut self, width: usize) -> NodeId {
        self.push(Node::FeatureInput { width })
    }

    /// Dense layer with Glorot-uniform weights and zero bias.
    pub fn dense(&mut self, input: NodeId, outputs: usize, activation: Activation) -> Result<NodeId> {
        let inputs = self.width(input)?;
        let layer = DenseLayer::glorot(inputs, outputs, activation, &mut self.init_rng());
        Ok(self.push(Node::Dense { input, layer }))
    }

    pub fn dense_with(&mut self, input: NodeId, layer: DenseLayer) -> Result<NodeId> {
        if self.width(input)? != layer.inputs() {
            return Err(Error::Shape("dense layer input width".into()));
        }
        Ok(self.push(Node::Dense { input, layer }))
    }

    fn check_circuits(&self, circuits: Option<NodeId>) -> Result<()> {
        if let Some(c) = circuits {
            self.check_id(c)?;
            if !matches!(self.nodes[c], Node::CircuitInput) {
                return Err(Error::InvalidArgument(format!("node {c} is not a circuit input")));
            }
        }
        Ok(())
    }

    /// Quantum node owning its parameters, initialized uniformly in `[0, 2π)`.
    pub fn pqc(
        &mut self,
        circuits: Option<NodeId>,
        circuit: Circuit,
        observables: Vec<PauliSum>,
        differentiator: Differentiator,
        estimator: Estimator,
    ) -> Result<NodeId> {
        self.check_circuits(circuits)?;
        let node = QuantumNode::new(circuit, observables, differentiator, estimator)?;
        let mut rng = self.init_rng();
        let managed = (0..node.num_params())
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        Ok(self.push(Node::Quantum {
            circuits,
            params_from: None,
            managed: Some(managed),
            node,
        }))
    }

    /// Quantum node whose parameters are the output of `params_from`.
    pub fn controlled_pqc(
        &mut self,
        circuits: Option<NodeId>,
        params_from: NodeId,
        circuit: Circuit,
        observables: Vec<PauliSum>,
        differentiator: Differentiator,
        estimator: Estimator,
    ) -> Result<NodeId> {
        self.check_circuits(circuits)?;
        let node = QuantumNode::new(circuit, observables, differentiator, estimator)?;
        if self.width(params_from)? != node.num_params() {
            return Err(Error::Shape(format!(
                "node {params_from} has width {}, circuit has {} symbols",
                self.width(params_from)?,
                node.num_params()
            )));
        }
        Ok(self.push(Node::Quantum {
            circuits,
            params_from: Some(params_from),
            managed: None,
            node,
        }))
    }

    pub fn concat(&mut self, inputs: Vec<NodeId>) -> Result<NodeId> {
        for &i in &inputs {
            self.width(i)?;
        }
        Ok(self.push(Node::Concat { inputs }))
    }

    pub fn set_output(&mut self, id: NodeId) -> Result<()> {
        self.width(id)?;
        self.output = Some(id);
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Dense { layer, .. } => layer.num_params(),
                Node::Quantum {
                    managed: Some(p), ..
                } => p.len(),
                _ => 0,
            })
            .sum()
    }

    /// All trainable parameters: dense weights then bias, managed quantum
    /// parameters, in node order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for n in &self.nodes {
            match n {
                Node::Dense { layer, .. } => {
                    out.extend_from_slice(layer.weights.data());
                    out.extend_from_slice(layer.bias.data());
                }
                Node::Quantum {
                    managed: Some(p), ..
                } => out.extend_from_slice(p),
                _ => {}
            }
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} values for {} parameters",
                p.len(),
                self.num_params()
            )));
        }
        let mut at = 0;
        for n in &mut self.nodes {
            match n {
                Node::Dense { layer, .. } => {
                    let w = layer.weights.data().len();
                    layer.weights.data_mut().copy_from_slice(&p[at..at + w]);
                    at += w;
                    let b = layer.bias.data().len();
                    layer.bias.data_mut().copy_from_slice(&p[at..at + b]);
                    at += b;
                }
                Node::Quantum {
                    managed: Some(q), ..
                } => {
                    let n = q.len();
                    q.copy_from_slice(&p[at..at + n]);
                    at += n;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Managed parameters of a quantum node.
    pub fn quantum_params(&self, id: NodeId) -> Option<&[f64]> {
        match self.nodes.get(id)? {
            Node::Quantum {
                managed: Some(p), ..
            } => Some(p),
            _ => None,
        }
    }

    fn stream(&self, id: NodeId, dir: u64) -> StreamKey {
        StreamKey::new(self.seed)
            .child(self.step)
            .child(id as u64)
            .child(dir)
    }

    fn forward_pass(&self, batch: &Batch) -> Result<Pass> {
        let mut pass = Pass {
            values: vec![None; self.nodes.len()],
            states: None,
        };
        for (id, n) in self.nodes.iter().enumerate() {
            let v = match n {
                Node::CircuitInput => None,
                Node::FeatureInput { width } => {
                    let f = batch
                        .features
                        .as_ref()
                        .ok_or_else(|| Error::InvalidArgument("batch has no features".into()))?;
                    if f.shape().len() != 2 || f.cols() != *width {
                        return Err(Error::Shape(format!(
                            "features {:?}, expected [_, {width}]",
                            f.shape()
                        )));
                    }
                    Some(f.clone())
                }
                Node::Dense { input, layer } => {
                    Some(layer.forward(pass.values[*input].as_ref().unwrap())?)
                }
                Node::Quantum {
                    circuits,
                    params_from,
                    managed,
                    node,
                } => {
                    let params = match (managed, params_from) {
                        (Some(p), _) => Tensor::new(vec![1, p.len()], p.clone())?,
                        (None, Some(src)) => pass.values[*src].clone().unwrap(),
                        (None, None) => unreachable!(),
                    };
                    let inputs = self.inputs_for(&mut pass, batch, *circuits, node)?;
                    Some(node.forward(&inputs, &params, self.stream(id, 0))?)
                }
                Node::Concat { inputs } => {
                    let parts: Vec<&Tensor> =
                        inputs.iter().map(|&i| pass.values[i].as_ref().unwrap()).collect();
                    Some(concat_cols(&parts)?)
                }
            };
            pass.values[id] = v;
        }
        Ok(pass)
    }

    fn inputs_for(
        &self,
        pass: &mut Pass,
        batch: &Batch,
        circuits: Option<NodeId>,
        node: &QuantumNode,
    ) -> Result<Vec<StateVector>> {
        let n = node.circuit.num_qubits();
        match circuits {
            None => Ok(vec![StateVector::zero(n)?]),
            Some(_) => {
                if pass.states.is_none() {
                    if batch.circuits.is_empty() {
                        return Err(Error::InvalidArgument("batch has no circuits".into()));
                    }
                    pass.states = Some(prepare_inputs(n, &batch.circuits)?);
                }
                let states = pass.states.as_ref().unwrap();
                if states[0].num_qubits() != n {
                    return Err(Error::QubitCountMismatch {
                        left: states[0].num_qubits(),
                        right: n,
                    });
                }
                Ok(states.clone())
            }
        }
    }

    fn output_id(&self) -> Result<NodeId> {
        self.output
            .ok_or_else(|| Error::InvalidArgument("model output not set".into()))
    }

    pub fn predict(&self, batch: &Batch) -> Result<Tensor> {
        let out = self.output_id()?;
        let mut pass = self.forward_pass(batch)?;
        Ok(pass.values[out].take().unwrap())
    }

    /// Loss at the current parameters and its gradient over [`Model::params`].
    pub fn loss_and_grad(&self, batch: &Batch, target: &Tensor, loss: LossFn) -> Result<(f64, Vec<f64>)> {
        let out = self.output_id()?;
        let mut pass = self.forward_pass(batch)?;
        let pred = pass.values[out].as_ref().unwrap();
        let value = loss.forward(pred, target)?;
        let mut up: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        up[out] = Some(loss.backward(pred, target)?);

        let mut offsets = Vec::with_capacity(self.nodes.len());
        let mut at = 0;
        for n in &self.nodes {
            offsets.push(at);
            at += match n {
                Node::Dense { layer, .. } => layer.num_params(),
                Node::Quantum {
                    managed: Some(p), ..
                } => p.len(),
                _ => 0,
            };
        }
        let mut grads = vec![0.0; at];

        for id in (0..self.nodes.len()).rev() {
            let Some(g) = up[id].take() else { continue };
            match &self.nodes[id] {
                Node::CircuitInput | Node::FeatureInput { .. } => {}
                Node::Dense { input, layer } => {
                    let x = pass.values[*input].as_ref().unwrap();
                    let y = pass.values[id].as_ref().unwrap();
                    let d = layer.backward(x, y, &g)?;
                    let o = offsets[id];
                    let w = d.weights.data().len();
                    grads[o..o + w].copy_from_slice(d.weights.data());
                    grads[o + w..o + w + d.bias.data().len()].copy_from_slice(d.bias.data());
                    accumulate(&mut up[*input], d.input);
                }
                Node::Quantum {
                    circuits,
                    params_from,
                    managed,
                    node,
                } => {
                    let params = match (managed, params_from) {
                        (Some(p), _) => Tensor::new(vec![1, p.len()], p.clone())?,
                        (None, Some(src)) => pass.values[*src].clone().unwrap(),
                        (None, None) => unreachable!(),
                    };
                    let inputs = self.inputs_for(&mut pass, batch, *circuits, node)?;
                    let d = node.backward(&inputs, &params, &g, self.stream(id, 1))?;
                    match (managed, params_from) {
                        (Some(p), _) => {
                            let o = offsets[id];
                            for r in 0..d.rows() {
                                for (j, v) in d.row(r).iter().enumerate() {
                                    grads[o + j] += v;
                                }
                            }
                            debug_assert_eq!(d.cols(), p.len());
                        }
                        (None, Some(src)) => accumulate(&mut up[*src], d),
                        (None, None) => unreachable!(),
                    }
                }
                Node::Concat { inputs } => {
                    let mut col = 0;
                    for &i in inputs {
                        let w = self.width(i)?;
                        let mut part = Tensor::zeros(vec![g.rows(), w]);
                        for r in 0..g.rows() {
                            part.row_mut(r).copy_from_slice(&g.row(r)[col..col + w]);
                        }
                        col += w;
                        accumulate(&mut up[i], part);
                    }
                }
            }
        }
        Ok((value, grads))
    }

    /// Mini-batch training with Adam. Records the mean training loss of each
    /// epoch and, with validation data, the validation loss after it.
    pub fn fit(
        &mut self,
        x: &Batch,
        y: &Tensor,
        loss: LossFn,
        opt: &mut Adam,
        cfg: FitConfig,
        validation: Option<(&Batch, &Tensor)>,
    ) -> Result<History> {
        if x.len() != y.rows() {
            return Err(Error::Shape(format!(
                "{} inputs but {} targets",
                x.len(),
                y.rows()
            )));
        }
        if cfg.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be positive".into()));
        }
        let mut hist = History::default();
        let mut order: Vec<usize> = (0..x.len()).collect();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut StreamKey::new(cfg.seed).child(epoch as u64).rng());
            let mut total = 0.0;
            for chunk in order.chunks(cfg.batch_size) {
                let bx = x.select(chunk);
                let by = y.select_rows(chunk);
                let (l, g) = self.loss_and_grad(&bx, &by, loss)?;
                if !l.is_finite() {
                    return Err(Error::NonFinite(format!("loss at epoch {epoch}")));
                }
                total += l * chunk.len() as f64;
                let mut p = self.params();
                opt.step(&mut p, &g)?;
                self.set_params(&p)?;
                self.step += 1;
            }
            hist.loss.push(total / x.len().max(1) as f64);
            if let Some((vx, vy)) = validation {
                hist.val_loss.push(loss.forward(&self.predict(vx)?, vy)?);
            }
        }
        Ok(hist)
    }
}

fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        Some(t) => {
            for (a, b) in t.data_mut().iter_mut().zip(g.data()) {
                *a += b;
            }
        }
        None => *slot = Some(g),
    }
}

fn concat_cols(parts: &[&Tensor]) -> Result<Tensor> {
    let rows = parts.first().map_or(0, |t| t.rows());
    if parts.iter().any(|t| t.rows() != rows) {
        return Err(Error::Shape("concat inputs differ in batch size".into()));
    }
    let width: usize = parts.iter().map(|t| t.cols()).sum();
    let mut out = Tensor::zeros(vec![rows, width]);
    for r in 0..rows {
        let mut col = 0;
        for t in parts {
            out.row_mut(r)[col..col + t.cols()].copy_from_slice(t.row(r));
            col += t.cols();
        }
    }
    Ok(out)
}
