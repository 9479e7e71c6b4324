//! Hybrid quantum convolutional classifiers for excited cluster states.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use qcflow::grad::Estimator;
use qcflow::hybrid::{Activation, Adam, Batch, Differentiator, FitConfig, LossFn, Model, Tensor};
use qcflow::rng::StreamKey;
use qcflow::{Circuit, ConcreteCircuit, Error, Gate, ParamExpr, Pauli, PauliString, PauliSum, Result, Symbol};
use rand::seq::SliceRandom;
use rand::Rng;

/// Hadamard on every qubit, then CZ around the ring including the wrap pair.
pub fn cluster_state_circuit(n: usize) -> Result<Circuit> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("cluster ring needs ≥ 3 qubits, got {n}")));
    }
    let mut c = (0..n).fold(Circuit::new(n), |c, q| c.with(Gate::h(q)));
    for q in 0..n {
        c.push(Gate::cz(q, (q + 1) % n))?;
    }
    Ok(c)
}

/// Stabilizer `X_i Z_{i−1} Z_{i+1}` of the ring cluster state.
pub fn cluster_stabilizer(n: usize, i: usize) -> PauliString {
    PauliString::new(
        1.0,
        [(i, Pauli::X), ((i + n - 1) % n, Pauli::Z), ((i + 1) % n, Pauli::Z)],
    )
}

fn sym(s: &Symbol) -> ParamExpr {
    ParamExpr::symbol(s.clone())
}

/// Symbols `{prefix}_0 … {prefix}_{count−1}`.
pub fn symbols(prefix: &str, count: usize) -> Vec<Symbol> {
    (0..count).map(|i| Symbol::new(format!("{prefix}_{i}"))).collect()
}

/// `X^a Y^b Z^c` on `q`.
pub fn one_qubit_unitary(q: usize, s: &[Symbol]) -> Vec<Gate> {
    vec![Gate::xpow(q, sym(&s[0])), Gate::ypow(q, sym(&s[1])), Gate::zpow(q, sym(&s[2]))]
}

fn pauli_pair_exp(a: usize, b: usize, p: Pauli, s: &Symbol) -> Gate {
    // (PP)^t up to global phase.
    let gen = PauliString::new(1.0, [(a, p), (b, p)]).into();
    Gate::exp(&[a, b], ParamExpr::affine(s.clone(), FRAC_PI_2, 0.0), gen).expect("distinct targets")
}

/// General two-qubit unitary with 15 parameters: local rotations, `ZZ^t`,
/// `YY^t`, `XX^t`, local rotations.
pub fn two_qubit_unitary(a: usize, b: usize, s: &[Symbol]) -> Vec<Gate> {
    let mut g = one_qubit_unitary(a, &s[0..3]);
    g.extend(one_qubit_unitary(b, &s[3..6]));
    g.push(pauli_pair_exp(a, b, Pauli::Z, &s[6]));
    g.push(pauli_pair_exp(a, b, Pauli::Y, &s[7]));
    g.push(pauli_pair_exp(a, b, Pauli::X, &s[8]));
    g.extend(one_qubit_unitary(a, &s[9..12]));
    g.extend(one_qubit_unitary(b, &s[12..15]));
    g
}

/// Basis change on sink and source, CNOT source→sink, then the sink basis
/// change undone. 6 parameters.
pub fn two_qubit_pool(src: usize, snk: usize, s: &[Symbol]) -> Vec<Gate> {
    let sink_basis = one_qubit_unitary(snk, &s[0..3]);
    let mut g = sink_basis.clone();
    g.extend(one_qubit_unitary(src, &s[3..6]));
    g.push(Gate::cnot(src, snk));
    g.extend(sink_basis.iter().rev().map(Gate::inverse));
    g
}

/// Shared two-qubit unitary on every nearest-neighbour pair of `bits`: first
/// the even offsets, then the odd ones closing the ring.
pub fn quantum_conv(n: usize, bits: &[usize], s: &[Symbol]) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    let mut pairs: Vec<(usize, usize)> = bits.iter().step_by(2).copied().zip(bits.iter().skip(1).step_by(2).copied()).collect();
    let mut shifted: Vec<usize> = bits.iter().skip(2).step_by(2).copied().collect();
    shifted.push(bits[0]);
    pairs.extend(bits.iter().skip(1).step_by(2).copied().zip(shifted));
    for (a, b) in pairs {
        if a == b {
            continue;
        }
        for g in two_qubit_unitary(a, b, s) {
            c.push(g)?;
        }
    }
    Ok(c)
}

pub fn quantum_pool(n: usize, srcs: &[usize], snks: &[usize], s: &[Symbol]) -> Result<Circuit> {
    if srcs.len() != snks.len() {
        return Err(Error::InvalidArgument(format!(
            "pooling {} sources into {} sinks",
            srcs.len(),
            snks.len()
        )));
    }
    let mut c = Circuit::new(n);
    for (&a, &b) in srcs.iter().zip(snks) {
        for g in two_qubit_pool(a, b, s) {
            c.push(g)?;
        }
    }
    Ok(c)
}

/// Convolution over `bits` then pooling of the first half into the second.
pub fn qcnn_layers(n: usize, bits: &[usize], conv: &[Symbol], pool: &[Symbol]) -> Result<Circuit> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("cannot pool {} qubits", bits.len())));
    }
    let half = bits.len() / 2;
    let mut c = quantum_conv(n, bits, conv)?;
    c.extend(&quantum_pool(n, &bits[..half], &bits[half..], pool)?)?;
    Ok(c)
}

/// Full model on 8 qubits: three conv/pool stages down to qubit 7. 63 symbols.
pub fn qcnn_circuit(prefix: &str) -> Result<Circuit> {
    let s = symbols(prefix, 63);
    let bits: Vec<usize> = (0..8).collect();
    let mut c = qcnn_layers(8, &bits, &s[0..15], &s[15..21])?;
    c.extend(&qcnn_layers(8, &bits[4..], &s[21..36], &s[36..42])?)?;
    c.extend(&qcnn_layers(8, &bits[6..], &s[42..57], &s[57..63])?)?;
    Ok(c)
}

/// First conv/pool stage only, leaving qubits 4..8 active. 21 symbols.
pub fn truncated_qcnn_circuit(prefix: &str) -> Result<Circuit> {
    let s = symbols(prefix, 21);
    let bits: Vec<usize> = (0..8).collect();
    qcnn_layers(8, &bits, &s[0..15], &s[15..21])
}

/// Excitation angles applied to the cluster state with their labels.
#[derive(Debug, Clone)]
pub struct ClusterStateTask {
    pub n_qubits: usize,
    pub rotation_threshold: f64,
    /// `(qubit, θ)` of each `Rx(θ)` excitation.
    pub excitations: Vec<(usize, f64)>,
    pub labels: Vec<f64>,
}

impl ClusterStateTask {
    /// `rounds` excitations per qubit with `θ ~ U(−π, π)`; label `+1` when
    /// `|θ|` exceeds the threshold.
    pub fn generate(n_qubits: usize, rounds: usize, rotation_threshold: f64, seed: u64) -> Self {
        let mut rng = StreamKey::new(seed).rng();
        let mut excitations = Vec::with_capacity(n_qubits * rounds);
        for _ in 0..rounds {
            for q in 0..n_qubits {
                excitations.push((q, rng.gen_range(-PI..PI)));
            }
        }
        let labels = excitations
            .iter()
            .map(|&(_, t)| label(t, rotation_threshold))
            .collect();
        ClusterStateTask {
            n_qubits,
            rotation_threshold,
            excitations,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Cluster state preparation followed by each excitation.
    pub fn circuits(&self) -> Result<Vec<ConcreteCircuit>> {
        let base = cluster_state_circuit(self.n_qubits)?;
        self.excitations
            .iter()
            .map(|&(q, t)| ConcreteCircuit::new(base.clone().with(Gate::rx(q, t))))
            .collect()
    }

    /// Same excitations with the label rule inverted.
    pub fn relabeled_inverted(&self) -> Self {
        ClusterStateTask {
            labels: self.labels.iter().map(|l| -l).collect(),
            ..self.clone()
        }
    }

    /// Shuffled split with `train_fraction` of the samples in the first part.
    pub fn split(&self, train_fraction: f64, seed: u64) -> (ClusterStateTask, ClusterStateTask) {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut StreamKey::new(seed).rng());
        let cut = (self.len() as f64 * train_fraction).round() as usize;
        let part = |ix: &[usize]| ClusterStateTask {
            n_qubits: self.n_qubits,
            rotation_threshold: self.rotation_threshold,
            excitations: ix.iter().map(|&i| self.excitations[i]).collect(),
            labels: ix.iter().map(|&i| self.labels[i]).collect(),
        };
        (part(&idx[..cut]), part(&idx[cut..]))
    }

    pub fn targets(&self) -> Result<Tensor> {
        Tensor::new(vec![self.len(), 1], self.labels.clone())
    }
}

pub fn label(theta: f64, threshold: f64) -> f64 {
    if theta.abs() > threshold {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcnnVariant {
    /// Conv/pool down to one qubit, `⟨Z₇⟩` as output.
    Quantum,
    /// One truncated QCNN, 4 readouts, `Dense(8) → Dense(1)`.
    Hybrid,
    /// Three truncated QCNNs concatenated (12 readouts), `Dense(8) → Dense(1)`.
    MultiFilter,
}

impl QcnnVariant {
    pub const ALL: [QcnnVariant; 3] = [QcnnVariant::Quantum, QcnnVariant::Hybrid, QcnnVariant::MultiFilter];

    pub fn name(self) -> &'static str {
        match self {
            QcnnVariant::Quantum => "quantum",
            QcnnVariant::Hybrid => "hybrid",
            QcnnVariant::MultiFilter => "multi_filter",
        }
    }
}

fn readouts(qubits: std::ops::Range<usize>) -> Vec<PauliSum> {
    qubits.map(|q| PauliSum::single(1.0, q, Pauli::Z)).collect()
}

pub fn build_qcnn_model(variant: QcnnVariant, differentiator: Differentiator, seed: u64) -> Result<Model> {
    let mut m = Model::new(seed);
    let input = m.circuit_input();
    let pqc = |m: &mut Model, c: Circuit, obs: Vec<PauliSum>| {
        m.pqc(Some(input), c, obs, differentiator, Estimator::Exact)
    };
    let out = match variant {
        QcnnVariant::Quantum => pqc(&mut m, qcnn_circuit("w")?, readouts(7..8))?,
        QcnnVariant::Hybrid => {
            let q = pqc(&mut m, truncated_qcnn_circuit("w")?, readouts(4..8))?;
            let d = m.dense(q, 8, Activation::Linear)?;
            m.dense(d, 1, Activation::Linear)?
        }
        QcnnVariant::MultiFilter => {
            let qs = ["f0", "f1", "f2"]
                .iter()
                .map(|p| pqc(&mut m, truncated_qcnn_circuit(p)?, readouts(4..8)))
                .collect::<Result<Vec<_>>>()?;
            let cat = m.concat(qs)?;
            let d = m.dense(cat, 8, Activation::Linear)?;
            m.dense(d, 1, Activation::Linear)?
        }
    };
    m.set_output(out)?;
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct QcnnConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub differentiator: Differentiator,
}

impl Default for QcnnConfig {
    fn default() -> Self {
        QcnnConfig {
            epochs: 25,
            batch_size: 16,
            lr: 0.02,
            seed: 5,
            differentiator: Differentiator::Adjoint,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VariantRun {
    pub variant: QcnnVariant,
    /// Validation MSE of the untrained model.
    pub baseline_val_mse: f64,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub wall_time_s: f64,
}

impl VariantRun {
    pub fn best_val_mse(&self) -> f64 {
        self.val_loss.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn run_qcnn_variant(
    variant: QcnnVariant,
    train: &ClusterStateTask,
    val: &ClusterStateTask,
    cfg: &QcnnConfig,
) -> Result<VariantRun> {
    let start = Instant::now();
    let (tx, ty) = (Batch::circuits(train.circuits()?), train.targets()?);
    let (vx, vy) = (Batch::circuits(val.circuits()?), val.targets()?);
    let mut model = build_qcnn_model(variant, cfg.differentiator, cfg.seed)?;
    let baseline_val_mse = LossFn::Mse.forward(&model.predict(&vx)?, &vy)?;
    let mut opt = Adam::new(cfg.lr);
    let h = model.fit(
        &tx,
        &ty,
        LossFn::Mse,
        &mut opt,
        FitConfig {
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            seed: cfg.seed,
        },
        Some((&vx, &vy)),
    )?;
    Ok(VariantRun {
        variant,
        baseline_val_mse,
        train_loss: h.loss,
        val_loss: h.val_loss,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Trains all three variants on the same split.
pub fn run_qcnn_variants(task: &ClusterStateTask, cfg: &QcnnConfig) -> Result<Vec<VariantRun>> {
    let (train, val) = task.split(0.7, cfg.seed);
    QcnnVariant::ALL
        .iter()
        .map(|&v| run_qcnn_variant(v, &train, &val, cfg))
        .collect()
}

/// Long-format CSV `variant,epoch,train_loss,val_loss` for plotting.
pub fn histories_csv(runs: &[VariantRun]) -> String {
    let mut s = String::from("variant,epoch,train_loss,val_loss\n");
    for r in runs {
        for (e, (t, v)) in r.train_loss.iter().zip(&r.val_loss).enumerate() {
            s.push_str(&format!("{},{},{t},{v}\n", r.variant.name(), e + 1));
        }
    }
    s
}
