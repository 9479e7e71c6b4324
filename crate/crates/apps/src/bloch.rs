//! Single-qubit binary classification of two blobs on the Bloch sphere.

use qcflow::grad::Estimator;
use qcflow::hybrid::{Activation, Adam, Batch, Differentiator, FitConfig, History, LossFn, Model, Tensor};
use qcflow::rng::StreamKey;
use qcflow::{Circuit, ConcreteCircuit, Error, Gate, Pauli, PauliSum, Result};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDatasetSpec {
    pub theta_a: f64,
    pub theta_b: f64,
    pub num_samples: usize,
    pub seed: u64,
}

impl BlochDatasetSpec {
    pub fn blob_size(&self) -> f64 {
        (self.theta_a - self.theta_b).abs() / 5.0
    }
}

/// Circuits `Ry(−angle)·Rx(−spread_x)` applied to `|0⟩`, with one-hot labels
/// `[1, 0]` for class a and `[0, 1]` for class b.
pub fn generate_bloch_dataset(spec: &BlochDatasetSpec) -> Result<(Vec<ConcreteCircuit>, Tensor)> {
    if spec.num_samples < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = StreamKey::new(spec.seed).rng();
    let blob = spec.blob_size();
    let mut circuits = Vec::with_capacity(spec.num_samples);
    let mut labels = Vec::with_capacity(spec.num_samples * 2);
    for _ in 0..spec.num_samples {
        let coin: f64 = rng.gen();
        let (sx, sy) = if blob > 0.0 {
            (rng.gen_range(-blob..blob), rng.gen_range(-blob..blob))
        } else {
            (0.0, 0.0)
        };
        let angle = if coin < 0.5 {
            labels.extend([1.0, 0.0]);
            spec.theta_a + sy
        } else {
            labels.extend([0.0, 1.0]);
            spec.theta_b + sy
        };
        let c = Circuit::new(1)
            .with(Gate::ry(0, -angle))
            .with(Gate::rx(0, -sx));
        circuits.push(ConcreteCircuit::new(c)?);
    }
    Ok((circuits, Tensor::new(vec![spec.num_samples, 2], labels)?))
}

/// `PQC(Ry(θ), Z) → Dense(2, softmax)`.
pub fn binary_classifier(seed: u64) -> Result<Model> {
    let mut m = Model::new(seed);
    let input = m.circuit_input();
    let q = m.pqc(
        Some(input),
        Circuit::new(1).with(Gate::ry(0, "theta")),
        vec![PauliSum::single(1.0, 0, Pauli::Z)],
        Differentiator::ParameterShift,
        Estimator::Exact,
    )?;
    let out = m.dense(q, 2, Activation::Softmax)?;
    m.set_output(out)?;
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub model_seed: u64,
    /// Seed of the held-out draw; must differ from the training seed.
    pub test_seed: u64,
    pub test_samples: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            epochs: 50,
            lr: 0.1,
            batch_size: 32,
            model_seed: 7,
            test_seed: 1001,
            test_samples: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifierRun {
    pub model: Model,
    pub history: History,
    pub test_accuracy: f64,
}

/// Fraction of rows whose arg-max prediction matches the one-hot label.
pub fn accuracy(pred: &Tensor, labels: &Tensor) -> f64 {
    let argmax = |r: &[f64]| {
        r.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
            .0
    };
    let hits = (0..pred.rows())
        .filter(|&r| argmax(pred.row(r)) == argmax(labels.row(r)))
        .count();
    hits as f64 / pred.rows().max(1) as f64
}

/// Trains the classifier with categorical cross entropy and Adam, then scores
/// it on a fresh draw from the same distribution.
pub fn run_binary_classifier(spec: &BlochDatasetSpec, cfg: &ClassifierConfig) -> Result<ClassifierRun> {
    let (x, y) = generate_bloch_dataset(spec)?;
    let mut model = binary_classifier(cfg.model_seed)?;
    let mut opt = Adam::new(cfg.lr);
    let history = model.fit(
        &Batch::circuits(x),
        &y,
        LossFn::CategoricalCrossEntropy,
        &mut opt,
        FitConfig {
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            seed: spec.seed ^ 0x5eed,
        },
        None,
    )?;
    let test = BlochDatasetSpec {
        num_samples: cfg.test_samples,
        seed: cfg.test_seed,
        ..*spec
    };
    let (tx, ty) = generate_bloch_dataset(&test)?;
    let pred = model.predict(&Batch::circuits(tx))?;
    Ok(ClassifierRun {
        test_accuracy: accuracy(&pred, &ty),
        model,
        history,
    })
}

/// Trailing moving average with window `w` (first value at index `w − 1`).
pub fn moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    if w == 0 || xs.len() < w {
        return Vec::new();
    }
    xs.windows(w).map(|s| s.iter().sum::<f64>() / w as f64).collect()
}
