//! MaxCut with the quantum approximate optimization algorithm.

use qcflow::grad::Estimator;
use qcflow::hybrid::{Adam, Batch, Differentiator, FitConfig, LossFn, Model, Tensor};
use qcflow::rng::StreamKey;
use qcflow::sim::{run_on, sample_keyed, StateVector};
use qcflow::{
    exponential_circuit, Circuit, ConcreteCircuit, Error, Gate, ParamExpr, Pauli, PauliString,
    PauliSum, Result, Symbol,
};
use rand::seq::SliceRandom;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxCutProblem {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    /// Number of cost/mixer blocks.
    pub p: usize,
}

impl MaxCutProblem {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("QAOA depth p must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &edges {
            if a == b || a >= nodes || b >= nodes {
                return Err(Error::InvalidArgument(format!("bad edge ({a}, {b})")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({a}, {b})")));
            }
        }
        let prob = MaxCutProblem { nodes, edges, p };
        if !prob.is_connected() {
            return Err(Error::InvalidArgument("graph is not connected".into()));
        }
        Ok(prob)
    }

    fn is_connected(&self) -> bool {
        if self.nodes == 0 {
            return false;
        }
        let mut seen = vec![false; self.nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Number of edges whose endpoints differ in bit string `x` (bit `v` is node `v`).
    pub fn cut_value(&self, x: u64) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| ((x >> a) ^ (x >> b)) & 1 == 1)
            .count()
    }

    /// Eigenvalue of the cost Hamiltonian on `|x⟩`: the number of uncut edges.
    pub fn cost(&self, x: u64) -> f64 {
        (self.edges.len() - self.cut_value(x)) as f64
    }

    /// Exhaustive maximum cut and one bit string attaining it.
    pub fn brute_force(&self) -> Result<(usize, u64)> {
        if self.nodes > 30 {
            return Err(Error::InvalidArgument("brute force limited to 30 nodes".into()));
        }
        Ok((0..1u64 << self.nodes)
            .map(|x| (self.cut_value(x), x))
            .fold((0, 0), |b, c| if c.0 > b.0 { c } else { b }))
    }
}

/// Random connected simple `d`-regular graph by repeated stub matching.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if !(n * d).is_multiple_of(2) || d >= n {
        return Err(Error::InvalidArgument(format!("no {d}-regular graph on {n} nodes")));
    }
    let key = StreamKey::new(seed);
    for attempt in 0..10_000u64 {
        let mut rng = key.child(attempt).rng();
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(&mut rng);
        let mut edges: Vec<(usize, usize)> = stubs
            .chunks(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        edges.sort_unstable();
        let simple = edges.iter().all(|&(a, b)| a != b) && edges.windows(2).all(|w| w[0] != w[1]);
        if simple && MaxCutProblem::new(n, edges.clone(), 1).is_ok() {
            return Ok(edges);
        }
    }
    Err(Error::InvalidArgument("failed to draw a regular graph".into()))
}

/// `|E|/2 + Σ_{(j,k)∈E} ½ Z_j Z_k`.
pub fn cost_hamiltonian(problem: &MaxCutProblem) -> PauliSum {
    let mut h = PauliSum::new();
    h.push(PauliString::identity(problem.edges.len() as f64 / 2.0));
    for &(a, b) in &problem.edges {
        h.push(PauliString::new(0.5, [(a, Pauli::Z), (b, Pauli::Z)]));
    }
    h
}

pub fn mixer_hamiltonian(nodes: usize) -> PauliSum {
    PauliSum::from_terms((0..nodes).map(|q| PauliString::single(1.0, q, Pauli::X)))
}

pub fn hadamard_layer(nodes: usize) -> Circuit {
    (0..nodes).fold(Circuit::new(nodes), |c, q| c.with(Gate::h(q)))
}

/// Symbols `gamma_ℓ`, `eta_ℓ` in block order.
pub fn qaoa_symbols(p: usize) -> Vec<(Symbol, Symbol)> {
    (0..p)
        .map(|l| (Symbol::new(format!("gamma_{l}")), Symbol::new(format!("eta_{l}"))))
        .collect()
}

/// Parameterized blocks `exp(−iη_ℓ H_M)·exp(−iγ_ℓ H_C)` without the Hadamard
/// layer, and the cost Hamiltonian.
pub fn qaoa_blocks(problem: &MaxCutProblem) -> Result<(Circuit, PauliSum)> {
    let hc = cost_hamiltonian(problem);
    let hm = mixer_hamiltonian(problem.nodes);
    let mut c = Circuit::new(problem.nodes);
    for (g, e) in qaoa_symbols(problem.p) {
        c.extend(&exponential_circuit(
            problem.nodes,
            &[hc.clone(), hm.clone()],
            &[ParamExpr::symbol(g), ParamExpr::symbol(e)],
        )?)?;
    }
    Ok((c, hc))
}

/// Hadamard layer followed by the QAOA blocks.
pub fn build_maxcut_qaoa(problem: &MaxCutProblem) -> Result<(Circuit, PauliSum)> {
    let (blocks, hc) = qaoa_blocks(problem)?;
    let mut c = hadamard_layer(problem.nodes);
    c.extend(&blocks)?;
    Ok((c, hc))
}

#[derive(Debug, Clone)]
pub struct QaoaConfig {
    pub steps: usize,
    pub lr: f64,
    pub shots: usize,
    pub seed: u64,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        QaoaConfig {
            steps: 300,
            lr: 0.05,
            shots: 2048,
            seed: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QaoaRun {
    /// `[γ_0, η_0, γ_1, η_1, …]`.
    pub angles: Vec<f64>,
    /// `⟨H_C⟩` before each step, then after the last.
    pub energy_history: Vec<f64>,
    pub best_bitstring: u64,
    pub best_cut: usize,
    pub optimum_cut: usize,
}

impl QaoaRun {
    pub fn initial_energy(&self) -> f64 {
        self.energy_history[0]
    }

    pub fn final_energy(&self) -> f64 {
        *self.energy_history.last().unwrap()
    }

    pub fn approximation_ratio(&self) -> f64 {
        self.best_cut as f64 / self.optimum_cut.max(1) as f64
    }
}

/// Trains the angles against a target of zero under mean absolute error (the
/// cost Hamiltonian is nonnegative), then samples the optimized state and keeps
/// the lowest-cost bit string.
pub fn run_qaoa(problem: &MaxCutProblem, cfg: &QaoaConfig) -> Result<QaoaRun> {
    let (blocks, hc) = qaoa_blocks(problem)?;
    let mut model = Model::new(cfg.seed);
    let input = model.circuit_input();
    let q = model.pqc(
        Some(input),
        blocks.clone(),
        vec![hc],
        Differentiator::ParameterShift,
        Estimator::Exact,
    )?;
    model.set_output(q)?;
    let x = Batch::circuits(vec![ConcreteCircuit::new(hadamard_layer(problem.nodes))?]);
    let y = Tensor::zeros(vec![1, 1]);
    let mut opt = Adam::new(cfg.lr);
    let mut energy_history = Vec::with_capacity(cfg.steps + 1);
    for step in 0..cfg.steps {
        let h = model.fit(
            &x,
            &y,
            LossFn::MeanAbsoluteError,
            &mut opt,
            FitConfig {
                epochs: 1,
                batch_size: 1,
                seed: step as u64,
            },
            None,
        )?;
        energy_history.push(h.loss[0]);
    }
    energy_history.push(model.predict(&x)?.get(0, 0));

    let angles = model.quantum_params(q).unwrap().to_vec();
    let mut state = StateVector::zero(problem.nodes)?;
    run_on(&mut state, &ConcreteCircuit::new(hadamard_layer(problem.nodes))?)?;
    run_on(&mut state, &blocks.resolve_values(&angles)?)?;
    let shots = sample_keyed(&state, cfg.shots, StreamKey::new(cfg.seed).child(0xa11))?;
    let best = shots
        .bitstrings
        .iter()
        .copied()
        .min_by(|&a, &b| problem.cost(a).total_cmp(&problem.cost(b)))
        .ok_or_else(|| Error::InvalidArgument("no shots".into()))?;
    Ok(QaoaRun {
        angles,
        energy_history,
        best_bitstring: best,
        best_cut: problem.cut_value(best),
        optimum_cut: problem.brute_force()?.0,
    })
}
