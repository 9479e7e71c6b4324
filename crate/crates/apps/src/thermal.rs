//! Quantum Hamiltonian-based models: a factorized Bernoulli latent
//! distribution pushed through a parameterized unitary,
//! `ρ(θ, φ) = Σ_x p_θ(x) U(φ)|x⟩⟨x|U(φ)†`.
//!
//! Thermal-state preparation minimizes the free energy `β·tr(ρH) − S(ρ)`;
//! modular Hamiltonian learning fits a data density matrix by minimizing the
//! quantum cross entropy. Small dense oracles (Gibbs state, fidelity, exact
//! enumeration) live alongside for validation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use qcflow::grad::{parameter_shift_grad, GradRequest};
use qcflow::hybrid::Adam;
use qcflow::rng::StreamKey;
use qcflow::sim::{expectation, run_on, StateVector};
use qcflow::{
    Bindings, Circuit, Error, Gate, ParamExpr, Pauli, PauliString, PauliSum, Result, Symbol, C64,
};
use rand::Rng;

/// Largest register handled by the dense routines here.
pub const MAX_DENSE_QUBITS: usize = 10;

pub type DensityMatrix = DMatrix<C64>;

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "dense routines support 1..={MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Heisenberg model on a `rows × cols` grid, qubit `r·cols + c`:
/// `Σ_h Jh(XX+YY+ZZ) + Σ_v Jv(XX+YY+ZZ)`.
pub fn heisenberg_2d(rows: usize, cols: usize, jh: f64, jv: f64) -> Result<PauliSum> {
    if rows * cols < 2 {
        return Err(Error::InvalidArgument("lattice needs at least two sites".into()));
    }
    let mut h = PauliSum::new();
    let mut bond = |a: usize, b: usize, j: f64| {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            h.push(PauliString::new(j, [(a, p), (b, p)]));
        }
    };
    for r in 0..rows {
        for c in 0..cols.saturating_sub(1) {
            bond(r * cols + c, r * cols + c + 1, jh);
        }
    }
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols {
            bond(r * cols + c, (r + 1) * cols + c, jv);
        }
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct ThermalTarget {
    pub hamiltonian: PauliSum,
    pub beta: f64,
    pub num_qubits: usize,
}

impl ThermalTarget {
    pub fn new(hamiltonian: PauliSum, beta: f64, num_qubits: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
        }
        if hamiltonian.max_qubit().is_some_and(|q| q >= num_qubits) {
            return Err(Error::InvalidArgument("hamiltonian acts outside the register".into()));
        }
        Ok(ThermalTarget {
            hamiltonian,
            beta,
            num_qubits,
        })
    }

    pub fn dense_hamiltonian(&self) -> Result<DensityMatrix> {
        dense_operator(&self.hamiltonian, self.num_qubits)
    }

    /// `σ_β = e^{−βH}/Z_β` by diagonalization.
    pub fn gibbs_state(&self) -> Result<DensityMatrix> {
        let eig = self.dense_hamiltonian()?.symmetric_eigen();
        let shift = eig.eigenvalues.min();
        let w: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&e| (-self.beta * (e - shift)).exp())
            .collect();
        let z: f64 = w.iter().sum();
        Ok(from_spectrum(&eig.eigenvectors, &w.iter().map(|x| x / z).collect::<Vec<_>>()))
    }

    /// `log tr e^{−βH}`; the free energy is bounded below by its negative.
    pub fn log_partition(&self) -> Result<f64> {
        let eig = self.dense_hamiltonian()?.symmetric_eigen();
        let shift = eig.eigenvalues.min();
        let z: f64 = eig
            .eigenvalues
            .iter()
            .map(|&e| (-self.beta * (e - shift)).exp())
            .sum();
        Ok(z.ln() - self.beta * shift)
    }
}

pub fn dense_operator(h: &PauliSum, n: usize) -> Result<DensityMatrix> {
    check_size(n)?;
    let targets: Vec<usize> = (0..n).collect();
    Ok(h.matrix_on(&targets)?.to_nalgebra())
}

/// `V diag(w) V†`.
fn from_spectrum(v: &DMatrix<C64>, w: &[f64]) -> DMatrix<C64> {
    let mut scaled = v.clone();
    for (k, &x) in w.iter().enumerate() {
        scaled.column_mut(k).scale_mut(x);
    }
    &scaled * v.adjoint()
}

fn hermitian_sqrt(m: &DensityMatrix) -> DensityMatrix {
    let eig = m.clone().symmetric_eigen();
    let w: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).collect();
    from_spectrum(&eig.eigenvectors, &w)
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let s = hermitian_sqrt(rho);
    let inner = &s * sigma * &s;
    let inner = (&inner + inner.adjoint()).scale(0.5);
    let t: f64 = inner
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum();
    t * t
}

/// `−tr ρ log ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|&&x| x > 1e-15)
        .map(|&x| -x * x.ln())
        .sum()
}

/// Checks trace one, Hermiticity and positivity within `tol`.
pub fn check_density_matrix(rho: &DensityMatrix, tol: f64) -> Result<()> {
    if rho.nrows() != rho.ncols() || !rho.nrows().is_power_of_two() {
        return Err(Error::Shape(format!("{}×{} density matrix", rho.nrows(), rho.ncols())));
    }
    check_size(rho.nrows().trailing_zeros() as usize)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidArgument(format!("density matrix has trace {tr}")));
    }
    if (rho - rho.adjoint()).iter().any(|z| z.norm() > tol) {
        return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
    }
    if rho.clone().symmetric_eigen().eigenvalues.min() < -tol {
        return Err(Error::InvalidArgument("density matrix is not positive".into()));
    }
    Ok(())
}

/// Factorized Bernoulli distribution over bit strings as an energy-based model.
///
/// Bits `x_j ∈ {0, 1}` map to spins `s_j = 2x_j − 1`; the energy is
/// `E(x) = −Σ θ_j s_j`, so `p(x_j = 1) = e^{θ_j}/(e^{θ_j} + e^{−θ_j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliEBM {
    pub theta: Vec<f64>,
}

fn spin(x: u64, j: usize) -> f64 {
    if (x >> j) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `log(e^a + e^{−a})` without overflow.
fn log_2cosh(a: f64) -> f64 {
    a.abs() + (-2.0 * a.abs()).exp().ln_1p()
}

impl BernoulliEBM {
    pub fn new(theta: Vec<f64>) -> Self {
        BernoulliEBM { theta }
    }

    pub fn uniform(n: usize) -> Self {
        BernoulliEBM { theta: vec![0.0; n] }
    }

    pub fn num_bits(&self) -> usize {
        self.theta.len()
    }

    pub fn prob_one(&self, j: usize) -> f64 {
        1.0 / (1.0 + (-2.0 * self.theta[j]).exp())
    }

    pub fn energy(&self, x: u64) -> f64 {
        -self
            .theta
            .iter()
            .enumerate()
            .map(|(j, t)| t * spin(x, j))
            .sum::<f64>()
    }

    /// `∇_θ E(x) = −s`.
    pub fn energy_grad(&self, x: u64) -> Vec<f64> {
        (0..self.num_bits()).map(|j| -spin(x, j)).collect()
    }

    pub fn log_partition(&self) -> f64 {
        self.theta.iter().map(|&t| log_2cosh(t)).sum()
    }

    pub fn log_prob(&self, x: u64) -> f64 {
        -self.energy(x) - self.log_partition()
    }

    pub fn prob(&self, x: u64) -> f64 {
        self.log_prob(x).exp()
    }

    /// All `2^n` probabilities, index = bit string.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        check_size(self.num_bits())?;
        Ok((0..1u64 << self.num_bits()).map(|x| self.prob(x)).collect())
    }

    /// Closed-form Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        (0..self.num_bits())
            .map(|j| {
                let p = self.prob_one(j);
                let h = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
                h(p) + h(1.0 - p)
            })
            .sum()
    }

    /// `E_p[s_j] = tanh θ_j`.
    pub fn mean_spin(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t.tanh()).collect()
    }

    pub fn sample(&self, count: usize, rng: &mut impl Rng) -> Vec<u64> {
        let p: Vec<f64> = (0..self.num_bits()).map(|j| self.prob_one(j)).collect();
        (0..count)
            .map(|_| {
                p.iter()
                    .enumerate()
                    .filter(|&(_, &pj)| rng.gen::<f64>() < pj)
                    .map(|(j, _)| 1u64 << j)
                    .sum()
            })
            .collect()
    }
}

/// Per qubit `X^a Y^b Z^c`, then `CNOT^t` on horizontal pairs and on vertical
/// pairs of the grid, repeated `layers` times. Symbols are fresh per gate.
pub fn grid_ansatz(rows: usize, cols: usize, layers: usize) -> Circuit {
    let n = rows * cols;
    let mut c = Circuit::new(n);
    let sym = |name: String| ParamExpr::symbol(Symbol::new(name));
    for l in 0..layers {
        for q in 0..n {
            c.push(Gate::xpow(q, sym(format!("a{l}_{q}")))).expect("in range");
            c.push(Gate::ypow(q, sym(format!("b{l}_{q}")))).expect("in range");
            c.push(Gate::zpow(q, sym(format!("c{l}_{q}")))).expect("in range");
        }
        let mut k = 0;
        let mut pairs = Vec::new();
        for r in 0..rows {
            for col in (0..cols.saturating_sub(1)).step_by(2) {
                pairs.push((r * cols + col, r * cols + col + 1));
            }
        }
        for r in (0..rows.saturating_sub(1)).step_by(2) {
            for col in 0..cols {
                pairs.push((r * cols + col, (r + 1) * cols + col));
            }
        }
        for (a, b) in pairs {
            c.push(Gate::cnot_pow(a, b, sym(format!("t{l}_{k}")))).expect("in range");
            k += 1;
        }
    }
    c
}

/// A parameterized unitary together with its current parameter values (in
/// [`Circuit::symbols`] order).
#[derive(Debug, Clone)]
pub struct Qnn {
    pub circuit: Circuit,
    pub phi: Vec<f64>,
}

impl Qnn {
    pub fn new(circuit: Circuit, phi: Vec<f64>) -> Result<Self> {
        let m = circuit.symbols().len();
        if phi.len() != m {
            return Err(Error::Shape(format!("{} values for {m} symbols", phi.len())));
        }
        Ok(Qnn { circuit, phi })
    }

    /// Parameters drawn uniformly from `[−scale, scale]`.
    pub fn random(circuit: Circuit, scale: f64, rng: &mut impl Rng) -> Self {
        let phi = circuit
            .symbols()
            .iter()
            .map(|_| rng.gen_range(-scale..=scale))
            .collect();
        Qnn { circuit, phi }
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    pub fn bindings(&self) -> Bindings {
        self.circuit.symbols().into_iter().zip(self.phi.iter().copied()).collect()
    }

    /// `U|x⟩`.
    pub fn apply_to_basis(&self, x: u64) -> Result<StateVector> {
        let mut s = StateVector::basis(self.num_qubits(), x as usize)?;
        run_on(&mut s, &self.circuit.resolve_values(&self.phi)?)?;
        Ok(s)
    }

    /// Dense `U(φ)`.
    pub fn unitary(&self) -> Result<DMatrix<C64>> {
        let n = self.num_qubits();
        check_size(n)?;
        let dim = 1usize << n;
        let c = self.circuit.resolve_values(&self.phi)?;
        let mut u = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            let mut s = StateVector::basis(n, x)?;
            run_on(&mut s, &c)?;
            for (r, &a) in s.amplitudes().iter().enumerate() {
                u[(r, x)] = a;
            }
        }
        Ok(u)
    }

    /// `H_φ(x) = ⟨x|U†HU|x⟩`.
    pub fn energy(&self, h: &PauliSum, x: u64) -> Result<f64> {
        expectation(&self.apply_to_basis(x)?, h)
    }

    /// `∇_φ H_φ(x)` by the parameter-shift rule.
    pub fn energy_grad(&self, h: &PauliSum, x: u64) -> Result<Vec<f64>> {
        let req = GradRequest::new(self.circuit.clone(), h.clone(), self.bindings())
            .with_initial_state(StateVector::basis(self.num_qubits(), x as usize)?);
        Ok(parameter_shift_grad(&req)?.gradient)
    }
}

/// `Σ_x p_θ(x) U|x⟩⟨x|U†`.
pub fn model_density(ebm: &BernoulliEBM, qnn: &Qnn) -> Result<DensityMatrix> {
    if ebm.num_bits() != qnn.num_qubits() {
        return Err(Error::QubitCountMismatch {
            left: ebm.num_bits(),
            right: qnn.num_qubits(),
        });
    }
    Ok(from_spectrum(&qnn.unitary()?, &ebm.probabilities()?))
}

/// Exact free energy `β·Σ_x p(x) H_φ(x) − S(p)` by enumeration.
pub fn vqt_free_energy_exact(ebm: &BernoulliEBM, qnn: &Qnn, target: &ThermalTarget) -> Result<f64> {
    check_pair(ebm, qnn, target)?;
    let p = ebm.probabilities()?;
    let mut e = 0.0;
    for (x, &px) in p.iter().enumerate() {
        e += px * qnn.energy(&target.hamiltonian, x as u64)?;
    }
    Ok(target.beta * e - ebm.entropy())
}

fn check_pair(ebm: &BernoulliEBM, qnn: &Qnn, target: &ThermalTarget) -> Result<()> {
    if ebm.num_bits() != target.num_qubits || qnn.num_qubits() != target.num_qubits {
        return Err(Error::QubitCountMismatch {
            left: ebm.num_bits(),
            right: target.num_qubits,
        });
    }
    check_size(target.num_qubits)
}

/// Counts of each distinct bit string.
fn histogram(samples: &[u64]) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for &x in samples {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

/// Sampled free-energy gradients from one batch of bit strings.
#[derive(Debug, Clone)]
pub struct VqtGradients {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Sample estimate of the free energy (entropy from the closed form).
    pub free_energy: f64,
}

/// θ by the covariance `Cov_p(E − βH_φ, ∇E)`, φ by `β·mean ∇_φ H_φ(x)` with
/// parameter shift; each distinct bit string is simulated once.
pub fn vqt_gradients(
    target: &ThermalTarget,
    ebm: &BernoulliEBM,
    qnn: &Qnn,
    samples: &[u64],
) -> Result<VqtGradients> {
    check_pair(ebm, qnn, target)?;
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let n = ebm.num_bits();
    let total = samples.len() as f64;
    let mut mean_f = 0.0;
    let mut mean_g = vec![0.0; n];
    let mut mean_fg = vec![0.0; n];
    let mut mean_h = 0.0;
    let mut phi = vec![0.0; qnn.phi.len()];
    for (x, count) in histogram(samples) {
        let w = count as f64 / total;
        let h = qnn.energy(&target.hamiltonian, x)?;
        let f = ebm.energy(x) - target.beta * h;
        let g = ebm.energy_grad(x);
        mean_f += w * f;
        mean_h += w * h;
        for j in 0..n {
            mean_g[j] += w * g[j];
            mean_fg[j] += w * f * g[j];
        }
        for (acc, d) in phi.iter_mut().zip(qnn.energy_grad(&target.hamiltonian, x)?) {
            *acc += w * target.beta * d;
        }
    }
    let theta = (0..n).map(|j| mean_fg[j] - mean_f * mean_g[j]).collect();
    Ok(VqtGradients {
        theta,
        phi,
        free_energy: target.beta * mean_h - ebm.entropy(),
    })
}

#[derive(Debug, Clone)]
pub struct VqtConfig {
    pub steps: usize,
    pub lr: f64,
    pub samples_per_step: usize,
    pub seed: u64,
}

impl Default for VqtConfig {
    fn default() -> Self {
        VqtConfig {
            steps: 300,
            lr: 0.05,
            samples_per_step: 500,
            seed: 11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VqtRun {
    pub ebm: BernoulliEBM,
    pub qnn: Qnn,
    /// Exact free energy before each step, then after the last.
    pub free_energy: Vec<f64>,
    /// `−log Z_β`.
    pub bound: f64,
}

/// Adam on θ and φ jointly with sampled gradients.
pub fn vqt_train(target: &ThermalTarget, mut qnn: Qnn, mut ebm: BernoulliEBM, cfg: &VqtConfig) -> Result<VqtRun> {
    check_pair(&ebm, &qnn, target)?;
    let key = StreamKey::new(cfg.seed);
    let n = ebm.num_bits();
    let mut opt = Adam::new(cfg.lr);
    let mut history = Vec::with_capacity(cfg.steps + 1);
    for step in 0..cfg.steps {
        history.push(vqt_free_energy_exact(&ebm, &qnn, target)?);
        let samples = ebm.sample(cfg.samples_per_step, &mut key.child(step as u64).rng());
        let g = vqt_gradients(target, &ebm, &qnn, &samples)?;
        if !g.free_energy.is_finite() {
            return Err(Error::NonFinite(format!("free energy at step {step}")));
        }
        let mut params: Vec<f64> = ebm.theta.iter().chain(&qnn.phi).copied().collect();
        let grads: Vec<f64> = g.theta.into_iter().chain(g.phi).collect();
        opt.step(&mut params, &grads)?;
        ebm.theta.copy_from_slice(&params[..n]);
        qnn.phi.copy_from_slice(&params[n..]);
    }
    history.push(vqt_free_energy_exact(&ebm, &qnn, target)?);
    Ok(VqtRun {
        ebm,
        qnn,
        free_energy: history,
        bound: -target.log_partition()?,
    })
}

/// `σ_φ(x) = ⟨x|U†σU|x⟩` for every `x`.
pub fn pulled_back_distribution(data: &DensityMatrix, qnn: &Qnn) -> Result<Vec<f64>> {
    let u = qnn.unitary()?;
    let m = u.adjoint() * data * &u;
    Ok((0..m.nrows()).map(|i| m[(i, i)].re).collect())
}

/// `Σ_x σ_φ(x) E_θ(x) + log Z_θ`.
pub fn qmhl_loss_exact(data: &DensityMatrix, ebm: &BernoulliEBM, qnn: &Qnn) -> Result<f64> {
    let s = pulled_back_distribution(data, qnn)?;
    let e: f64 = s.iter().enumerate().map(|(x, p)| p * ebm.energy(x as u64)).sum();
    Ok(e + ebm.log_partition())
}

#[derive(Debug, Clone)]
pub struct QmhlGradients {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Cross-entropy gradients.
///
/// θ: `E_{σ_φ}[∇E] − E_p[∇E]`. φ: parameter shift of `tr(σ U D U†)` with the
/// diagonal operator `D = Σ_x E_θ(x)|x⟩⟨x| = Σ_j θ_j Z_j`, evaluated on each
/// eigenvector of the data state run through the inverse circuit.
pub fn qmhl_step(data: &DensityMatrix, ebm: &BernoulliEBM, qnn: &Qnn) -> Result<QmhlGradients> {
    check_density_matrix(data, 1e-8)?;
    let n = qnn.num_qubits();
    if data.nrows() != 1 << n || ebm.num_bits() != n {
        return Err(Error::QubitCountMismatch {
            left: data.nrows().trailing_zeros() as usize,
            right: n,
        });
    }
    let sigma = pulled_back_distribution(data, qnn)?;
    let mut data_spin = vec![0.0; n];
    for (x, &p) in sigma.iter().enumerate() {
        for (j, acc) in data_spin.iter_mut().enumerate() {
            *acc += p * spin(x as u64, j);
        }
    }
    // ∇E = −s, so E_σ[∇E] − E_p[∇E] = tanh θ − E_σ[s].
    let theta = ebm
        .mean_spin()
        .iter()
        .zip(&data_spin)
        .map(|(m, d)| m - d)
        .collect();

    let d_op = PauliSum::from_terms(
        ebm.theta
            .iter()
            .enumerate()
            .map(|(j, &t)| PauliString::single(t, j, Pauli::Z)),
    );
    let inverse = qnn.circuit.inverse();
    let inv_syms = inverse.symbols();
    let b = qnn.bindings();
    let eig = data.clone().symmetric_eigen();
    let mut by_symbol = vec![0.0; inv_syms.len()];
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() < 1e-12 {
            continue;
        }
        let v = StateVector::from_amplitudes(eig.eigenvectors.column(k).iter().copied().collect())?;
        let req = GradRequest::new(inverse.clone(), d_op.clone(), b.clone()).with_initial_state(v);
        for (acc, g) in by_symbol.iter_mut().zip(parameter_shift_grad(&req)?.gradient) {
            *acc += lambda * g;
        }
    }
    let index: BTreeMap<&Symbol, usize> = inv_syms.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let phi = qnn
        .circuit
        .symbols()
        .iter()
        .map(|s| by_symbol[index[s]])
        .collect();
    Ok(QmhlGradients { theta, phi })
}

#[derive(Debug, Clone)]
pub struct QmhlConfig {
    pub steps: usize,
    pub lr: f64,
}

impl Default for QmhlConfig {
    fn default() -> Self {
        QmhlConfig { steps: 300, lr: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct QmhlRun {
    pub ebm: BernoulliEBM,
    pub qnn: Qnn,
    /// Exact cross entropy before each step, then after the last.
    pub loss: Vec<f64>,
}

pub fn qmhl_train(data: &DensityMatrix, mut qnn: Qnn, mut ebm: BernoulliEBM, cfg: &QmhlConfig) -> Result<QmhlRun> {
    let n = ebm.num_bits();
    let mut opt = Adam::new(cfg.lr);
    let mut loss = Vec::with_capacity(cfg.steps + 1);
    for _ in 0..cfg.steps {
        loss.push(qmhl_loss_exact(data, &ebm, &qnn)?);
        let g = qmhl_step(data, &ebm, &qnn)?;
        let mut params: Vec<f64> = ebm.theta.iter().chain(&qnn.phi).copied().collect();
        let grads: Vec<f64> = g.theta.into_iter().chain(g.phi).collect();
        opt.step(&mut params, &grads)?;
        ebm.theta.copy_from_slice(&params[..n]);
        qnn.phi.copy_from_slice(&params[n..]);
    }
    loss.push(qmhl_loss_exact(data, &ebm, &qnn)?);
    Ok(QmhlRun { ebm, qnn, loss })
}
