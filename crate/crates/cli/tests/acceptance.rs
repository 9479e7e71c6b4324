//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line to
//! standard error, and the test fails if any criterion does.
//!
//! Criteria run one after another inside a single test so the timing check
//! does not share the CPU with other tests.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::time::Instant;

use common::*;
use qcflow::grad::{
    finite_difference_grad, parameter_shift_grad, stochastic_ps_samples, FdScheme, GradRequest, StochasticConfig,
};
use qcflow::hybrid::{Activation, Batch, Differentiator, LossFn, Model, Tensor};
use qcflow::grad::Estimator;
use qcflow::rng::StreamKey;
use qcflow::sim::{fuse, simulate};
use qcflow::{bindings, Bindings, Circuit, ConcreteCircuit, Gate, ParamExpr, Pauli, PauliString, PauliSum};
use qcflow_apps::barren::barren_plateau_scan;
use qcflow_apps::bloch::{moving_average, run_binary_classifier, BlochDatasetSpec, ClassifierConfig};
use qcflow_apps::qaoa::{random_regular_graph, run_qaoa, MaxCutProblem, QaoaConfig};
use qcflow_apps::qcnn::{histories_csv, run_qcnn_variants, ClusterStateTask, QcnnConfig};
use qcflow_apps::thermal::{
    fidelity, grid_ansatz, heisenberg_2d, model_density, qmhl_step, qmhl_train, vqt_train, BernoulliEBM,
    QmhlConfig, Qnn, ThermalTarget, VqtConfig, VqtRun,
};
use qcflow_cli::bench::{checksum, gen_random_dense, run_bench, BenchConfig, Family, FuseMode};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fused_unitary(c: &ConcreteCircuit) -> Dense {
    let mut u = Dense::identity(1 << c.num_qubits());
    for g in &fuse(c).unwrap().gates {
        u = embed(&g.matrix, &g.targets, c.num_qubits()).mul(&u);
    }
    u
}

fn fusion_soundness() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = 2 + i % 5;
        let depth = r.gen_range(1..=30);
        let c = ConcreteCircuit::new(random_concrete(n, depth, &mut r)).unwrap();
        let d = fused_unitary(&c).max_diff(&circuit_unitary(c.circuit(), &Bindings::new()));
        worst = worst.max(d);
    }
    let mut mismatches = 0;
    for seed in 0..3 {
        let c = gen_random_dense(16, 30, seed).unwrap();
        if checksum(&simulate(&c, false).unwrap()) != checksum(&simulate(&c, true).unwrap()) {
            mismatches += 1;
        }
    }
    outcome(
        worst <= 1e-9 && mismatches == 0,
        format!("max unitary diff {worst:.2e} over 200 circuits; n=16 checksum mismatches {mismatches}/3"),
    )
}

fn fusion_speedup() -> Outcome {
    let cfg = BenchConfig {
        qubits: vec![16],
        depth: 40,
        num_circuits: 4,
        batch_size: 2,
        families: vec![Family::Structured, Family::RandomDense],
        fuse: FuseMode::Both,
        seed: 2024,
        repetitions: 3,
        workers: 1,
        ..BenchConfig::default()
    };
    let recs = run_bench(&cfg).unwrap();
    let speedup = |f: Family| {
        let t = |fused: bool| recs.iter().find(|r| r.family == f && r.fused == fused).unwrap().wall_time_s;
        t(false) / t(true)
    };
    let checks = recs.chunks(2).all(|p| p[0].amplitude_checksum == p[1].amplitude_checksum);
    let (s, d) = (speedup(Family::Structured), speedup(Family::RandomDense));
    outcome(
        s >= 2.0 && d >= 0.95 && checks,
        format!("median speedup structured {s:.2}x (need 2), random_dense {d:.2}x (need 0.95); checksums equal: {checks}"),
    )
}

fn zz(a: usize, b: usize, c: f64) -> PauliString {
    PauliString::new(c, [(a, Pauli::Z), (b, Pauli::Z)])
}

fn sps_fixture() -> GradRequest {
    let gen = PauliSum::from_terms([
        zz(0, 1, 0.9),
        PauliString::single(-0.4, 0, Pauli::Z),
        PauliString::single(0.25, 1, Pauli::Z),
    ]);
    let c = Circuit::new(3)
        .with(Gate::h(0))
        .with(Gate::h(1))
        .with(Gate::h(2))
        .with(Gate::exp(&[0, 1], "g".into(), gen).unwrap())
        .with(Gate::exp(&[1, 2], "g".into(), zz(1, 2, -1.3).into()).unwrap())
        .with(Gate::rx(0, "b"))
        .with(Gate::rx(1, ParamExpr::affine("b", 0.6, 0.0)))
        .with(Gate::ry(2, "c"))
        .with(Gate::cnot_pow(2, 0, "c"));
    let obs = PauliSum::from_terms([
        zz(0, 1, 1.0),
        zz(1, 2, -0.5),
        PauliString::single(0.8, 2, Pauli::X),
        PauliString::identity(1.5),
    ]);
    GradRequest::new(c, obs, bindings([("g", 0.37), ("b", -0.81), ("c", 1.2)]))
}

fn gradient_equivalence() -> Outcome {
    let mut r = rng(202);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let n = 1 + i % 5;
        let (c, b) = random_parameterized(n, 6 + i % 20, 1 + i % 8, &mut r);
        let req = GradRequest::new(c, random_pauli_sum(n, 3, &mut r), b);
        let ps = parameter_shift_grad(&req).unwrap();
        let fd = finite_difference_grad(&req, FdScheme::Central, 1e-5).unwrap();
        for (a, e) in ps.gradient.iter().zip(&fd.gradient) {
            worst = worst.max((a - e).abs());
        }
    }
    let req = sps_fixture();
    let exact = parameter_shift_grad(&req).unwrap().gradient;
    let n = 10_000;
    // Worst |mean − exact| / (3σ + 1e-12); the floor covers round-off on
    // enumerated axes, whose estimates have zero variance.
    let mut worst_ratio: f64 = 0.0;
    for flags in 0..8u8 {
        let cfg = StochasticConfig {
            sample_generator_terms: flags & 1 != 0,
            sample_cost_terms: flags & 2 != 0,
            sample_coordinates: flags & 4 != 0,
            num_samples: n,
            seed: 2000 + flags as u64,
        };
        let (rows, _, _) = stochastic_ps_samples(&req, &cfg).unwrap();
        for (i, &e) in exact.iter().enumerate() {
            let mean = rows.iter().map(|r| r[i]).sum::<f64>() / n as f64;
            let var = rows.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            worst_ratio = worst_ratio.max((mean - e).abs() / (3.0 * se + 1e-12));
        }
    }
    outcome(
        worst <= 1e-4 && worst_ratio <= 1.0,
        format!(
            "PS vs central FD max |Δ| {worst:.2e} (need 1e-4); SPS worst |Δ|/(3σ) {worst_ratio:.2} over 8 flag sets at 10^4 samples (need <= 1)"
        ),
    )
}

fn hybrid_backprop() -> Outcome {
    let mut m = Model::new(7);
    let x = m.feature_input(2);
    let h = m.dense(x, 2, Activation::Linear).unwrap();
    let c = Circuit::new(2)
        .with(Gate::ry(0, "a"))
        .with(Gate::ry(1, "b"))
        .with(Gate::cnot(0, 1))
        .with(Gate::rx(1, "a"));
    let obs = vec![
        PauliSum::single(1.0, 1, Pauli::Z),
        PauliSum::from_terms([PauliString::new(0.7, [(0, Pauli::X), (1, Pauli::Z)])]),
    ];
    let q = m
        .controlled_pqc(None, h, c, obs, Differentiator::ParameterShift, Estimator::Exact)
        .unwrap();
    let y = m.dense(q, 1, Activation::Linear).unwrap();
    m.set_output(y).unwrap();

    let mut r = rng(303);
    let mut rand_tensor = |rows: usize, cols: usize| {
        Tensor::new(vec![rows, cols], (0..rows * cols).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
    };
    let xb = Batch::features(rand_tensor(4, 2));
    let target = rand_tensor(4, 1);
    let (_, g) = m.loss_and_grad(&xb, &target, LossFn::Mse).unwrap();
    let p0 = m.params();
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..p0.len() {
        let mut p = p0.clone();
        p[i] += eps;
        m.set_params(&p).unwrap();
        let lp = m.loss_and_grad(&xb, &target, LossFn::Mse).unwrap().0;
        p[i] -= 2.0 * eps;
        m.set_params(&p).unwrap();
        let lm = m.loss_and_grad(&xb, &target, LossFn::Mse).unwrap().0;
        let fd = (lp - lm) / (2.0 * eps);
        worst = worst.max((g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1e-8));
    }
    outcome(
        p0.len() <= 10 && worst <= 1e-4,
        format!("{} parameters, max relative error {worst:.2e} (need 1e-4)", p0.len()),
    )
}

fn classifier() -> Outcome {
    let spec = BlochDatasetSpec {
        theta_a: 1.0,
        theta_b: 4.0,
        num_samples: 200,
        seed: 42,
    };
    let cfg = ClassifierConfig::default();
    assert_eq!((cfg.epochs, cfg.lr), (50, 0.1));
    let t0 = Instant::now();
    let run = run_binary_classifier(&spec, &cfg).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let ma = moving_average(&run.history.loss, 5);
    let monotone = ma.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        run.test_accuracy >= 0.95 && monotone && run.history.loss.len() == 50 && secs < 60.0,
        format!("test accuracy {:.3} (need 0.95); 5-epoch moving average monotone: {monotone}; {secs:.1}s", run.test_accuracy),
    )
}

fn qaoa() -> Outcome {
    let problem = MaxCutProblem::new(10, random_regular_graph(10, 3, 2020).unwrap(), 1).unwrap();
    let t0 = Instant::now();
    let run = run_qaoa(&problem, &QaoaConfig::default()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let ratio = run.approximation_ratio();
    outcome(
        ratio >= 0.85 && run.final_energy() < run.initial_energy() && secs < 120.0,
        format!(
            "best cut {}/{} (ratio {ratio:.3}, need 0.85); <H_C> {:.4} -> {:.4}; {secs:.1}s",
            run.best_cut,
            run.optimum_cut,
            run.initial_energy(),
            run.final_energy()
        ),
    )
}

fn qcnn() -> Outcome {
    let task = ClusterStateTask::generate(8, 20, FRAC_PI_2, 17);
    let cfg = QcnnConfig::default();
    let t0 = Instant::now();
    let runs = run_qcnn_variants(&task, &cfg).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let csv = histories_csv(&runs);
    let path = std::env::temp_dir().join(format!("qcflow-acceptance-qcnn-{}.csv", std::process::id()));
    std::fs::write(&path, &csv).unwrap();
    let csv_ok = csv.lines().next() == Some("variant,epoch,train_loss,val_loss")
        && csv.lines().count() == 1 + 3 * cfg.epochs;
    let mut pass = csv_ok && secs < 600.0 && runs.len() == 3;
    let mut parts = Vec::new();
    for r in &runs {
        let ok = r.val_loss.len() <= 25 && r.best_val_mse() < 0.5 * r.baseline_val_mse;
        pass &= ok;
        parts.push(format!("{} {:.3}/{:.3}", r.variant.name(), r.best_val_mse(), r.baseline_val_mse));
    }
    outcome(
        pass,
        format!("best/baseline val MSE: {} (need < 0.5x); CSV {} ok: {csv_ok}; {secs:.1}s", parts.join(", "), path.display()),
    )
}

fn barren() -> Outcome {
    let t0 = Instant::now();
    let scan = barren_plateau_scan(&[2, 4, 6, 8], 50, 200, 9).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let v: Vec<f64> = scan.iter().map(|(_, v)| *v).collect();
    let decreasing = v.windows(2).all(|w| w[1] < w[0]);
    outcome(
        decreasing && v[3] < v[0] / 10.0 && secs < 600.0,
        format!(
            "Var = {} (strictly decreasing: {decreasing}; Var(2)/Var(8) = {:.1}, need > 10); {secs:.1}s",
            v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", "),
            v[0] / v[3]
        ),
    )
}

fn heisenberg_target() -> ThermalTarget {
    ThermalTarget::new(heisenberg_2d(2, 2, 1.0, 1.0).unwrap(), 1.0, 4).unwrap()
}

fn train_vqt() -> VqtRun {
    let seed = 1;
    let qnn = Qnn::random(grid_ansatz(2, 2, 2), 0.5, &mut StreamKey::new(seed).rng());
    let cfg = VqtConfig {
        seed,
        ..VqtConfig::default()
    };
    vqt_train(&heisenberg_target(), qnn, BernoulliEBM::uniform(4), &cfg).unwrap()
}

fn vqt(run: &VqtRun, secs: f64) -> Outcome {
    let target = heisenberg_target();
    let f = fidelity(&model_density(&run.ebm, &run.qnn).unwrap(), &target.gibbs_state().unwrap());
    let min_gap = run.free_energy.iter().map(|x| x - run.bound).fold(f64::INFINITY, f64::min);
    outcome(
        f >= 0.95 && min_gap >= -1e-6 && secs < 600.0,
        format!("fidelity {f:.4} (need 0.95); min F - (-log Z) = {min_gap:.3e} (need >= -1e-6); {secs:.1}s"),
    )
}

fn qmhl(vqt_run: &VqtRun) -> Outcome {
    let data = model_density(&vqt_run.ebm, &vqt_run.qnn).unwrap();
    let qnn = Qnn::random(grid_ansatz(2, 2, 2), 0.5, &mut StreamKey::new(6).rng());
    let run = qmhl_train(&data, qnn, BernoulliEBM::uniform(4), &QmhlConfig::default()).unwrap();
    let f = fidelity(&model_density(&run.ebm, &run.qnn).unwrap(), &data);
    let g = qmhl_step(&data, &vqt_run.ebm, &vqt_run.qnn).unwrap();
    let inf = g.theta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    outcome(
        f >= 0.95 && inf < 1e-8,
        format!("fidelity to data {f:.4} (need 0.95); ||theta-grad||_inf at model = data {inf:.2e} (need < 1e-8)"),
    )
}

#[test]
fn acceptance() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &dyn Fn() -> Outcome| {
        let o = f();
        // Written to the stderr handle directly so the lines show even when
        // the harness captures test output.
        let line = format!("\n[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        let _ = std::io::stderr().write_all(line.as_bytes());
        results.push((name, o));
    };
    run("1 fusion soundness", &fusion_soundness);
    run("2 fusion speedup", &fusion_speedup);
    run("3 gradient equivalence", &gradient_equivalence);
    run("4 hybrid backprop", &hybrid_backprop);
    run("5 binary classifier", &classifier);
    run("6 QAOA MaxCut", &qaoa);
    run("7 QCNN", &qcnn);
    run("8 barren plateau", &barren);
    let t0 = Instant::now();
    let vqt_run = train_vqt();
    let secs = t0.elapsed().as_secs_f64();
    run("9 VQT", &|| vqt(&vqt_run, secs));
    run("10 QMHL", &|| qmhl(&vqt_run));
    let _ = std::io::stderr().write_all(b"\n");
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
