//! Application demos: each writes CSV histories and a `summary.json` into an
//! output directory.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qcflow::rng::StreamKey;
use qcflow::Result;
use qcflow_apps::barren::barren_plateau_scan;
use qcflow_apps::bloch::{moving_average, run_binary_classifier, BlochDatasetSpec, ClassifierConfig};
use qcflow_apps::qaoa::{random_regular_graph, run_qaoa, MaxCutProblem, QaoaConfig};
use qcflow_apps::qcnn::{histories_csv, run_qcnn_variants, ClusterStateTask, QcnnConfig};
use qcflow_apps::thermal::{
    fidelity, grid_ansatz, heisenberg_2d, model_density, qmhl_step, qmhl_train, vqt_train, BernoulliEBM,
    QmhlConfig, Qnn, ThermalTarget, VqtConfig, VqtRun,
};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoName {
    Classifier,
    Qaoa,
    Qcnn,
    Barren,
    Vqt,
    Qmhl,
}

impl DemoName {
    pub const ALL: [DemoName; 6] = [
        DemoName::Classifier,
        DemoName::Qaoa,
        DemoName::Qcnn,
        DemoName::Barren,
        DemoName::Vqt,
        DemoName::Qmhl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DemoName::Classifier => "classifier",
            DemoName::Qaoa => "qaoa",
            DemoName::Qcnn => "qcnn",
            DemoName::Barren => "barren",
            DemoName::Vqt => "vqt",
            DemoName::Qmhl => "qmhl",
        }
    }
}

impl FromStr for DemoName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        DemoName::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = DemoName::ALL.iter().map(|d| d.name()).collect();
                format!("unknown demo `{s}` ({})", names.join(", "))
            })
    }
}

/// Overrides for the pinned demo settings. `steps` means epochs for the
/// classifier and QCNN, trials for the barren scan and optimizer steps
/// elsewhere.
#[derive(Debug, Clone, Default)]
pub struct DemoOptions {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub beta: Option<f64>,
}

pub struct DemoOutput {
    pub summary: Value,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
}

impl DemoOutput {
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, text) in &self.files {
            let p = dir.join(name);
            fs::write(&p, text)?;
            paths.push(p);
        }
        let p = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        fs::write(&p, text + "\n")?;
        paths.push(p);
        Ok(paths)
    }
}

fn series_csv(header: &str, xs: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (i, x) in xs.iter().enumerate() {
        s.push_str(&format!("{i},{x}\n"));
    }
    s
}

pub fn run_demo(name: DemoName, opts: &DemoOptions) -> Result<DemoOutput> {
    match name {
        DemoName::Classifier => classifier(opts),
        DemoName::Qaoa => qaoa(opts),
        DemoName::Qcnn => qcnn(opts),
        DemoName::Barren => barren(opts),
        DemoName::Vqt => vqt(opts).map(|(out, _)| out),
        DemoName::Qmhl => qmhl(opts),
    }
}

fn classifier(opts: &DemoOptions) -> Result<DemoOutput> {
    let spec = BlochDatasetSpec {
        theta_a: 1.0,
        theta_b: 4.0,
        num_samples: 200,
        seed: opts.seed.unwrap_or(42),
    };
    let mut cfg = ClassifierConfig::default();
    if let Some(e) = opts.steps {
        cfg.epochs = e;
    }
    let run = run_binary_classifier(&spec, &cfg)?;
    let smooth = moving_average(&run.history.loss, 5);
    let mut csv = String::from("epoch,loss,loss_ma5\n");
    for (i, l) in run.history.loss.iter().enumerate() {
        let ma = if i >= 4 { smooth[i - 4].to_string() } else { String::new() };
        csv.push_str(&format!("{i},{l},{ma}\n"));
    }
    Ok(DemoOutput {
        summary: json!({
            "demo": "classifier",
            "test_accuracy": run.test_accuracy,
            "final_loss": run.history.loss.last(),
            "seeds": {"data": spec.seed, "model": cfg.model_seed, "test": cfg.test_seed},
            "config": {"theta_a": spec.theta_a, "theta_b": spec.theta_b, "num_samples": spec.num_samples,
                       "epochs": cfg.epochs, "lr": cfg.lr, "batch_size": cfg.batch_size},
        }),
        files: vec![("history.csv".into(), csv)],
    })
}

fn qaoa(opts: &DemoOptions) -> Result<DemoOutput> {
    let graph_seed = 2020;
    let problem = MaxCutProblem::new(10, random_regular_graph(10, 3, graph_seed)?, 1)?;
    let mut cfg = QaoaConfig::default();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(s) = opts.steps {
        cfg.steps = s;
    }
    let run = run_qaoa(&problem, &cfg)?;
    Ok(DemoOutput {
        summary: json!({
            "demo": "qaoa",
            "initial_energy": run.initial_energy(),
            "final_energy": run.final_energy(),
            "angles": run.angles,
            "best_bitstring": format!("{:0width$b}", run.best_bitstring, width = problem.nodes),
            "best_cut": run.best_cut,
            "optimum_cut": run.optimum_cut,
            "approximation_ratio": run.approximation_ratio(),
            "edges": problem.edges,
            "seeds": {"graph": graph_seed, "training": cfg.seed},
            "config": {"nodes": 10, "degree": 3, "p": 1, "steps": cfg.steps, "lr": cfg.lr, "shots": cfg.shots},
        }),
        files: vec![("history.csv".into(), series_csv("step,energy", &run.energy_history))],
    })
}

fn qcnn(opts: &DemoOptions) -> Result<DemoOutput> {
    let task_seed = 17;
    let task = ClusterStateTask::generate(8, 20, FRAC_PI_2, task_seed);
    let mut cfg = QcnnConfig::default();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(e) = opts.steps {
        cfg.epochs = e;
    }
    let runs = run_qcnn_variants(&task, &cfg)?;
    let variants: Vec<Value> = runs
        .iter()
        .map(|r| {
            json!({
                "variant": r.variant.name(),
                "baseline_val_mse": r.baseline_val_mse,
                "best_val_mse": r.best_val_mse(),
                "final_val_mse": r.val_loss.last(),
                "wall_time_s": r.wall_time_s,
            })
        })
        .collect();
    Ok(DemoOutput {
        summary: json!({
            "demo": "qcnn",
            "variants": variants,
            "seeds": {"task": task_seed, "training": cfg.seed},
            "config": {"n_qubits": 8, "rounds": 20, "epochs": cfg.epochs, "batch_size": cfg.batch_size, "lr": cfg.lr},
        }),
        files: vec![("histories.csv".into(), histories_csv(&runs))],
    })
}

fn barren(opts: &DemoOptions) -> Result<DemoOutput> {
    let seed = opts.seed.unwrap_or(9);
    let trials = opts.steps.unwrap_or(200);
    let depth = 50;
    let scan = barren_plateau_scan(&[2, 4, 6, 8], depth, trials, seed)?;
    let mut csv = String::from("n_qubits,variance\n");
    for (n, v) in &scan {
        csv.push_str(&format!("{n},{v}\n"));
    }
    Ok(DemoOutput {
        summary: json!({
            "demo": "barren",
            "variances": scan.iter().map(|(n, v)| json!({"n_qubits": n, "variance": v})).collect::<Vec<_>>(),
            "seeds": {"scan": seed},
            "config": {"depth": depth, "trials": trials},
        }),
        files: vec![("variances.csv".into(), csv)],
    })
}

fn vqt_target(beta: f64) -> Result<ThermalTarget> {
    ThermalTarget::new(heisenberg_2d(2, 2, 1.0, 1.0)?, beta, 4)
}

fn vqt(opts: &DemoOptions) -> Result<(DemoOutput, VqtRun)> {
    let seed = opts.seed.unwrap_or(1);
    let beta = opts.beta.unwrap_or(1.0);
    let target = vqt_target(beta)?;
    let mut cfg = VqtConfig {
        seed,
        ..VqtConfig::default()
    };
    if let Some(s) = opts.steps {
        cfg.steps = s;
    }
    let qnn = Qnn::random(grid_ansatz(2, 2, 2), 0.5, &mut StreamKey::new(seed).rng());
    let run = vqt_train(&target, qnn, BernoulliEBM::uniform(4), &cfg)?;
    let f = fidelity(&model_density(&run.ebm, &run.qnn)?, &target.gibbs_state()?);
    let min_gap = run
        .free_energy
        .iter()
        .map(|x| x - run.bound)
        .fold(f64::INFINITY, f64::min);
    let out = DemoOutput {
        summary: json!({
            "demo": "vqt",
            "fidelity": f,
            "final_free_energy": run.free_energy.last(),
            "bound": run.bound,
            "min_gap_to_bound": min_gap,
            "theta": run.ebm.theta,
            "seeds": {"training": seed},
            "config": {"rows": 2, "cols": 2, "jh": 1.0, "jv": 1.0, "beta": beta, "layers": 2,
                       "steps": cfg.steps, "lr": cfg.lr, "samples_per_step": cfg.samples_per_step},
        }),
        files: vec![("history.csv".into(), series_csv("step,free_energy", &run.free_energy))],
    };
    Ok((out, run))
}

fn qmhl(opts: &DemoOptions) -> Result<DemoOutput> {
    // The data state is the VQT output at its pinned settings.
    let (_, vqt_run) = vqt(&DemoOptions {
        beta: opts.beta,
        ..DemoOptions::default()
    })?;
    let data = model_density(&vqt_run.ebm, &vqt_run.qnn)?;
    let seed = opts.seed.unwrap_or(6);
    let mut cfg = QmhlConfig::default();
    if let Some(s) = opts.steps {
        cfg.steps = s;
    }
    let qnn = Qnn::random(grid_ansatz(2, 2, 2), 0.5, &mut StreamKey::new(seed).rng());
    let run = qmhl_train(&data, qnn, BernoulliEBM::uniform(4), &cfg)?;
    let f = fidelity(&model_density(&run.ebm, &run.qnn)?, &data);
    let at_data = qmhl_step(&data, &vqt_run.ebm, &vqt_run.qnn)?;
    let stationary = at_data.theta.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    Ok(DemoOutput {
        summary: json!({
            "demo": "qmhl",
            "fidelity": f,
            "final_loss": run.loss.last(),
            "theta_grad_inf_norm_at_data": stationary,
            "seeds": {"model": seed, "data_vqt": 1},
            "config": {"steps": cfg.steps, "lr": cfg.lr, "beta": opts.beta.unwrap_or(1.0)},
        }),
        files: vec![("history.csv".into(), series_csv("step,loss", &run.loss))],
    })
}
