//! Command-line front end for qcflow: circuit simulation, expectation values,
//! sampling, gradients, the fusion benchmark and the application demos.
//!
//! Circuits and observables are read in the JSON form of [`qcflow::json`].
//! Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.

pub mod bench;
pub mod demo;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcflow::grad::{
    adjoint_grad, finite_difference_grad, parameter_shift_grad, stochastic_ps_grad, FdScheme, GradRequest,
    StochasticConfig,
};
use qcflow::json::{circuit_from_json, pauli_sum_from_json};
use qcflow::rng::StreamKey;
use qcflow::sim::{expectation, sample_keyed, sampled_expectation_state, simulate};
use qcflow::{Bindings, Circuit, ConcreteCircuit, Error, PauliSum, Result, Symbol};
use serde_json::json;

use bench::{run_bench, to_csv, BenchConfig, Family, FuseMode};
use demo::{run_demo, DemoName, DemoOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qcflow", version, about = "Differentiable quantum circuit simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CircuitArgs {
    /// Circuit JSON file.
    circuit: PathBuf,
    /// Symbol values as `name=value`.
    #[arg(long, num_args = 1.., value_name = "NAME=VALUE")]
    bindings: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the final state of a circuit applied to |0…0⟩.
    Simulate {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Write the state JSON here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the gate-fusion pass.
        #[arg(long)]
        no_fuse: bool,
    },
    /// Expectation value of an observable.
    Expectation {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Observable JSON file.
        observable: PathBuf,
        /// Estimate from this many shots per Pauli term instead of exactly.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw measurement outcomes; each line lists qubit 0 first.
    Sample {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gradient of an expectation value with respect to every symbol.
    Grad {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Observable JSON file.
        observable: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Ps)]
        method: Method,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        /// Sampled axes for `sps`: any of `g` (generator terms), `c` (cost
        /// terms), `p` (coordinates).
        #[arg(long, default_value = "")]
        sps_flags: String,
        /// Samples averaged by `sps`.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time simulation with and without gate fusion; CSV output.
    Bench(BenchArgs),
    /// Run an application demo and write CSV histories and summary.json.
    Demo {
        /// One of classifier, qaoa, qcnn, barren, vqt, qmhl.
        name: DemoName,
        #[arg(long, default_value = "demo-output")]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Epochs, trials or optimizer steps, depending on the demo.
        #[arg(long)]
        steps: Option<usize>,
        /// Inverse temperature for vqt and qmhl.
        #[arg(long)]
        beta: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    /// Forward difference.
    Fd,
    /// Central difference.
    Central,
    /// Parameter shift.
    Ps,
    /// Stochastic parameter shift.
    Sps,
    /// Parameter-shift values from one forward and one backward sweep.
    Adjoint,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Register sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16")]
    qubits: Vec<usize>,
    #[arg(long, default_value_t = 40)]
    depth: usize,
    #[arg(long, default_value_t = 10)]
    num_circuits: usize,
    #[arg(long, default_value_t = 5)]
    batch_size: usize,
    /// Circuit families, comma separated: random_dense, structured.
    #[arg(long, value_delimiter = ',', default_value = "random_dense,structured")]
    family: Vec<Family>,
    #[arg(long, default_value_t = 4)]
    block_size: usize,
    /// on, off or both.
    #[arg(long, default_value = "both")]
    fuse: FuseMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure of a command: bad input from the user, or an error while running.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn parse_bindings(items: &[String]) -> Result<Bindings> {
    let mut b = Bindings::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("binding `{item}` is not NAME=VALUE")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| usage(format!("binding `{item}`: `{v}` is not a number")))?;
        b.insert(Symbol::new(k.trim()), v);
    }
    Ok(b)
}

fn load_circuit(args: &CircuitArgs) -> CliResult<(Circuit, Bindings)> {
    let c = circuit_from_json(&read(&args.circuit)?)?;
    Ok((c, parse_bindings(&args.bindings)?))
}

fn load_observable(path: &Path) -> CliResult<PauliSum> {
    Ok(pauli_sum_from_json(&read(path)?)?)
}

fn resolved(args: &CircuitArgs) -> CliResult<ConcreteCircuit> {
    let (c, b) = load_circuit(args)?;
    Ok(c.resolve(&b)?)
}

fn write_or_print(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn sps_config(flags: &str, samples: usize, seed: u64) -> Result<StochasticConfig> {
    if let Some(c) = flags.chars().find(|c| !"gcp".contains(*c)) {
        return Err(usage(format!("unknown sps flag `{c}` (use g, c, p)")));
    }
    Ok(StochasticConfig {
        sample_generator_terms: flags.contains('g'),
        sample_cost_terms: flags.contains('c'),
        sample_coordinates: flags.contains('p'),
        num_samples: samples,
        seed,
    })
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let w = |out: &mut dyn Write, s: String| -> CliResult<()> { Ok(writeln!(out, "{s}")?) };
    match cmd {
        Command::Simulate { circuit, out, no_fuse } => {
            let state = simulate(&resolved(&circuit)?, !no_fuse)?;
            let amps: Vec<[f64; 2]> = state.amplitudes().iter().map(|a| [a.re, a.im]).collect();
            let text = serde_json::to_string_pretty(&json!({
                "num_qubits": state.num_qubits(),
                "amplitudes": amps,
            }))
            .expect("state serializes");
            write_or_print(out.as_deref(), &(text + "\n"), stdout)
        }
        Command::Expectation {
            circuit,
            observable,
            shots,
            seed,
        } => {
            let state = simulate(&resolved(&circuit)?, true)?;
            let obs = load_observable(&observable)?;
            match shots {
                None => w(stdout, format!("{:.6}", expectation(&state, &obs)?)),
                Some(s) => {
                    let e = sampled_expectation_state(&state, &obs, s, StreamKey::new(seed))?;
                    w(stdout, format!("{:.6} ± {:.6}", e.value, e.std_err))
                }
            }
        }
        Command::Sample { circuit, shots, seed } => {
            let state = simulate(&resolved(&circuit)?, true)?;
            let batch = sample_keyed(&state, shots, StreamKey::new(seed))?;
            let mut text = String::with_capacity(shots * (batch.num_qubits + 1));
            for i in 0..batch.shots() {
                text.extend(batch.bits(i).iter().map(|&b| if b == 1 { '1' } else { '0' }));
                text.push('\n');
            }
            write_or_print(None, &text, stdout)
        }
        Command::Grad {
            circuit,
            observable,
            method,
            eps,
            sps_flags,
            samples,
            seed,
        } => {
            let (c, b) = load_circuit(&circuit)?;
            let req = GradRequest::new(c, load_observable(&observable)?, b);
            let r = match method {
                Method::Fd => finite_difference_grad(&req, FdScheme::Forward, eps)?,
                Method::Central => finite_difference_grad(&req, FdScheme::Central, eps)?,
                Method::Ps => parameter_shift_grad(&req)?,
                Method::Sps => stochastic_ps_grad(&req, &sps_config(&sps_flags, samples, seed)?)?,
                Method::Adjoint => adjoint_grad(&req)?,
            };
            if let Some(warn) = &r.warning {
                w(stderr, format!("warning: {warn}"))?;
            }
            for (s, g) in req.circuit.symbols().iter().zip(&r.gradient) {
                w(stdout, format!("{} {:.10}", s.name(), g))?;
            }
            Ok(())
        }
        Command::Bench(a) => {
            let cfg = BenchConfig {
                qubits: a.qubits,
                depth: a.depth,
                num_circuits: a.num_circuits,
                batch_size: a.batch_size,
                families: a.family,
                block_size: a.block_size,
                seed: a.seed,
                fuse: a.fuse,
                repetitions: a.repetitions,
                workers: a.workers,
            };
            let records = run_bench(&cfg)?;
            write_or_print(a.out.as_deref(), &to_csv(&records), stdout)
        }
        Command::Demo {
            name,
            out_dir,
            seed,
            steps,
            beta,
        } => {
            let out = run_demo(name, &DemoOptions { seed, steps, beta })?;
            for p in out.write(&out_dir)? {
                w(stderr, format!("wrote {}", p.display()))?;
            }
            w(
                stdout,
                serde_json::to_string_pretty(&out.summary).expect("summary serializes"),
            )
        }
    }
}


/// Parses `argv` (program name first), runs the command and returns the exit
/// status; diagnostics go to `stderr`.
pub fn cli_main<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}\n\nRun `qcflow --help` for usage.");
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_RUNTIME
        }
    }
}
