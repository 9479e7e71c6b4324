//! Fused-vs-unfused simulation benchmark.
//!
//! Two circuit families share one layer recipe: a random X/Y/Z rotation with
//! angle in `[0, 2π)` on every qubit, then CZs on a brick pattern whose offset
//! alternates with the layer. `RandomDense` lays the brick across the whole
//! register; `Structured` confines it to disjoint blocks, so entanglement
//! never leaves a block.

use std::f64::consts::TAU;
use std::fmt;
use std::hash::Hasher;
use std::str::FromStr;
use std::time::Instant;

use qcflow::rng::StreamKey;
use qcflow::sim::{check_qubit_limit, fuse, simulate, StateVector};
use qcflow::{Circuit, ConcreteCircuit, Error, Gate, Result};
use rand::Rng;
use rayon::prelude::*;

pub const CSV_HEADER: &str = "n_qubits,family,fused,raw_gates,fused_gates,wall_time_s,checksum";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    RandomDense,
    Structured,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RandomDense => "random_dense",
            Family::Structured => "structured",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random_dense" | "random-dense" => Ok(Family::RandomDense),
            "structured" => Ok(Family::Structured),
            _ => Err(format!("unknown family `{s}` (random_dense, structured)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuseMode {
    On,
    Off,
    Both,
}

impl FuseMode {
    fn flags(self) -> &'static [bool] {
        match self {
            FuseMode::On => &[true],
            FuseMode::Off => &[false],
            FuseMode::Both => &[false, true],
        }
    }
}

impl FromStr for FuseMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "on" => Ok(FuseMode::On),
            "off" => Ok(FuseMode::Off),
            "both" => Ok(FuseMode::Both),
            _ => Err(format!("unknown fuse mode `{s}` (on, off, both)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub qubits: Vec<usize>,
    pub depth: usize,
    pub num_circuits: usize,
    pub batch_size: usize,
    pub families: Vec<Family>,
    pub block_size: usize,
    pub seed: u64,
    pub fuse: FuseMode,
    pub repetitions: usize,
    /// Rayon workers used to simulate the circuits of one batch.
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            qubits: vec![4, 8, 12, 16],
            depth: 40,
            num_circuits: 10,
            batch_size: 5,
            families: vec![Family::RandomDense, Family::Structured],
            block_size: 4,
            seed: 0,
            fuse: FuseMode::Both,
            repetitions: 3,
            workers: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.qubits.is_empty() || self.families.is_empty() {
            return bad("at least one qubit count and one family are required".into());
        }
        if self.batch_size == 0 || self.num_circuits == 0 || !self.num_circuits.is_multiple_of(self.batch_size) {
            return bad(format!(
                "num_circuits ({}) must be a positive multiple of batch_size ({})",
                self.num_circuits, self.batch_size
            ));
        }
        if self.repetitions == 0 || self.workers == 0 {
            return bad("repetitions and workers must be positive".into());
        }
        for &n in &self.qubits {
            check_qubit_limit(n)?;
            if n < 2 {
                return bad(format!("{n} qubits: at least 2 are required"));
            }
            if self.families.contains(&Family::Structured) && n % self.block_size != 0 {
                return bad(format!("{n} qubits is not divisible by block size {}", self.block_size));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub n_qubits: usize,
    pub family: Family,
    pub fused: bool,
    /// Gate counts summed over the circuits of the cell.
    pub raw_gate_count: usize,
    pub fused_gate_count: usize,
    /// Median over repetitions of the time to simulate every timed batch.
    pub wall_time_s: f64,
    pub amplitude_checksum: u64,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:016x}",
            self.n_qubits,
            self.family,
            self.fused,
            self.raw_gate_count,
            self.fused_gate_count,
            self.wall_time_s,
            self.amplitude_checksum
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn rotation(q: usize, rng: &mut impl Rng) -> Gate {
    let angle = rng.gen_range(0.0..TAU);
    match rng.gen_range(0..3) {
        0 => Gate::rx(q, angle),
        1 => Gate::ry(q, angle),
        _ => Gate::rz(q, angle),
    }
}

/// Brick CZs on `lo..hi` starting at `lo + offset`.
fn brick(c: &mut Circuit, lo: usize, hi: usize, offset: usize) -> Result<()> {
    let mut a = lo + offset;
    while a + 1 < hi {
        c.push(Gate::cz(a, a + 1))?;
        a += 2;
    }
    Ok(())
}

fn layered(n: usize, depth: usize, seed: u64, block: usize) -> Result<ConcreteCircuit> {
    let mut rng = StreamKey::new(seed).rng();
    let mut c = Circuit::new(n);
    for layer in 0..depth {
        for q in 0..n {
            c.push(rotation(q, &mut rng))?;
        }
        for lo in (0..n).step_by(block) {
            brick(&mut c, lo, lo + block, layer % 2)?;
        }
    }
    ConcreteCircuit::new(c)
}

pub fn gen_random_dense(n: usize, depth: usize, seed: u64) -> Result<ConcreteCircuit> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("{n} qubits: at least 2 are required")));
    }
    layered(n, depth, seed, n)
}

pub fn gen_structured(n: usize, depth: usize, block_size: usize, seed: u64) -> Result<ConcreteCircuit> {
    if block_size < 2 || !n.is_multiple_of(block_size) {
        return Err(Error::InvalidArgument(format!(
            "{n} qubits is not divisible into blocks of {block_size} (block size must be at least 2)"
        )));
    }
    layered(n, depth, seed, block_size)
}

pub fn generate(family: Family, n: usize, depth: usize, block_size: usize, seed: u64) -> Result<ConcreteCircuit> {
    match family {
        Family::RandomDense => gen_random_dense(n, depth, seed),
        Family::Structured => gen_structured(n, depth, block_size, seed),
    }
}

/// Hash of the state rounded to 1e-9.
///
/// The amplitudes are first projected onto eight fixed pseudo-random ±1/±i
/// patterns and the projections are rounded, not the amplitudes themselves:
/// rounding each of 2^n amplitudes would make two states equal to 1e-14 hash
/// differently whenever any amplitude sits near a rounding boundary.
pub fn checksum(state: &StateVector) -> u64 {
    const PROJECTIONS: u64 = 8;
    let mut h = std::collections::hash_map::DefaultHasher::new();
    h.write_usize(state.num_qubits());
    for p in 0..PROJECTIONS {
        let mut acc = qcflow::C64::new(0.0, 0.0);
        for (x, a) in state.amplitudes().iter().enumerate() {
            let r = StreamKey::new(p).child(x as u64).id();
            let w = match r & 3 {
                0 => qcflow::C64::new(1.0, 0.0),
                1 => qcflow::C64::new(-1.0, 0.0),
                2 => qcflow::C64::new(0.0, 1.0),
                _ => qcflow::C64::new(0.0, -1.0),
            };
            acc += w * a;
        }
        h.write_i64((acc.re * 1e9).round() as i64);
        h.write_i64((acc.im * 1e9).round() as i64);
    }
    h.finish()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn simulate_batch(batch: &[ConcreteCircuit], fused: bool) -> Result<Vec<StateVector>> {
    batch.par_iter().map(|c| simulate(c, fused)).collect()
}

/// One record per `(n, family, fuse)` cell, in that nesting order.
///
/// Each cell draws `num_circuits` circuits plus one warm-up batch from
/// substreams of `seed`; the warm-up batch runs once untimed before the
/// repetitions.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let root = StreamKey::new(cfg.seed);
    let mut out = Vec::new();
    for &n in &cfg.qubits {
        for (fi, &family) in cfg.families.iter().enumerate() {
            let key = root.child(n as u64).child(fi as u64);
            let total = cfg.num_circuits + cfg.batch_size;
            let circuits = (0..total)
                .map(|i| generate(family, n, cfg.depth, cfg.block_size, key.child(i as u64).id()))
                .collect::<Result<Vec<_>>>()?;
            let (warmup, timed) = circuits.split_at(cfg.batch_size);
            let raw: usize = timed.iter().map(|c| c.len()).sum();
            let fused_count = timed
                .iter()
                .map(|c| fuse(c).map(|f| f.len()))
                .sum::<Result<usize>>()?;
            for &fused in cfg.fuse.flags() {
                pool.install(|| simulate_batch(warmup, fused))?;
                let mut times = Vec::with_capacity(cfg.repetitions);
                let mut sum = 0u64;
                for rep in 0..cfg.repetitions {
                    let mut elapsed = 0.0;
                    for batch in timed.chunks(cfg.batch_size) {
                        let t0 = Instant::now();
                        let states = pool.install(|| simulate_batch(batch, fused))?;
                        elapsed += t0.elapsed().as_secs_f64();
                        if rep == 0 {
                            for s in &states {
                                sum = sum.rotate_left(5) ^ checksum(s);
                            }
                        }
                    }
                    times.push(elapsed);
                }
                out.push(BenchRecord {
                    n_qubits: n,
                    family,
                    fused,
                    raw_gate_count: raw,
                    fused_gate_count: if fused { fused_count } else { raw },
                    wall_time_s: median(times),
                    amplitude_checksum: sum,
                });
            }
        }
    }
    Ok(out)
}
