//! Stochastic parameter shift.
//!
//! Three independent axes may be sampled instead of enumerated:
//! - coordinates: one symbol occurrence `o` with probability `∝ Σ_k |w_ok|`,
//!   importance-weighted by `1/Pr(o)`; every other occurrence contributes 0;
//! - generator terms: one term `k` of the occurrence with probability
//!   `∝ |w_ok|`, contributing `sign(w_ok)·Σ_k|w_ok|·(f₊ − f₋)`;
//! - cost terms: one non-identity observable term `m` with probability
//!   `∝ |α_m|`, contributing `sign(α_m)·‖α‖₁·(⟨P_m⟩₊ − ⟨P_m⟩₋)` (identity terms
//!   cancel in the difference). The same `m` serves both shifts.
//!
//! Each estimator is unbiased for the exact parameter-shift gradient.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::rng::StreamKey;
use crate::sim::StateVector;

use super::shift::{occurrences, shifted_state, Occurrence};
use super::{Estimator, GradRequest, GradResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StochasticConfig {
    pub sample_generator_terms: bool,
    pub sample_cost_terms: bool,
    pub sample_coordinates: bool,
    pub num_samples: usize,
    pub seed: u64,
}

impl StochasticConfig {
    /// All axes enumerated.
    pub fn exact(num_samples: usize, seed: u64) -> Self {
        StochasticConfig {
            sample_generator_terms: false,
            sample_cost_terms: false,
            sample_coordinates: false,
            num_samples,
            seed,
        }
    }
}

/// Index drawn with probability `|w_i| / Σ|w|`; `None` when every weight is 0.
fn draw(rng: &mut ChaCha8Rng, weights: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    let total: f64 = weights.clone().map(f64::abs).sum();
    if total == 0.0 {
        return None;
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w == 0.0 {
            continue;
        }
        acc += w.abs();
        last = i;
        if u < acc {
            return Some(i);
        }
    }
    Some(last)
}

struct Engine<'a> {
    req: &'a GradRequest,
    concrete: crate::circuit::ConcreteCircuit,
    occ: Vec<Occurrence>,
    cost: Vec<PauliString>,
    cost_norm: f64,
    states: HashMap<(usize, usize, usize), StateVector>,
    values: HashMap<(usize, usize, usize, Option<usize>), f64>,
    evals: usize,
}

impl<'a> Engine<'a> {
    fn new(req: &'a GradRequest) -> Result<Self> {
        req.check()?;
        let occ = occurrences(&req.circuit)?;
        let concrete = req.circuit.resolve(&req.bindings)?;
        let cost: Vec<PauliString> = req
            .observable
            .terms()
            .iter()
            .filter(|t| !t.is_identity() && t.coeff != 0.0)
            .cloned()
            .collect();
        let cost_norm = cost.iter().map(|t| t.coeff.abs()).sum();
        Ok(Engine {
            req,
            concrete,
            occ,
            cost,
            cost_norm,
            states: HashMap::new(),
            values: HashMap::new(),
            evals: 0,
        })
    }

    /// `⟨obs⟩` after shifting term `k` of occurrence `o` by `sign`; `m` picks a
    /// single cost term (without its coefficient) instead of the full observable.
    fn value(&mut self, sample: usize, o: usize, k: usize, sign: usize, m: Option<usize>) -> Result<f64> {
        let exact = self.req.estimator == Estimator::Exact;
        if exact {
            if let Some(&v) = self.values.get(&(o, k, sign, m)) {
                return Ok(v);
            }
        }
        if !self.states.contains_key(&(o, k, sign)) {
            let occ = &self.occ[o];
            let s = shifted_state(
                self.req,
                &self.concrete,
                occ.gate,
                &occ.terms[k].0,
                if sign == 0 { 1.0 } else { -1.0 },
            )?;
            self.states.insert((o, k, sign), s);
        }
        let state = &self.states[&(o, k, sign)];
        let obs = match m {
            Some(m) => PauliSum::from(self.cost[m].with_coeff(1.0)),
            None => self.req.observable.clone(),
        };
        let path = [
            sample as u64,
            o as u64,
            k as u64,
            sign as u64,
            m.map_or(u64::MAX, |m| m as u64),
        ];
        let v = self.req.measure(state, &obs, &path)?;
        self.evals += 1;
        if exact {
            self.values.insert((o, k, sign, m), v);
        }
        Ok(v)
    }

    /// `f₊ − f₋` for term `k` of occurrence `o`, possibly via one sampled cost term.
    fn diff(&mut self, sample: usize, rng: &mut ChaCha8Rng, cfg: &StochasticConfig, o: usize, k: usize) -> Result<Option<f64>> {
        if cfg.sample_cost_terms {
            let Some(m) = draw(rng, self.cost.iter().map(|t| t.coeff)) else {
                return Ok(None);
            };
            let scale = self.cost[m].coeff.signum() * self.cost_norm;
            let plus = self.value(sample, o, k, 0, Some(m))?;
            let minus = self.value(sample, o, k, 1, Some(m))?;
            Ok(Some(scale * (plus - minus)))
        } else {
            let plus = self.value(sample, o, k, 0, None)?;
            let minus = self.value(sample, o, k, 1, None)?;
            Ok(Some(plus - minus))
        }
    }

    /// One Monte-Carlo gradient sample; the flag reports a degenerate distribution.
    fn sample(&mut self, s: usize, cfg: &StochasticConfig, out: &mut [f64]) -> Result<bool> {
        let mut rng = StreamKey::new(cfg.seed).child(s as u64).rng();
        let mut degenerate = false;
        let chosen: Vec<(usize, f64)> = if cfg.sample_coordinates {
            let weights: Vec<f64> = self.occ.iter().map(Occurrence::total_weight).collect();
            let total: f64 = weights.iter().sum();
            match draw(&mut rng, weights.iter().copied()) {
                Some(o) => vec![(o, total / weights[o])],
                None => {
                    degenerate = !self.occ.is_empty();
                    vec![]
                }
            }
        } else {
            (0..self.occ.len()).map(|o| (o, 1.0)).collect()
        };
        for (o, importance) in chosen {
            let sym = self.occ[o].symbol;
            if cfg.sample_generator_terms {
                let weights: Vec<f64> = self.occ[o].terms.iter().map(|(_, w)| *w).collect();
                let Some(k) = draw(&mut rng, weights.iter().copied()) else { continue };
                let scale = weights[k].signum() * self.occ[o].total_weight();
                match self.diff(s, &mut rng, cfg, o, k)? {
                    Some(d) => out[sym] += importance * scale * d,
                    None => degenerate = true,
                }
            } else {
                for k in 0..self.occ[o].terms.len() {
                    let w = self.occ[o].terms[k].1;
                    match self.diff(s, &mut rng, cfg, o, k)? {
                        Some(d) => out[sym] += importance * w * d,
                        None => degenerate = true,
                    }
                }
            }
        }
        Ok(degenerate)
    }
}

/// Per-sample gradient estimates, `[num_samples][num_symbols]`, and the
/// evaluation count and warning of the run.
pub fn stochastic_ps_samples(
    req: &GradRequest,
    cfg: &StochasticConfig,
) -> Result<(Vec<Vec<f64>>, usize, Option<String>)> {
    if cfg.num_samples == 0 {
        return Err(Error::InvalidArgument("num_samples must be at least 1".into()));
    }
    let mut eng = Engine::new(req)?;
    let m = req.circuit.symbols().len();
    let mut degenerate = false;
    let mut rows = Vec::with_capacity(cfg.num_samples);
    for s in 0..cfg.num_samples {
        let mut g = vec![0.0; m];
        degenerate |= eng.sample(s, cfg, &mut g)?;
        rows.push(g);
    }
    let warning = degenerate
        .then(|| "sampling distribution has zero total weight; zero gradient used".to_string());
    Ok((rows, eng.evals, warning))
}

/// Mean of [`stochastic_ps_samples`].
pub fn stochastic_ps_grad(req: &GradRequest, cfg: &StochasticConfig) -> Result<GradResult> {
    let (rows, evals, warning) = stochastic_ps_samples(req, cfg)?;
    let m = req.circuit.symbols().len();
    let n = rows.len() as f64;
    let gradient = (0..m)
        .map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n)
        .collect();
    Ok(GradResult {
        gradient,
        evaluations: evals,
        warning,
    })
}
