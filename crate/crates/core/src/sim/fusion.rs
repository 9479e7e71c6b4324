//! Gate fusion into one- and two-qubit dense blocks.
//!
//! Gates are laid out on a grid of rows (qubits) and timesteps (ASAP layers).
//! Scanning timesteps in ascending order and rows in ascending order within a
//! timestep, each unfused two-qubit gate becomes an anchor. The anchor absorbs
//! every pending one-qubit gate before it on both of its rows, then keeps
//! absorbing forward: one-qubit gates on either row, and a following two-qubit
//! gate when it is the next gate on both rows. Absorption on a row stops at any
//! other two-qubit gate. Rows that never meet a two-qubit gate collapse into a
//! single 2×2 block each.

use crate::circuit::ConcreteCircuit;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::state::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct FusedGate {
    pub matrix: Matrix,
    /// One qubit, or two in ascending order (local bit 0 is `targets[0]`).
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedCircuit {
    pub num_qubits: usize,
    pub gates: Vec<FusedGate>,
}

impl FusedCircuit {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

pub fn apply_fused(state: &mut StateVector, g: &FusedGate) -> Result<()> {
    state.apply_matrix(&g.matrix, &g.targets)
}

/// A block under construction on rows `lo` (local bit 0) and a higher row.
struct Block {
    lo: usize,
    m: Matrix,
}

impl Block {
    fn push_1q(&mut self, u: &Matrix, row: usize) {
        let e = if row == self.lo {
            Matrix::identity(2).kron(u)
        } else {
            u.kron(&Matrix::identity(2))
        };
        self.m = &e * &self.m;
    }

    fn push_2q(&mut self, u: &Matrix, targets: &[usize]) {
        if targets[0] == self.lo {
            self.m = u * &self.m;
        } else {
            self.m = &u.permute_qubits(&[1, 0]) * &self.m;
        }
    }
}

pub fn fuse(c: &ConcreteCircuit) -> Result<FusedCircuit> {
    let n = c.num_qubits();
    let ops = c.ops()?;
    for (g, (_, t)) in c.gates().iter().zip(&ops) {
        if t.len() > 2 {
            return Err(Error::GateTooWide {
                gate: g.name().to_string(),
                arity: t.len(),
            });
        }
    }

    // ASAP timesteps and per-row gate lists.
    let mut free = vec![0usize; n];
    let mut time = Vec::with_capacity(ops.len());
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (_, t)) in ops.iter().enumerate() {
        let ts = t.iter().map(|&q| free[q]).max().unwrap_or(0);
        for &q in t {
            free[q] = ts + 1;
            rows[q].push(i);
        }
        time.push(ts);
    }
    let depth = free.iter().copied().max().unwrap_or(0);

    // Anchor candidates per timestep, by ascending row.
    let mut by_time: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for (i, (_, t)) in ops.iter().enumerate() {
        if t.len() == 2 {
            by_time[time[i]].push(i);
        }
    }
    for list in &mut by_time {
        list.sort_by_key(|&i| ops[i].1.iter().copied().min());
    }

    let mut counter = vec![0usize; n];
    let mut done = vec![false; ops.len()];
    let mut out = Vec::new();

    for anchors in &by_time {
        for &g in anchors {
            if done[g] {
                continue;
            }
            let t = &ops[g].1;
            let (lo, hi) = (t[0].min(t[1]), t[0].max(t[1]));
            let mut block = Block {
                lo,
                m: Matrix::identity(4),
            };
            // Pending one-qubit gates before the anchor.
            for row in [lo, hi] {
                while rows[row][counter[row]] != g {
                    let k = rows[row][counter[row]];
                    debug_assert!(ops[k].1.len() == 1 && !done[k]);
                    block.push_1q(&ops[k].0, row);
                    done[k] = true;
                    counter[row] += 1;
                }
            }
            block.push_2q(&ops[g].0, t);
            done[g] = true;
            counter[lo] += 1;
            counter[hi] += 1;

            loop {
                for row in [lo, hi] {
                    while let Some(&k) = rows[row].get(counter[row]) {
                        if ops[k].1.len() != 1 {
                            break;
                        }
                        block.push_1q(&ops[k].0, row);
                        done[k] = true;
                        counter[row] += 1;
                    }
                }
                match (rows[lo].get(counter[lo]), rows[hi].get(counter[hi])) {
                    (Some(&a), Some(&b)) if a == b => {
                        block.push_2q(&ops[a].0, &ops[a].1);
                        done[a] = true;
                        counter[lo] += 1;
                        counter[hi] += 1;
                    }
                    _ => break,
                }
            }
            out.push(FusedGate {
                matrix: block.m,
                targets: vec![lo, hi],
            });
        }
    }

    // Rows without any two-qubit gate.
    for (row, list) in rows.iter().enumerate() {
        if counter[row] == list.len() {
            continue;
        }
        let mut m = Matrix::identity(2);
        for &k in &list[counter[row]..] {
            debug_assert!(ops[k].1.len() == 1);
            m = &ops[k].0 * &m;
        }
        out.push(FusedGate {
            matrix: m,
            targets: vec![row],
        });
    }

    Ok(FusedCircuit {
        num_qubits: n,
        gates: out,
    })
}
