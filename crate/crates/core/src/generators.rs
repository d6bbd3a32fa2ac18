//! Seeded random networks and circuits.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateOp};
use crate::error::{Error, Result};
use crate::network::Network;

const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkGenParams {
    pub num_nodes: usize,
    pub edge_probability: f64,
    /// Storage bounds as fractions of `num_qubits / num_nodes`.
    pub storage_range: (f64, f64),
    /// Execution-memory bounds as fractions of `num_qubits / num_nodes`.
    pub exec_range: (f64, f64),
    /// Fixed execution memory for every node instead of drawing it.
    pub exec_override: Option<u32>,
    pub num_qubits: usize,
    pub seed: u64,
}

impl Default for NetworkGenParams {
    fn default() -> Self {
        NetworkGenParams {
            num_nodes: 10,
            edge_probability: 0.5,
            storage_range: (0.6, 1.4),
            exec_range: (0.3, 0.7),
            exec_override: None,
            num_qubits: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CircuitGenParams {
    pub num_qubits: usize,
    pub gates_per_qubit: usize,
    pub binary_fraction: f64,
    pub seed: u64,
}

impl Default for CircuitGenParams {
    fn default() -> Self {
        CircuitGenParams {
            num_qubits: 50,
            gates_per_qubit: 50,
            binary_fraction: 0.5,
            seed: 0,
        }
    }
}

/// Integer range `[ceil(lo), floor(hi)]`, or the integer nearest the middle
/// when that range is empty.
pub fn integer_range(lo: f64, hi: f64) -> (u32, u32) {
    let a = (lo - 1e-9).ceil().max(0.0) as u32;
    let b = (hi + 1e-9).floor().max(0.0) as u32;
    if a <= b {
        (a, b)
    } else {
        let mid = ((lo + hi) / 2.0).round().max(0.0) as u32;
        (mid, mid)
    }
}

/// Storage and execution-memory ranges a parameter set draws from.
pub fn capacity_ranges(params: &NetworkGenParams) -> ((u32, u32), (u32, u32)) {
    let avg = params.num_qubits as f64 / params.num_nodes as f64;
    let storage = integer_range(params.storage_range.0 * avg, params.storage_range.1 * avg);
    let (lo, hi) = integer_range(params.exec_range.0 * avg, params.exec_range.1 * avg);
    (storage, (lo.max(1), hi.max(1)))
}

/// Erdős–Rényi topology redrawn until connected, with uniform integer
/// capacities; storage is redrawn until it can hold every qubit, then topped
/// up round-robin on the smallest nodes.
pub fn gen_network(params: &NetworkGenParams) -> Result<Network> {
    let n = params.num_nodes;
    if n == 0 {
        return Err(Error::InvalidParams("num_nodes must be at least 1".into()));
    }
    let p = params.edge_probability;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParams(format!("edge probability {p} not in (0, 1]")));
    }
    for (name, (lo, hi)) in [("storage", params.storage_range), ("exec", params.exec_range)] {
        if !(lo >= 0.0 && lo <= hi) {
            return Err(Error::InvalidParams(format!("{name} range ({lo}, {hi})")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut edges = None;
    for _ in 0..MAX_ATTEMPTS {
        let draw: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        let candidate = Network::new(n, draw.iter().copied(), vec![0; n], vec![0; n])?;
        if candidate.is_connected() {
            edges = Some(draw);
            break;
        }
    }
    let edges = edges.ok_or(Error::GenerationExhausted(MAX_ATTEMPTS))?;

    let ((s_lo, s_hi), (e_lo, e_hi)) = capacity_ranges(params);
    let nq = params.num_qubits as u64;
    let mut storage: Vec<u32> = Vec::new();
    for _ in 0..MAX_ATTEMPTS {
        storage = (0..n).map(|_| rng.gen_range(s_lo..=s_hi)).collect();
        if storage.iter().map(|&s| u64::from(s)).sum::<u64>() >= nq {
            break;
        }
    }
    let mut next = 0;
    while storage.iter().map(|&s| u64::from(s)).sum::<u64>() < nq {
        let min = *storage.iter().min().unwrap();
        let i = (0..n).map(|k| (next + k) % n).find(|&i| storage[i] == min).unwrap();
        storage[i] += 1;
        next = (i + 1) % n;
    }
    let exec_mem = match params.exec_override {
        Some(e) => vec![e; n],
        None => (0..n).map(|_| rng.gen_range(e_lo..=e_hi)).collect(),
    };
    Network::new(n, edges, storage, exec_mem)
}

/// `num_qubits * gates_per_qubit` gates, each a CZ on two distinct uniform
/// qubits with probability `binary_fraction`, otherwise a uniform unary.
pub fn gen_circuit(params: &CircuitGenParams) -> Result<Circuit> {
    let nq = params.num_qubits;
    let f = params.binary_fraction;
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParams(format!("binary fraction {f} not in [0, 1]")));
    }
    if nq == 0 || (f > 0.0 && nq < 2) {
        return Err(Error::InvalidParams(format!("{nq} qubits cannot host CZ gates")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let total = nq * params.gates_per_qubit;
    let ops = (0..total).map(|_| {
        if rng.gen_bool(f) {
            let a = rng.gen_range(0..nq);
            let mut b = rng.gen_range(0..nq - 1);
            if b >= a {
                b += 1;
            }
            GateOp::Cz(a, b)
        } else {
            GateOp::Unary(rng.gen_range(0..nq))
        }
    });
    let ops: Vec<GateOp> = ops.collect();
    Circuit::new(nq, ops)
}
