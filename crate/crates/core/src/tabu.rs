//! Tabu search over storage-valid qubit-to-computer assignments.
//!
//! The objective is the quadratic-assignment style estimate
//! `sum over pairs of w(q1, q2) * dist(home(q1), home(q2))`.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::InteractionMatrix;
use crate::network::{DistanceMatrix, Network};
use crate::{Cost, Node, Qubit};

/// Home computer of every qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<Node>);

impl Assignment {
    pub fn new(home: Vec<Node>) -> Self {
        Assignment(home)
    }

    pub fn home(&self, q: Qubit) -> Node {
        self.0[q]
    }

    pub fn homes(&self) -> &[Node] {
        &self.0
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    /// Number of qubits homed at each node.
    pub fn loads(&self, num_nodes: usize) -> Vec<u32> {
        let mut load = vec![0; num_nodes];
        for &p in &self.0 {
            load[p] += 1;
        }
        load
    }

    pub fn check_valid(&self, net: &Network, num_qubits: usize) -> Result<()> {
        if self.0.len() != num_qubits {
            return Err(Error::InvalidAssignment(format!(
                "{} homes for {num_qubits} qubits",
                self.0.len()
            )));
        }
        if let Some(&p) = self.0.iter().find(|&&p| p >= net.num_nodes()) {
            return Err(Error::InvalidAssignment(format!("node {p} out of range")));
        }
        for (p, (&load, &cap)) in self.loads(net.num_nodes()).iter().zip(net.storage()).enumerate() {
            if load > cap {
                return Err(Error::InvalidAssignment(format!(
                    "node {p} stores {load} qubits, capacity {cap}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_storage_valid(&self, net: &Network) -> bool {
        self.check_valid(net, self.0.len()).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabuParams {
    pub iterations: usize,
    pub tabu_len: usize,
    pub seed: u64,
}

impl Default for TabuParams {
    fn default() -> Self {
        TabuParams {
            iterations: 20,
            tabu_len: 10,
            seed: 0,
        }
    }
}

pub fn assignment_cost(a: &Assignment, w: &InteractionMatrix, d: &DistanceMatrix) -> Cost {
    let mut total = 0;
    for q in 0..a.num_qubits() {
        for &(r, weight) in w.neighbors(q) {
            if r > q {
                total += Cost::from(weight) * Cost::from(d.get(a.home(q), a.home(r)));
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Move { q: Qubit, to: Node },
    Swap { q: Qubit, r: Qubit },
}

impl Step {
    fn value_at(self, cur: &[Node], i: usize) -> Node {
        match self {
            Step::Move { q, to } if i == q => to,
            Step::Swap { q, r } if i == q => cur[r],
            Step::Swap { q, r } if i == r => cur[q],
            _ => cur[i],
        }
    }

    fn apply(self, cur: &Assignment) -> Assignment {
        Assignment((0..cur.0.len()).map(|i| self.value_at(&cur.0, i)).collect())
    }
}

/// Lexicographic order of the home vectors two steps lead to.
fn lex_cmp(cur: &[Node], a: Step, b: Step) -> Ordering {
    (0..cur.len())
        .map(|i| a.value_at(cur, i).cmp(&b.value_at(cur, i)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn steps(a: &Assignment, net: &Network) -> Vec<Step> {
    let load = a.loads(net.num_nodes());
    let n = a.num_qubits();
    let mut out = Vec::new();
    for q in 0..n {
        for to in 0..net.num_nodes() {
            if to != a.home(q) && load[to] < net.storage()[to] {
                out.push(Step::Move { q, to });
            }
        }
    }
    for q in 0..n {
        for r in q + 1..n {
            if a.home(q) != a.home(r) {
                out.push(Step::Swap { q, r });
            }
        }
    }
    out
}

/// Every storage-valid assignment one move or one swap away from `a`.
pub fn neighbors(a: &Assignment, net: &Network) -> Vec<Assignment> {
    steps(a, net).into_iter().map(|s| s.apply(a)).collect()
}

fn step_delta(a: &Assignment, step: Step, w: &InteractionMatrix, d: &DistanceMatrix) -> i64 {
    let shift = |q: Qubit, skip: Option<Qubit>, from: Node, to: Node| -> i64 {
        w.neighbors(q)
            .iter()
            .filter(|&&(r, _)| Some(r) != skip)
            .map(|&(r, weight)| {
                let h = a.home(r);
                i64::from(weight) * (i64::from(d.get(to, h)) - i64::from(d.get(from, h)))
            })
            .sum()
    };
    match step {
        Step::Move { q, to } => shift(q, None, a.home(q), to),
        Step::Swap { q, r } => {
            let (hq, hr) = (a.home(q), a.home(r));
            shift(q, Some(r), hq, hr) + shift(r, Some(q), hr, hq)
        }
    }
}

/// The step from `cur` to `target`, if they are neighbours.
fn step_to(cur: &Assignment, target: &Assignment) -> Option<Step> {
    let diff: Vec<usize> = (0..cur.num_qubits())
        .filter(|&i| cur.home(i) != target.home(i))
        .collect();
    match diff[..] {
        [q] => Some(Step::Move {
            q,
            to: target.home(q),
        }),
        [q, r] if target.home(q) == cur.home(r) && target.home(r) == cur.home(q) => {
            Some(Step::Swap { q, r })
        }
        _ => None,
    }
}

/// Shuffles the qubits and fills nodes in index order up to their storage.
pub fn random_assignment(num_qubits: usize, net: &Network, seed: u64) -> Result<Assignment> {
    net.check_capacity(num_qubits)?;
    let mut order: Vec<Qubit> = (0..num_qubits).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut home = vec![0; num_qubits];
    let mut node = 0;
    let mut load = 0;
    for q in order {
        while load >= net.storage()[node] {
            node += 1;
            load = 0;
        }
        home[q] = node;
        load += 1;
    }
    Ok(Assignment(home))
}

/// Runs `params.iterations` rounds of best-non-tabu-neighbour descent and
/// returns the cheapest assignment seen, the start included.
///
/// If every neighbour is tabu the best tabu one is taken. Ties between equal
/// cost neighbours go to the lexicographically smallest home vector.
pub fn tabu_search(
    w: &InteractionMatrix,
    net: &Network,
    d: &DistanceMatrix,
    params: &TabuParams,
    initial: Option<&Assignment>,
) -> Result<Assignment> {
    let n = w.num_qubits();
    net.check_capacity(n)?;
    if params.iterations == 0 || params.tabu_len == 0 {
        return Err(Error::InvalidParams(
            "tabu iterations and list length must be positive".into(),
        ));
    }
    let mut current = match initial {
        Some(a) => {
            a.check_valid(net, n)?;
            a.clone()
        }
        None => random_assignment(n, net, params.seed)?,
    };
    let mut current_cost = assignment_cost(&current, w, d);
    let mut best = current.clone();
    let mut best_cost = current_cost;
    let mut tabu: VecDeque<Assignment> = VecDeque::with_capacity(params.tabu_len);

    for _ in 0..params.iterations {
        let forbidden: Vec<Step> = tabu.iter().filter_map(|t| step_to(&current, t)).collect();
        // (is_tabu, cost, step), minimized in that order then by home vector
        let mut pick: Option<(bool, i64, Step)> = None;
        for step in steps(&current, net) {
            let is_tabu = forbidden.contains(&step);
            let delta = step_delta(&current, step, w, d);
            let better = match pick {
                None => true,
                Some((t, c, s)) => match (is_tabu, delta).cmp(&(t, c)) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => lex_cmp(current.homes(), step, s).is_lt(),
                },
            };
            if better {
                pick = Some((is_tabu, delta, step));
            }
        }
        let Some((_, delta, step)) = pick else { break };
        current = step.apply(&current);
        current_cost = (current_cost as i64 + delta) as Cost;
        debug_assert_eq!(current_cost, assignment_cost(&current, w, d));
        if current_cost < best_cost {
            best = current.clone();
            best_cost = current_cost;
        }
        if tabu.len() == params.tabu_len {
            tabu.pop_front();
        }
        tabu.push_back(current.clone());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_nodes(s: Vec<u32>) -> (Network, DistanceMatrix) {
        let net = Network::complete(s, vec![1, 1]).unwrap();
        let d = net.distances().unwrap();
        (net, d)
    }

    #[test]
    fn cost_examples() {
        let net = Network::path(vec![3; 3], vec![1; 3]).unwrap();
        let d = net.distances().unwrap();
        let w = InteractionMatrix::from_pairs(2, [(0, 1, 3)]);
        assert_eq!(assignment_cost(&Assignment::new(vec![1, 1]), &w, &d), 0);
        assert_eq!(assignment_cost(&Assignment::new(vec![0, 1]), &w, &d), 3);
        let w2 = InteractionMatrix::from_pairs(2, [(0, 1, 2)]);
        assert_eq!(assignment_cost(&Assignment::new(vec![0, 2]), &w2, &d), 4);
    }

    #[test]
    fn neighbor_examples() {
        let (net, _) = two_nodes(vec![1, 1]);
        let n = neighbors(&Assignment::new(vec![0, 1]), &net);
        assert_eq!(n, vec![Assignment::new(vec![1, 0])]);
        let n = neighbors(&Assignment::new(vec![0]), &net);
        assert_eq!(n, vec![Assignment::new(vec![1])]);
        let (full, _) = two_nodes(vec![2, 0]);
        assert!(neighbors(&Assignment::new(vec![0, 0]), &full).is_empty());
    }

    #[test]
    fn colocates_heavy_pair() {
        let (net, d) = two_nodes(vec![2, 2]);
        let w = InteractionMatrix::from_pairs(2, [(0, 1, 5)]);
        let start = Assignment::new(vec![0, 1]);
        let out = tabu_search(&w, &net, &d, &TabuParams::default(), Some(&start)).unwrap();
        // exhaustive over the four storage-valid assignments
        let optimum = [[0, 0], [0, 1], [1, 0], [1, 1]]
            .iter()
            .map(|h| assignment_cost(&Assignment::new(h.to_vec()), &w, &d))
            .min()
            .unwrap();
        assert_eq!(optimum, 0);
        assert_eq!(assignment_cost(&out, &w, &d), optimum);
    }

    #[test]
    fn zero_weights_keep_start() {
        let (net, d) = two_nodes(vec![2, 2]);
        let w = InteractionMatrix::zeros(3);
        let start = Assignment::new(vec![1, 0, 1]);
        let out = tabu_search(&w, &net, &d, &TabuParams::default(), Some(&start)).unwrap();
        assert_eq!(out, start);
    }

    #[test]
    fn forced_split() {
        let (net, d) = two_nodes(vec![1, 1]);
        let w = InteractionMatrix::from_pairs(2, [(0, 1, 4)]);
        let out = tabu_search(&w, &net, &d, &TabuParams::default(), None).unwrap();
        assert_eq!(assignment_cost(&out, &w, &d), 4);
    }

    #[test]
    fn storage_errors() {
        let (net, d) = two_nodes(vec![1, 1]);
        let w = InteractionMatrix::zeros(3);
        assert_eq!(
            tabu_search(&w, &net, &d, &TabuParams::default(), None),
            Err(Error::InsufficientStorage { deficit: 1 })
        );
        let w = InteractionMatrix::zeros(2);
        let bad = Assignment::new(vec![0, 0]);
        assert!(tabu_search(&w, &net, &d, &TabuParams::default(), Some(&bad)).is_err());
    }

    #[test]
    fn random_assignment_fills_in_order() {
        let net = Network::complete(vec![2, 0, 3], vec![1; 3]).unwrap();
        let a = random_assignment(4, &net, 9).unwrap();
        assert_eq!(a.loads(3), vec![2, 0, 2]);
        assert_eq!(a, random_assignment(4, &net, 9).unwrap());
    }

    fn instance() -> impl Strategy<Value = (InteractionMatrix, Network, u64)> {
        (2usize..8, 2usize..5, any::<u64>()).prop_flat_map(|(nq, np, seed)| {
            let pairs = prop::collection::vec((0..nq, 0..nq, 0u32..5), 0..12);
            let storage = prop::collection::vec(0u32..4, np);
            let extra = prop::collection::vec((0..np, 0..np), 0..6);
            (pairs, storage, extra).prop_map(move |(pairs, mut storage, extra)| {
                let total: u32 = storage.iter().sum();
                if (total as usize) < nq {
                    storage[0] += nq as u32 - total;
                }
                let edges = (1..np)
                    .map(|i| (i - 1, i))
                    .chain(extra.into_iter().filter(|(u, v)| u + 1 < *v));
                let edges: std::collections::BTreeSet<_> = edges.collect();
                let net = Network::new(np, edges, storage, vec![1; np]).unwrap();
                let w = InteractionMatrix::from_pairs(
                    nq,
                    pairs.into_iter().filter(|(a, b, _)| a != b),
                );
                (w, net, seed)
            })
        })
    }

    proptest! {
        #[test]
        fn search_invariants((w, net, seed) in instance()) {
            let d = net.distances().unwrap();
            let params = TabuParams { seed, ..TabuParams::default() };
            let start = random_assignment(w.num_qubits(), &net, seed).unwrap();
            let out = tabu_search(&w, &net, &d, &params, None).unwrap();
            prop_assert!(out.is_storage_valid(&net));
            prop_assert!(assignment_cost(&out, &w, &d) <= assignment_cost(&start, &w, &d));
            prop_assert_eq!(&out, &tabu_search(&w, &net, &d, &params, None).unwrap());
            for nb in neighbors(&out, &net) {
                prop_assert!(nb.is_storage_valid(&net));
            }
        }

        #[test]
        fn delta_matches_full_cost((w, net, seed) in instance()) {
            let d = net.distances().unwrap();
            let a = random_assignment(w.num_qubits(), &net, seed).unwrap();
            let base = assignment_cost(&a, &w, &d) as i64;
            for step in steps(&a, &net) {
                let full = assignment_cost(&step.apply(&a), &w, &d) as i64;
                prop_assert_eq!(base + step_delta(&a, step, &w, &d), full);
                prop_assert_eq!(step_to(&a, &step.apply(&a)), Some(step));
            }
        }

        #[test]
        fn relabeling_a_ring_preserves_cost(
            pairs in prop::collection::vec((0usize..6, 0usize..6, 1u32..4), 1..10),
            shift in 1usize..4,
        ) {
            // rotations of a ring are automorphisms
            let np = 4;
            let net = Network::new(np, (0..np).map(|i| (i, (i + 1) % np)), vec![2; np], vec![1; np]).unwrap();
            let d = net.distances().unwrap();
            let w = InteractionMatrix::from_pairs(6, pairs.into_iter().filter(|(a, b, _)| a != b));
            let start = random_assignment(6, &net, 3).unwrap();
            let rotated = Assignment::new(start.homes().iter().map(|&p| (p + shift) % np).collect());
            let params = TabuParams::default();
            let a = tabu_search(&w, &net, &d, &params, Some(&start)).unwrap();
            let b = tabu_search(&w, &net, &d, &params, Some(&rotated)).unwrap();
            prop_assert_eq!(assignment_cost(&a, &w, &d), assignment_cost(&b, &w, &d));
        }
    }
}
