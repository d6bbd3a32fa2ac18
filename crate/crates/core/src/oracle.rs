//! Exhaustive optima for tiny instances.
//!
//! These are deliberately independent of the heuristics: they share only the
//! circuit, network and assignment types, never the candidate enumeration or
//! the selection code.

use std::time::{Duration, Instant as Clock};

use crate::circuit::{Circuit, CircuitView, Gate};
use crate::coverage::{CoverMode, Migration};
use crate::error::{Error, Result};
use crate::network::{DistanceMatrix, Network};
use crate::tabu::Assignment;
use crate::{Cost, Instant, Node, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_qubits: usize,
    pub max_gates: usize,
    pub max_nodes: usize,
    /// Depth cap on the migrations of one search branch.
    pub max_migrations: usize,
    pub timeout: Option<Duration>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_qubits: 6,
            max_gates: 14,
            max_nodes: 3,
            max_migrations: 28,
            timeout: None,
        }
    }
}

impl OracleLimits {
    fn check(&self, num_qubits: usize, num_gates: usize, num_nodes: usize) -> Result<()> {
        if num_qubits > self.max_qubits {
            return Err(Error::LimitExceeded(format!("{num_qubits} qubits")));
        }
        if num_gates > self.max_gates {
            return Err(Error::LimitExceeded(format!("{num_gates} gates")));
        }
        if num_nodes > self.max_nodes {
            return Err(Error::LimitExceeded(format!("{num_nodes} nodes")));
        }
        Ok(())
    }
}

/// Minimum number of intervals covering every CZ of a two-qubit circuit,
/// by trying subsets of increasing size.
pub fn oracle_pair_cover(pair: &Circuit) -> Result<u32> {
    if pair.num_qubits() != 2 {
        return Err(Error::NotTwoQubits(pair.num_qubits()));
    }
    let gates = pair.gates();
    let cz: Vec<Instant> = gates.iter().filter(|g| g.is_binary()).map(|g| g.instant).collect();
    // unary-free stretch of `q` around `t`, found by walking the gate list
    let stretch = |q: Qubit, t: Instant| -> (Instant, Instant) {
        let before = gates
            .iter()
            .filter(|g| g.is_unary_on(q) && g.instant < t)
            .map(|g| g.instant)
            .max();
        let after = gates
            .iter()
            .filter(|g| g.is_unary_on(q) && g.instant > t)
            .map(|g| g.instant)
            .min();
        (before.unwrap_or(0), after.unwrap_or(pair.horizon() + 1))
    };
    let mut intervals: Vec<(Qubit, Instant, Instant)> = Vec::new();
    for &t in &cz {
        for q in 0..2 {
            let (lo, hi) = stretch(q, t);
            if !intervals.contains(&(q, lo, hi)) {
                intervals.push((q, lo, hi));
            }
        }
    }
    if intervals.len() > 24 {
        return Err(Error::LimitExceeded(format!("{} intervals", intervals.len())));
    }
    let masks: Vec<u32> = intervals
        .iter()
        .map(|&(_, lo, hi)| {
            cz.iter()
                .enumerate()
                .filter(|&(_, &t)| lo < t && t < hi)
                .fold(0, |m, (i, _)| m | 1 << i)
        })
        .collect();
    let full = if cz.is_empty() { 0 } else { u32::MAX >> (32 - cz.len()) };
    for k in 0..=intervals.len() {
        if subset_covers(&masks, k, 0, 0, full) {
            return Ok(k as u32);
        }
    }
    unreachable!("all intervals together cover every gate")
}

fn subset_covers(masks: &[u32], k: usize, from: usize, acc: u32, full: u32) -> bool {
    if k == 0 {
        return acc == full;
    }
    (from..masks.len()).any(|i| subset_covers(masks, k - 1, i + 1, acc | masks[i], full))
}

/// An optimal feasible cover together with the assignment it was found for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub cost: Cost,
    pub assignment: Assignment,
    pub migrations: Vec<Migration>,
}

/// Minimum-cost memory-feasible cover of the window's non-local gates for a
/// fixed assignment. `None` when every cover overflows execution memory.
///
/// Branches on the earliest uncovered gate. Without loss of optimality a
/// migration that first becomes useful at gate `t` starts at `t - 1` and ends
/// just after one of the later gates of its qubit inside the same unary-free
/// stretch, so only those endpoints are tried.
pub fn oracle_cover(
    view: CircuitView<'_>,
    a: &Assignment,
    net: &Network,
    d: &DistanceMatrix,
    mode: CoverMode,
    limits: &OracleLimits,
) -> Result<Option<(Cost, Vec<Migration>)>> {
    limits.check(view.num_qubits(), view.gates().len(), net.num_nodes())?;
    let mut search = Search::new(view, a, net, d, mode, limits, Cost::MAX)?;
    search.run()?;
    Ok(search.best)
}

/// Global optimum over every storage-valid assignment (lexicographically
/// first on ties).
pub fn oracle_dqcm(
    view: CircuitView<'_>,
    net: &Network,
    mode: CoverMode,
    limits: &OracleLimits,
) -> Result<OracleSolution> {
    let nq = view.num_qubits();
    limits.check(nq, view.gates().len(), net.num_nodes())?;
    net.check_capacity(nq)?;
    let d = net.distances()?;
    let mut best: Option<OracleSolution> = None;
    let mut uncoverable = None;
    for a in all_assignments(nq, net) {
        let bound = best.as_ref().map_or(Cost::MAX, |b| b.cost);
        let mut search = match Search::new(view, &a, net, &d, mode, limits, bound) {
            Ok(s) => s,
            Err(e @ Error::Uncoverable(_)) => {
                uncoverable.get_or_insert(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        search.run()?;
        if let Some((cost, migrations)) = search.best {
            best = Some(OracleSolution {
                cost,
                assignment: a,
                migrations,
            });
        }
    }
    match (best, uncoverable) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::IrreparableCapacity { node: 0 }),
    }
}

/// Minimum total cost with at most `max_cuts` teleportation cuts placed at
/// even instants just before CZ gates. Migrations stay inside their segment.
pub fn oracle_dqc(
    c: &Circuit,
    net: &Network,
    max_cuts: usize,
    limits: &OracleLimits,
) -> Result<Cost> {
    let nq = c.num_qubits();
    limits.check(nq, c.num_gates(), net.num_nodes())?;
    net.check_capacity(nq)?;
    let d = net.distances()?;
    let horizon = c.horizon();
    let mut points: Vec<Instant> = vec![0];
    points.extend(
        c.gates()
            .iter()
            .filter(|g| g.is_binary() && g.instant > 1)
            .map(|g| g.instant - 1),
    );
    points.push(horizon);
    points.dedup();
    let assignments = all_assignments(nq, net);
    let na = assignments.len();
    let np = points.len();
    const INF: Cost = Cost::MAX / 4;
    // cover[i][j][a]: optimal cost of span points[i]..points[j] under a
    let mut cover = vec![vec![Vec::new(); np]; np];
    for i in 0..np {
        for j in i + 1..np {
            if i > 0 && j < np - 1 && max_cuts < 2 {
                continue;
            }
            let view = c.span(points[i], points[j]);
            cover[i][j] = assignments
                .iter()
                .map(|a| {
                    match oracle_cover(view, a, net, &d, CoverMode::General, limits) {
                        Ok(Some((cost, _))) => Ok(cost),
                        Ok(None) | Err(Error::Uncoverable(_)) => Ok(INF),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<Cost>>>()?;
        }
    }
    let tele = |x: &Assignment, y: &Assignment| -> Cost {
        (0..nq).map(|q| Cost::from(d.get(x.home(q), y.home(q)))).sum()
    };
    // reach[j][a]: cheapest way to finish a segment at points[j] with a
    let mut reach: Vec<Vec<Cost>> = (0..np)
        .map(|j| {
            if j == 0 {
                vec![INF; na]
            } else {
                cover[0][j].clone()
            }
        })
        .collect();
    let mut best = reach[np - 1].iter().copied().min().unwrap_or(INF);
    for _ in 0..max_cuts {
        let mut next = vec![vec![INF; na]; np];
        for j in 2..np {
            for i in 1..j {
                if cover[i][j].is_empty() {
                    continue;
                }
                for (ai, a) in assignments.iter().enumerate() {
                    let seg = cover[i][j][ai];
                    if seg >= INF {
                        continue;
                    }
                    for (pi, prev) in assignments.iter().enumerate() {
                        let before = reach[i][pi];
                        if before >= INF {
                            continue;
                        }
                        let total = before + tele(prev, a) + seg;
                        next[j][ai] = next[j][ai].min(total);
                    }
                }
            }
        }
        best = best.min(next[np - 1].iter().copied().min().unwrap_or(INF));
        reach = next;
    }
    if best >= INF {
        return Err(Error::IrreparableCapacity { node: 0 });
    }
    Ok(best)
}

/// Every storage-valid assignment in lexicographic order of home vectors.
pub fn all_assignments(num_qubits: usize, net: &Network) -> Vec<Assignment> {
    let n = net.num_nodes();
    let mut out = Vec::new();
    let mut homes = vec![0; num_qubits];
    loop {
        let a = Assignment::new(homes.clone());
        if a.is_storage_valid(net) {
            out.push(a);
        }
        let mut i = num_qubits;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            homes[i] += 1;
            if homes[i] < n {
                break;
            }
            homes[i] = 0;
        }
    }
}

struct Search<'a> {
    view: CircuitView<'a>,
    a: &'a Assignment,
    d: &'a DistanceMatrix,
    e: &'a [u32],
    mode: CoverMode,
    limits: &'a OracleLimits,
    gates: Vec<Gate>,
    unary: Vec<Vec<Instant>>,
    occ: Vec<Vec<u32>>,
    chosen: Vec<Migration>,
    bound: Cost,
    best: Option<(Cost, Vec<Migration>)>,
    started: Clock,
}

impl<'a> Search<'a> {
    fn new(
        view: CircuitView<'a>,
        a: &'a Assignment,
        net: &'a Network,
        d: &'a DistanceMatrix,
        mode: CoverMode,
        limits: &'a OracleLimits,
        bound: Cost,
    ) -> Result<Self> {
        let e = net.exec_mem();
        let gates: Vec<Gate> = view
            .binary_gates()
            .filter(|g| {
                let (x, y) = g.pair().unwrap();
                a.home(x) != a.home(y)
            })
            .copied()
            .collect();
        for g in &gates {
            let (x, y) = g.pair().unwrap();
            let (hx, hy) = (a.home(x), a.home(y));
            let home = e[hx] >= 1 || e[hy] >= 1;
            let pair = mode == CoverMode::General
                && (0..net.num_nodes()).any(|p| p != hx && p != hy && e[p] >= 2);
            if !home && !pair {
                return Err(Error::Uncoverable(g.instant));
            }
        }
        let mut unary = vec![Vec::new(); view.num_qubits()];
        for g in view.gates() {
            if let Some(&q) = g.operands().first().filter(|_| !g.is_binary()) {
                unary[q].push(g.instant);
            }
        }
        let rows = ((view.end() - view.start()) / 2) as usize;
        Ok(Search {
            view,
            a,
            d,
            e,
            mode,
            limits,
            gates,
            unary,
            occ: vec![vec![0; rows]; net.num_nodes()],
            chosen: Vec::new(),
            bound,
            best: None,
            started: Clock::now(),
        })
    }

    fn run(&mut self) -> Result<()> {
        self.dfs(0, 0)
    }

    fn holds(&self, q: Qubit, p: Node, t: Instant) -> bool {
        self.chosen
            .iter()
            .any(|m| m.qubit == q && m.target == p && m.start < t && t < m.end)
    }

    fn covered(&self, g: &Gate) -> bool {
        let (x, y) = g.pair().unwrap();
        let t = g.instant;
        let (hx, hy) = (self.a.home(x), self.a.home(y));
        if self.holds(x, hy, t) || self.holds(y, hx, t) {
            return true;
        }
        self.mode == CoverMode::General
            && (0..self.e.len())
                .filter(|&p| p != hx && p != hy)
                .any(|p| self.holds(x, p, t) && self.holds(y, p, t))
    }

    /// Candidate end instants for a copy of `q` first used at `t`, longest first.
    fn ends(&self, q: Qubit, t: Instant) -> Vec<Instant> {
        let next_unary = self.unary[q]
            .iter()
            .copied()
            .find(|&u| u > t)
            .unwrap_or(self.view.end() + 1);
        let mut ends: Vec<Instant> = self
            .gates
            .iter()
            .filter(|g| g.instant >= t && g.instant < next_unary && g.involves(q))
            .map(|g| g.instant + 1)
            .collect();
        ends.reverse();
        ends
    }

    fn migration(&self, q: Qubit, p: Node, start: Instant, end: Instant) -> Migration {
        Migration {
            qubit: q,
            target: p,
            start,
            end,
            cost: self.d.get(self.a.home(q), p).into(),
        }
    }

    fn rows(&self, m: &Migration) -> std::ops::Range<usize> {
        let s = self.view.start();
        ((m.start - s) / 2) as usize..((m.end - s) / 2) as usize
    }

    fn push(&mut self, m: Migration) -> bool {
        let p = m.target;
        if self.rows(&m).any(|r| self.occ[p][r] + 1 > self.e[p]) {
            return false;
        }
        for r in self.rows(&m) {
            self.occ[p][r] += 1;
        }
        self.chosen.push(m);
        true
    }

    fn pop(&mut self) {
        let m = self.chosen.pop().expect("push before pop");
        for r in self.rows(&m) {
            self.occ[m.target][r] -= 1;
        }
    }

    fn best_cost(&self) -> Cost {
        self.best.as_ref().map_or(self.bound, |b| b.0)
    }

    fn dfs(&mut self, from: usize, cost: Cost) -> Result<()> {
        if let Some(limit) = self.limits.timeout {
            if self.started.elapsed() > limit {
                return Err(Error::LimitExceeded("oracle timeout".into()));
            }
        }
        let Some(i) = (from..self.gates.len()).find(|&i| !self.covered(&self.gates[i])) else {
            if cost < self.best_cost() {
                self.best = Some((cost, self.chosen.clone()));
            }
            return Ok(());
        };
        // every remaining option costs at least one hop
        if cost + 1 >= self.best_cost() {
            return Ok(());
        }
        if self.chosen.len() + 1 > self.limits.max_migrations {
            return Err(Error::LimitExceeded("migration depth".into()));
        }
        let g = self.gates[i];
        let (x, y) = g.pair().unwrap();
        let t = g.instant;
        let (hx, hy) = (self.a.home(x), self.a.home(y));
        for (q, p) in [(x, hy), (y, hx)] {
            if self.e[p] == 0 {
                continue;
            }
            for end in self.ends(q, t) {
                let m = self.migration(q, p, t - 1, end);
                if self.push(m) {
                    self.dfs(i + 1, cost + m.cost)?;
                    self.pop();
                }
            }
        }
        if self.mode == CoverMode::HomeOnly {
            return Ok(());
        }
        for p in 0..self.e.len() {
            if p == hx || p == hy || self.e[p] < 2 {
                continue;
            }
            let missing: Vec<Qubit> = [x, y]
                .into_iter()
                .filter(|&q| !self.holds(q, p, t))
                .collect();
            match missing[..] {
                [q] => {
                    for end in self.ends(q, t) {
                        let m = self.migration(q, p, t - 1, end);
                        if self.push(m) {
                            self.dfs(i + 1, cost + m.cost)?;
                            self.pop();
                        }
                    }
                }
                [q, r] => {
                    for eq in self.ends(q, t) {
                        let mq = self.migration(q, p, t - 1, eq);
                        if !self.push(mq) {
                            continue;
                        }
                        for er in self.ends(r, t) {
                            let mr = self.migration(r, p, t - 1, er);
                            if self.push(mr) {
                                self.dfs(i + 1, cost + mq.cost + mr.cost)?;
                                self.pop();
                            }
                        }
                        self.pop();
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateOp::*;
    use crate::fixtures;

    #[test]
    fn pair_cover_examples() {
        let c = |ops| Circuit::new(2, ops).unwrap();
        assert_eq!(oracle_pair_cover(&c(vec![Cz(0, 1), Unary(0), Cz(0, 1)])).unwrap(), 1);
        assert_eq!(
            oracle_pair_cover(&c(vec![Cz(0, 1), Unary(0), Unary(1), Cz(0, 1)])).unwrap(),
            2
        );
        assert_eq!(oracle_pair_cover(&c(vec![Unary(0)])).unwrap(), 0);
    }

    #[test]
    fn single_nonlocal_gate() {
        let c = Circuit::new(2, [Cz(0, 1)]).unwrap();
        let net = Network::complete(vec![1, 1], vec![1, 1]).unwrap();
        let sol = oracle_dqcm(c.view(), &net, CoverMode::General, &OracleLimits::default()).unwrap();
        assert_eq!(sol.cost, 1);
        let local = Network::complete(vec![2, 0], vec![1, 1]).unwrap();
        let sol = oracle_dqcm(c.view(), &local, CoverMode::General, &OracleLimits::default()).unwrap();
        assert_eq!(sol.cost, 0);
    }

    #[test]
    fn two_phase_values() {
        let (c, net) = fixtures::two_phase();
        let lim = OracleLimits::default();
        let sol = oracle_dqcm(c.view(), &net, CoverMode::General, &lim).unwrap();
        assert_eq!(sol.cost, 2);
        assert_eq!(oracle_dqc(&c, &net, 0, &lim).unwrap(), 2);
        assert_eq!(oracle_dqc(&c, &net, 1, &lim).unwrap(), 2);
    }

    #[test]
    fn broken_fixture_gains_from_a_cut() {
        let (c, net) = fixtures::two_phase_broken();
        let lim = OracleLimits {
            max_gates: 16,
            ..OracleLimits::default()
        };
        let none = oracle_dqc(&c, &net, 0, &lim).unwrap();
        let one = oracle_dqc(&c, &net, 1, &lim).unwrap();
        assert_eq!(none, 4);
        assert_eq!(one, 2);
        assert!(oracle_dqc(&c, &net, 2, &lim).unwrap() <= one);
    }

    #[test]
    fn memory_can_make_an_assignment_infeasible() {
        // both gates at once need two copies on node 1
        let c = Circuit::new(3, [Cz(0, 2), Cz(1, 2), Cz(0, 2), Cz(1, 2)]).unwrap();
        let net = Network::complete(vec![2, 1], vec![0, 1]).unwrap();
        let a = Assignment::new(vec![0, 0, 1]);
        let d = net.distances().unwrap();
        let (cost, ms) = oracle_cover(c.view(), &a, &net, &d, CoverMode::General, &OracleLimits::default())
            .unwrap()
            .unwrap();
        // node 1 holds one copy, so the copies of q0 and q1 must alternate
        assert_eq!(cost, 4);
        assert!(ms.iter().all(Migration::is_instantaneous));
    }

    #[test]
    fn limits_are_enforced() {
        let c = Circuit::new(7, [Cz(0, 6)]).unwrap();
        let net = Network::complete(vec![7], vec![1]).unwrap();
        assert!(matches!(
            oracle_dqcm(c.view(), &net, CoverMode::General, &OracleLimits::default()),
            Err(Error::LimitExceeded(_))
        ));
    }

    #[test]
    fn assignments_enumerated_in_order() {
        let net = Network::complete(vec![1, 1], vec![1, 1]).unwrap();
        let all: Vec<Vec<Node>> = all_assignments(2, &net).iter().map(|a| a.homes().to_vec()).collect();
        assert_eq!(all, vec![vec![0, 1], vec![1, 0]]);
    }
}
