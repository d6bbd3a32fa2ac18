use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::candidates::{enumerate_candidates, CandId, CandidateSet, Unit, Units};
use super::{CoverMode, Migration};
use crate::circuit::CircuitView;
use crate::error::{Error, Result};
use crate::network::{DistanceMatrix, Network};
use crate::tabu::Assignment;
use crate::{Cost, Instant, Node, Qubit};

/// Fraction of the still-uncovered gates each round must cover.
pub const ALPHA: f64 = 0.4;

/// Selection progress carried across rounds: what is covered and chosen,
/// per-row occupancy, and the multiplicative row weights.
#[derive(Debug, Clone)]
pub struct CoverageState {
    covered: Vec<bool>,
    selected: Vec<bool>,
    occupancy: Vec<Vec<u32>>,
    weights: Vec<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
}

impl CoverageState {
    pub fn new(set: &CandidateSet, net: &Network) -> Self {
        let rows = set.row_count();
        let n = net.num_nodes();
        CoverageState {
            covered: vec![false; set.gates.len()],
            selected: vec![false; set.candidates.len()],
            occupancy: vec![vec![0; rows]; n],
            weights: vec![vec![1.0; rows]; n],
            prefix: (0..n).map(|_| (0..=rows).map(|r| r as f64).collect()).collect(),
        }
    }

    pub fn uncovered(&self) -> usize {
        self.covered.iter().filter(|&&c| !c).count()
    }

    pub fn is_covered(&self, gate: usize) -> bool {
        self.covered[gate]
    }

    pub fn selected(&self) -> impl Iterator<Item = CandId> + '_ {
        (0..self.selected.len()).filter(|&c| self.selected[c])
    }

    pub fn occupancy(&self, node: Node) -> &[u32] {
        &self.occupancy[node]
    }

    fn weight_sum(&self, node: Node, rows: std::ops::Range<usize>) -> f64 {
        self.prefix[node][rows.end] - self.prefix[node][rows.start]
    }

    fn commit(&mut self, set: &CandidateSet, units: &Units, unit: Unit, e: &[u32]) -> Vec<usize> {
        let newly = gain(set, units.mode, self, unit);
        for &g in &newly {
            self.covered[g] = true;
        }
        for c in unit.members() {
            self.selected[c] = true;
            let p = set.candidates[c].migration.target;
            let factor = 2f64.powf(1.0 / e[p].max(1) as f64);
            let rows = set.rows(c);
            for r in rows.clone() {
                self.occupancy[p][r] += 1;
                self.weights[p][r] *= factor;
            }
            let (w, pre) = (&self.weights[p], &mut self.prefix[p]);
            for r in rows.start..w.len() {
                pre[r + 1] = pre[r] + w[r];
            }
        }
        newly
    }
}

/// Gates a unit would newly cover given what is already selected.
fn gain(set: &CandidateSet, mode: CoverMode, st: &CoverageState, unit: Unit) -> Vec<usize> {
    let in_unit = |c: CandId| unit.members().any(|m| m == c);
    let mut out = Vec::new();
    for c in unit.members() {
        let cand = &set.candidates[c];
        out.extend(cand.home_covers.iter().copied().filter(|&g| !st.covered[g]));
        if mode == CoverMode::General {
            out.extend(
                cand.pair_covers
                    .iter()
                    .filter(|&&(g, o)| !st.covered[g] && (st.selected[o] || in_unit(o)))
                    .map(|&(g, _)| g),
            );
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Whether adding the unit keeps every touched row within execution memory.
fn fits(set: &CandidateSet, st: &CoverageState, unit: Unit, e: &[u32]) -> bool {
    let members: Vec<CandId> = unit.members().collect();
    members.iter().all(|&c| {
        let p = set.candidates[c].migration.target;
        set.rows(c).all(|r| {
            let extra = members
                .iter()
                .filter(|&&m| set.candidates[m].migration.target == p && set.rows(m).contains(&r))
                .count() as u32;
            st.occupancy[p][r] + extra <= e[p]
        })
    })
}

#[derive(Clone, Copy)]
enum Rule {
    /// Best covered-per-weighted-cost ratio within a budget, memory enforced.
    Budgeted(Cost),
    /// Most gates per pick, no budget and no memory check.
    MostGates,
}

type Key = ((Instant, Qubit, Node), (Instant, Qubit, Node));

#[derive(Clone, Copy)]
struct Entry {
    score: f64,
    cost: Cost,
    key: Key,
    unit: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // larger is better: higher score, then lower cost, then smaller key
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.cost.cmp(&self.cost))
            .then_with(|| other.key.cmp(&self.key))
            .then_with(|| other.unit.cmp(&self.unit))
    }
}

enum Eval {
    Live(Entry),
    /// Nothing new to cover right now; a later partner pick may revive it.
    Idle,
    /// Can never be picked again in this call.
    Dead,
}

struct Selector<'a> {
    set: &'a CandidateSet,
    units: &'a Units,
    e: &'a [u32],
    rule: Rule,
}

impl Selector<'_> {
    fn key(&self, unit: Unit) -> Key {
        let k = |c: CandId| {
            let m = &self.set.candidates[c].migration;
            (m.start, m.qubit, m.target)
        };
        match unit {
            Unit::Single(a) => (k(a), k(a)),
            Unit::Pair(a, b) => (k(a).min(k(b)), k(a).max(k(b))),
        }
    }

    fn eval(&self, st: &CoverageState, u: usize, spent: Cost) -> Eval {
        let unit = self.units.units[u];
        if unit.members().any(|c| st.selected[c]) {
            // a pair with one member chosen behaves like the other's single
            return Eval::Dead;
        }
        let cost: Cost = unit
            .members()
            .map(|c| self.set.candidates[c].migration.cost)
            .sum();
        let newly = gain(self.set, self.units.mode, st, unit).len();
        let score = match self.rule {
            Rule::Budgeted(budget) => {
                if spent + cost > budget {
                    return Eval::Dead;
                }
                let weighted: f64 = unit
                    .members()
                    .map(|c| {
                        let p = self.set.candidates[c].migration.target;
                        st.weight_sum(p, self.set.rows(c)) / self.e[p].max(1) as f64
                    })
                    .sum();
                newly as f64 / (cost as f64 + weighted)
            }
            Rule::MostGates => newly as f64,
        };
        if newly == 0 {
            return Eval::Idle;
        }
        Eval::Live(Entry {
            score,
            cost,
            key: self.key(unit),
            unit: u,
        })
    }

    /// Lazy greedy: stored scores are upper bounds, since weights only grow
    /// and coverage only shrinks, except when a pick completes a pair, in
    /// which case the affected units are re-queued.
    fn run(&self, mut st: CoverageState) -> AgOutcome {
        let mut heap = BinaryHeap::new();
        let mut dead = vec![false; self.units.units.len()];
        let mut spent = 0;
        for u in 0..self.units.units.len() {
            match self.eval(&st, u, spent) {
                Eval::Live(entry) => heap.push(entry),
                Eval::Dead => dead[u] = true,
                Eval::Idle => {}
            }
        }
        let mut picked = Vec::new();
        let mut newly = Vec::new();
        while let Some(top) = heap.pop() {
            if dead[top.unit] {
                continue;
            }
            let fresh = match self.eval(&st, top.unit, spent) {
                Eval::Live(entry) => entry,
                Eval::Dead => {
                    dead[top.unit] = true;
                    continue;
                }
                Eval::Idle => continue,
            };
            if heap.peek().is_some_and(|next| fresh < *next) {
                heap.push(fresh);
                continue;
            }
            let unit = self.units.units[top.unit];
            if matches!(self.rule, Rule::Budgeted(_)) && !fits(self.set, &st, unit, self.e) {
                dead[top.unit] = true;
                continue;
            }
            spent += fresh.cost;
            newly.extend(st.commit(self.set, self.units, unit, self.e));
            picked.extend(unit.members());
            dead[top.unit] = true;
            if self.units.mode == CoverMode::General {
                for c in unit.members() {
                    for &(g, o) in &self.set.candidates[c].pair_covers {
                        if st.covered[g] || st.selected[o] {
                            continue;
                        }
                        for &v in &self.units.of_candidate[o] {
                            if dead[v] {
                                continue;
                            }
                            if let Eval::Live(entry) = self.eval(&st, v, spent) {
                                heap.push(entry);
                            }
                        }
                    }
                }
            }
        }
        newly.sort_unstable();
        AgOutcome {
            picked,
            newly,
            cost: spent,
            state: st,
        }
    }
}

/// Result of one selection call.
#[derive(Debug, Clone)]
pub struct AgOutcome {
    /// Candidates chosen in pick order.
    pub picked: Vec<CandId>,
    /// Gate indices newly covered.
    pub newly: Vec<usize>,
    pub cost: Cost,
    /// State after the picks.
    pub state: CoverageState,
}

/// Budgeted multiplicative-weights selection starting from `state`.
///
/// Repeatedly picks the unit with the best ratio of newly covered gates to
/// cost plus occupancy-weighted rows, skipping units that would exceed the
/// budget or any node's execution memory. Row weights grow by
/// `2^(occ/e_p)` after every pick.
pub fn ag_select(
    budget: Cost,
    state: &CoverageState,
    set: &CandidateSet,
    units: &Units,
    net: &Network,
) -> AgOutcome {
    Selector {
        set,
        units,
        e: net.exec_mem(),
        rule: Rule::Budgeted(budget),
    }
    .run(state.clone())
}

/// Smallest budget (by binary search over `[1, uncovered * diameter]`) whose
/// selection covers at least `alpha` of the uncovered gates.
///
/// The search runs on the envelope "best coverage among evaluated budgets not
/// above c", which is monotone even where the raw selection is not. If even
/// the largest budget falls short, the best-covering result is returned.
pub fn cover_alpha(
    state: &CoverageState,
    set: &CandidateSet,
    units: &Units,
    net: &Network,
    diameter: u32,
    alpha: f64,
) -> Result<AgOutcome> {
    let uncovered: Vec<usize> = (0..set.gates.len()).filter(|&g| !state.covered[g]).collect();
    let dead: Vec<usize> = set.uncoverable(units.mode);
    if let Some(&g) = dead.iter().find(|g| uncovered.contains(g)) {
        return Err(Error::Uncoverable(set.gates[g].instant));
    }
    let need = ((alpha * uncovered.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    let max_cost = (uncovered.len() as Cost * Cost::from(diameter)).max(1);
    let mut seen: BTreeMap<Cost, AgOutcome> = BTreeMap::new();
    let mut envelope = |c: Cost| -> (Cost, usize) {
        if !seen.contains_key(&c) {
            seen.insert(c, ag_select(c, state, set, units, net));
        }
        let mut best = (c, 0);
        for (&b, out) in seen.range(..=c) {
            if out.newly.len() > best.1 {
                best = (b, out.newly.len());
            }
        }
        best
    };
    let (top_budget, top_cov) = envelope(max_cost);
    if top_cov < need {
        return Ok(seen.remove(&top_budget).expect("evaluated"));
    }
    let (mut lo, mut hi) = (1, max_cost);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if envelope(mid).1 >= need {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let (b, _) = envelope(lo);
    Ok(seen.remove(&b).expect("evaluated"))
}

fn add_picks(state: &mut CoverageState, base: &CoverageState) {
    for (row, base_row) in state.occupancy.iter_mut().zip(&base.occupancy) {
        for (o, b) in row.iter_mut().zip(base_row) {
            *o += b;
        }
    }
}

/// Covers every non-local gate of the window with repeated [`cover_alpha`]
/// rounds. Selected migrations come back sorted by start, qubit, target.
///
/// Occupancy from earlier rounds binds later ones. When a round can cover
/// nothing under that constraint it is rerun with the carried occupancy
/// cleared; the overflow this may cause is left to the repair step.
pub fn iterative_cover(
    view: CircuitView<'_>,
    a: &Assignment,
    net: &Network,
    d: &DistanceMatrix,
    mode: CoverMode,
) -> Result<Vec<Migration>> {
    let set = enumerate_candidates(view, a, net, d);
    let units = set.units(mode);
    if let Some(&g) = set.uncoverable(mode).first() {
        return Err(Error::Uncoverable(set.gates[g].instant));
    }
    let diameter = d.diameter();
    let mut state = CoverageState::new(&set, net);
    while state.uncovered() > 0 {
        let mut out = cover_alpha(&state, &set, &units, net, diameter, ALPHA)?;
        if out.newly.is_empty() {
            let mut relaxed = state.clone();
            relaxed.occupancy.iter_mut().for_each(|r| r.fill(0));
            out = cover_alpha(&relaxed, &set, &units, net, diameter, ALPHA)?;
            if out.newly.is_empty() {
                // budgets capped at uncovered * diameter can miss a lone
                // gate that only a pair can serve
                out = ag_select(Cost::MAX / 4, &relaxed, &set, &units, net);
            }
            if out.newly.is_empty() {
                let g = (0..set.gates.len()).find(|&g| !state.covered[g]).unwrap();
                return Err(Error::Uncoverable(set.gates[g].instant));
            }
            add_picks(&mut out.state, &state);
        }
        state = out.state;
    }
    Ok(collect(&set, &state))
}

fn collect(set: &CandidateSet, state: &CoverageState) -> Vec<Migration> {
    let mut ms: Vec<Migration> = state
        .selected()
        .map(|c| set.candidates[c].migration)
        .collect();
    ms.sort_by_key(Migration::order_key);
    ms
}

/// Baseline cover: repeatedly takes the unit covering the most uncovered
/// gates (ties to lower cost), ignoring execution memory.
pub fn greedy_cover(
    view: CircuitView<'_>,
    a: &Assignment,
    net: &Network,
    d: &DistanceMatrix,
) -> Result<Vec<Migration>> {
    let set = enumerate_candidates(view, a, net, d);
    let units = set.units(CoverMode::General);
    if let Some(&g) = set.uncoverable(CoverMode::General).first() {
        return Err(Error::Uncoverable(set.gates[g].instant));
    }
    let out = Selector {
        set: &set,
        units: &units,
        e: net.exec_mem(),
        rule: Rule::MostGates,
    }
    .run(CoverageState::new(&set, net));
    debug_assert_eq!(out.state.uncovered(), 0);
    Ok(collect(&set, &out.state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, GateOp::*};
    use crate::coverage::CoverMap;

    fn setup(
        c: &Circuit,
        net: &Network,
        homes: Vec<Node>,
    ) -> (CandidateSet, Assignment, DistanceMatrix) {
        let a = Assignment::new(homes);
        let d = net.distances().unwrap();
        (enumerate_candidates(c.view(), &a, net, &d), a, d)
    }

    #[test]
    fn single_gate_two_home_candidates() {
        let c = Circuit::new(2, [Cz(0, 1)]).unwrap();
        let net = Network::path(vec![1, 1], vec![1, 1]).unwrap();
        let (set, _, _) = setup(&c, &net, vec![0, 1]);
        assert_eq!(set.candidates.len(), 2);
        assert!(set.candidates.iter().all(|c| c.home_covers == vec![0]));
        let units = set.units(CoverMode::General);
        assert_eq!(units.units.len(), 2);
    }

    #[test]
    fn pair_option_through_middle_node() {
        let c = Circuit::new(2, [Cz(0, 1)]).unwrap();
        let net = Network::path(vec![1, 0, 1], vec![0, 2, 0]).unwrap();
        let (set, a, d) = setup(&c, &net, vec![0, 2]);
        let units = set.units(CoverMode::General);
        assert_eq!(units.units, vec![Unit::Single(0), Unit::Single(1), Unit::Pair(0, 1)]);
        let cost: Cost = set.candidates.iter().map(|c| c.migration.cost).sum();
        assert_eq!(cost, 2);
        let ms = iterative_cover(c.view(), &a, &net, &d, CoverMode::General).unwrap();
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| m.target == 1));
        assert_eq!(
            iterative_cover(c.view(), &a, &net, &d, CoverMode::HomeOnly),
            Err(Error::Uncoverable(1))
        );
    }

    #[test]
    fn alpha_search_finds_cheapest_budget() {
        // one gate, only cover costs 3 (path of four nodes)
        let c = Circuit::new(2, [Cz(0, 1)]).unwrap();
        let net = Network::path(vec![1, 0, 0, 1], vec![1, 0, 0, 0]).unwrap();
        let (set, _, d) = setup(&c, &net, vec![0, 3]);
        let units = set.units(CoverMode::General);
        let st = CoverageState::new(&set, &net);
        // linear scan as the reference
        let scan = (1..)
            .find(|&b| !ag_select(b, &st, &set, &units, &net).newly.is_empty())
            .unwrap();
        assert_eq!(scan, 3);
        let out = cover_alpha(&st, &set, &units, &net, d.diameter(), ALPHA).unwrap();
        assert_eq!(out.cost, 3);
        assert_eq!(out.newly, vec![0]);
    }

    #[test]
    fn alpha_met_by_small_budget() {
        // five gates; two share one free interval of qubit 0
        let c = Circuit::new(
            2,
            [Cz(0, 1), Cz(0, 1), Unary(0), Unary(1), Cz(0, 1), Unary(0), Unary(1), Cz(0, 1), Unary(0), Unary(1), Cz(0, 1)],
        )
        .unwrap();
        let net = Network::path(vec![1, 1], vec![1, 1]).unwrap();
        let (set, _, d) = setup(&c, &net, vec![0, 1]);
        let units = set.units(CoverMode::General);
        let st = CoverageState::new(&set, &net);
        assert_eq!(ag_select(1, &st, &set, &units, &net).newly.len(), 2);
        let out = cover_alpha(&st, &set, &units, &net, d.diameter(), ALPHA).unwrap();
        assert_eq!(out.cost, 1);
        assert_eq!(out.newly, vec![0, 1]);
    }

    #[test]
    fn selection_respects_memory() {
        // both qubits want node 1 at the same time but it holds one copy
        let c = Circuit::new(3, [Cz(0, 2), Cz(1, 2)]).unwrap();
        let net = Network::path(vec![2, 1], vec![1, 1]).unwrap();
        let (set, a, _) = setup(&c, &net, vec![0, 0, 1]);
        let units = set.units(CoverMode::General);
        let out = ag_select(100, &CoverageState::new(&set, &net), &set, &units, &net);
        assert_eq!(out.newly.len(), 2);
        let ms: Vec<Migration> = out.picked.iter().map(|&c| set.candidates[c].migration).collect();
        for t in [1, 3] {
            for p in 0..2 {
                let occ = ms.iter().filter(|m| m.target == p && m.holds(t)).count() as u32;
                assert!(occ <= net.exec_mem()[p]);
            }
        }
        assert!(CoverMap::for_view(c.view(), &a, &ms).all_covered());
    }

    #[test]
    fn greedy_prefers_broad_migrations() {
        let c = Circuit::new(3, [Cz(0, 1), Cz(0, 2), Cz(0, 1)]).unwrap();
        let net = Network::complete(vec![1, 2], vec![2, 2]).unwrap();
        let (_, a, d) = setup(&c, &net, vec![0, 1, 1]);
        let ms = greedy_cover(c.view(), &a, &net, &d).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!((ms[0].qubit, ms[0].target, ms[0].start, ms[0].end), (0, 1, 0, 6));
    }

    #[test]
    fn local_circuit_needs_nothing() {
        let c = Circuit::new(2, [Cz(0, 1), Unary(0)]).unwrap();
        let net = Network::path(vec![2, 0], vec![1, 1]).unwrap();
        let (_, a, d) = setup(&c, &net, vec![0, 0]);
        assert!(iterative_cover(c.view(), &a, &net, &d, CoverMode::General).unwrap().is_empty());
        assert!(greedy_cover(c.view(), &a, &net, &d).unwrap().is_empty());
    }
}
