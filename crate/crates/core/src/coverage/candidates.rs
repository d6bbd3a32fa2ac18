use std::collections::{BTreeMap, BTreeSet};

use super::{nonlocal_gates, CoverMode, Migration};
use crate::circuit::{CircuitView, Gate};
use crate::network::{DistanceMatrix, Network};
use crate::tabu::Assignment;
use crate::{Instant, Node, Qubit};

pub type CandId = usize;

/// A maximal unary-free migration of one qubit to one computer.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub migration: Migration,
    /// Gate indices covered on its own.
    pub home_covers: Vec<usize>,
    /// Gate indices covered together with the partner candidate.
    pub pair_covers: Vec<(usize, CandId)>,
}

/// Every candidate migration that serves at least one non-local gate of a
/// window under a fixed assignment.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub start: Instant,
    pub end: Instant,
    pub gates: Vec<Gate>,
    pub candidates: Vec<Candidate>,
}

/// A selectable group: one candidate, or two sharing a third computer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Unit {
    Single(CandId),
    Pair(CandId, CandId),
}

impl Unit {
    pub fn members(&self) -> impl Iterator<Item = CandId> {
        let (a, b) = match *self {
            Unit::Single(a) => (a, None),
            Unit::Pair(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }
}

/// Units for one cover mode plus a reverse index from candidate to units.
#[derive(Debug, Clone)]
pub struct Units {
    pub mode: CoverMode,
    pub units: Vec<Unit>,
    pub of_candidate: Vec<Vec<usize>>,
}

pub fn enumerate_candidates(
    view: CircuitView<'_>,
    a: &Assignment,
    net: &Network,
    d: &DistanceMatrix,
) -> CandidateSet {
    let unary = view.unary_instants();
    let gates = nonlocal_gates(view, a);
    let e = net.exec_mem();
    let mut index: BTreeMap<(Qubit, Node, Instant), CandId> = BTreeMap::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut get = |q: Qubit, p: Node, t: Instant| -> CandId {
        let (lo, hi) = view.free_interval(&unary[q], t);
        *index.entry((q, p, lo)).or_insert_with(|| {
            candidates.push(Candidate {
                migration: Migration {
                    qubit: q,
                    target: p,
                    start: lo,
                    end: hi,
                    cost: d.get(a.home(q), p).into(),
                },
                home_covers: Vec::new(),
                pair_covers: Vec::new(),
            });
            candidates.len() - 1
        })
    };
    let mut home_links = Vec::new();
    let mut pair_links = Vec::new();
    for (gi, g) in gates.iter().enumerate() {
        let (x, y) = g.pair().expect("non-local gates are CZ");
        let t = g.instant;
        for (q, o) in [(x, y), (y, x)] {
            let p = a.home(o);
            if e[p] >= 1 {
                home_links.push((get(q, p, t), gi));
            }
        }
        for p in 0..net.num_nodes() {
            if p == a.home(x) || p == a.home(y) || e[p] < 2 {
                continue;
            }
            pair_links.push((get(x, p, t), get(y, p, t), gi));
        }
    }
    for (c, gi) in home_links {
        candidates[c].home_covers.push(gi);
    }
    for (cx, cy, gi) in pair_links {
        candidates[cx].pair_covers.push((gi, cy));
        candidates[cy].pair_covers.push((gi, cx));
    }
    CandidateSet {
        start: view.start(),
        end: view.end(),
        gates,
        candidates,
    }
}

impl CandidateSet {
    pub fn units(&self, mode: CoverMode) -> Units {
        let mut units: Vec<Unit> = (0..self.candidates.len())
            .filter(|&c| {
                let cand = &self.candidates[c];
                !cand.home_covers.is_empty()
                    || (mode == CoverMode::General && !cand.pair_covers.is_empty())
            })
            .map(Unit::Single)
            .collect();
        if mode == CoverMode::General {
            let pairs: BTreeSet<(CandId, CandId)> = self
                .candidates
                .iter()
                .enumerate()
                .flat_map(|(c, cand)| {
                    cand.pair_covers
                        .iter()
                        .map(move |&(_, o)| (c.min(o), c.max(o)))
                })
                .collect();
            units.extend(pairs.into_iter().map(|(a, b)| Unit::Pair(a, b)));
        }
        let mut of_candidate = vec![Vec::new(); self.candidates.len()];
        for (u, unit) in units.iter().enumerate() {
            for c in unit.members() {
                of_candidate[c].push(u);
            }
        }
        Units {
            mode,
            units,
            of_candidate,
        }
    }

    /// Gates that no unit of `mode` can cover.
    pub fn uncoverable(&self, mode: CoverMode) -> Vec<usize> {
        let mut ok = vec![false; self.gates.len()];
        for c in &self.candidates {
            for &g in &c.home_covers {
                ok[g] = true;
            }
            if mode == CoverMode::General {
                for &(g, _) in &c.pair_covers {
                    ok[g] = true;
                }
            }
        }
        (0..ok.len()).filter(|&g| !ok[g]).collect()
    }

    pub fn row_count(&self) -> usize {
        ((self.end - self.start) / 2) as usize
    }

    /// Half-open range of gate rows a candidate occupies.
    pub fn rows(&self, c: CandId) -> std::ops::Range<usize> {
        let m = &self.candidates[c].migration;
        ((m.start - self.start) / 2) as usize..((m.end - self.start) / 2) as usize
    }

    pub fn row_of(&self, gate: usize) -> usize {
        ((self.gates[gate].instant - self.start - 1) / 2) as usize
    }
}
