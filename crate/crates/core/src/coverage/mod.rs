//! Covering non-local CZ gates with migrations for a fixed assignment.
//!
//! A migration `(q, p, start, end)` keeps a linked copy of `q` at computer `p`
//! for the gate instants strictly between its even endpoints. A gate is
//! covered when one operand has a copy at the other's home, or when both
//! operands have copies at a common third computer.

mod candidates;
mod select;

use serde::{Deserialize, Serialize};

pub use candidates::{enumerate_candidates, CandId, Candidate, CandidateSet, Unit, Units};
pub use select::{
    ag_select, cover_alpha, greedy_cover, iterative_cover, AgOutcome, CoverageState, ALPHA,
};

use crate::circuit::{CircuitView, Gate};
use crate::tabu::Assignment;
use crate::{Cost, Instant, Node, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Migration {
    pub qubit: Qubit,
    pub target: Node,
    #[serde(rename = "t_s")]
    pub start: Instant,
    #[serde(rename = "t_e")]
    pub end: Instant,
    pub cost: Cost,
}

impl Migration {
    /// Whether the copy is held at gate instant `t`.
    #[inline]
    pub fn holds(&self, t: Instant) -> bool {
        self.start <= t && t <= self.end
    }

    /// Spans exactly one gate instant.
    pub fn is_instantaneous(&self) -> bool {
        self.end - self.start <= 2
    }

    pub fn len(&self) -> Instant {
        self.end - self.start
    }

    /// Tie-break order used across selection and repair.
    pub fn order_key(&self) -> (Instant, Qubit, Node, Instant) {
        (self.start, self.qubit, self.target, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    /// Only one-operand-to-the-other's-home coverage.
    HomeOnly,
    /// Home coverage plus pairs of migrations to a common computer.
    General,
}

/// CZ gates whose operands have different homes, in time order.
pub fn nonlocal_gates(view: CircuitView<'_>, a: &Assignment) -> Vec<Gate> {
    view.binary_gates()
        .filter(|g| {
            let (x, y) = g.pair().unwrap();
            a.home(x) != a.home(y)
        })
        .copied()
        .collect()
}

/// How a gate is covered by a migration set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cover {
    Home(usize),
    Pair(usize, usize),
}

/// Coverage of each non-local gate by an indexed migration list.
#[derive(Debug, Clone)]
pub struct CoverMap {
    pub gates: Vec<Gate>,
    /// Covers per gate, indices into the migration list.
    pub covers: Vec<Vec<Cover>>,
}

impl CoverMap {
    /// `home` gives each qubit's home at a gate instant.
    pub fn build<H>(gates: Vec<Gate>, migrations: &[Migration], home: H) -> Self
    where
        H: Fn(Qubit, Instant) -> Node,
    {
        let nq = gates
            .iter()
            .filter_map(|g| g.pair())
            .map(|(a, b)| a.max(b) + 1)
            .chain(migrations.iter().map(|m| m.qubit + 1))
            .max()
            .unwrap_or(0);
        let mut by_qubit: Vec<Vec<usize>> = vec![Vec::new(); nq];
        for (i, m) in migrations.iter().enumerate() {
            by_qubit[m.qubit].push(i);
        }
        let covers = gates
            .iter()
            .map(|g| {
                let (x, y) = g.pair().expect("non-local gates are CZ");
                let t = g.instant;
                let (hx, hy) = (home(x, t), home(y, t));
                let live = |q: Qubit| {
                    by_qubit[q]
                        .iter()
                        .copied()
                        .filter(move |&i| migrations[i].holds(t))
                };
                let mut out = Vec::new();
                for i in live(x).filter(|&i| migrations[i].target == hy) {
                    out.push(Cover::Home(i));
                }
                for i in live(y).filter(|&i| migrations[i].target == hx) {
                    out.push(Cover::Home(i));
                }
                for i in live(x) {
                    let p = migrations[i].target;
                    if p == hx || p == hy {
                        continue;
                    }
                    for j in live(y).filter(|&j| migrations[j].target == p) {
                        out.push(Cover::Pair(i, j));
                    }
                }
                out
            })
            .collect();
        CoverMap { gates, covers }
    }

    pub fn for_view(view: CircuitView<'_>, a: &Assignment, migrations: &[Migration]) -> Self {
        CoverMap::build(nonlocal_gates(view, a), migrations, |q, _| a.home(q))
    }

    pub fn all_covered(&self) -> bool {
        self.covers.iter().all(|c| !c.is_empty())
    }

    pub fn uncovered(&self) -> impl Iterator<Item = &Gate> {
        self.gates
            .iter()
            .zip(&self.covers)
            .filter(|(_, c)| c.is_empty())
            .map(|(g, _)| g)
    }

    /// Gate indices each migration takes part in covering.
    pub fn contributions(&self, num_migrations: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); num_migrations];
        for (g, covers) in self.covers.iter().enumerate() {
            for c in covers {
                match *c {
                    Cover::Home(i) => out[i].push(g),
                    Cover::Pair(i, j) => {
                        out[i].push(g);
                        out[j].push(g);
                    }
                }
            }
        }
        for v in &mut out {
            v.dedup();
        }
        out
    }
}

pub fn total_cost(migrations: &[Migration]) -> Cost {
    migrations.iter().map(|m| m.cost).sum()
}
