//! Execution-memory feasibility checks and repair.
//!
//! Occupancy is counted at gate instants only: a migration `[start, end]`
//! holds a copy at every odd instant strictly inside it.

use serde::Serialize;

use crate::circuit::CircuitView;
use crate::coverage::{Cover, CoverMap, Migration};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::tabu::Assignment;
use crate::{Instant, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub node: Node,
    pub instant: Instant,
    pub occupancy: u32,
    pub capacity: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Copies held per node at each gate instant of `[start, end)`, indexed by
/// `(t - start - 1) / 2`.
pub fn occupancy(
    migrations: &[Migration],
    num_nodes: usize,
    start: Instant,
    end: Instant,
) -> Vec<Vec<u32>> {
    let rows = ((end - start) / 2) as usize;
    let mut occ = vec![vec![0u32; rows]; num_nodes];
    for m in migrations {
        let lo = m.start.max(start);
        let hi = m.end.min(end);
        if lo >= hi {
            continue;
        }
        for r in ((lo - start) / 2) as usize..((hi - start) / 2) as usize {
            occ[m.target][r] += 1;
        }
    }
    occ
}

/// Every (node, gate instant) whose occupancy exceeds execution memory.
pub fn check_feasible(
    migrations: &[Migration],
    net: &Network,
    start: Instant,
    end: Instant,
) -> ViolationReport {
    let e = net.exec_mem();
    let occ = occupancy(migrations, net.num_nodes(), start, end);
    let mut violations = Vec::new();
    for r in 0..occ.first().map_or(0, Vec::len) {
        for (p, row) in occ.iter().enumerate() {
            if row[r] > e[p] {
                violations.push(Violation {
                    node: p,
                    instant: start + 2 * r as Instant + 1,
                    occupancy: row[r],
                    capacity: e[p],
                });
            }
        }
    }
    ViolationReport { violations }
}

/// Removes execution-memory overflow by replacing long migrations with
/// instantaneous ones.
///
/// Covers that can survive repair: a pair meeting at a node with room for a
/// single copy only counts as overlap, never as coverage.
fn usable_covers(view: CircuitView<'_>, a: &Assignment, ms: &[Migration], e: &[u32]) -> CoverMap {
    let mut map = CoverMap::for_view(view, a, ms);
    for covers in &mut map.covers {
        covers.retain(|c| match *c {
            Cover::Home(_) => true,
            Cover::Pair(i, _) => e[ms[i].target] >= 2,
        });
    }
    map
}

/// While some row is over capacity, the non-instantaneous migration through a
/// violated row that serves the fewest gates (then the shortest, then the
/// earliest) is dropped, and every gate it alone was covering gets an
/// instantaneous copy of the same qubit to the same node. Coverage is
/// preserved; cost can only rise or stay equal per replaced gate.
pub fn repair(
    migrations: &[Migration],
    net: &Network,
    view: CircuitView<'_>,
    a: &Assignment,
) -> Result<Vec<Migration>> {
    let e = net.exec_mem();
    if let Some(m) = migrations.iter().find(|m| e[m.target] == 0) {
        return Err(Error::IrreparableCapacity { node: m.target });
    }
    let mut ms: Vec<Migration> = migrations.to_vec();
    let raw = CoverMap::for_view(view, a, &ms);
    let usable = usable_covers(view, a, &ms, e);
    if let Some(g) = (0..raw.gates.len()).find(|&g| !raw.covers[g].is_empty() && usable.covers[g].is_empty()) {
        let Cover::Pair(i, _) = raw.covers[g][0] else {
            unreachable!("home covers are always usable")
        };
        return Err(Error::IrreparableCapacity { node: ms[i].target });
    }
    loop {
        let report = check_feasible(&ms, net, view.start(), view.end());
        if report.is_feasible() {
            ms.sort_by_key(Migration::order_key);
            return Ok(ms);
        }
        let map = usable_covers(view, a, &ms, e);
        let serves = map.contributions(ms.len());
        let victim = (0..ms.len())
            .filter(|&i| !ms[i].is_instantaneous())
            .filter(|&i| {
                report
                    .violations
                    .iter()
                    .any(|v| v.node == ms[i].target && ms[i].holds(v.instant))
            })
            .min_by_key(|&i| (serves[i].len(), ms[i].len(), ms[i].order_key()));
        let Some(victim) = victim else {
            return Err(Error::IrreparableCapacity {
                node: report.violations[0].node,
            });
        };
        let m = ms.swap_remove(victim);
        let rest = usable_covers(view, a, &ms, e);
        for &g in &serves[victim] {
            if !rest.covers[g].is_empty() {
                continue;
            }
            let t = rest.gates[g].instant;
            let (x, y) = rest.gates[g].pair().expect("non-local gates are CZ");
            let partner = if x == m.qubit { y } else { x };
            if a.home(partner) != m.target && e[m.target] < 2 {
                // a pair cover needs room for both copies at once
                return Err(Error::IrreparableCapacity { node: m.target });
            }
            ms.push(Migration {
                start: t - 1,
                end: t + 1,
                ..m
            });
        }
    }
}
