//! Teleportation cut placement.

use super::{assemble, teleport_cost, Plan, SegmentSolution, Solver};
use crate::circuit::Circuit;
use crate::error::Result;
use crate::network::{DistanceMatrix, Network};
use crate::planner::PlanParams;
use crate::repair::check_feasible;
use crate::{Cost, Instant};

/// Even instants immediately before each CZ gate, excluding 0.
pub fn candidate_cuts(c: &Circuit) -> Vec<Instant> {
    c.gates()
        .iter()
        .filter(|g| g.is_binary() && g.instant > 1)
        .map(|g| g.instant - 1)
        .collect()
}

/// A cut search result with the estimated total after each accepted cut,
/// starting from the uncut estimate.
#[derive(Debug, Clone)]
pub struct CutSearch {
    pub plan: Plan,
    pub estimates: Vec<Cost>,
}

fn entry_cost(prev: Option<&SegmentSolution>, next: &SegmentSolution, d: &DistanceMatrix) -> Cost {
    prev.map_or(0, |p| teleport_cost(&p.assignment, &next.assignment, d))
}

/// Left-to-right scan: a candidate is accepted when solving the remaining
/// suffix as two segments beats solving it as one.
pub fn sequence_search(
    c: &Circuit,
    net: &Network,
    d: &DistanceMatrix,
    params: &PlanParams,
) -> Result<CutSearch> {
    let mut solver = Solver::new(c, net, d, params);
    let horizon = c.horizon();
    let mut accepted: Vec<SegmentSolution> = Vec::new();
    let mut suffix = solver.solve(0, horizon, None)?;
    let mut estimates = vec![suffix.cost];
    let mut prefix_cost = 0;
    for t in candidate_cuts(c) {
        if t <= suffix.start {
            continue;
        }
        let prev = accepted.last();
        let seed = prev.map(|p| &p.assignment);
        let left = solver.solve(suffix.start, t, seed)?;
        let right = solver.solve(t, horizon, Some(&left.assignment))?;
        let with = entry_cost(prev, &left, d)
            + left.cost
            + teleport_cost(&left.assignment, &right.assignment, d)
            + right.cost;
        let without = entry_cost(prev, &suffix, d) + suffix.cost;
        if with < without {
            prefix_cost += entry_cost(prev, &left, d) + left.cost;
            accepted.push(left);
            suffix = right;
            let entry = entry_cost(accepted.last(), &suffix, d);
            estimates.push(prefix_cost + entry + suffix.cost);
        }
    }
    accepted.push(suffix);
    Ok(CutSearch {
        plan: assemble(&accepted, d),
        estimates,
    })
}

pub fn sequence_plan(c: &Circuit, net: &Network, d: &DistanceMatrix, params: &PlanParams) -> Result<Plan> {
    Ok(sequence_search(c, net, d, params)?.plan)
}

fn chain_cost(sols: &[SegmentSolution], d: &DistanceMatrix) -> Cost {
    sols.iter()
        .enumerate()
        .map(|(i, s)| s.cost + entry_cost(i.checked_sub(1).map(|j| &sols[j]), s, d))
        .sum()
}

/// Global greedy: each round tries every remaining candidate, re-solving only
/// the segment it falls in, and keeps the best one if it lowers the total.
pub fn split_search(
    c: &Circuit,
    net: &Network,
    d: &DistanceMatrix,
    params: &PlanParams,
) -> Result<CutSearch> {
    let mut solver = Solver::new(c, net, d, params);
    let horizon = c.horizon();
    let candidates = candidate_cuts(c);
    let mut sols = vec![solver.solve(0, horizon, None)?];
    let mut total = chain_cost(&sols, d);
    let mut estimates = vec![total];
    loop {
        let mut best: Option<(Cost, Instant, usize, SegmentSolution, SegmentSolution)> = None;
        for &t in &candidates {
            let Some(k) = sols.iter().position(|s| s.start < t && t < s.end) else {
                continue;
            };
            let prev = k.checked_sub(1).map(|j| &sols[j]);
            let next = sols.get(k + 1);
            let old = &sols[k];
            let left = solver.solve(old.start, t, prev.map(|p| &p.assignment))?;
            let right = solver.solve(t, old.end, Some(&left.assignment))?;
            let removed = entry_cost(prev, old, d)
                + old.cost
                + next.map_or(0, |n| teleport_cost(&old.assignment, &n.assignment, d));
            let added = entry_cost(prev, &left, d)
                + left.cost
                + teleport_cost(&left.assignment, &right.assignment, d)
                + right.cost
                + next.map_or(0, |n| teleport_cost(&right.assignment, &n.assignment, d));
            let cost = total - removed + added;
            if best.as_ref().map_or(true, |b| (cost, t) < (b.0, b.1)) {
                best = Some((cost, t, k, left, right));
            }
        }
        match best {
            Some((cost, _, k, left, right)) if cost < total => {
                sols.splice(k..=k, [left, right]);
                total = cost;
                estimates.push(total);
            }
            _ => break,
        }
    }
    // re-solve left to right so every segment is seeded by its predecessor
    let mut resolved: Vec<SegmentSolution> = Vec::with_capacity(sols.len());
    for s in &sols {
        let seed = resolved.last().map(|p| p.assignment.clone());
        resolved.push(solver.solve(s.start, s.end, seed.as_ref())?);
    }
    let chosen = if chain_cost(&resolved, d) <= total {
        resolved
    } else {
        sols
    };
    Ok(CutSearch {
        plan: assemble(&chosen, d),
        estimates,
    })
}

pub fn split_plan(c: &Circuit, net: &Network, d: &DistanceMatrix, params: &PlanParams) -> Result<Plan> {
    Ok(split_search(c, net, d, params)?.plan)
}

/// The cheaper of the two cut searches (ties to Split), with back-to-back
/// migrations merged across cuts.
pub fn overall_plan(c: &Circuit, net: &Network, d: &DistanceMatrix, params: &PlanParams) -> Result<Plan> {
    let seq = sequence_plan(c, net, d, params)?;
    let split = split_plan(c, net, d, params)?;
    let best = if split.total_cost <= seq.total_cost { split } else { seq };
    Ok(merge_adjacent_migrations(&best, c, net))
}

/// Joins a migration ending at a cut with one of the same qubit and target
/// starting there, when the qubit keeps its home across the cut.
pub fn merge_adjacent_migrations(plan: &Plan, c: &Circuit, net: &Network) -> Plan {
    let mut out = plan.clone();
    let unary = c.view().unary_instants();
    loop {
        let mut merged = false;
        'search: for i in 0..out.migrations.len() {
            let a = out.migrations[i];
            if !out.cuts.contains(&a.end) {
                continue;
            }
            let (Some(before), Some(after)) = (out.assignment_at(a.end - 1), out.assignment_at(a.end))
            else {
                continue;
            };
            if before.home(a.qubit) != after.home(a.qubit) {
                continue;
            }
            for j in 0..out.migrations.len() {
                let b = out.migrations[j];
                if j == i || b.qubit != a.qubit || b.target != a.target || b.start != a.end {
                    continue;
                }
                // the junction is an even instant, so only gates strictly
                // inside either part could break the copy
                if unary[a.qubit].iter().any(|&u| a.start < u && u < b.end) {
                    continue;
                }
                let mut trial = out.migrations.clone();
                trial[i].end = b.end;
                trial.remove(j);
                if !check_feasible(&trial, net, 0, c.horizon()).is_feasible() {
                    continue;
                }
                out.migrations = trial;
                merged = true;
                break 'search;
            }
        }
        if !merged {
            break;
        }
    }
    out.migrations.sort_by_key(|m| m.order_key());
    out.total_cost = out.migration_cost() + out.teleport_cost();
    out
}
