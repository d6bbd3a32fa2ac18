use serde::Serialize;

use super::Plan;
use crate::circuit::Circuit;
use crate::coverage::CoverMap;
use crate::network::Network;
use crate::repair::{check_feasible, Violation};
use crate::{Cost, Instant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub enum PlanViolation {
    #[error("malformed plan: {0}")]
    Structure(String),
    #[error("storage exceeded in segment {segment}: {detail}")]
    Storage { segment: usize, detail: String },
    #[error("teleport mismatch: {0}")]
    Teleport(String),
    #[error("migration invalid: #{index}: {reason}")]
    MigrationInvalid { index: usize, reason: String },
    #[error("gate at {instant} not covered")]
    Uncovered { instant: Instant },
    #[error("execution memory exceeded at node {} instant {}: {} > {}", .0.node, .0.instant, .0.occupancy, .0.capacity)]
    Capacity(Violation),
    #[error("cost mismatch: stated {stated}, recomputed {actual}")]
    CostMismatch { stated: Cost, actual: Cost },
}

/// Every way the plan breaks the model, recomputed from scratch. Empty means
/// valid.
pub fn validate_plan(plan: &Plan, c: &Circuit, net: &Network) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    let horizon = c.horizon();
    let nq = c.num_qubits();
    let d = match net.distances() {
        Ok(d) => d,
        Err(e) => return vec![PlanViolation::Structure(e.to_string())],
    };

    // segments tile [0, horizon] at the cuts
    let mut bounds = vec![0];
    bounds.extend(plan.cuts.iter().copied());
    bounds.push(horizon);
    if plan.cuts.iter().any(|t| t % 2 == 1) || bounds.windows(2).any(|w| w[0] >= w[1]) {
        if !(plan.cuts.is_empty() && horizon == 0) {
            out.push(PlanViolation::Structure(format!("bad cuts {:?}", plan.cuts)));
        }
    }
    let spans: Vec<(Instant, Instant)> = plan.segments.iter().map(|s| (s.start, s.end)).collect();
    let expected: Vec<(Instant, Instant)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
    if spans != expected {
        out.push(PlanViolation::Structure(format!(
            "segments {spans:?} do not match cuts {:?}",
            plan.cuts
        )));
        return out;
    }
    for (i, s) in plan.segments.iter().enumerate() {
        if let Err(e) = s.assignment.check_valid(net, nq) {
            out.push(PlanViolation::Storage {
                segment: i,
                detail: e.to_string(),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }

    // teleports are exactly the home changes at each cut
    let mut expected_tp = Vec::new();
    for w in plan.segments.windows(2) {
        for q in 0..nq {
            let (from, to) = (w[0].assignment.home(q), w[1].assignment.home(q));
            if from != to {
                expected_tp.push((q, to, w[1].start, Cost::from(d.get(from, to))));
            }
        }
    }
    let mut stated_tp: Vec<_> = plan
        .teleports
        .iter()
        .map(|t| (t.qubit, t.target, t.instant, t.cost))
        .collect();
    stated_tp.sort_by_key(|&(q, _, t, _)| (t, q));
    expected_tp.sort_by_key(|&(q, _, t, _)| (t, q));
    if stated_tp != expected_tp {
        out.push(PlanViolation::Teleport(format!(
            "stated {stated_tp:?}, expected {expected_tp:?}"
        )));
    }

    let unary = c.view().unary_instants();
    let home = |q: usize, t: Instant| plan.assignment_at(t).map(|a| a.home(q));
    for (index, m) in plan.migrations.iter().enumerate() {
        let bad = |reason: String| PlanViolation::MigrationInvalid { index, reason };
        if m.qubit >= nq || m.target >= net.num_nodes() {
            out.push(bad("qubit or node out of range".into()));
            continue;
        }
        if m.start % 2 == 1 || m.end % 2 == 1 || m.start >= m.end || m.end > horizon {
            out.push(bad(format!("endpoints [{}, {}]", m.start, m.end)));
            continue;
        }
        if let Some(u) = unary[m.qubit].iter().find(|&&u| m.start < u && u < m.end) {
            out.push(bad(format!("unary gate on qubit {} at {u}", m.qubit)));
        }
        let homes: Vec<_> = plan
            .segments
            .iter()
            .filter(|s| s.start < m.end && m.start < s.end)
            .map(|s| s.assignment.home(m.qubit))
            .collect();
        if homes.windows(2).any(|w| w[0] != w[1]) {
            out.push(bad("home changes during the migration".into()));
            continue;
        }
        let h = homes[0];
        if h == m.target {
            out.push(bad("target is the qubit's home".into()));
        }
        let cost = Cost::from(d.get(h, m.target));
        if cost != m.cost {
            out.push(bad(format!("cost {} but distance {cost}", m.cost)));
        }
    }

    let gates = c
        .gates()
        .iter()
        .filter(|g| {
            g.pair()
                .is_some_and(|(x, y)| home(x, g.instant) != home(y, g.instant))
        })
        .copied()
        .collect();
    let map = CoverMap::build(gates, &plan.migrations, |q, t| home(q, t).unwrap());
    out.extend(map.uncovered().map(|g| PlanViolation::Uncovered { instant: g.instant }));
    out.extend(
        check_feasible(&plan.migrations, net, 0, horizon)
            .violations
            .into_iter()
            .map(PlanViolation::Capacity),
    );

    let actual = plan.migration_cost() + plan.teleport_cost();
    if actual != plan.total_cost {
        out.push(PlanViolation::CostMismatch {
            stated: plan.total_cost,
            actual,
        });
    }
    out
}
